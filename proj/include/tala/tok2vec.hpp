#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tala/common.hpp"
#include "tala/floret.hpp"
#include "tala/nn.hpp"

TALA_NAMESPACE_BEGIN

/// Lexical attributes embedded for every token.
struct AttributeSet {
  std::string norm;    // lowercased text
  std::string prefix;  // first character
  std::string suffix;  // last three characters
  std::string shape;   // X/x/d classes, runs capped at four

  std::array<const std::string*, 4> values() const { return {&norm, &prefix, &suffix, &shape}; }
};

inline constexpr std::array<const char*, 4> kAttributeNames = {"norm", "prefix", "suffix", "shape"};

AttributeSet token_attributes(std::string_view text);
std::string word_shape(std::string_view text);

/// Multi-hash embedding table: a key selects k rows through k seeded hashes
/// and its vector is the sum of those rows.
struct EmbeddingTable {
  std::size_t rows = 1;
  std::size_t width = 1;
  std::vector<std::uint32_t> seeds;

  void row_indices(std::string_view key, std::vector<std::size_t>& out) const;
};

struct Tok2VecConfig {
  std::size_t width = 96;        // output width W
  std::size_t embed_width = 96;  // per-attribute embedding width
  std::size_t depth = 2;         // residual window layers L
  std::size_t window = 1;        // window radius w
  std::size_t num_hashes = 3;    // k
  std::array<std::size_t, 4> rows = {4000, 500, 1000, 500};  // norm, prefix, suffix, shape
  std::uint32_t seed_base = 7;   // table a, hash i uses seed_base + a*k + i

  nlohmann::json to_json() const;
  static Tok2VecConfig from_json(const nlohmann::json& j);
};

/// Token-to-vector encoder: hashed attribute embeddings (plus an optional
/// static floret feature), a ReLU mixing layer to width W, then L residual
/// window layers. Parameters live in an external ParamStore; this object only
/// holds their indices and the architecture.
class Tok2Vec {
 public:
  Tok2Vec() = default;
  Tok2Vec(const Tok2VecConfig& config, ParamStore& store, Rng& rng,
          std::shared_ptr<const FloretTable> vectors = nullptr,
          const std::string& prefix = "tok2vec.");

  struct LayerCache {
    Tensor input;   // windowed input n x (2w+1)W
    Tensor output;  // post-ReLU n x W
  };
  struct Cache {
    std::vector<std::vector<std::size_t>> rows;  // per token: 4*k row ids
    Tensor embedded;                             // n x (4E [+ d])
    Tensor mixed;                                // post-ReLU n x W
    std::vector<LayerCache> layers;
  };

  // Concatenated attribute vectors (and floret vector when configured).
  Tensor embed_attributes(const ParamStore& store, const std::vector<AttributeSet>& attrs,
                          const std::vector<std::string>& words,
                          std::vector<std::vector<std::size_t>>* rows = nullptr) const;
  // Mixed per-token vectors before context encoding.
  Tensor embed_tokens(const ParamStore& store, const std::vector<std::string>& words,
                      Cache* cache = nullptr) const;
  Tensor encode_context(const ParamStore& store, Tensor vectors, Cache* cache = nullptr) const;
  Tensor forward(const ParamStore& store, const std::vector<std::string>& words,
                 Cache* cache = nullptr) const;
  // Accumulates parameter gradients for d(loss)/d(output).
  void backward(ParamStore& store, const Cache& cache, Tensor d_output) const;

  const Tok2VecConfig& config() const noexcept { return config_; }
  std::size_t width() const noexcept { return config_.width; }
  std::size_t input_width() const noexcept;
  const EmbeddingTable& table(std::size_t a) const { return tables_[a]; }
  bool has_vectors() const noexcept { return static_cast<bool>(vectors_); }
  const std::shared_ptr<const FloretTable>& vectors() const noexcept { return vectors_; }
  nlohmann::json metadata() const;

 private:
  Tok2VecConfig config_;
  std::array<EmbeddingTable, 4> tables_;
  std::array<std::size_t, 4> table_params_{};
  std::size_t mix_W_ = 0, mix_b_ = 0;
  std::vector<std::size_t> layer_W_, layer_b_;
  std::shared_ptr<const FloretTable> vectors_;
};

// Window concatenation [i-w, i+w] with zero padding, and its adjoint.
Tensor window_concat(const Tensor& x, std::size_t radius);
Tensor window_concat_backward(const Tensor& dwin, std::size_t radius, std::size_t width);

TALA_NAMESPACE_END
