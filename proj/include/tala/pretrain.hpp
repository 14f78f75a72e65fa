#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tala/common.hpp"
#include "tala/nn.hpp"
#include "tala/tok2vec.hpp"
#include "tala/train_loop.hpp"

TALA_NAMESPACE_BEGIN

// First n and last n UTF-8 bytes of a token (2n values). Tokens shorter than
// n are padded with 0x00 after their bytes in both halves.
std::vector<std::uint8_t> cloze_targets(std::string_view token, std::size_t n_bytes);

/// Linear head predicting 2*n_bytes independent 256-way byte distributions
/// from each contextual vector.
class ClozeHead {
 public:
  ClozeHead() = default;
  ClozeHead(ParamStore& store, std::size_t width, std::size_t n_bytes, Rng& rng);

  std::size_t n_bytes() const noexcept { return n_bytes_; }

  // Mean cross-entropy over all byte targets. With `grads`, accumulates
  // scale * d(loss) into the head parameters and returns d(loss)/d(vectors)
  // (already scaled) through `d_vectors`.
  double loss(ParamStore& store, const Tensor& vectors, const std::vector<std::string>& tokens,
              double scale = 1.0, Tensor* d_vectors = nullptr, bool grads = false) const;

 private:
  std::size_t n_bytes_ = 0;
  std::size_t W_ = 0, b_ = 0;
};

struct PretrainConfig {
  std::size_t epochs = 5;
  std::size_t n_bytes = 4;
  std::size_t batch_size = 16;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct PretrainResult {
  ParamStore store;  // tok2vec.* and the cloze head's parameters
  Tok2Vec tok2vec;
  std::vector<double> epoch_losses;
};

// Fresh tok2vec weights exactly as every trainer initialises them.
ParamStore init_tok2vec_store(const Tok2VecConfig& config, std::uint64_t seed,
                              std::shared_ptr<const FloretTable> vectors = nullptr);

PretrainResult pretrain(const std::vector<std::vector<std::string>>& corpus,
                        const Tok2VecConfig& tok2vec_config, const PretrainConfig& config,
                        std::shared_ptr<const FloretTable> vectors = nullptr);

TALA_NAMESPACE_END
