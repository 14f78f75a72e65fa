#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tala/common.hpp"
#include "tala/corpus.hpp"
#include "tala/labels.hpp"
#include "tala/nn.hpp"
#include "tala/tok2vec.hpp"
#include "tala/train_loop.hpp"

TALA_NAMESPACE_BEGIN

inline constexpr std::size_t kDefaultBowBuckets = std::size_t{1} << 18;
inline constexpr std::uint32_t kBowSeed = 31;

struct SparseVector {
  std::vector<std::size_t> indices;  // sorted, unique
  std::vector<Real> values;
};

// Lowercased unigrams followed by space-joined adjacent bigrams.
std::vector<std::string> bow_keys(const std::vector<std::string>& words);

// Hashed n-gram counts, L2-normalised. Empty input gives an empty vector.
SparseVector bow_features(const std::vector<std::string>& words, std::size_t buckets,
                          std::uint32_t seed = kBowSeed);

struct TextcatConfig {
  Tok2VecConfig tok2vec;
  std::size_t buckets = kDefaultBowBuckets;
  std::size_t hidden = 64;
  std::vector<std::string> labels;  // empty: the labels seen in training
  TrainConfig training;
};

struct TextcatOutput {
  std::vector<double> bow;       // softmax of the bag-of-words head
  std::vector<double> ffn;       // softmax of the feed-forward head
  std::vector<double> probs;     // (bow + ffn) / 2
};

/// Exclusive classifier averaging the distributions of a hashed
/// bag-of-words linear model and a ReLU network over mean-pooled
/// contextual vectors.
class TextcatModel {
 public:
  TextcatModel() = default;
  TextcatModel(const Tok2VecConfig& tok2vec, LabelSet labels, std::size_t buckets, std::size_t hidden,
               std::uint64_t seed, std::shared_ptr<const FloretTable> vectors = nullptr);

  TextcatOutput classify(const std::vector<std::string>& words) const;
  std::string predict(const std::vector<std::string>& words) const;

  // -log p[gold] of the ensemble distribution.
  double loss(const Sentence& doc, double scale, bool grads);

  ParamStore& params() noexcept { return store_; }
  const ParamStore& params() const noexcept { return store_; }
  const LabelSet& labels() const noexcept { return labels_; }
  const Tok2Vec& tok2vec() const noexcept { return tok2vec_; }
  std::size_t buckets() const noexcept { return buckets_; }
  std::size_t hidden() const noexcept { return hidden_; }

 private:
  struct Forward {
    SparseVector bow_x;
    Tok2Vec::Cache cache;
    std::size_t tokens = 0;
    Tensor pooled;  // 1 x W
    Tensor hidden;  // 1 x H, post-ReLU
    TextcatOutput out;
  };
  void forward(const std::vector<std::string>& words, Forward& f, bool keep_cache) const;

  ParamStore store_;
  Tok2Vec tok2vec_;
  LabelSet labels_;
  std::size_t buckets_ = 0;
  std::size_t hidden_ = 0;
  std::size_t bowW_ = 0, bowb_ = 0, W1_ = 0, b1_ = 0, W2_ = 0, b2_ = 0;
};

struct TextcatTraining {
  TextcatModel model;
  TrainHistory history;
};

// Early stopping on dev macro-F1. Throws DataError for an unlabelled training
// document or one whose label is outside configured labels, and ConfigError
// when fewer than two labels result.
TextcatTraining train_textcat(const Dataset& train, const Dataset& dev, const TextcatConfig& config,
                              const ParamStore* tok2vec_init = nullptr,
                              std::shared_ptr<const FloretTable> vectors = nullptr);

struct TextcatScores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

// Documents without a category are skipped.
TextcatScores textcat_scores(const TextcatModel& model, const Dataset& data);

TALA_NAMESPACE_END
