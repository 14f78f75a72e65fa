#pragma once

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

using TagSet = LabelSet;

struct TaggerConfig {
  Tok2VecConfig tok2vec;
  TrainConfig training;
};

/// Per-token softmax classifier over contextual vectors.
class TaggerModel {
 public:
  TaggerModel() = default;
  TaggerModel(const Tok2VecConfig& tok2vec, TagSet tags, std::uint64_t seed,
              std::shared_ptr<const FloretTable> vectors = nullptr);

  std::vector<std::string> tag(const std::vector<std::string>& words) const;
  std::vector<std::string> tag(const Sentence& sentence) const { return tag(sentence.words()); }

  // Cross-entropy of the gold tags; with `grads`, adds scale * gradient.
  // Tokens whose gold tag is outside the tag set are skipped.
  double loss(const Sentence& sentence, double scale, bool grads);

  ParamStore& params() noexcept { return store_; }
  const ParamStore& params() const noexcept { return store_; }
  const TagSet& tags() const noexcept { return tags_; }
  const Tok2Vec& tok2vec() const noexcept { return tok2vec_; }

 private:
  ParamStore store_;
  Tok2Vec tok2vec_;
  TagSet tags_;
  std::size_t W_ = 0, b_ = 0;
};

struct TaggerTraining {
  TaggerModel model;
  TrainHistory history;
};

// Early stopping on dev tag accuracy. `tok2vec_init`, when given, supplies the
// starting values of every tok2vec.* parameter.
TaggerTraining train_tagger(const Dataset& train, const Dataset& dev, const TaggerConfig& config,
                            const ParamStore* tok2vec_init = nullptr,
                            std::shared_ptr<const FloretTable> vectors = nullptr);

double tagger_accuracy(const TaggerModel& model, const Dataset& data);

TALA_NAMESPACE_END
