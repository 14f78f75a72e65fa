#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tala/common.hpp"
#include "tala/corpus.hpp"
#include "tala/labels.hpp"
#include "tala/metrics.hpp"
#include "tala/nn.hpp"
#include "tala/tok2vec.hpp"
#include "tala/train_loop.hpp"

TALA_NAMESPACE_BEGIN

// ---------------------------------------------------------------------------
// BILUO action inventory. Id 0 is O; entity type t owns ids 1 + 4t + {B, I, L, U}.

enum class NerMove : std::uint8_t { kO, kB, kI, kL, kU };

inline constexpr int kNerStart = -1;  // "previous action" before the first token

struct NerAction {
  NerMove move = NerMove::kO;
  std::size_t type = 0;  // ignored for O
  friend bool operator==(const NerAction&, const NerAction&) = default;
};

inline std::size_t ner_num_actions(std::size_t num_types) { return 1 + 4 * num_types; }
std::size_t ner_action_id(const NerAction& a);
NerAction ner_action(std::size_t id);
// "O", "B-PER", ...
std::string ner_action_name(std::size_t id, const LabelSet& types);
std::size_t ner_action_from_tag(const std::string& biluo_tag, const LabelSet& types);

// Mask over action ids allowed after `prev` (an action id or kNerStart). At
// the last token no entity may stay open: B and I are masked, and an open
// entity can only close with L of its own type.
std::vector<std::uint8_t> legal_next(int prev, std::size_t num_types, bool last_token = false);

// True when `ids` is a complete, well-formed BILUO action sequence.
bool is_legal_sequence(const std::vector<std::size_t>& ids, std::size_t num_types);

// ---------------------------------------------------------------------------
// Model

struct NerConfig {
  Tok2VecConfig tok2vec;
  std::size_t hidden = 64;
  TrainConfig training;
};

struct NerDecode {
  std::vector<std::size_t> actions;
  std::vector<std::string> tags;  // BILUO
  std::vector<Span> spans;
};

/// Greedy left-to-right chunker. Each step scores the actions from the
/// token's contextual vector and a one-hot of the previous action through
/// one ReLU hidden layer, masked by legal_next.
class NerModel {
 public:
  NerModel() = default;
  NerModel(const Tok2VecConfig& tok2vec, LabelSet types, std::size_t hidden, std::uint64_t seed,
           std::shared_ptr<const FloretTable> vectors = nullptr);

  NerDecode decode(const std::vector<std::string>& words) const;
  std::vector<Span> entities(const Sentence& s) const { return decode(s.words()).spans; }

  // Teacher-forced cross-entropy of the gold BILUO actions.
  double loss(const Sentence& sentence, double scale, bool grads);

  std::size_t num_actions() const noexcept { return ner_num_actions(types_.size()); }
  ParamStore& params() noexcept { return store_; }
  const ParamStore& params() const noexcept { return store_; }
  const LabelSet& types() const noexcept { return types_; }
  const Tok2Vec& tok2vec() const noexcept { return tok2vec_; }
  std::size_t hidden() const noexcept { return hidden_; }

 private:
  // Input row for one step: [vector | one-hot(prev)] with A + 1 slots, the
  // last one standing for the sentence start.
  void step_input(const Real* vector, int prev, Real* out) const;

  ParamStore store_;
  Tok2Vec tok2vec_;
  LabelSet types_;
  std::size_t hidden_ = 0;
  std::size_t W1_ = 0, b1_ = 0, W2_ = 0, b2_ = 0;
};

struct NerTraining {
  NerModel model;
  TrainHistory history;
};

// Early stopping on dev span F1. The type inventory is the sorted set of
// labels seen in training.
NerTraining train_ner(const Dataset& train, const Dataset& dev, const NerConfig& config,
                      const ParamStore* tok2vec_init = nullptr,
                      std::shared_ptr<const FloretTable> vectors = nullptr);

PRF ner_scores(const NerModel& model, const Dataset& data);

TALA_NAMESPACE_END
