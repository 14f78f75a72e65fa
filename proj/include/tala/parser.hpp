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

// ---------------------------------------------------------------------------
// Arc-eager transition system. Token indices are 1-based; 0 is ROOT.

enum class ActionKind : std::uint8_t { kShift, kLeftArc, kRightArc, kReduce };

struct Action {
  ActionKind kind = ActionKind::kShift;
  std::string label;  // arc actions only

  static Action shift() { return {ActionKind::kShift, {}}; }
  static Action reduce() { return {ActionKind::kReduce, {}}; }
  static Action left(std::string l) { return {ActionKind::kLeftArc, std::move(l)}; }
  static Action right(std::string l) { return {ActionKind::kRightArc, std::move(l)}; }

  std::string to_string() const;
  friend bool operator==(const Action&, const Action&) = default;
};

struct Arc {
  int head = 0;
  int dependent = 0;
  std::string label;
  friend bool operator==(const Arc&, const Arc&) = default;
};

class TransitionState {
 public:
  explicit TransitionState(std::size_t num_tokens);

  std::size_t num_tokens() const noexcept { return n_; }
  const std::vector<int>& stack() const noexcept { return stack_; }
  int top() const noexcept { return stack_.back(); }
  bool buffer_empty() const noexcept { return buffer_ > n_; }
  int buffer_front() const noexcept { return static_cast<int>(buffer_); }  // b0
  bool has_head(int token) const { return heads_[static_cast<std::size_t>(token)] >= 0; }
  int head(int token) const { return heads_[static_cast<std::size_t>(token)]; }
  const std::string& label(int token) const { return labels_[static_cast<std::size_t>(token)]; }
  std::size_t root_children() const noexcept { return root_children_; }
  std::vector<Arc> arcs() const;  // sorted by dependent
  bool is_terminal() const;
  std::string to_string() const;

  friend TransitionState apply_action(TransitionState state, const Action& action);

 private:
  std::size_t n_;
  std::vector<int> stack_;
  std::size_t buffer_;
  std::vector<int> heads_;  // index 0 unused; -1 = no head yet
  std::vector<std::string> labels_;
  std::size_t root_children_ = 0;
};

struct ActionSet {
  bool shift = false;
  bool left_arc = false;
  bool right_arc = false;
  bool reduce = false;

  bool contains(ActionKind k) const;
  bool empty() const { return !(shift || left_arc || right_arc || reduce); }
  std::vector<ActionKind> kinds() const;
};

ActionSet valid_actions(const TransitionState& state);

// Throws Error naming the state and action when the action is not valid.
TransitionState apply_action(TransitionState state, const Action& action);

// `heads` are 1-based with 0 for ROOT. Throws DataError unless they form a
// single-rooted tree.
bool is_projective(const std::vector<int>& heads);

// Static arc-eager oracle. Throws DataError on non-projective input.
std::vector<Action> oracle_transitions(const std::vector<int>& heads,
                                       const std::vector<std::string>& labels);

// ---------------------------------------------------------------------------
// Model

struct ParserConfig {
  Tok2VecConfig tok2vec;
  std::size_t hidden = 128;
  TrainConfig training;
};

struct ParseResult {
  std::vector<int> heads;  // 0-based, kRootHead for the root
  std::vector<std::string> deprels;
  std::size_t transitions = 0;
};

inline constexpr const char* kFallbackLabel = "dep";
inline constexpr const char* kRootLabel = "root";

/// Greedy parser scoring actions from the contextual vectors of s0, s1, b0
/// and b1 through one ReLU hidden layer. Action ids: 0 SHIFT, 1 REDUCE,
/// 2 + 2l LEFT_ARC(l), 3 + 2l RIGHT_ARC(l).
class ParserModel {
 public:
  ParserModel() = default;
  ParserModel(const Tok2VecConfig& tok2vec, LabelSet deprels, std::size_t hidden, std::uint64_t seed,
              std::shared_ptr<const FloretTable> vectors = nullptr);

  ParseResult parse(const std::vector<std::string>& words) const;
  ParseResult parse(const Sentence& s) const { return parse(s.words()); }

  // Cross-entropy over the oracle actions of a projective gold sentence.
  double loss(const Sentence& sentence, double scale, bool grads);

  std::size_t num_actions() const noexcept { return 2 + 2 * deprels_.size(); }
  Action action(std::size_t id) const;
  std::size_t action_id(const Action& a) const;  // throws for unknown labels
  std::vector<std::string> action_inventory() const;

  ParamStore& params() noexcept { return store_; }
  const ParamStore& params() const noexcept { return store_; }
  const LabelSet& deprels() const noexcept { return deprels_; }
  const Tok2Vec& tok2vec() const noexcept { return tok2vec_; }
  std::size_t hidden() const noexcept { return hidden_; }

  // Feature matrix for one state: [s0 | s1 | b0 | b1], zeros where absent.
  void state_features(const TransitionState& state, const Tensor& vectors, Real* out) const;

 private:
  ParamStore store_;
  Tok2Vec tok2vec_;
  LabelSet deprels_;
  std::size_t hidden_ = 0;
  std::size_t W1_ = 0, b1_ = 0, W2_ = 0, b2_ = 0;
};

struct ParserTraining {
  ParserModel model;
  TrainHistory history;
  std::size_t excluded_nonprojective = 0;
};

// Non-projective sentences are skipped for training (count reported) but stay
// in the dev set used for early stopping on LAS.
ParserTraining train_parser(const Dataset& train, const Dataset& dev, const ParserConfig& config,
                            const ParamStore* tok2vec_init = nullptr,
                            std::shared_ptr<const FloretTable> vectors = nullptr);

struct ParserScores {
  double uas = 0.0;
  double las = 0.0;
};

ParserScores parser_scores(const ParserModel& model, const Dataset& data, bool exclude_punct = false);

TALA_NAMESPACE_END
