#include "tala/parser.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "tala/error.hpp"
#include "tala/metrics.hpp"

TALA_NAMESPACE_BEGIN

std::string Action::to_string() const {
  switch (kind) {
    case ActionKind::kShift:
      return "SHIFT";
    case ActionKind::kReduce:
      return "REDUCE";
    case ActionKind::kLeftArc:
      return "LEFT_ARC(" + label + ")";
    case ActionKind::kRightArc:
      return "RIGHT_ARC(" + label + ")";
  }
  return "?";
}

TransitionState::TransitionState(std::size_t num_tokens)
    : n_(num_tokens), stack_{0}, buffer_(1), heads_(num_tokens + 1, -1), labels_(num_tokens + 1) {}

std::vector<Arc> TransitionState::arcs() const {
  std::vector<Arc> out;
  for (std::size_t d = 1; d <= n_; ++d) {
    if (heads_[d] >= 0) out.push_back({heads_[d], static_cast<int>(d), labels_[d]});
  }
  return out;
}

bool TransitionState::is_terminal() const { return valid_actions(*this).empty(); }

std::string TransitionState::to_string() const {
  std::ostringstream out;
  out << "stack=[";
  for (std::size_t i = 0; i < stack_.size(); ++i) out << (i ? "," : "") << stack_[i];
  out << "] buffer=";
  if (buffer_empty()) {
    out << "[]";
  } else {
    out << "[" << buffer_ << ".." << n_ << "]";
  }
  return out.str();
}

bool ActionSet::contains(ActionKind k) const {
  switch (k) {
    case ActionKind::kShift:
      return shift;
    case ActionKind::kLeftArc:
      return left_arc;
    case ActionKind::kRightArc:
      return right_arc;
    case ActionKind::kReduce:
      return reduce;
  }
  return false;
}

std::vector<ActionKind> ActionSet::kinds() const {
  std::vector<ActionKind> out;
  for (auto k : {ActionKind::kShift, ActionKind::kLeftArc, ActionKind::kRightArc, ActionKind::kReduce}) {
    if (contains(k)) out.push_back(k);
  }
  return out;
}

ActionSet valid_actions(const TransitionState& s) {
  ActionSet a;
  const bool buffer = !s.buffer_empty();
  const int top = s.top();
  a.shift = buffer;
  a.left_arc = buffer && top != 0 && !s.has_head(top);
  a.right_arc = buffer && !s.stack().empty();
  a.reduce = top != 0 && s.has_head(top);
  return a;
}

TransitionState apply_action(TransitionState s, const Action& a) {
  if (!valid_actions(s).contains(a.kind))
    throw Error("invalid action " + a.to_string() + " in state " + s.to_string());
  const int b0 = s.buffer_front();
  switch (a.kind) {
    case ActionKind::kShift:
      s.stack_.push_back(b0);
      ++s.buffer_;
      break;
    case ActionKind::kLeftArc: {
      const int top = s.top();
      s.heads_[static_cast<std::size_t>(top)] = b0;
      s.labels_[static_cast<std::size_t>(top)] = a.label;
      s.stack_.pop_back();
      break;
    }
    case ActionKind::kRightArc:
      if (s.top() == 0) ++s.root_children_;
      s.heads_[static_cast<std::size_t>(b0)] = s.top();
      s.labels_[static_cast<std::size_t>(b0)] = a.label;
      s.stack_.push_back(b0);
      ++s.buffer_;
      break;
    case ActionKind::kReduce:
      s.stack_.pop_back();
      break;
  }
  return s;
}

bool is_projective(const std::vector<int>& heads) {
  validate_tree(from_conll_heads(heads));
  const std::size_t n = heads.size();
  std::vector<std::pair<int, int>> arcs;
  for (std::size_t d = 1; d <= n; ++d) {
    const int h = heads[d - 1];
    const int dep = static_cast<int>(d);
    arcs.emplace_back(std::min(h, dep), std::max(h, dep));
  }
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    for (std::size_t j = 0; j < arcs.size(); ++j) {
      const auto [a1, b1] = arcs[i];
      const auto [a2, b2] = arcs[j];
      if (a1 < a2 && a2 < b1 && b1 < b2) return false;
    }
  }
  return true;
}

std::vector<Action> oracle_transitions(const std::vector<int>& heads, const std::vector<std::string>& labels) {
  if (labels.size() != heads.size()) throw DataError("oracle: heads and labels differ in length");
  if (!is_projective(heads)) throw DataError("oracle: tree is not projective");
  const int n = static_cast<int>(heads.size());
  const auto gold_head = [&](int t) { return heads[static_cast<std::size_t>(t - 1)]; };
  // A token still needs the stack while it has gold dependents in the buffer.
  const auto has_dependent_from = [&](int head, int from) {
    for (int d = from; d <= n; ++d) {
      if (gold_head(d) == head) return true;
    }
    return false;
  };

  TransitionState state(heads.size());
  std::vector<Action> actions;
  while (!state.buffer_empty()) {
    const int top = state.top();
    const int b0 = state.buffer_front();
    Action a;
    if (top != 0 && gold_head(top) == b0) {
      a = Action::left(labels[static_cast<std::size_t>(top - 1)]);
    } else if (gold_head(b0) == top) {
      a = Action::right(labels[static_cast<std::size_t>(b0 - 1)]);
    } else if (top != 0 && state.has_head(top) && !has_dependent_from(top, b0)) {
      a = Action::reduce();
    } else {
      a = Action::shift();
    }
    state = apply_action(std::move(state), a);
    actions.push_back(std::move(a));
  }
  return actions;
}

// ---------------------------------------------------------------------------
// Model

ParserModel::ParserModel(const Tok2VecConfig& tok2vec, LabelSet deprels, std::size_t hidden,
                         std::uint64_t seed, std::shared_ptr<const FloretTable> vectors)
    : deprels_(std::move(deprels)), hidden_(hidden) {
  if (hidden == 0) throw ConfigError("parser hidden width must be positive");
  Rng rng(seed);
  tok2vec_ = Tok2Vec(tok2vec, store_, rng, std::move(vectors));
  const std::size_t in = 4 * tok2vec.width;
  Tensor W1 = Tensor::matrix(in, hidden);
  init_he_uniform(W1, in, rng);
  W1_ = store_.add("parser.hidden.W", std::move(W1));
  b1_ = store_.add("parser.hidden.b", Tensor::vector(hidden));
  Tensor W2 = Tensor::matrix(hidden, num_actions());
  init_he_uniform(W2, hidden, rng);
  W2_ = store_.add("parser.out.W", std::move(W2));
  b2_ = store_.add("parser.out.b", Tensor::vector(num_actions()));
}

Action ParserModel::action(std::size_t id) const {
  if (id == 0) return Action::shift();
  if (id == 1) return Action::reduce();
  const std::size_t l = (id - 2) / 2;
  return (id - 2) % 2 == 0 ? Action::left(deprels_[l]) : Action::right(deprels_[l]);
}

std::size_t ParserModel::action_id(const Action& a) const {
  switch (a.kind) {
    case ActionKind::kShift:
      return 0;
    case ActionKind::kReduce:
      return 1;
    case ActionKind::kLeftArc:
      return 2 + 2 * deprels_.at(a.label);
    case ActionKind::kRightArc:
      return 3 + 2 * deprels_.at(a.label);
  }
  return 0;
}

std::vector<std::string> ParserModel::action_inventory() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < num_actions(); ++i) out.push_back(action(i).to_string());
  return out;
}

void ParserModel::state_features(const TransitionState& s, const Tensor& vectors, Real* out) const {
  const std::size_t W = tok2vec_.width();
  std::fill(out, out + 4 * W, Real(0));
  const auto& stack = s.stack();
  const auto put = [&](std::size_t slot, int token) {
    if (token <= 0 || static_cast<std::size_t>(token) > s.num_tokens()) return;
    const Real* v = vectors.row(static_cast<std::size_t>(token - 1));
    std::copy(v, v + W, out + slot * W);
  };
  put(0, stack.back());
  if (stack.size() >= 2) put(1, stack[stack.size() - 2]);
  if (!s.buffer_empty()) {
    put(2, s.buffer_front());
    put(3, s.buffer_front() + 1);
  }
}

ParseResult ParserModel::parse(const std::vector<std::string>& words) const {
  ParseResult result;
  const std::size_t n = words.size();
  if (n == 0) return result;
  const Tensor vectors = tok2vec_.forward(store_, words);
  const std::size_t A = num_actions();
  const std::size_t W = tok2vec_.width();
  TransitionState state(n);
  Tensor features = Tensor::matrix(1, 4 * W);
  std::vector<std::uint8_t> allowed(A);
  while (!state.buffer_empty()) {
    if (result.transitions >= 2 * n) throw Error("parser exceeded 2n transitions");
    state_features(state, vectors, features.row(0));
    Tensor h = linear(features, store_.value(W1_), store_.value(b1_));
    relu_inplace(h);
    const Tensor logits = linear(h, store_.value(W2_), store_.value(b2_));
    ActionSet valid = valid_actions(state);
    // Only one token may attach to ROOT.
    if (state.top() == 0 && state.root_children() > 0) valid.right_arc = false;
    allowed[0] = valid.shift;
    allowed[1] = valid.reduce;
    for (std::size_t l = 0; l < deprels_.size(); ++l) {
      allowed[2 + 2 * l] = valid.left_arc;
      allowed[3 + 2 * l] = valid.right_arc;
    }
    const std::size_t id = masked_argmax(logits.row(0), A, allowed);
    state = apply_action(std::move(state), action(id));
    ++result.transitions;
  }

  // Headless tokens: the first becomes the root when none exists, the rest
  // attach to the root word.
  int root = 0;
  for (std::size_t t = 1; t <= n; ++t) {
    if (state.head(static_cast<int>(t)) == 0) root = static_cast<int>(t);
  }
  result.heads.assign(n, kRootHead);
  result.deprels.assign(n, kFallbackLabel);
  for (std::size_t t = 1; t <= n; ++t) {
    const int token = static_cast<int>(t);
    if (state.has_head(token)) {
      const int h = state.head(token);
      result.heads[t - 1] = h == 0 ? kRootHead : h - 1;
      result.deprels[t - 1] = state.label(token);
    } else if (root == 0) {
      root = token;
      result.heads[t - 1] = kRootHead;
    } else {
      result.heads[t - 1] = root - 1;
    }
  }
  return result;
}

double ParserModel::loss(const Sentence& s, double scale, bool grads) {
  if (!s.heads || !s.deprels) throw DataError("parser training sentence lacks heads or deprels");
  const auto words = s.words();
  const std::size_t W = tok2vec_.width();
  const auto actions = oracle_transitions(to_conll_heads(*s.heads), *s.deprels);

  Tok2Vec::Cache cache;
  const Tensor vectors = tok2vec_.forward(store_, words, grads ? &cache : nullptr);

  // Replay the oracle, recording which token fills each feature slot.
  const std::size_t m = actions.size();
  Tensor features = Tensor::matrix(m, 4 * W);
  std::vector<std::array<int, 4>> slots(m);
  std::vector<std::size_t> gold(m);
  TransitionState state(words.size());
  for (std::size_t i = 0; i < m; ++i) {
    state_features(state, vectors, features.row(i));
    const auto& stack = state.stack();
    slots[i] = {stack.back(), stack.size() >= 2 ? stack[stack.size() - 2] : 0,
                state.buffer_empty() ? 0 : state.buffer_front(),
                state.buffer_empty() ? 0 : state.buffer_front() + 1};
    gold[i] = action_id(actions[i]);
    state = apply_action(std::move(state), actions[i]);
  }

  Tensor h = linear(features, store_.value(W1_), store_.value(b1_));
  relu_inplace(h);
  const Tensor logits = linear(h, store_.value(W2_), store_.value(b2_));
  XentResult xent = softmax_xent(logits, gold);
  if (!grads) return xent.loss;

  for (Real& v : xent.dlogits.data) v *= static_cast<Real>(scale);
  Tensor dh = linear_backward(h, store_.value(W2_), xent.dlogits, store_.grad(W2_), store_.grad(b2_));
  relu_backward_inplace(h, dh);
  Tensor dfeat = linear_backward(features, store_.value(W1_), dh, store_.grad(W1_), store_.grad(b1_));
  Tensor dvec = Tensor::matrix(vectors.rows(), W);
  const int n = static_cast<int>(words.size());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t slot = 0; slot < 4; ++slot) {
      const int token = slots[i][slot];
      if (token <= 0 || token > n) continue;
      const Real* g = dfeat.row(i) + slot * W;
      Real* dst = dvec.row(static_cast<std::size_t>(token - 1));
      for (std::size_t j = 0; j < W; ++j) dst[j] += g[j];
    }
  }
  tok2vec_.backward(store_, cache, std::move(dvec));
  return xent.loss;
}

ParserScores parser_scores(const ParserModel& model, const Dataset& data, bool exclude_punct) {
  AttachmentCounts counts;
  for (const auto& s : data.sentences) {
    if (!s.heads || !s.deprels || s.tokens.empty()) continue;
    const ParseResult r = model.parse(s);
    std::vector<bool> exclude;
    if (exclude_punct && s.upos) {
      for (const auto& tag : *s.upos) exclude.push_back(tag == "PUNCT");
    }
    counts.add(*s.heads, *s.deprels, r.heads, r.deprels, exclude.empty() ? nullptr : &exclude);
  }
  const auto sc = counts.scores();
  return {sc.uas, sc.las};
}

ParserTraining train_parser(const Dataset& train, const Dataset& dev, const ParserConfig& config,
                            const ParamStore* tok2vec_init, std::shared_ptr<const FloretTable> vectors) {
  if (train.empty()) throw TrainingError("parser training set is empty");
  ParserTraining out;
  std::vector<std::string> labels;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& s = train.sentences[i];
    if (!s.heads || !s.deprels)
      throw DataError("training sentence " + std::to_string(i) + " lacks heads or deprels");
    labels.insert(labels.end(), s.deprels->begin(), s.deprels->end());
    if (is_projective(to_conll_heads(*s.heads))) {
      usable.push_back(i);
    } else {
      ++out.excluded_nonprojective;
    }
  }
  if (usable.empty()) throw TrainingError("every parser training sentence is non-projective");
  out.model = ParserModel(config.tok2vec, LabelSet::sorted_from(labels), config.hidden,
                          config.training.seed, vectors);
  if (tok2vec_init) out.model.params().copy_values_from(*tok2vec_init, "tok2vec.");
  ParserModel& model = out.model;
  const Dataset& dev_set = dev.empty() ? train : dev;
  out.history = train_loop(
      model.params(), usable.size(), config.training,
      [&](std::size_t i, double scale) { return model.loss(train.sentences[usable[i]], scale, true); },
      [&] { return parser_scores(model, dev_set).las; });
  return out;
}

TALA_NAMESPACE_END
