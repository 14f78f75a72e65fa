#include "tala/ner.hpp"

#include <algorithm>

#include "tala/error.hpp"

TALA_NAMESPACE_BEGIN

namespace {

constexpr const char kMoveLetters[] = "OBILU";

}  // namespace

std::size_t ner_action_id(const NerAction& a) {
  if (a.move == NerMove::kO) return 0;
  return 1 + 4 * a.type + (static_cast<std::size_t>(a.move) - 1);
}

NerAction ner_action(std::size_t id) {
  if (id == 0) return {};
  return {static_cast<NerMove>(1 + (id - 1) % 4), (id - 1) / 4};
}

std::string ner_action_name(std::size_t id, const LabelSet& types) {
  const NerAction a = ner_action(id);
  if (a.move == NerMove::kO) return "O";
  return std::string(1, kMoveLetters[static_cast<std::size_t>(a.move)]) + "-" + types[a.type];
}

std::size_t ner_action_from_tag(const std::string& tag, const LabelSet& types) {
  if (tag == "O") return 0;
  const auto pos = std::string_view(kMoveLetters).find(tag.empty() ? '?' : tag[0]);
  if (tag.size() < 3 || tag[1] != '-' || pos == std::string_view::npos || pos == 0)
    throw DataError("not a BILUO tag: '" + tag + "'");
  return ner_action_id({static_cast<NerMove>(pos), types.at(tag.substr(2))});
}

std::vector<std::uint8_t> legal_next(int prev, std::size_t num_types, bool last_token) {
  std::vector<std::uint8_t> mask(ner_num_actions(num_types), 0);
  const NerAction p = prev == kNerStart ? NerAction{} : ner_action(static_cast<std::size_t>(prev));
  if (p.move == NerMove::kB || p.move == NerMove::kI) {
    if (!last_token) mask[ner_action_id({NerMove::kI, p.type})] = 1;
    mask[ner_action_id({NerMove::kL, p.type})] = 1;
    return mask;
  }
  mask[0] = 1;
  for (std::size_t t = 0; t < num_types; ++t) {
    if (!last_token) mask[ner_action_id({NerMove::kB, t})] = 1;
    mask[ner_action_id({NerMove::kU, t})] = 1;
  }
  return mask;
}

bool is_legal_sequence(const std::vector<std::size_t>& ids, std::size_t num_types) {
  int prev = kNerStart;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto mask = legal_next(prev, num_types, i + 1 == ids.size());
    if (ids[i] >= mask.size() || !mask[ids[i]]) return false;
    prev = static_cast<int>(ids[i]);
  }
  return true;
}

// ---------------------------------------------------------------------------
// Model

NerModel::NerModel(const Tok2VecConfig& tok2vec, LabelSet types, std::size_t hidden, std::uint64_t seed,
                   std::shared_ptr<const FloretTable> vectors)
    : types_(std::move(types)), hidden_(hidden) {
  if (hidden == 0) throw ConfigError("ner hidden width must be positive");
  Rng rng(seed);
  tok2vec_ = Tok2Vec(tok2vec, store_, rng, std::move(vectors));
  const std::size_t in = tok2vec.width + num_actions() + 1;
  Tensor W1 = Tensor::matrix(in, hidden);
  init_he_uniform(W1, in, rng);
  W1_ = store_.add("ner.hidden.W", std::move(W1));
  b1_ = store_.add("ner.hidden.b", Tensor::vector(hidden));
  Tensor W2 = Tensor::matrix(hidden, num_actions());
  init_he_uniform(W2, hidden, rng);
  W2_ = store_.add("ner.out.W", std::move(W2));
  b2_ = store_.add("ner.out.b", Tensor::vector(num_actions()));
}

void NerModel::step_input(const Real* vector, int prev, Real* out) const {
  const std::size_t W = tok2vec_.width();
  std::copy(vector, vector + W, out);
  std::fill(out + W, out + W + num_actions() + 1, Real(0));
  const std::size_t slot = prev == kNerStart ? num_actions() : static_cast<std::size_t>(prev);
  out[W + slot] = 1;
}

NerDecode NerModel::decode(const std::vector<std::string>& words) const {
  NerDecode out;
  const std::size_t n = words.size();
  if (n == 0) return out;
  const Tensor vectors = tok2vec_.forward(store_, words);
  const std::size_t A = num_actions();
  Tensor x = Tensor::matrix(1, tok2vec_.width() + A + 1);
  int prev = kNerStart;
  for (std::size_t i = 0; i < n; ++i) {
    step_input(vectors.row(i), prev, x.row(0));
    Tensor h = linear(x, store_.value(W1_), store_.value(b1_));
    relu_inplace(h);
    const Tensor logits = linear(h, store_.value(W2_), store_.value(b2_));
    const auto mask = legal_next(prev, types_.size(), i + 1 == n);
    const std::size_t id = masked_argmax(logits.row(0), A, mask);
    out.actions.push_back(id);
    out.tags.push_back(ner_action_name(id, types_));
    prev = static_cast<int>(id);
  }
  out.spans = biluo_to_spans(out.tags, BiluoMode::kStrict);
  return out;
}

double NerModel::loss(const Sentence& s, double scale, bool grads) {
  const std::size_t n = s.size();
  if (n == 0) return 0.0;
  const auto words = s.words();
  const auto tags = spans_to_biluo(n, s.ents);
  std::vector<std::size_t> gold(n);
  for (std::size_t i = 0; i < n; ++i) gold[i] = ner_action_from_tag(tags[i], types_);

  Tok2Vec::Cache cache;
  const Tensor vectors = tok2vec_.forward(store_, words, grads ? &cache : nullptr);
  const std::size_t W = tok2vec_.width();
  Tensor x = Tensor::matrix(n, W + num_actions() + 1);
  for (std::size_t i = 0; i < n; ++i)
    step_input(vectors.row(i), i == 0 ? kNerStart : static_cast<int>(gold[i - 1]), x.row(i));
  Tensor h = linear(x, store_.value(W1_), store_.value(b1_));
  relu_inplace(h);
  const Tensor logits = linear(h, store_.value(W2_), store_.value(b2_));
  XentResult xent = softmax_xent(logits, gold);
  if (!grads) return xent.loss;

  for (Real& v : xent.dlogits.data) v *= static_cast<Real>(scale);
  Tensor dh = linear_backward(h, store_.value(W2_), xent.dlogits, store_.grad(W2_), store_.grad(b2_));
  relu_backward_inplace(h, dh);
  const Tensor dx = linear_backward(x, store_.value(W1_), dh, store_.grad(W1_), store_.grad(b1_));
  Tensor dvec = Tensor::matrix(n, W);
  for (std::size_t i = 0; i < n; ++i) std::copy(dx.row(i), dx.row(i) + W, dvec.row(i));
  tok2vec_.backward(store_, cache, std::move(dvec));
  return xent.loss;
}

PRF ner_scores(const NerModel& model, const Dataset& data) {
  SpanCounts counts;
  for (const auto& s : data.sentences) counts.add(s.ents, model.entities(s));
  return counts.scores();
}

NerTraining train_ner(const Dataset& train, const Dataset& dev, const NerConfig& config,
                      const ParamStore* tok2vec_init, std::shared_ptr<const FloretTable> vectors) {
  if (train.empty()) throw TrainingError("ner training set is empty");
  std::vector<std::string> labels;
  for (const auto& s : train.sentences) {
    for (const auto& e : s.ents) labels.push_back(e.label);
  }
  NerTraining out;
  out.model = NerModel(config.tok2vec, LabelSet::sorted_from(labels), config.hidden,
                       config.training.seed, vectors);
  if (tok2vec_init) out.model.params().copy_values_from(*tok2vec_init, "tok2vec.");
  NerModel& model = out.model;
  const Dataset& dev_set = dev.empty() ? train : dev;
  out.history = train_loop(
      model.params(), train.size(), config.training,
      [&](std::size_t i, double scale) { return model.loss(train.sentences[i], scale, true); },
      [&] { return ner_scores(model, dev_set).f1; });
  return out;
}

TALA_NAMESPACE_END
