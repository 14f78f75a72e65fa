#include "tala/tagger.hpp"

#include "tala/error.hpp"
#include "tala/metrics.hpp"

TALA_NAMESPACE_BEGIN

TaggerModel::TaggerModel(const Tok2VecConfig& tok2vec, TagSet tags, std::uint64_t seed,
                         std::shared_ptr<const FloretTable> vectors)
    : tags_(std::move(tags)) {
  if (tags_.empty()) throw DataError("tagger needs at least one tag");
  Rng rng(seed);
  tok2vec_ = Tok2Vec(tok2vec, store_, rng, std::move(vectors));
  Tensor W = Tensor::matrix(tok2vec.width, tags_.size());
  init_he_uniform(W, tok2vec.width, rng);
  W_ = store_.add("tagger.out.W", std::move(W));
  b_ = store_.add("tagger.out.b", Tensor::vector(tags_.size()));
}

std::vector<std::string> TaggerModel::tag(const std::vector<std::string>& words) const {
  std::vector<std::string> out;
  if (words.empty()) return out;
  const Tensor h = tok2vec_.forward(store_, words);
  const Tensor logits = linear(h, store_.value(W_), store_.value(b_));
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) out.push_back(tags_[argmax(logits.row(i), tags_.size())]);
  return out;
}

double TaggerModel::loss(const Sentence& s, double scale, bool grads) {
  if (!s.upos) throw DataError("tagger training sentence lacks upos");
  const auto words = s.words();
  Tok2Vec::Cache cache;
  Tensor h = tok2vec_.forward(store_, words, grads ? &cache : nullptr);
  std::vector<std::size_t> rows, gold;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (const auto id = tags_.find((*s.upos)[i])) {
      rows.push_back(i);
      gold.push_back(*id);
    }
  }
  if (rows.empty()) return 0.0;
  Tensor x = Tensor::matrix(rows.size(), h.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) std::copy(h.row(rows[r]), h.row(rows[r]) + h.cols(), x.row(r));
  const Tensor logits = linear(x, store_.value(W_), store_.value(b_));
  XentResult xent = softmax_xent(logits, gold);
  if (grads) {
    for (Real& v : xent.dlogits.data) v *= static_cast<Real>(scale);
    Tensor dx = linear_backward(x, store_.value(W_), xent.dlogits, store_.grad(W_), store_.grad(b_));
    Tensor dh = Tensor::matrix(h.rows(), h.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) std::copy(dx.row(r), dx.row(r) + dx.cols(), dh.row(rows[r]));
    tok2vec_.backward(store_, cache, std::move(dh));
  }
  return xent.loss;
}

double tagger_accuracy(const TaggerModel& model, const Dataset& data) {
  std::vector<std::string> gold, pred;
  for (const auto& s : data.sentences) {
    if (!s.upos || s.tokens.empty()) continue;
    const auto tags = model.tag(s);
    gold.insert(gold.end(), s.upos->begin(), s.upos->end());
    pred.insert(pred.end(), tags.begin(), tags.end());
  }
  return gold.empty() ? 0.0 : tag_accuracy(gold, pred);
}

TaggerTraining train_tagger(const Dataset& train, const Dataset& dev, const TaggerConfig& config,
                            const ParamStore* tok2vec_init, std::shared_ptr<const FloretTable> vectors) {
  if (train.empty()) throw TrainingError("tagger training set is empty");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& s = train.sentences[i];
    if (!s.upos) throw DataError("training sentence " + std::to_string(i) + " lacks upos");
    labels.insert(labels.end(), s.upos->begin(), s.upos->end());
  }
  TaggerTraining out;
  out.model = TaggerModel(config.tok2vec, TagSet::sorted_from(labels), config.training.seed, vectors);
  if (tok2vec_init) out.model.params().copy_values_from(*tok2vec_init, "tok2vec.");
  TaggerModel& model = out.model;
  const Dataset& dev_set = dev.empty() ? train : dev;
  out.history = train_loop(
      model.params(), train.size(), config.training,
      [&](std::size_t i, double scale) { return model.loss(train.sentences[i], scale, true); },
      [&] { return tagger_accuracy(model, dev_set); });
  return out;
}

TALA_NAMESPACE_END
