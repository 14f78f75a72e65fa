#include "tala/pretrain.hpp"

#include <algorithm>
#include <numeric>

#include "tala/error.hpp"

TALA_NAMESPACE_BEGIN

std::vector<std::uint8_t> cloze_targets(std::string_view token, std::size_t n) {
  std::vector<std::uint8_t> out(2 * n, 0);
  const std::size_t len = token.size();
  const std::size_t take = std::min(n, len);
  for (std::size_t i = 0; i < take; ++i) {
    out[i] = static_cast<std::uint8_t>(token[i]);
    out[n + i] = static_cast<std::uint8_t>(token[len - take + i]);
  }
  return out;
}

ClozeHead::ClozeHead(ParamStore& store, std::size_t width, std::size_t n_bytes, Rng& rng)
    : n_bytes_(n_bytes) {
  if (n_bytes == 0) throw ConfigError("pretraining n_bytes must be at least 1");
  Tensor W = Tensor::matrix(width, 2 * n_bytes * 256);
  init_he_uniform(W, width, rng);
  W_ = store.add("cloze.W", std::move(W));
  b_ = store.add("cloze.b", Tensor::vector(2 * n_bytes * 256));
}

double ClozeHead::loss(ParamStore& store, const Tensor& vectors, const std::vector<std::string>& tokens,
                       double scale, Tensor* d_vectors, bool grads) const {
  const std::size_t n = tokens.size();
  Tensor logits = linear(vectors, store.value(W_), store.value(b_));
  // Row-major n x (2m*256) is the same memory as (n*2m) x 256.
  const std::size_t groups = 2 * n_bytes_;
  logits.dims = {n * groups, 256};
  std::vector<std::size_t> gold;
  gold.reserve(n * groups);
  for (const auto& t : tokens) {
    for (std::uint8_t b : cloze_targets(t, n_bytes_)) gold.push_back(b);
  }
  XentResult xent = softmax_xent(logits, gold);
  if (grads) {
    Tensor& d = xent.dlogits;
    d.dims = {n, groups * 256};
    for (Real& v : d.data) v *= static_cast<Real>(scale);
    Tensor dv = linear_backward(vectors, store.value(W_), d, store.grad(W_), store.grad(b_));
    if (d_vectors) *d_vectors = std::move(dv);
  }
  return xent.loss;
}

ParamStore init_tok2vec_store(const Tok2VecConfig& config, std::uint64_t seed,
                              std::shared_ptr<const FloretTable> vectors) {
  ParamStore store;
  Rng rng(seed);
  Tok2Vec(config, store, rng, std::move(vectors));
  return store;
}

PretrainResult pretrain(const std::vector<std::vector<std::string>>& corpus,
                        const Tok2VecConfig& tok2vec_config, const PretrainConfig& config,
                        std::shared_ptr<const FloretTable> vectors) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].empty()) usable.push_back(i);
  }
  if (usable.empty()) throw DataError("pretraining needs a non-empty corpus");

  PretrainResult result;
  Rng rng(config.seed);
  result.tok2vec = Tok2Vec(tok2vec_config, result.store, rng, std::move(vectors));
  ClozeHead head(result.store, tok2vec_config.width, config.n_bytes, rng);
  if (config.epochs == 0) return result;

  TrainConfig tc;
  tc.epochs = config.epochs;
  tc.patience = config.epochs;
  tc.batch_size = config.batch_size;
  tc.adam = config.adam;
  tc.seed = config.seed;
  tc.stop_when_perfect = false;

  const Tok2Vec& t2v = result.tok2vec;
  ParamStore& store = result.store;
  const auto example = [&](std::size_t i, double scale) {
    const auto& words = corpus[usable[i]];
    Tok2Vec::Cache cache;
    Tensor vectors_out = t2v.forward(store, words, &cache);
    Tensor d_vectors;
    const double loss = head.loss(store, vectors_out, words, scale, &d_vectors, true);
    t2v.backward(store, cache, std::move(d_vectors));
    return loss;
  };
  // Every epoch counts as an improvement so the final weights are kept.
  std::size_t epoch = 0;
  const auto score = [&] { return static_cast<double>(++epoch); };
  TrainHistory h = train_loop(store, usable.size(), tc, example, score);
  result.epoch_losses = h.losses;
  return result;
}

TALA_NAMESPACE_END
