#include "tala/textcat.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tala/error.hpp"
#include "tala/hash.hpp"
#include "tala/utf8.hpp"

TALA_NAMESPACE_BEGIN

std::vector<std::string> bow_keys(const std::vector<std::string>& words) {
  std::vector<std::string> keys;
  std::vector<std::string> norms;
  norms.reserve(words.size());
  for (const auto& w : words) norms.push_back(utf8::lower(w));
  keys = norms;
  for (std::size_t i = 0; i + 1 < norms.size(); ++i) keys.push_back(norms[i] + " " + norms[i + 1]);
  return keys;
}

SparseVector bow_features(const std::vector<std::string>& words, std::size_t buckets, std::uint32_t seed) {
  if (buckets == 0) throw ConfigError("bag-of-words bucket count must be positive");
  std::map<std::size_t, double> counts;
  for (const auto& key : bow_keys(words)) counts[hash32(key, seed) % buckets] += 1.0;
  double norm = 0.0;
  for (const auto& [i, c] : counts) norm += c * c;
  norm = std::sqrt(norm);
  SparseVector out;
  for (const auto& [i, c] : counts) {
    out.indices.push_back(i);
    out.values.push_back(static_cast<Real>(c / norm));
  }
  return out;
}

namespace {

std::vector<double> softmax_row(const Real* z, std::size_t n) {
  std::vector<double> p(n);
  const double m = *std::max_element(z, z + n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += p[i] = std::exp(static_cast<double>(z[i]) - m);
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

TextcatModel::TextcatModel(const Tok2VecConfig& tok2vec, LabelSet labels, std::size_t buckets,
                           std::size_t hidden, std::uint64_t seed, std::shared_ptr<const FloretTable> vectors)
    : labels_(std::move(labels)), buckets_(buckets), hidden_(hidden) {
  if (labels_.size() < 2) throw ConfigError("text categorizer needs at least two labels");
  if (buckets == 0 || hidden == 0) throw ConfigError("textcat buckets and hidden must be positive");
  Rng rng(seed);
  tok2vec_ = Tok2Vec(tok2vec, store_, rng, std::move(vectors));
  const std::size_t C = labels_.size();
  bowW_ = store_.add("textcat.bow.W", Tensor::matrix(buckets, C));
  bowb_ = store_.add("textcat.bow.b", Tensor::vector(C));
  Tensor W1 = Tensor::matrix(tok2vec.width, hidden);
  init_he_uniform(W1, tok2vec.width, rng);
  W1_ = store_.add("textcat.hidden.W", std::move(W1));
  b1_ = store_.add("textcat.hidden.b", Tensor::vector(hidden));
  Tensor W2 = Tensor::matrix(hidden, C);
  init_he_uniform(W2, hidden, rng);
  W2_ = store_.add("textcat.out.W", std::move(W2));
  b2_ = store_.add("textcat.out.b", Tensor::vector(C));
}

void TextcatModel::forward(const std::vector<std::string>& words, Forward& f, bool keep_cache) const {
  const std::size_t C = labels_.size();
  const std::size_t W = tok2vec_.width();
  f.bow_x = bow_features(words, buckets_);
  const Tensor& bw = store_.value(bowW_);
  std::vector<Real> zb(store_.value(bowb_).data);
  for (std::size_t k = 0; k < f.bow_x.indices.size(); ++k) {
    const Real* row = bw.row(f.bow_x.indices[k]);
    for (std::size_t c = 0; c < C; ++c) zb[c] += f.bow_x.values[k] * row[c];
  }
  f.out.bow = softmax_row(zb.data(), C);

  f.tokens = words.size();
  f.pooled = Tensor::matrix(1, W);
  if (!words.empty()) {
    const Tensor h = tok2vec_.forward(store_, words, keep_cache ? &f.cache : nullptr);
    for (std::size_t i = 0; i < h.rows(); ++i) {
      for (std::size_t j = 0; j < W; ++j) f.pooled.data[j] += h(i, j);
    }
    for (Real& v : f.pooled.data) v /= static_cast<Real>(words.size());
  }
  f.hidden = linear(f.pooled, store_.value(W1_), store_.value(b1_));
  relu_inplace(f.hidden);
  const Tensor zf = linear(f.hidden, store_.value(W2_), store_.value(b2_));
  f.out.ffn = softmax_row(zf.row(0), C);

  f.out.probs.resize(C);
  for (std::size_t c = 0; c < C; ++c) f.out.probs[c] = 0.5 * (f.out.bow[c] + f.out.ffn[c]);
}

TextcatOutput TextcatModel::classify(const std::vector<std::string>& words) const {
  Forward f;
  forward(words, f, false);
  return f.out;
}

std::string TextcatModel::predict(const std::vector<std::string>& words) const {
  const auto p = classify(words).probs;
  return labels_[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
}

double TextcatModel::loss(const Sentence& doc, double scale, bool grads) {
  if (!doc.category) throw DataError("textcat document has no label");
  const std::size_t g = labels_.at(*doc.category);
  const auto words = doc.words();
  Forward f;
  forward(words, f, grads);
  const std::size_t C = labels_.size();
  const double pg = std::max(f.out.probs[g], 1e-300);
  const double loss = -std::log(pg);
  if (!grads) return loss;

  // d(-log p_g)/dz for each head's logits: -(1/2p_g) * q_g * (onehot - q).
  const auto head_grad = [&](const std::vector<double>& q) {
    Tensor dz = Tensor::matrix(1, C);
    const double coef = -0.5 * q[g] / pg * scale;
    for (std::size_t c = 0; c < C; ++c) dz.data[c] = static_cast<Real>(coef * ((c == g ? 1.0 : 0.0) - q[c]));
    return dz;
  };

  const Tensor dzb = head_grad(f.out.bow);
  Tensor& gW = store_.grad(bowW_);
  Tensor& gb = store_.grad(bowb_);
  for (std::size_t c = 0; c < C; ++c) gb.data[c] += dzb.data[c];
  for (std::size_t k = 0; k < f.bow_x.indices.size(); ++k) {
    Real* row = gW.row(f.bow_x.indices[k]);
    for (std::size_t c = 0; c < C; ++c) row[c] += f.bow_x.values[k] * dzb.data[c];
  }

  const Tensor dzf = head_grad(f.out.ffn);
  Tensor dh = linear_backward(f.hidden, store_.value(W2_), dzf, store_.grad(W2_), store_.grad(b2_));
  relu_backward_inplace(f.hidden, dh);
  const Tensor dpooled = linear_backward(f.pooled, store_.value(W1_), dh, store_.grad(W1_), store_.grad(b1_));
  if (f.tokens > 0) {
    const std::size_t W = tok2vec_.width();
    Tensor dvec = Tensor::matrix(f.tokens, W);
    const Real inv = Real(1) / static_cast<Real>(f.tokens);
    for (std::size_t i = 0; i < f.tokens; ++i) {
      for (std::size_t j = 0; j < W; ++j) dvec(i, j) = dpooled.data[j] * inv;
    }
    tok2vec_.backward(store_, f.cache, std::move(dvec));
  }
  return loss;
}

TextcatScores textcat_scores(const TextcatModel& model, const Dataset& data) {
  const std::size_t C = model.labels().size();
  std::vector<std::size_t> tp(C), fp(C), fn(C);
  std::size_t correct = 0, total = 0;
  for (const auto& s : data.sentences) {
    if (!s.category) continue;
    const auto p = model.classify(s.words()).probs;
    const std::size_t pred = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    const auto gold = model.labels().find(*s.category);
    ++total;
    if (gold && *gold == pred) {
      ++correct;
      ++tp[pred];
    } else {
      ++fp[pred];
      if (gold) ++fn[*gold];
    }
  }
  TextcatScores out;
  if (total == 0) return out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  double f1_sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < C; ++c) {
    const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;
    f1_sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
    ++counted;
  }
  out.macro_f1 = counted ? f1_sum / static_cast<double>(counted) : 0.0;
  return out;
}

TextcatTraining train_textcat(const Dataset& train, const Dataset& dev, const TextcatConfig& config,
                              const ParamStore* tok2vec_init, std::shared_ptr<const FloretTable> vectors) {
  if (train.empty()) throw TrainingError("textcat training set is empty");
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& s = train.sentences[i];
    if (!s.category) throw DataError("training document " + std::to_string(i) + " has no label");
    seen.push_back(*s.category);
  }
  const LabelSet labels = LabelSet::sorted_from(config.labels.empty() ? seen : config.labels);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!labels.find(seen[i]))
      throw DataError("training document " + std::to_string(i) + " has label '" + seen[i] +
                      "' outside the configured label set");
  }
  TextcatTraining out;
  out.model = TextcatModel(config.tok2vec, labels, config.buckets, config.hidden,
                           config.training.seed, vectors);
  if (tok2vec_init) out.model.params().copy_values_from(*tok2vec_init, "tok2vec.");
  TextcatModel& model = out.model;
  const Dataset& dev_set = dev.empty() ? train : dev;
  out.history = train_loop(
      model.params(), train.size(), config.training,
      [&](std::size_t i, double scale) { return model.loss(train.sentences[i], scale, true); },
      [&] { return textcat_scores(model, dev_set).macro_f1; });
  return out;
}

TALA_NAMESPACE_END
