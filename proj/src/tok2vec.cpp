#include "tala/tok2vec.hpp"

#include <algorithm>

#include "tala/error.hpp"
#include "tala/hash.hpp"
#include "tala/utf8.hpp"

TALA_NAMESPACE_BEGIN

std::string word_shape(std::string_view text) {
  std::string shape;
  std::string last;
  int run = 0;
  for (std::string_view ch : utf8::split_chars(text)) {
    std::string cls;
    if (ch.size() == 1 && ch[0] >= 'A' && ch[0] <= 'Z') {
      cls = "X";
    } else if (ch.size() == 1 && ch[0] >= 'a' && ch[0] <= 'z') {
      cls = "x";
    } else if (ch.size() == 1 && ch[0] >= '0' && ch[0] <= '9') {
      cls = "d";
    } else {
      cls = std::string(ch);
    }
    run = cls == last ? run + 1 : 0;
    last = cls;
    if (run < 4) shape += cls;
  }
  return shape;
}

AttributeSet token_attributes(std::string_view text) {
  AttributeSet a;
  a.norm = utf8::lower(text);
  const auto chars = utf8::split_chars(text);
  if (!chars.empty()) a.prefix = std::string(chars.front());
  const std::size_t first = chars.size() > 3 ? chars.size() - 3 : 0;
  for (std::size_t i = first; i < chars.size(); ++i) a.suffix += chars[i];
  a.shape = word_shape(text);
  return a;
}

void EmbeddingTable::row_indices(std::string_view key, std::vector<std::size_t>& out) const {
  for (std::uint32_t seed : seeds) out.push_back(hash32(key, seed) % rows);
}

nlohmann::json Tok2VecConfig::to_json() const {
  return {{"width", width},
          {"embed_width", embed_width},
          {"depth", depth},
          {"window", window},
          {"num_hashes", num_hashes},
          {"rows", rows},
          {"seed_base", seed_base}};
}

Tok2VecConfig Tok2VecConfig::from_json(const nlohmann::json& j) {
  Tok2VecConfig c;
  c.width = j.at("width").get<std::size_t>();
  c.embed_width = j.at("embed_width").get<std::size_t>();
  c.depth = j.at("depth").get<std::size_t>();
  c.window = j.at("window").get<std::size_t>();
  c.num_hashes = j.at("num_hashes").get<std::size_t>();
  c.rows = j.at("rows").get<std::array<std::size_t, 4>>();
  c.seed_base = j.at("seed_base").get<std::uint32_t>();
  return c;
}

Tok2Vec::Tok2Vec(const Tok2VecConfig& config, ParamStore& store, Rng& rng,
                 std::shared_ptr<const FloretTable> vectors, const std::string& prefix)
    : config_(config), vectors_(std::move(vectors)) {
  if (config.width == 0 || config.embed_width == 0 || config.num_hashes == 0)
    throw ConfigError("tok2vec width, embed_width and num_hashes must be positive");
  for (std::size_t a = 0; a < 4; ++a) {
    if (config.rows[a] == 0) throw ConfigError("embedding tables need at least one row");
    EmbeddingTable& t = tables_[a];
    t.rows = config.rows[a];
    t.width = config.embed_width;
    for (std::size_t i = 0; i < config.num_hashes; ++i)
      t.seeds.push_back(config.seed_base + static_cast<std::uint32_t>(a * config.num_hashes + i));
    Tensor weights = Tensor::matrix(t.rows, t.width);
    init_uniform(weights, 0.1, rng);
    table_params_[a] = store.add(prefix + "embed." + kAttributeNames[a], std::move(weights));
  }
  const std::size_t in = input_width();
  Tensor mix = Tensor::matrix(in, config.width);
  init_he_uniform(mix, in, rng);
  mix_W_ = store.add(prefix + "mix.W", std::move(mix));
  mix_b_ = store.add(prefix + "mix.b", Tensor::vector(config.width));
  const std::size_t win = (2 * config.window + 1) * config.width;
  for (std::size_t l = 0; l < config.depth; ++l) {
    Tensor W = Tensor::matrix(win, config.width);
    init_he_uniform(W, win, rng);
    layer_W_.push_back(store.add(prefix + "encode" + std::to_string(l) + ".W", std::move(W)));
    layer_b_.push_back(store.add(prefix + "encode" + std::to_string(l) + ".b", Tensor::vector(config.width)));
  }
}

std::size_t Tok2Vec::input_width() const noexcept {
  return 4 * config_.embed_width + (vectors_ ? vectors_->dim : 0);
}

nlohmann::json Tok2Vec::metadata() const {
  nlohmann::json seeds = nlohmann::json::object();
  for (std::size_t a = 0; a < 4; ++a) seeds[kAttributeNames[a]] = tables_[a].seeds;
  nlohmann::json j = config_.to_json();
  j["attributes"] = kAttributeNames;
  j["seeds"] = seeds;
  j["vectors"] = vectors_ ? vectors_->metadata() : nlohmann::json(nullptr);
  return j;
}

Tensor Tok2Vec::embed_attributes(const ParamStore& store, const std::vector<AttributeSet>& attrs,
                                 const std::vector<std::string>& words,
                                 std::vector<std::vector<std::size_t>>* rows) const {
  const std::size_t n = attrs.size();
  const std::size_t E = config_.embed_width;
  Tensor out = Tensor::matrix(n, input_width());
  if (rows) rows->assign(n, {});
  std::vector<std::size_t> ids;
  for (std::size_t t = 0; t < n; ++t) {
    Real* dst = out.row(t);
    const auto values = attrs[t].values();
    ids.clear();
    for (std::size_t a = 0; a < 4; ++a) {
      const std::size_t before = ids.size();
      tables_[a].row_indices(*values[a], ids);
      const Tensor& table = store.value(table_params_[a]);
      for (std::size_t k = before; k < ids.size(); ++k) {
        const Real* src = table.row(ids[k]);
        for (std::size_t j = 0; j < E; ++j) dst[a * E + j] += src[j];
      }
    }
    if (vectors_) {
      const auto v = floret_lookup(words[t], *vectors_);
      std::copy(v.begin(), v.end(), dst + 4 * E);
    }
    if (rows) (*rows)[t] = ids;
  }
  return out;
}

Tensor Tok2Vec::embed_tokens(const ParamStore& store, const std::vector<std::string>& words,
                             Cache* cache) const {
  std::vector<AttributeSet> attrs;
  attrs.reserve(words.size());
  for (const auto& w : words) attrs.push_back(token_attributes(w));
  std::vector<std::vector<std::size_t>> rows;
  Tensor embedded = embed_attributes(store, attrs, words, cache ? &rows : nullptr);
  Tensor mixed = linear(embedded, store.value(mix_W_), store.value(mix_b_));
  relu_inplace(mixed);
  if (cache) {
    cache->rows = std::move(rows);
    cache->embedded = std::move(embedded);
    cache->mixed = mixed;
  }
  return mixed;
}

Tensor window_concat(const Tensor& x, std::size_t radius) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t span = 2 * radius + 1;
  Tensor out = Tensor::matrix(n, span * d);
  for (std::size_t i = 0; i < n; ++i) {
    Real* dst = out.row(i);
    for (std::size_t o = 0; o < span; ++o) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + o) - static_cast<std::ptrdiff_t>(radius);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
      const Real* s = x.row(static_cast<std::size_t>(src));
      std::copy(s, s + d, dst + o * d);
    }
  }
  return out;
}

Tensor window_concat_backward(const Tensor& dwin, std::size_t radius, std::size_t width) {
  const std::size_t n = dwin.rows();
  const std::size_t span = 2 * radius + 1;
  Tensor dx = Tensor::matrix(n, width);
  for (std::size_t i = 0; i < n; ++i) {
    const Real* g = dwin.row(i);
    for (std::size_t o = 0; o < span; ++o) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i + o) - static_cast<std::ptrdiff_t>(radius);
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) continue;
      Real* d = dx.row(static_cast<std::size_t>(src));
      for (std::size_t j = 0; j < width; ++j) d[j] += g[o * width + j];
    }
  }
  return dx;
}

Tensor Tok2Vec::encode_context(const ParamStore& store, Tensor h, Cache* cache) const {
  if (cache) cache->layers.clear();
  for (std::size_t l = 0; l < config_.depth; ++l) {
    Tensor win = window_concat(h, config_.window);
    Tensor p = linear(win, store.value(layer_W_[l]), store.value(layer_b_[l]));
    relu_inplace(p);
    for (std::size_t i = 0; i < h.size(); ++i) h.data[i] += p.data[i];
    if (cache) cache->layers.push_back({std::move(win), std::move(p)});
  }
  return h;
}

Tensor Tok2Vec::forward(const ParamStore& store, const std::vector<std::string>& words,
                        Cache* cache) const {
  return encode_context(store, embed_tokens(store, words, cache), cache);
}

void Tok2Vec::backward(ParamStore& store, const Cache& cache, Tensor dh) const {
  const std::size_t W = config_.width;
  for (std::size_t l = config_.depth; l-- > 0;) {
    const LayerCache& lc = cache.layers[l];
    Tensor dp = dh;
    relu_backward_inplace(lc.output, dp);
    Tensor dwin = linear_backward(lc.input, store.value(layer_W_[l]), dp, store.grad(layer_W_[l]),
                                  store.grad(layer_b_[l]));
    Tensor dprev = window_concat_backward(dwin, config_.window, W);
    for (std::size_t i = 0; i < dh.size(); ++i) dh.data[i] += dprev.data[i];
  }
  relu_backward_inplace(cache.mixed, dh);
  Tensor dembedded = linear_backward(cache.embedded, store.value(mix_W_), dh, store.grad(mix_W_),
                                     store.grad(mix_b_));
  const std::size_t E = config_.embed_width;
  const std::size_t k = config_.num_hashes;
  for (std::size_t t = 0; t < cache.rows.size(); ++t) {
    const Real* g = dembedded.row(t);
    for (std::size_t a = 0; a < 4; ++a) {
      Tensor& grad = store.grad(table_params_[a]);
      for (std::size_t h = 0; h < k; ++h) {
        Real* dst = grad.row(cache.rows[t][a * k + h]);
        for (std::size_t j = 0; j < E; ++j) dst[j] += g[a * E + j];
      }
    }
  }
}

TALA_NAMESPACE_END
