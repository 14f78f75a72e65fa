#include "tala/floret.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "tala/error.hpp"
#include "tala/hash.hpp"
#include "tala/random.hpp"
#include "tala/utf8.hpp"

TALA_NAMESPACE_BEGIN

nlohmann::json FloretTable::metadata() const {
  return {{"buckets", buckets},       {"dim", dim},
          {"min_n", min_n},           {"max_n", max_n},
          {"hash_seeds", {hash_seed1, hash_seed2}}};
}

std::vector<std::string> floret_keys(std::string_view word, std::size_t min_n, std::size_t max_n) {
  const std::string marked = "<" + std::string(word) + ">";
  const auto chars = utf8::split_chars(marked);
  std::vector<std::string> keys = {marked};
  for (std::size_t n = min_n; n <= max_n; ++n) {
    for (std::size_t i = 0; i + n <= chars.size(); ++i) {
      const char* begin = chars[i].data();
      const char* end = chars[i + n - 1].data() + chars[i + n - 1].size();
      std::string key(begin, end);
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(std::move(key));
    }
  }
  return keys;
}

namespace {

struct KeyRows {
  std::vector<std::size_t> rows;  // two per key
};

KeyRows rows_for(std::string_view word, const FloretTable& t) {
  KeyRows out;
  for (const auto& key : floret_keys(word, t.min_n, t.max_n)) {
    out.rows.push_back(hash32(key, t.hash_seed1) % t.buckets);
    out.rows.push_back(hash32(key, t.hash_seed2) % t.buckets);
  }
  return out;
}

void mean_vector(const KeyRows& kr, const FloretTable& t, Real* out) {
  std::fill(out, out + t.dim, Real(0));
  for (std::size_t r : kr.rows) {
    const Real* row = t.weights.row(r);
    for (std::size_t j = 0; j < t.dim; ++j) out[j] += row[j];
  }
  const Real inv = Real(2) / static_cast<Real>(kr.rows.size());  // mean over keys
  for (std::size_t j = 0; j < t.dim; ++j) out[j] *= inv;
}

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

std::vector<Real> floret_lookup(std::string_view word, const FloretTable& table) {
  std::vector<Real> out(table.dim);
  mean_vector(rows_for(word, table), table, out.data());
  return out;
}

FloretTable make_floret_table(const FloretConfig& cfg) {
  if (cfg.buckets == 0 || cfg.dim == 0) throw ConfigError("floret table needs buckets > 0 and dim > 0");
  if (cfg.min_n == 0 || cfg.min_n > cfg.max_n) throw ConfigError("floret n-gram range must satisfy 1 <= min_n <= max_n");
  FloretTable t;
  t.buckets = cfg.buckets;
  t.dim = cfg.dim;
  t.min_n = cfg.min_n;
  t.max_n = cfg.max_n;
  t.hash_seed1 = cfg.hash_seed1;
  t.hash_seed2 = cfg.hash_seed2;
  t.weights = Tensor::matrix(cfg.buckets, cfg.dim);
  Rng rng(cfg.seed);
  init_uniform(t.weights, 1.0 / static_cast<double>(cfg.dim), rng);
  return t;
}

FloretTable train_floret(const std::vector<std::vector<std::string>>& corpus, const FloretConfig& cfg,
                         std::vector<double>* epoch_losses) {
  std::size_t total_tokens = 0;
  for (const auto& s : corpus) total_tokens += s.size();
  if (total_tokens == 0) throw DataError("floret training needs a non-empty corpus");

  FloretTable table = make_floret_table(cfg);

  // Vocabulary in sorted order so ids do not depend on corpus order.
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus)
    for (const auto& w : s) ++counts[w];
  std::map<std::string, std::size_t> ids;
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& [word, count] : counts) {
    ids.emplace(word, ids.size());
    acc += std::pow(static_cast<double>(count), 0.75);
    cumulative.push_back(acc);
  }
  const std::size_t vocab = ids.size();

  std::vector<std::vector<std::size_t>> encoded;
  std::vector<KeyRows> word_rows(vocab);
  for (const auto& [word, id] : ids) word_rows[id] = rows_for(word, table);
  for (const auto& s : corpus) {
    std::vector<std::size_t> e;
    for (const auto& w : s) e.push_back(ids.at(w));
    encoded.push_back(std::move(e));
  }

  Tensor output = Tensor::matrix(vocab, cfg.dim);
  Rng rng(cfg.seed ^ 0x6a09e667f3bcc909ULL);
  const auto sample_negative = [&] {
    const double u = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                            static_cast<std::ptrdiff_t>(vocab - 1)));
  };

  const std::size_t dim = cfg.dim;
  std::vector<Real> hidden(dim), grad(dim);
  const double total_steps = static_cast<double>(cfg.epochs * total_tokens);
  double processed = 0.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (const auto& sent : encoded) {
      for (std::size_t pos = 0; pos < sent.size(); ++pos) {
        const double lr = cfg.lr * std::max(0.0, 1.0 - processed / total_steps);
        processed += 1.0;
        const KeyRows& kr = word_rows[sent[pos]];
        const std::size_t lo = pos >= cfg.window ? pos - cfg.window : 0;
        const std::size_t hi = std::min(sent.size(), pos + cfg.window + 1);
        for (std::size_t ctx = lo; ctx < hi; ++ctx) {
          if (ctx == pos) continue;
          mean_vector(kr, table, hidden.data());
          std::fill(grad.begin(), grad.end(), Real(0));
          const auto update = [&](std::size_t target, bool positive) {
            Real* out = output.row(target);
            double score = 0.0;
            for (std::size_t j = 0; j < dim; ++j) score += static_cast<double>(hidden[j]) * out[j];
            const double prob = 1.0 / (1.0 + std::exp(-score));
            loss_sum -= positive ? log_sigmoid(score) : log_sigmoid(-score);
            const Real g = static_cast<Real>(lr * ((positive ? 1.0 : 0.0) - prob));
            for (std::size_t j = 0; j < dim; ++j) {
              grad[j] += g * out[j];
              out[j] += g * hidden[j];
            }
          };
          update(sent[ctx], true);
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            const std::size_t neg = sample_negative();
            if (neg == sent[ctx]) continue;
            update(neg, false);
          }
          ++loss_count;
          // As in fastText's skip-gram, every contributing input row receives
          // the full hidden-layer gradient.
          for (std::size_t r : kr.rows) {
            Real* row = table.weights.row(r);
            for (std::size_t j = 0; j < dim; ++j) row[j] += grad[j];
          }
        }
      }
    }
    if (epoch_losses) epoch_losses->push_back(loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0);
  }
  return table;
}

void save_floret(const FloretTable& table, const std::string& stem) {
  ParamStore store;
  store.add("floret.buckets", table.weights);
  save_weights_file(stem + ".bin", store);
  std::ofstream meta(stem + ".json");
  if (!meta) throw DataError("cannot write '" + stem + ".json'");
  meta << table.metadata().dump(2) << '\n';
}

FloretTable load_floret(const std::string& stem) {
  std::ifstream meta_in(stem + ".json");
  if (!meta_in) throw DataError("cannot open '" + stem + ".json'");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(stem + ".json: " + e.what());
  }
  FloretTable t;
  t.buckets = meta.at("buckets").get<std::size_t>();
  t.dim = meta.at("dim").get<std::size_t>();
  t.min_n = meta.at("min_n").get<std::size_t>();
  t.max_n = meta.at("max_n").get<std::size_t>();
  t.hash_seed1 = meta.at("hash_seeds").at(0).get<std::uint32_t>();
  t.hash_seed2 = meta.at("hash_seeds").at(1).get<std::uint32_t>();
  ParamStore store;
  store.add("floret.buckets", Tensor::matrix(t.buckets, t.dim));
  load_weights_file(stem + ".bin", store);
  t.weights = store.value(0);
  return t;
}

TALA_NAMESPACE_END
