#include "tala/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tala/error.hpp"

TALA_NAMESPACE_BEGIN

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DataError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                    std::to_string(b) + ")");
}

}  // namespace

double tag_accuracy(const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
  require_same_length(gold.size(), pred.size(), "tag_accuracy");
  if (gold.empty()) throw DataError("tag_accuracy: empty input");
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) ok += gold[i] == pred[i];
  return static_cast<double>(ok) / static_cast<double>(gold.size());
}

void AttachmentCounts::add(const std::vector<int>& gold_heads, const std::vector<std::string>& gold_labels,
                           const std::vector<int>& pred_heads, const std::vector<std::string>& pred_labels,
                           const std::vector<bool>* exclude) {
  const std::size_t n = gold_heads.size();
  require_same_length(n, pred_heads.size(), "attachment_scores");
  require_same_length(n, gold_labels.size(), "attachment_scores");
  require_same_length(n, pred_labels.size(), "attachment_scores");
  if (exclude) require_same_length(n, exclude->size(), "attachment_scores");
  for (std::size_t i = 0; i < n; ++i) {
    if (exclude && (*exclude)[i]) continue;
    ++total;
    if (gold_heads[i] == pred_heads[i]) {
      ++head_correct;
      if (gold_labels[i] == pred_labels[i]) ++both_correct;
    }
  }
}

AttachmentScores AttachmentCounts::scores() const {
  if (total == 0) return {};
  return {static_cast<double>(head_correct) / static_cast<double>(total),
          static_cast<double>(both_correct) / static_cast<double>(total)};
}

AttachmentScores attachment_scores(const std::vector<int>& gold_heads,
                                   const std::vector<std::string>& gold_labels,
                                   const std::vector<int>& pred_heads,
                                   const std::vector<std::string>& pred_labels,
                                   const std::vector<bool>* exclude) {
  AttachmentCounts c;
  c.add(gold_heads, gold_labels, pred_heads, pred_labels, exclude);
  return c.scores();
}

void SpanCounts::add(const std::vector<Span>& gold_spans, const std::vector<Span>& pred_spans) {
  std::set<Span> g(gold_spans.begin(), gold_spans.end());
  std::set<Span> p(pred_spans.begin(), pred_spans.end());
  for (const auto& s : p) tp += g.count(s);
  gold += g.size();
  pred += p.size();
}

PRF SpanCounts::scores() const {
  PRF r;
  if (pred == 0) {
    r.precision = gold == 0 ? 1.0 : 0.0;
  } else {
    r.precision = static_cast<double>(tp) / static_cast<double>(pred);
  }
  if (gold == 0) {
    r.recall = pred == 0 ? 1.0 : 0.0;
  } else {
    r.recall = static_cast<double>(tp) / static_cast<double>(gold);
  }
  const double denom = r.precision + r.recall;
  r.f1 = denom > 0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

PRF span_prf(const std::vector<Span>& gold, const std::vector<Span>& pred) {
  SpanCounts c;
  c.add(gold, pred);
  return c.scores();
}

double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  require_same_length(a.size(), b.size(), "cohen_kappa");
  if (a.empty()) throw DataError("cohen_kappa: empty input");
  const double n = static_cast<double>(a.size());
  std::map<std::string, std::pair<std::size_t, std::size_t>> marginals;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
  }
  const double p_o = static_cast<double>(agree) / n;
  double p_e = 0.0;
  for (const auto& [label, counts] : marginals)
    p_e += (static_cast<double>(counts.first) / n) * (static_cast<double>(counts.second) / n);
  // p_e reaches 1 only when both annotators use one identical label throughout.
  if (p_e >= 1.0) {
    if (agree == a.size()) return 1.0;
    throw DataError("cohen_kappa: undefined (chance agreement is 1 but sequences differ)");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

double pairwise_f1_no_o(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  require_same_length(a.size(), b.size(), "pairwise_f1_no_o");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool a_o = a[i] == "O";
    const bool b_o = b[i] == "O";
    if (a[i] == b[i]) {
      if (!a_o) ++tp;
      continue;
    }
    if (!b_o) ++fp;
    if (!a_o) ++fn;
  }
  const std::size_t denom = 2 * tp + fp + fn;
  // Two all-O sequences agree perfectly on the (empty) entity set.
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

TrialSummary aggregate_trials(const std::vector<double>& values) {
  if (values.empty()) throw DataError("aggregate_trials: no values");
  TrialSummary s;
  // Constant input is reported exactly, without summation rounding.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    s.mean = values[0];
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

// ---------------------------------------------------------------------------
// MetricsReport

void MetricsReport::add(const std::string& name, double value, const std::string& unit) {
  Entry& e = metrics[name];
  e.unit = unit;
  e.trials.push_back(value);
  const TrialSummary s = aggregate_trials(e.trials);
  e.mean = s.mean;
  e.std = s.std;
}

const MetricsReport::Entry& MetricsReport::at(const std::string& name) const {
  auto it = metrics.find(name);
  if (it == metrics.end()) throw Error("report has no metric '" + name + "'");
  return it->second;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, e] : metrics) {
    nlohmann::json m = {{"mean", e.mean}, {"std", e.std}, {"trials", e.trials}, {"unit", e.unit}};
    if (e.convention) m["convention"] = *e.convention;
    if (!e.fold_sizes.empty()) m["fold_sizes"] = e.fold_sizes;
    j[name] = std::move(m);
  }
  return j;
}

std::string MetricsReport::to_table() const {
  std::ostringstream out;
  out << std::left << std::setw(22) << "metric" << std::right << std::setw(10) << "mean"
      << std::setw(10) << "std" << std::setw(6) << "n" << "  unit\n";
  out << std::string(56, '-') << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& [name, e] : metrics) {
    out << std::left << std::setw(22) << name << std::right << std::setw(10) << e.mean
        << std::setw(10) << e.std << std::setw(6) << e.trials.size() << "  " << e.unit << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Inter-annotator agreement

namespace {

MetricsReport pair_report(const std::vector<std::vector<std::string>>& ann,
                          std::vector<IaaPair>* pairs_out) {
  MetricsReport report;
  for (std::size_t i = 0; i < ann.size(); ++i) {
    for (std::size_t j = i + 1; j < ann.size(); ++j) {
      IaaPair p;
      p.a = i;
      p.b = j;
      p.kappa_all = cohen_kappa(ann[i], ann[j]);
      std::vector<std::string> sub_a, sub_b;
      for (std::size_t t = 0; t < ann[i].size(); ++t) {
        if (ann[i][t] != "O" || ann[j][t] != "O") {
          sub_a.push_back(ann[i][t]);
          sub_b.push_back(ann[j][t]);
        }
      }
      // No annotated token in either sequence: the pair agrees trivially.
      p.kappa_annotated = sub_a.empty() ? 1.0 : cohen_kappa(sub_a, sub_b);
      p.f1_no_o = pairwise_f1_no_o(ann[i], ann[j]);
      report.add("kappa_all", p.kappa_all, "pair");
      report.add("kappa_annotated", p.kappa_annotated, "pair");
      report.add("f1_no_o", p.f1_no_o, "pair");
      if (pairs_out) pairs_out->push_back(p);
    }
  }
  return report;
}

}  // namespace

IaaResult iaa_report(const std::vector<std::vector<std::string>>& annotations,
                     const std::vector<std::string>& rounds) {
  if (annotations.size() < 2) throw DataError("agreement needs at least two annotators");
  const std::size_t n = annotations[0].size();
  for (std::size_t k = 1; k < annotations.size(); ++k) {
    if (annotations[k].size() != n)
      throw DataError("annotator " + std::to_string(k) + " has " +
                      std::to_string(annotations[k].size()) + " tokens, annotator 0 has " +
                      std::to_string(n));
  }
  if (!rounds.empty() && rounds.size() != n)
    throw DataError("round labels must cover every token");

  IaaResult result;
  result.report = pair_report(annotations, &result.pairs);

  std::vector<std::string> order;
  for (const auto& r : rounds) {
    if (std::find(order.begin(), order.end(), r) == order.end()) order.push_back(r);
  }
  for (const auto& r : order) {
    std::vector<std::vector<std::string>> subset(annotations.size());
    for (std::size_t t = 0; t < n; ++t) {
      if (rounds[t] != r) continue;
      for (std::size_t k = 0; k < annotations.size(); ++k) subset[k].push_back(annotations[k][t]);
    }
    result.rounds.emplace_back(r, pair_report(subset, nullptr));
  }
  return result;
}

nlohmann::json IaaResult::to_json() const {
  nlohmann::json j;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : pairs) {
    j["pairs"].push_back({{"a", p.a},
                          {"b", p.b},
                          {"kappa_all", p.kappa_all},
                          {"kappa_annotated", p.kappa_annotated},
                          {"f1_no_o", p.f1_no_o}});
  }
  j["average"] = report.to_json();
  if (!rounds.empty()) {
    j["rounds"] = nlohmann::json::array();
    for (const auto& [label, r] : rounds) j["rounds"].push_back({{"round", label}, {"average", r.to_json()}});
  }
  return j;
}

std::string IaaResult::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "pair      kappa_all  kappa_annot  f1_no_o\n";
  for (const auto& p : pairs) {
    out << std::left << std::setw(10) << (std::to_string(p.a) + "-" + std::to_string(p.b)) << std::right
        << std::setw(9) << p.kappa_all << std::setw(13) << p.kappa_annotated << std::setw(9)
        << p.f1_no_o << '\n';
  }
  out << '\n' << report.to_table();
  for (const auto& [label, r] : rounds) out << "\nround " << label << '\n' << r.to_table();
  return out.str();
}

TALA_NAMESPACE_END
