#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tala/common.hpp"
#include "tala/corpus.hpp"

TALA_NAMESPACE_BEGIN

double tag_accuracy(const std::vector<std::string>& gold, const std::vector<std::string>& pred);

struct AttachmentScores {
  double uas = 0.0;
  double las = 0.0;
};

// All tokens count unless `exclude` marks them (e.g. punctuation).
AttachmentScores attachment_scores(const std::vector<int>& gold_heads,
                                   const std::vector<std::string>& gold_labels,
                                   const std::vector<int>& pred_heads,
                                   const std::vector<std::string>& pred_labels,
                                   const std::vector<bool>* exclude = nullptr);

// Counting form used to micro-average over a corpus.
struct AttachmentCounts {
  std::size_t total = 0;
  std::size_t head_correct = 0;
  std::size_t both_correct = 0;

  void add(const std::vector<int>& gold_heads, const std::vector<std::string>& gold_labels,
           const std::vector<int>& pred_heads, const std::vector<std::string>& pred_labels,
           const std::vector<bool>* exclude = nullptr);
  AttachmentScores scores() const;
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Conventions for empty sets, echoed into every report that carries span
// scores.
inline constexpr const char* kSpanConvention =
    "exact (start,end,label) match; P=1 if pred and gold are both empty, P=0 if only pred is empty; "
    "R=1 if both are empty, R=0 if only gold is empty; F1=0 when P+R=0";

struct SpanCounts {
  std::size_t tp = 0;
  std::size_t gold = 0;
  std::size_t pred = 0;

  void add(const std::vector<Span>& gold_spans, const std::vector<Span>& pred_spans);
  PRF scores() const;
};

PRF span_prf(const std::vector<Span>& gold, const std::vector<Span>& pred);

// Chance-corrected agreement over aligned label sequences.
double cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Token-level micro F1 with `a` as reference, ignoring the "O" label.
double pairwise_f1_no_o(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct TrialSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

TrialSummary aggregate_trials(const std::vector<double>& values);

/// Named scalar metrics, each with its per-trial (or per-fold) values.
struct MetricsReport {
  struct Entry {
    std::vector<double> trials;
    double mean = 0.0;
    double std = 0.0;
    std::string unit;                       // "trial", "fold" or "pair"
    std::optional<std::string> convention;  // for span scores
    std::vector<std::size_t> fold_sizes;    // k-fold test sizes, when relevant
  };
  std::map<std::string, Entry> metrics;

  // Appends a value to `name` and refreshes its mean/std.
  void add(const std::string& name, double value, const std::string& unit = "trial");
  const Entry& at(const std::string& name) const;
  bool contains(const std::string& name) const { return metrics.count(name) != 0; }

  nlohmann::json to_json() const;
  std::string to_table() const;
};

// ---------------------------------------------------------------------------
// Inter-annotator agreement

struct IaaPair {
  std::size_t a = 0;
  std::size_t b = 0;
  double kappa_all = 0.0;
  double kappa_annotated = 0.0;
  double f1_no_o = 0.0;
};

struct IaaResult {
  std::vector<IaaPair> pairs;
  MetricsReport report;  // kappa_all, kappa_annotated, f1_no_o averaged over pairs
  // Same report computed within each round, in order of first appearance.
  std::vector<std::pair<std::string, MetricsReport>> rounds;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

// `annotations[k]` is annotator k's tag sequence over the shared tokens.
// `rounds`, when non-empty, gives a round label per token.
IaaResult iaa_report(const std::vector<std::vector<std::string>>& annotations,
                     const std::vector<std::string>& rounds = {});

TALA_NAMESPACE_END
