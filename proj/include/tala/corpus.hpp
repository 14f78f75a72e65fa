#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tala/common.hpp"

TALA_NAMESPACE_BEGIN

struct Token {
  std::string text;
  // Exact whitespace that followed the token in the source text. CoNLL-U
  // input can only express "" or " " here.
  std::string trailing_ws = " ";

  bool has_space_after() const noexcept { return !trailing_ws.empty(); }
  friend bool operator==(const Token&, const Token&) = default;
};

/// Half-open labelled token interval.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  std::size_t size() const noexcept { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// Head index of a sentence root inside Sentence::heads.
inline constexpr int kRootHead = -1;

struct Sentence {
  std::vector<Token> tokens;
  std::optional<std::vector<std::string>> upos;
  // 0-based head token index per token; kRootHead marks the root.
  std::optional<std::vector<int>> heads;
  std::optional<std::vector<std::string>> deprels;
  std::vector<Span> ents;
  std::optional<std::string> category;

  std::size_t size() const noexcept { return tokens.size(); }
  std::vector<std::string> words() const;
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Dataset {
  std::vector<Sentence> sentences;
  // Sentence indices at which a new document starts (strictly increasing).
  std::vector<std::size_t> doc_boundaries;

  std::size_t size() const noexcept { return sentences.size(); }
  bool empty() const noexcept { return sentences.empty(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// CoNLL-U heads are 1-based with 0 for the root; Sentence::heads is 0-based.
std::vector<int> to_conll_heads(const std::vector<int>& heads);
std::vector<int> from_conll_heads(const std::vector<int>& conll_heads);

// Throws DataError unless heads form a single-rooted tree without cycles.
void validate_tree(const std::vector<int>& heads);

// Throws DataError when annotation lengths disagree with the token count or
// entity spans are out of bounds, unsorted or overlapping.
void validate_sentence(const Sentence& sentence);

// ---------------------------------------------------------------------------
// CoNLL-U

Dataset read_conllu(std::istream& in);
Dataset read_conllu_file(const std::string& path);  // "-" reads stdin
std::string write_conllu(const Dataset& dataset);

// ---------------------------------------------------------------------------
// IOB2

struct IobReadOptions {
  // NER corpora use the PER/ORG/LOC inventory; MISC is refused.
  bool ner_corpus = true;
};

struct IobReadResult {
  Dataset dataset;
  std::size_t repairs = 0;  // I-X openings rewritten to B-X
};

IobReadResult read_iob(std::istream& in, const IobReadOptions& options = {});
IobReadResult read_iob_file(const std::string& path, const IobReadOptions& options = {});
std::string write_iob(const Dataset& dataset);

std::vector<std::string> spans_to_iob(std::size_t length, const std::vector<Span>& spans);

// ---------------------------------------------------------------------------
// BILUO

std::vector<std::string> spans_to_biluo(std::size_t length, const std::vector<Span>& spans);

enum class BiluoMode { kStrict, kLenient };

// Strict mode throws DataError naming the first offending index. Lenient mode
// drops malformed fragments.
std::vector<Span> biluo_to_spans(const std::vector<std::string>& tags,
                                 BiluoMode mode = BiluoMode::kStrict);

// ---------------------------------------------------------------------------
// Text categorisation corpora: {"text": ..., "label": ...} or
// {"tokens": [...], "label": ...} per line.

Dataset read_textcat_jsonl(std::istream& in);
Dataset read_textcat_jsonl_file(const std::string& path);

// One JSON object per sentence with "tokens" and whichever of "label",
// "upos", "heads", "deprels" and "ents" are present. Readable by
// read_textcat_jsonl when every sentence has a label.
std::string write_jsonl(const Dataset& dataset);

// ---------------------------------------------------------------------------
// Splits

struct Fold {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> test_indices;  // indices into the source dataset
};

// Sentences are shuffled once with Rng(seed), then cut into k contiguous
// partitions whose sizes differ by at most one (larger ones first).
std::vector<Fold> kfold_split(const Dataset& dataset, std::size_t k, std::uint64_t seed);

// Test-partition sizes produced by kfold_split for n sentences.
std::vector<std::size_t> kfold_sizes(std::size_t n, std::size_t k);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct HoldoutSplit {
  Dataset train;
  Dataset dev;
  Dataset test;
};

// Largest-remainder rounding of n * ratios; ties go to the earlier part.
std::vector<std::size_t> holdout_sizes(std::size_t n, const SplitRatios& ratios);
HoldoutSplit holdout_split(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed);

TALA_NAMESPACE_END
