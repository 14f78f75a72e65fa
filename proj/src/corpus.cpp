#include "tala/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tala/error.hpp"
#include "tala/random.hpp"
#include "tala/tokenizer.hpp"
#include "tala/utf8.hpp"

TALA_NAMESPACE_BEGIN

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_int(std::string_view s, int& value) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, value);
  return res.ec == std::errc() && res.ptr == end;
}

bool getline_lf(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

template <typename Reader>
auto with_file(const std::string& path, Reader&& reader) {
  if (path == "-") return reader(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return reader(in);
}

struct IobTag {
  char prefix = 'O';  // 'O', 'B' or 'I'
  std::string label;
};

bool parse_prefixed_tag(std::string_view tag, std::string_view prefixes, char& prefix,
                        std::string& label) {
  if (tag == "O") {
    prefix = 'O';
    label.clear();
    return true;
  }
  if (tag.size() < 3 || tag[1] != '-' || prefixes.find(tag[0]) == std::string_view::npos)
    return false;
  prefix = tag[0];
  label = std::string(tag.substr(2));
  return true;
}

}  // namespace

std::vector<std::string> Sentence::words() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

std::vector<int> to_conll_heads(const std::vector<int>& heads) {
  std::vector<int> out(heads.size());
  for (std::size_t i = 0; i < heads.size(); ++i) out[i] = heads[i] == kRootHead ? 0 : heads[i] + 1;
  return out;
}

std::vector<int> from_conll_heads(const std::vector<int>& conll_heads) {
  std::vector<int> out(conll_heads.size());
  for (std::size_t i = 0; i < conll_heads.size(); ++i)
    out[i] = conll_heads[i] == 0 ? kRootHead : conll_heads[i] - 1;
  return out;
}

void validate_tree(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (heads[i] == kRootHead) {
      ++roots;
    } else if (heads[i] < 0 || heads[i] >= n || heads[i] == i) {
      throw DataError("token " + std::to_string(i) + " has invalid head " +
                      std::to_string(heads[i]));
    }
  }
  if (n > 0 && roots != 1)
    throw DataError("tree must have exactly one root, found " + std::to_string(roots));
  // Every chain of heads must reach the root within n steps.
  for (int i = 0; i < n; ++i) {
    int node = i;
    for (int steps = 0; node != kRootHead; ++steps) {
      if (steps > n) throw DataError("cycle through token " + std::to_string(i));
      node = heads[node];
    }
  }
}

void validate_sentence(const Sentence& s) {
  const std::size_t n = s.size();
  const auto check_len = [&](std::size_t len, const char* what) {
    if (len != n)
      throw DataError(std::string(what) + " has " + std::to_string(len) + " entries for " +
                      std::to_string(n) + " tokens");
  };
  if (s.upos) check_len(s.upos->size(), "upos");
  if (s.heads) {
    check_len(s.heads->size(), "heads");
    validate_tree(*s.heads);
  }
  if (s.deprels) check_len(s.deprels->size(), "deprels");
  std::size_t last_end = 0;
  for (const auto& span : s.ents) {
    if (span.start >= span.end || span.end > n)
      throw DataError("entity span [" + std::to_string(span.start) + ", " +
                      std::to_string(span.end) + ") out of bounds");
    if (span.start < last_end) throw DataError("entity spans overlap or are unsorted");
    last_end = span.end;
  }
}

// ---------------------------------------------------------------------------
// CoNLL-U

Dataset read_conllu(std::istream& in) {
  Dataset ds;
  Sentence current;
  std::vector<std::string> upos, heads, deprels, ner;
  std::vector<std::size_t> token_lines;
  std::size_t block_line = 0;
  bool pending_newdoc = false;

  const auto all_blank = [](const std::vector<std::string>& col) {
    return std::all_of(col.begin(), col.end(), [](const std::string& v) { return v == "_"; });
  };

  const auto finish = [&] {
    if (current.tokens.empty()) return;
    const std::size_t n = current.tokens.size();
    if (!all_blank(upos)) current.upos = upos;
    if (!all_blank(deprels)) current.deprels = deprels;
    if (!all_blank(heads)) {
      std::vector<int> parsed(n);
      for (std::size_t i = 0; i < n; ++i) {
        int h = 0;
        if (!parse_int(heads[i], h)) throw ParseError("malformed HEAD '" + heads[i] + "'", token_lines[i]);
        if (h < 0 || static_cast<std::size_t>(h) > n)
          throw ParseError("HEAD " + heads[i] + " out of range for sentence of " +
                               std::to_string(n) + " tokens",
                           token_lines[i]);
        parsed[i] = h;
      }
      current.heads = from_conll_heads(parsed);
      try {
        validate_tree(*current.heads);
      } catch (const DataError& e) {
        throw ParseError(e.what(), block_line);
      }
    }
    if (!std::all_of(ner.begin(), ner.end(), [](const std::string& t) { return t == "O"; })) {
      // Entity tags are stored as IOB2 in MISC.
      std::string open;
      std::size_t start = 0;
      for (std::size_t i = 0; i <= n; ++i) {
        const std::string tag = i < n ? ner[i] : "O";
        const bool continues = tag.size() > 2 && tag[0] == 'I' && tag.substr(2) == open;
        if (!open.empty() && !continues) {
          current.ents.push_back({start, i, open});
          open.clear();
        }
        if (tag.size() > 2 && (tag[0] == 'B' || (tag[0] == 'I' && !continues))) {
          open = tag.substr(2);
          start = i;
        }
      }
    }
    if (pending_newdoc) {
      ds.doc_boundaries.push_back(ds.sentences.size());
      pending_newdoc = false;
    }
    ds.sentences.push_back(std::move(current));
    current = Sentence{};
    upos.clear();
    heads.clear();
    deprels.clear();
    ner.clear();
    token_lines.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (getline_lf(in, line)) {
    ++line_no;
    if (!utf8::is_valid(line)) throw ParseError("invalid UTF-8", line_no);
    if (line.empty()) {
      finish();
      continue;
    }
    if (line[0] == '#') {
      if (line.rfind("# newdoc", 0) == 0) pending_newdoc = true;
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10)
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(cols.size()),
                       line_no);
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;
    int index = 0;
    if (!parse_int(id, index)) throw ParseError("malformed ID '" + std::string(id) + "'", line_no);
    if (static_cast<std::size_t>(index) != current.tokens.size() + 1)
      throw ParseError("token ID " + std::string(id) + " out of sequence", line_no);
    if (cols[1].empty()) throw ParseError("empty FORM", line_no);
    if (current.tokens.empty()) block_line = line_no;

    Token tok;
    tok.text = std::string(cols[1]);
    std::string entity = "O";
    std::string_view misc = cols[9];
    while (!misc.empty()) {
      const std::size_t bar = misc.find('|');
      const std::string_view item = misc.substr(0, bar);
      if (item == "SpaceAfter=No") tok.trailing_ws.clear();
      if (item.rfind("Entity=", 0) == 0) entity = std::string(item.substr(7));
      if (bar == std::string_view::npos) break;
      misc.remove_prefix(bar + 1);
    }
    current.tokens.push_back(std::move(tok));
    upos.emplace_back(cols[3]);
    heads.emplace_back(cols[6]);
    deprels.emplace_back(cols[7]);
    ner.push_back(std::move(entity));
    token_lines.push_back(line_no);
  }
  finish();
  return ds;
}

Dataset read_conllu_file(const std::string& path) {
  return with_file(path, [](std::istream& in) { return read_conllu(in); });
}

std::string write_conllu(const Dataset& ds) {
  std::ostringstream out;
  std::size_t next_boundary = 0;
  for (std::size_t si = 0; si < ds.sentences.size(); ++si) {
    const Sentence& s = ds.sentences[si];
    if (!s.upos || !s.heads || !s.deprels)
      throw DataError("sentence " + std::to_string(si) +
                      " is missing upos, heads or deprels required by CoNLL-U output");
    validate_sentence(s);
    if (next_boundary < ds.doc_boundaries.size() && ds.doc_boundaries[next_boundary] == si) {
      out << "# newdoc\n";
      ++next_boundary;
    }
    const auto iob = spans_to_iob(s.size(), s.ents);
    const auto conll_heads = to_conll_heads(*s.heads);
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::string misc;
      if (!s.tokens[i].has_space_after()) misc = "SpaceAfter=No";
      if (iob[i] != "O") misc += (misc.empty() ? "" : "|") + ("Entity=" + iob[i]);
      if (misc.empty()) misc = "_";
      out << (i + 1) << '\t' << s.tokens[i].text << "\t_\t" << (*s.upos)[i] << "\t_\t_\t"
          << conll_heads[i] << '\t' << (*s.deprels)[i] << "\t_\t" << misc << '\n';
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// IOB2

IobReadResult read_iob(std::istream& in, const IobReadOptions& options) {
  IobReadResult result;
  Dataset& ds = result.dataset;
  Sentence current;
  std::vector<IobTag> tags;
  bool pending_newdoc = false;

  const auto finish = [&] {
    if (current.tokens.empty()) return;
    std::string open;
    std::size_t start = 0;
    const std::size_t n = tags.size();
    for (std::size_t i = 0; i <= n; ++i) {
      const IobTag tag = i < n ? tags[i] : IobTag{};
      const bool continues = tag.prefix == 'I' && tag.label == open && !open.empty();
      if (!open.empty() && !continues) {
        current.ents.push_back({start, i, open});
        open.clear();
      }
      if (tag.prefix == 'I' && !continues) ++result.repairs;
      if (tag.prefix == 'B' || (tag.prefix == 'I' && !continues)) {
        open = tag.label;
        start = i;
      }
    }
    if (pending_newdoc) {
      ds.doc_boundaries.push_back(ds.sentences.size());
      pending_newdoc = false;
    }
    ds.sentences.push_back(std::move(current));
    current = Sentence{};
    tags.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (getline_lf(in, line)) {
    ++line_no;
    if (!utf8::is_valid(line)) throw ParseError("invalid UTF-8", line_no);
    if (line.empty()) {
      finish();
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 2)
      throw ParseError("expected TOKEN<TAB>TAG, found " + std::to_string(cols.size()) + " columns",
                       line_no);
    if (cols[0] == "-DOCSTART-") {
      finish();
      pending_newdoc = true;
      continue;
    }
    if (cols[0].empty()) throw ParseError("empty token", line_no);
    IobTag tag;
    if (!parse_prefixed_tag(cols[1], "BI", tag.prefix, tag.label))
      throw ParseError("tag '" + std::string(cols[1]) + "' is not IOB2", line_no);
    if (options.ner_corpus && tag.label == "MISC")
      throw ParseError("MISC entities are not accepted in NER corpora", line_no);
    Token tok;
    tok.text = std::string(cols[0]);
    current.tokens.push_back(std::move(tok));
    tags.push_back(std::move(tag));
  }
  finish();
  return result;
}

IobReadResult read_iob_file(const std::string& path, const IobReadOptions& options) {
  return with_file(path, [&](std::istream& in) { return read_iob(in, options); });
}

std::vector<std::string> spans_to_iob(std::size_t length, const std::vector<Span>& spans) {
  std::vector<std::string> tags(length, "O");
  for (const auto& span : spans) {
    if (span.start >= span.end || span.end > length) {
      throw DataError("entity span [" + std::to_string(span.start) + ", " +
                      std::to_string(span.end) + ") out of bounds");
    }
    for (std::size_t i = span.start; i < span.end; ++i) {
      if (tags[i] != "O") throw DataError("overlapping entity spans at token " + std::to_string(i));
      tags[i] = (i == span.start ? "B-" : "I-") + span.label;
    }
  }
  return tags;
}

std::string write_iob(const Dataset& ds) {
  std::ostringstream out;
  for (const auto& s : ds.sentences) {
    const auto tags = spans_to_iob(s.size(), s.ents);
    for (std::size_t i = 0; i < s.size(); ++i) out << s.tokens[i].text << '\t' << tags[i] << '\n';
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// BILUO

std::vector<std::string> spans_to_biluo(std::size_t length, const std::vector<Span>& spans) {
  std::vector<Span> sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> tags(length, "O");
  std::size_t last_end = 0;
  for (const auto& span : sorted) {
    if (span.start >= span.end || span.end > length)
      throw DataError("entity span [" + std::to_string(span.start) + ", " +
                      std::to_string(span.end) + ") out of bounds");
    if (span.start < last_end)
      throw DataError("overlapping entity spans at token " + std::to_string(span.start));
    last_end = span.end;
    if (span.size() == 1) {
      tags[span.start] = "U-" + span.label;
      continue;
    }
    tags[span.start] = "B-" + span.label;
    for (std::size_t i = span.start + 1; i + 1 < span.end; ++i) tags[i] = "I-" + span.label;
    tags[span.end - 1] = "L-" + span.label;
  }
  return tags;
}

std::vector<Span> biluo_to_spans(const std::vector<std::string>& tags, BiluoMode mode) {
  std::vector<Span> spans;
  bool inside = false;
  std::size_t start = 0;
  std::string open;

  const auto fail = [&](std::size_t index, const std::string& why) {
    if (mode == BiluoMode::kStrict)
      throw DataError("invalid BILUO sequence at index " + std::to_string(index) + ": " + why);
    inside = false;  // lenient: drop the fragment
  };

  for (std::size_t i = 0; i < tags.size(); ++i) {
    char prefix = 'O';
    std::string label;
    if (!parse_prefixed_tag(tags[i], "BILU", prefix, label)) {
      fail(i, "unknown tag '" + tags[i] + "'");
      continue;
    }
    switch (prefix) {
      case 'O':
        if (inside) fail(i, "entity not closed before O");
        break;
      case 'B':
        if (inside) fail(i, "B inside an open entity");
        inside = true;
        start = i;
        open = label;
        break;
      case 'I':
        if (!inside || label != open) fail(i, "I-" + label + " does not continue an entity");
        break;
      case 'L':
        if (!inside || label != open) {
          fail(i, "L-" + label + " does not close an entity");
        } else {
          spans.push_back({start, i + 1, open});
          inside = false;
        }
        break;
      case 'U':
        if (inside) fail(i, "U inside an open entity");
        spans.push_back({i, i + 1, label});
        break;
    }
  }
  if (inside) fail(tags.size(), "sequence ends inside an entity");
  return spans;
}

// ---------------------------------------------------------------------------
// JSON-lines text categorisation corpora

Dataset read_textcat_jsonl(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (getline_lf(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object() || !record.contains("label") || !record["label"].is_string())
      throw ParseError("record needs a string \"label\"", line_no);
    Sentence s;
    if (record.contains("tokens")) {
      if (!record["tokens"].is_array()) throw ParseError("\"tokens\" must be an array", line_no);
      for (const auto& t : record["tokens"]) {
        if (!t.is_string() || t.get<std::string>().empty())
          throw ParseError("tokens must be non-empty strings", line_no);
        s.tokens.push_back(Token{t.get<std::string>(), " "});
      }
    } else if (record.contains("text") && record["text"].is_string()) {
      const std::string text = record["text"].get<std::string>();
      if (!utf8::is_valid(text)) throw ParseError("invalid UTF-8", line_no);
      s.tokens = tokenize(text).tokens;
    } else {
      throw ParseError("record needs \"text\" or \"tokens\"", line_no);
    }
    if (s.tokens.empty()) throw ParseError("document has no tokens", line_no);
    s.category = record["label"].get<std::string>();
    ds.sentences.push_back(std::move(s));
  }
  return ds;
}

Dataset read_textcat_jsonl_file(const std::string& path) {
  return with_file(path, [](std::istream& in) { return read_textcat_jsonl(in); });
}

std::string write_jsonl(const Dataset& ds) {
  std::string out;
  for (const auto& s : ds.sentences) {
    nlohmann::json j;
    j["tokens"] = s.words();
    if (s.category) j["label"] = *s.category;
    if (s.upos) j["upos"] = *s.upos;
    if (s.heads) j["heads"] = *s.heads;
    if (s.deprels) j["deprels"] = *s.deprels;
    if (!s.ents.empty()) {
      j["ents"] = nlohmann::json::array();
      for (const auto& e : s.ents) j["ents"].push_back({{"start", e.start}, {"end", e.end}, {"label", e.label}});
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits

std::vector<std::size_t> kfold_sizes(std::size_t n, std::size_t k) {
  if (k < 2 || k > n)
    throw DataError("k-fold split needs 2 <= k <= n (k=" + std::to_string(k) +
                    ", n=" + std::to_string(n) + ")");
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

std::vector<Fold> kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  const auto sizes = kfold_sizes(ds.size(), k);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<std::size_t> offsets(k + 1, 0);
  for (std::size_t i = 0; i < k; ++i) offsets[i + 1] = offsets[i] + sizes[i];

  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const Sentence& s = ds.sentences[order[pos]];
      if (pos >= offsets[f] && pos < offsets[f + 1]) {
        folds[f].test.sentences.push_back(s);
        folds[f].test_indices.push_back(order[pos]);
      } else {
        folds[f].train.sentences.push_back(s);
      }
    }
  }
  return folds;
}

std::vector<std::size_t> holdout_sizes(std::size_t n, const SplitRatios& r) {
  const double parts[3] = {r.train, r.dev, r.test};
  for (double p : parts) {
    if (!(p > 0.0)) throw DataError("split ratios must all be positive");
  }
  if (std::abs(r.train + r.dev + r.test - 1.0) > 1e-9) throw DataError("split ratios must sum to 1");
  std::vector<std::size_t> sizes(3);
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = parts[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::vector<int> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[order[i % 3]];
  return sizes;
}

HoldoutSplit holdout_split(const Dataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  const auto sizes = holdout_sizes(ds.size(), ratios);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  HoldoutSplit out;
  Dataset* parts[3] = {&out.train, &out.dev, &out.test};
  std::size_t pos = 0;
  for (int p = 0; p < 3; ++p) {
    for (std::size_t i = 0; i < sizes[p]; ++i) parts[p]->sentences.push_back(ds.sentences[order[pos++]]);
  }
  return out;
}

TALA_NAMESPACE_END
