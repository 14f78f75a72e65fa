#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "tala/common.hpp"
#include "tala/corpus.hpp"

TALA_NAMESPACE_BEGIN

struct ToyCorpusOptions {
  std::size_t sentences = 40;
  std::uint64_t seed = 0;
};

/// Templated Tagalog-like sentences with UPOS tags, projective trees,
/// PER/ORG/LOC entities and a travel/food category, e.g.
/// "Pumunta si Juan sa Maynila ." Names come from disjoint per-type lists.
Dataset make_toy_corpus(const ToyCorpusOptions& options = {});

// Writes treebank.conllu, ner.iob, textcat.jsonl and raw.txt into `dir`.
void write_toy_corpus(const Dataset& corpus, const std::string& dir);

TALA_NAMESPACE_END
