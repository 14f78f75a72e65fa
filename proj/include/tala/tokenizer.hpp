#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tala/common.hpp"
#include "tala/corpus.hpp"

TALA_NAMESPACE_BEGIN

struct TokenizedText {
  std::string leading_ws;  // whitespace before the first token
  std::vector<Token> tokens;
};

/// Splits on whitespace, then peels leading and trailing punctuation off each
/// chunk. A run of one repeated punctuation character ("...", "!!") stays a
/// single token; the middle of a chunk ("P.J.", "de-la") is never split.
TokenizedText tokenize(std::string_view text);

std::string detokenize(const TokenizedText& tokenized);
std::string detokenize(const std::vector<Token>& tokens);

// Sentence boundaries for raw text: a sentence ends after a token made only of
// '.', '!' or '?'. Returns the start offset of every sentence.
std::vector<std::size_t> sentence_starts(const std::vector<Token>& tokens);

TALA_NAMESPACE_END
