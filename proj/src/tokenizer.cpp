#include <cctype>
#include "tala/tokenizer.hpp"

#include "tala/utf8.hpp"

TALA_NAMESPACE_BEGIN

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(std::string_view ch) {
  if (ch.size() == 1) {
    const unsigned char c = static_cast<unsigned char>(ch[0]);
    return c < 0x80 && std::ispunct(c);
  }
  // Common typographic quotes, dashes and the ellipsis.
  static constexpr std::string_view kWide[] = {"“", "”", "‘", "’", "«",
                                               "»", "–", "—", "…", "¿",
                                               "¡"};
  for (auto w : kWide) {
    if (ch == w) return true;
  }
  return false;
}

void split_chunk(std::string_view chunk, std::string_view trailing_ws, std::vector<Token>& out) {
  const auto chars = utf8::split_chars(chunk);
  std::size_t lo = 0;
  std::size_t hi = chars.size();
  std::vector<std::string_view> leading;
  while (lo < hi && is_punct(chars[lo])) {
    std::size_t run = lo + 1;
    while (run < hi && chars[run] == chars[lo]) ++run;
    leading.push_back(chunk.substr(chars[lo].data() - chunk.data(),
                                   chars[run - 1].data() + chars[run - 1].size() - chars[lo].data()));
    lo = run;
  }
  std::vector<std::string_view> trailing;
  while (hi > lo && is_punct(chars[hi - 1])) {
    std::size_t run = hi - 1;
    while (run > lo && chars[run - 1] == chars[hi - 1]) --run;
    trailing.push_back(chunk.substr(chars[run].data() - chunk.data(),
                                    chars[hi - 1].data() + chars[hi - 1].size() - chars[run].data()));
    hi = run;
  }
  std::vector<std::string_view> pieces = leading;
  if (lo < hi) {
    pieces.push_back(chunk.substr(chars[lo].data() - chunk.data(),
                                  chars[hi - 1].data() + chars[hi - 1].size() - chars[lo].data()));
  }
  pieces.insert(pieces.end(), trailing.rbegin(), trailing.rend());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    out.push_back(Token{std::string(pieces[i]),
                        i + 1 == pieces.size() ? std::string(trailing_ws) : std::string()});
  }
}

}  // namespace

TokenizedText tokenize(std::string_view text) {
  TokenizedText result;
  std::size_t i = 0;
  while (i < text.size() && is_space(text[i])) ++i;
  result.leading_ws = std::string(text.substr(0, i));
  while (i < text.size()) {
    std::size_t end = i;
    while (end < text.size() && !is_space(text[end])) ++end;
    std::size_t ws_end = end;
    while (ws_end < text.size() && is_space(text[ws_end])) ++ws_end;
    split_chunk(text.substr(i, end - i), text.substr(end, ws_end - end), result.tokens);
    i = ws_end;
  }
  return result;
}

std::string detokenize(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    out += t.text;
    out += t.trailing_ws;
  }
  return out;
}

std::string detokenize(const TokenizedText& tokenized) {
  return tokenized.leading_ws + detokenize(tokenized.tokens);
}

std::vector<std::size_t> sentence_starts(const std::vector<Token>& tokens) {
  std::vector<std::size_t> starts;
  if (tokens.empty()) return starts;
  starts.push_back(0);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const std::string& t = tokens[i].text;
    if (t.find_first_not_of(".!?") == std::string::npos) starts.push_back(i + 1);
  }
  return starts;
}

TALA_NAMESPACE_END
