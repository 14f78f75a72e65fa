#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tala/common.hpp"

TALA_NAMESPACE_BEGIN

namespace utf8 {

bool is_valid(std::string_view text);

// Splits into code points, each kept as its UTF-8 byte sequence. Invalid
// bytes come out as single-byte pieces so the function is total.
std::vector<std::string_view> split_chars(std::string_view text);

// ASCII case folding; other bytes pass through unchanged.
std::string lower(std::string_view text);

}  // namespace utf8

TALA_NAMESPACE_END
