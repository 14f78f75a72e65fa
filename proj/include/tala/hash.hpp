#pragma once

#include <cstdint>
#include <string_view>

#include "tala/common.hpp"

TALA_NAMESPACE_BEGIN

/// MurmurHash3_x86_32 over the raw bytes of `key`.
std::uint32_t hash32(std::string_view key, std::uint32_t seed);

TALA_NAMESPACE_END
