#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semlab::utf8 {

/// Byte offset of the first invalid sequence, or nullopt if `s` is valid UTF-8.
std::optional<std::size_t> find_invalid(std::string_view s);

/// Decodes valid UTF-8 into code points. Invalid bytes decode as U+FFFD.
std::vector<char32_t> decode(std::string_view s);

/// Number of Unicode scalar values in `s`.
std::size_t length(std::string_view s);

}  // namespace semlab::utf8
