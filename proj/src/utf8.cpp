#include "semlab/utf8.hpp"

namespace semlab::utf8 {

namespace {

// Returns the sequence length at `i` (1-4) and the decoded value, or 0 on error.
std::size_t decode_one(std::string_view s, std::size_t i, char32_t& out) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        out = b0;
        return 1;
    }
    std::size_t len;
    char32_t cp;
    char32_t min;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
        return 0;
    }
    if (i + len > s.size()) return 0;
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return 0;
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
    out = cp;
    return len;
}

}  // namespace

std::optional<std::size_t> find_invalid(std::string_view s) {
    std::size_t i = 0;
    char32_t cp;
    while (i < s.size()) {
        const std::size_t n = decode_one(s, i, cp);
        if (n == 0) return i;
        i += n;
    }
    return std::nullopt;
}

std::vector<char32_t> decode(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    char32_t cp;
    while (i < s.size()) {
        const std::size_t n = decode_one(s, i, cp);
        if (n == 0) {
            out.push_back(U'�');
            ++i;
        } else {
            out.push_back(cp);
            i += n;
        }
    }
    return out;
}

std::size_t length(std::string_view s) {
    std::size_t count = 0;
    std::size_t i = 0;
    char32_t cp;
    while (i < s.size()) {
        const std::size_t n = decode_one(s, i, cp);
        i += n == 0 ? 1 : n;
        ++count;
    }
    return count;
}

}  // namespace semlab::utf8
