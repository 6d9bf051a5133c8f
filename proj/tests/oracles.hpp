// Slow, obviously-correct reference implementations used by the
// equivalence suites. Nothing here calls into the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

// Well-formed UTF-8 only (test inputs are generated, never hostile).
inline std::vector<char32_t> code_points(std::string_view s) {
    std::vector<char32_t> out;
    for (std::size_t i = 0; i < s.size();) {
        const auto b = static_cast<unsigned char>(s[i]);
        int len = b < 0x80 ? 1 : b < 0xE0 ? 2 : b < 0xF0 ? 3 : 4;
        char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1F) : len == 3 ? (b & 0x0F) : (b & 0x07);
        for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    const auto x = code_points(a), y = code_points(b);
    std::vector<std::vector<std::size_t>> d(x.size() + 1, std::vector<std::size_t>(y.size() + 1));
    for (std::size_t i = 0; i <= x.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= y.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        for (std::size_t j = 1; j <= y.size(); ++j) {
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
        }
    }
    return d[x.size()][y.size()];
}

inline long needleman_wunsch(std::string_view a, std::string_view b, long match, long mismatch, long gap) {
    const auto x = code_points(a), y = code_points(b);
    std::vector<std::vector<long>> f(x.size() + 1, std::vector<long>(y.size() + 1));
    for (std::size_t i = 0; i <= x.size(); ++i) f[i][0] = static_cast<long>(i) * gap;
    for (std::size_t j = 0; j <= y.size(); ++j) f[0][j] = static_cast<long>(j) * gap;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        for (std::size_t j = 1; j <= y.size(); ++j) {
            const long diag = f[i - 1][j - 1] + (x[i - 1] == y[j - 1] ? match : mismatch);
            f[i][j] = std::max({diag, f[i - 1][j] + gap, f[i][j - 1] + gap});
        }
    }
    return f[x.size()][y.size()];
}

// Entropy over the in-vocabulary characters of all values, by direct
// counting.
inline double char_entropy(const std::vector<std::string>& values) {
    std::map<char32_t, double> counts;
    double total = 0;
    for (const auto& v : values) {
        for (char32_t c : code_points(v)) {
            const bool in_vocab = (c >= 0x09 && c <= 0x0D) || (c >= 0x20 && c <= 0x7E);
            if (!in_vocab) continue;
            counts[c] += 1;
            total += 1;
        }
    }
    double h = 0;
    for (const auto& [c, n] : counts) {
        const double p = n / total;
        h -= p * std::log2(p);
    }
    return h;
}

// Reciprocal rank by scanning for the truth position.
inline double mrr(const std::vector<std::vector<std::string>>& ranked, const std::vector<std::string>& truth) {
    double sum = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        for (std::size_t pos = 0; pos < ranked[i].size(); ++pos) {
            if (ranked[i][pos] == truth[i]) {
                sum += 1.0 / static_cast<double>(pos + 1);
                break;
            }
        }
    }
    return sum / static_cast<double>(ranked.size());
}

// Gini as the probability that two independent draws disagree.
inline double gini(const std::vector<std::size_t>& counts) {
    double n = 0;
    for (auto c : counts) n += static_cast<double>(c);
    if (n == 0) return 0;
    double g = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t j = 0; j < counts.size(); ++j) {
            if (i != j) g += (static_cast<double>(counts[i]) / n) * (static_cast<double>(counts[j]) / n);
        }
    }
    return g;
}

}  // namespace oracle
