#pragma once

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <vector>

#include "ocrpost/unicode.hpp"

namespace ocrpost {

// Levenshtein distance over Unicode scalar values: insertion, deletion and
// substitution, each at unit cost. Transpositions are not an operation.
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    // Common prefix/suffix does not change the distance.
    while (!a.empty() && !b.empty() && a.front() == b.front()) {
        a.remove_prefix(1);
        b.remove_prefix(1);
    }
    while (!a.empty() && !b.empty() && a.back() == b.back()) {
        a.remove_suffix(1);
        b.remove_suffix(1);
    }
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    if (a.size() < b.size()) std::swap(a, b);

    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[b.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    return levenshtein(decode_utf8(a), decode_utf8(b));
}

} // namespace ocrpost
