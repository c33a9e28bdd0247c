#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "ocrpost/errors.hpp"
#include "ocrpost/unicode.hpp"

namespace ocrpost {

// Longest common subsequence length (not necessarily consecutive).
inline std::size_t lcs_length(std::u32string_view a, std::u32string_view b) {
    if (a.empty() || b.empty()) return 0;
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

// Maximal consecutive common substring anchored at the first character of
// both strings: the common prefix.
inline std::size_t mclcs1_length(std::u32string_view a, std::u32string_view b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[n] == b[n]) ++n;
    return n;
}

// Maximal consecutive common substring starting anywhere.
inline std::size_t mclcsn_length(std::u32string_view a, std::u32string_view b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> row(b.size() + 1, 0);
    std::size_t best = 0;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : 0;
            best = std::max(best, row[j]);
            diag = up;
        }
    }
    return best;
}

// Maximal consecutive common substring ending at the last character of both
// strings: the common suffix.
inline std::size_t mclcsz_length(std::u32string_view a, std::u32string_view b) {
    std::size_t n = 0;
    while (n < a.size() && n < b.size() && a[a.size() - 1 - n] == b[b.size() - 1 - n]) ++n;
    return n;
}

enum class SimilarityNormalization {
    // 2 * len(subseq)^2 / (len(a) + len(b)), exactly as displayed; the value
    // is not bounded by 1 and the downstream regressor consumes it raw.
    as_paper,
    // len(subseq)^2 / (len(a) * len(b)), the conventional bounded variant.
    product_of_lengths,
};

// Weighted sum of the four LCS-family components. Weights alpha correspond to
// NLCS, MCLCS_1, MCLCS_n, MCLCS_z in that order.
inline double string_similarity_score(std::string_view w_c, std::string_view w_e,
                                      const std::array<double, 4>& alphas,
                                      SimilarityNormalization norm = SimilarityNormalization::as_paper) {
    if (w_c.empty() || w_e.empty()) {
        throw usage_error("string similarity requires non-empty strings");
    }
    const std::u32string a = decode_utf8(w_c);
    const std::u32string b = decode_utf8(w_e);
    const auto la = static_cast<double>(a.size());
    const auto lb = static_cast<double>(b.size());
    const std::array<std::size_t, 4> lens = {
        lcs_length(a, b), mclcs1_length(a, b), mclcsn_length(a, b), mclcsz_length(a, b)};
    double score = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto len = static_cast<double>(lens[k]);
        const double component = norm == SimilarityNormalization::as_paper
                                     ? 2.0 * len * len / (la + lb)
                                     : len * len / (la * lb);
        score += alphas[k] * component;
    }
    return score;
}

} // namespace ocrpost
