#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ocrpost/candidate_search.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/levenshtein.hpp"
#include "ocrpost/lexicon.hpp"
#include "ocrpost/ngram_index.hpp"
#include "ocrpost/string_similarity.hpp"

namespace ocrpost {

// Everything the scorers need, bundled. All pointers reference immutable
// resources owned elsewhere; scoring is pure and parallelizable per error.
struct ScoringResources {
    const NgramIndex* unigrams = nullptr;
    const NgramIndex* contexts = nullptr;
    std::vector<const Lexicon*> existence_lexicons;
    std::size_t delta = 3;
    std::array<double, 4> alphas = {0.25, 0.25, 0.25, 0.25};
    SimilarityNormalization similarity_normalization = SimilarityNormalization::as_paper;
};

// Fixed feature order for one configuration; serialized with the model.
inline std::vector<std::string> feature_names(const ScoringResources& resources) {
    std::vector<std::string> names = {"edit_distance", "string_similarity", "language_popularity"};
    for (const auto* lex : resources.existence_lexicons) names.push_back("lexicon:" + lex->name);
    names.push_back("exact_context");
    names.push_back("relaxed_context");
    return names;
}

// 1 - dist/(delta+1). Candidates come from a delta-bounded search, so the
// score stays in (0, 1].
inline double edit_distance_score(std::string_view w_c, std::string_view w_e, std::size_t delta) {
    const auto dist = static_cast<double>(levenshtein(w_c, w_e));
    return 1.0 - dist / (static_cast<double>(delta) + 1.0);
}

inline double lexicon_existence(std::string_view w_c, const Lexicon& lexicon) {
    return lexicon.contains(w_c) ? 1.0 : 0.0;
}

// Sum over the error's windows of the n-gram count with the candidate
// substituted at the focus position.
inline std::uint64_t exact_context_numerator(std::string_view w_c, const DetectedError& error,
                                             const NgramIndex& context_index) {
    std::uint64_t sum = 0;
    std::vector<std::string> gram;
    for (const auto& window : error.contexts) {
        gram = window.words;
        gram[window.focus] = std::string(w_c);
        sum = detail::checked_add(sum, context_index.freq(gram));
    }
    return sum;
}

// Same with each window contribution widened to all one-wildcard variants of
// the substituted context. Wildcards range over the n-1 context positions,
// never the candidate position itself.
inline std::uint64_t relaxed_context_numerator(std::string_view w_c, const DetectedError& error,
                                               const NgramIndex& context_index) {
    std::uint64_t sum = 0;
    std::vector<std::string> gram;
    for (const auto& window : error.contexts) {
        gram = window.words;
        gram[window.focus] = std::string(w_c);
        for (std::size_t p = 0; p < gram.size(); ++p) {
            if (p == window.focus) continue;
            sum = detail::checked_add(sum, context_index.relaxed_freq(gram, p));
        }
    }
    return sum;
}

namespace detail {

// Ratio of one value against the per-set maximum; all zeros score 0 rather
// than manufacturing confidence out of absent evidence.
inline double normalized_by_max(std::uint64_t value, std::uint64_t max_value) {
    if (max_value == 0) return 0.0;
    return static_cast<double>(value) / static_cast<double>(max_value);
}

} // namespace detail

inline double language_popularity(std::string_view w_c, const CandidateSet& candidates,
                                  const NgramIndex& unigrams) {
    std::uint64_t max_freq = 0;
    for (const auto& c : candidates.candidates) {
        max_freq = std::max(max_freq, unigrams.freq({c.surface}));
    }
    return detail::normalized_by_max(unigrams.freq({std::string(w_c)}), max_freq);
}

inline double exact_context_score(std::string_view w_c, const DetectedError& error,
                                  const CandidateSet& candidates, const NgramIndex& context_index) {
    std::uint64_t denom = 0;
    for (const auto& c : candidates.candidates) {
        denom = std::max(denom, exact_context_numerator(c.surface, error, context_index));
    }
    return detail::normalized_by_max(exact_context_numerator(w_c, error, context_index), denom);
}

inline double relaxed_context_score(std::string_view w_c, const DetectedError& error,
                                    const CandidateSet& candidates, const NgramIndex& context_index) {
    std::uint64_t denom = 0;
    for (const auto& c : candidates.candidates) {
        denom = std::max(denom, relaxed_context_numerator(c.surface, error, context_index));
    }
    return detail::normalized_by_max(relaxed_context_numerator(w_c, error, context_index), denom);
}

// Fills every candidate's feature vector in the feature_names() order.
// Order-independent per candidate: the self-normalized features use set-wide
// maxima, not positions.
inline void score_all(CandidateSet& set, const ScoringResources& resources) {
    const std::string& error_surface = set.error.token.surface;

    std::vector<std::uint64_t> unigram_freqs(set.candidates.size(), 0);
    std::vector<std::uint64_t> exact_nums(set.candidates.size(), 0);
    std::vector<std::uint64_t> relaxed_nums(set.candidates.size(), 0);
    std::uint64_t max_unigram = 0, max_exact = 0, max_relaxed = 0;
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        const auto& surface = set.candidates[i].surface;
        unigram_freqs[i] = resources.unigrams->freq({surface});
        exact_nums[i] = exact_context_numerator(surface, set.error, *resources.contexts);
        relaxed_nums[i] = relaxed_context_numerator(surface, set.error, *resources.contexts);
        max_unigram = std::max(max_unigram, unigram_freqs[i]);
        max_exact = std::max(max_exact, exact_nums[i]);
        max_relaxed = std::max(max_relaxed, relaxed_nums[i]);
    }

    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        Candidate& c = set.candidates[i];
        FeatureVector fv;
        fv.values.reserve(5 + resources.existence_lexicons.size());
        fv.values.push_back(edit_distance_score(c.surface, error_surface, set.delta));
        fv.values.push_back(string_similarity_score(c.surface, error_surface, resources.alphas,
                                                    resources.similarity_normalization));
        fv.values.push_back(detail::normalized_by_max(unigram_freqs[i], max_unigram));
        for (const auto* lex : resources.existence_lexicons) {
            fv.values.push_back(lexicon_existence(c.surface, *lex));
        }
        fv.values.push_back(detail::normalized_by_max(exact_nums[i], max_exact));
        fv.values.push_back(detail::normalized_by_max(relaxed_nums[i], max_relaxed));
        c.features = std::move(fv);
    }
}

// Candidate indices ranked per feature: descending score, ties by surface.
// Used for the per-feature top-k pools of training-set construction and the
// feature analyses.
inline std::vector<std::vector<std::size_t>> per_feature_rankings(const CandidateSet& set) {
    if (set.candidates.empty()) return {};
    const std::size_t arity = set.candidates.front().features.values.size();
    std::vector<std::vector<std::size_t>> rankings(arity);
    for (std::size_t f = 0; f < arity; ++f) {
        auto& order = rankings[f];
        order.resize(set.candidates.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double sa = set.candidates[a].features.values[f];
            const double sb = set.candidates[b].features.values[f];
            if (sa != sb) return sa > sb;
            return set.candidates[a].surface < set.candidates[b].surface;
        });
    }
    return rankings;
}

} // namespace ocrpost
