#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ocrpost/errors.hpp"
#include "ocrpost/ngram_index.hpp"
#include "ocrpost/tokenizer.hpp"
#include "ocrpost/unicode.hpp"

namespace ocrpost {

// One n-token sliding window around a focus token, as surfaces.
struct ContextWindow {
    std::vector<std::string> words;
    std::size_t focus = 0; // position of the examined token inside the window
};

struct DetectedError {
    Token token;
    std::size_t token_position = 0; // index in the token stream
    std::vector<ContextWindow> contexts;
    std::uint64_t unigram_freq = 0;
};

struct DetectionThresholds {
    // Minimum unigram count per word length; lengths past the largest key
    // extend the last entry. The paper only states that the threshold varies
    // with word length, so the values are configuration.
    std::map<std::size_t, std::uint64_t> unigram_threshold_by_length = {
        {1, 1000000}, {2, 100000}, {3, 10000}, {4, 1000}, {5, 1000}, {6, 1000}, {7, 200}};
    std::uint64_t context_threshold = 1; // any attested context suffices
    std::size_t window_order = 5;

    std::uint64_t unigram_threshold(std::size_t word_length) const {
        if (unigram_threshold_by_length.empty()) {
            throw config_error("unigram_threshold_by_length must not be empty");
        }
        auto it = unigram_threshold_by_length.upper_bound(word_length);
        if (it == unigram_threshold_by_length.begin()) return it->second;
        return std::prev(it)->second;
    }
};

// Every contiguous n-window of the (unfiltered) token stream containing
// `position`, clipped at text boundaries. An interior token of a long enough
// text gets exactly n windows; a text shorter than n gets none.
inline std::vector<ContextWindow> collect_contexts(const std::vector<Token>& tokens,
                                                   std::size_t position, std::size_t n) {
    if (n < 1) throw usage_error("window order must be >= 1");
    if (position >= tokens.size()) throw usage_error("token position out of range");
    std::vector<ContextWindow> windows;
    if (tokens.size() < n) return windows;
    const std::size_t lo = position + 1 >= n ? position + 1 - n : 0;
    const std::size_t hi = std::min(position, tokens.size() - n);
    for (std::size_t start = lo; start <= hi; ++start) {
        ContextWindow w;
        w.words.reserve(n);
        for (std::size_t k = 0; k < n; ++k) w.words.push_back(tokens[start + k].surface);
        w.focus = position - start;
        windows.push_back(std::move(w));
    }
    return windows;
}

// Flags suspected errors. A non-filtered word token survives only when both
// conditions hold: its unigram count exceeds the length-dependent threshold,
// and at least one of its n-gram contexts reaches the context threshold.
// Failing either condition makes it a DetectedError.
inline std::vector<DetectedError> detect(const std::vector<Token>& tokens,
                                         const NgramIndex& context_index,
                                         const NgramIndex& unigram_index,
                                         const DetectionThresholds& thresholds) {
    std::vector<DetectedError> errors;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.filtered || t.kind != TokenKind::word) continue;

        const std::uint64_t f1 = unigram_index.freq({t.surface});
        const bool unigram_pass = f1 > thresholds.unigram_threshold(utf8_length(t.surface));

        auto windows = collect_contexts(tokens, i, thresholds.window_order);
        std::uint64_t best = 0;
        for (const auto& w : windows) best = std::max(best, context_index.freq(w.words));
        const bool context_pass = best >= thresholds.context_threshold;

        if (unigram_pass && context_pass) continue;
        errors.push_back({t, i, std::move(windows), f1});
    }
    return errors;
}

// Highest attested context count of one error, for reporting.
inline std::uint64_t best_context_freq(const DetectedError& error, const NgramIndex& context_index) {
    std::uint64_t best = 0;
    for (const auto& w : error.contexts) best = std::max(best, context_index.freq(w.words));
    return best;
}

} // namespace ocrpost
