#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ocrpost/candidate_search.hpp"
#include "ocrpost/config.hpp"
#include "ocrpost/detector.hpp"
#include "ocrpost/evaluation.hpp"
#include "ocrpost/feature_scoring.hpp"
#include "ocrpost/lexicon.hpp"
#include "ocrpost/ngram_index.hpp"
#include "ocrpost/ranker.hpp"
#include "ocrpost/tokenizer.hpp"

namespace ocrpost {

// Loaded, immutable working set for one configuration. Build once, share
// across threads freely.
struct Resources {
    Config config;
    NgramIndex unigrams;
    NgramIndex contexts;
    Lexicon search_lexicon;
    std::vector<Lexicon> existence_lexicons;
    FilterConfig filters;
    std::unique_ptr<CandidateSearcher> searcher;

    ScoringResources scoring() const {
        ScoringResources r;
        r.unigrams = &unigrams;
        r.contexts = &contexts;
        for (const auto& lex : existence_lexicons) r.existence_lexicons.push_back(&lex);
        r.delta = config.delta;
        r.alphas = config.alphas;
        r.similarity_normalization = config.similarity_normalization;
        return r;
    }
};

namespace detail {

inline NgramIndex load_index_cached(const std::vector<std::string>& files, std::size_t order,
                                    const std::optional<std::string>& cache_dir) {
    if (cache_dir) {
        const auto cache_path = (std::filesystem::path(*cache_dir) /
                                 ("ngrams-" + std::to_string(order) + ".idx"))
                                    .string();
        if (auto cached = NgramIndex::load_cache(cache_path, order)) return std::move(*cached);
        NgramIndex index = NgramIndex::build_from_files(files, order);
        std::filesystem::create_directories(*cache_dir);
        index.save_cache(cache_path);
        return index;
    }
    return NgramIndex::build_from_files(files, order);
}

} // namespace detail

inline Resources load_resources(Config config) {
    Resources res;
    res.unigrams = detail::load_index_cached(config.unigram_files, 1, config.cache_dir);
    res.contexts =
        detail::load_index_cached(config.context_files, config.window_order, config.cache_dir);

    if (config.search_lexicon) {
        res.search_lexicon = load_lexicon(config.search_lexicon->file, config.search_lexicon->name);
    } else {
        res.search_lexicon = lexicon_from_unigrams(res.unigrams, "unigrams");
    }
    for (const auto& spec : config.existence_lexicons) {
        res.existence_lexicons.push_back(load_lexicon(spec.file, spec.name));
    }

    res.filters.filter_punctuation = config.filter_punctuation;
    res.filters.filter_numeric = config.filter_numeric;
    if (config.common_words_file) {
        res.filters.common_words = load_word_set(*config.common_words_file);
    }

    res.searcher = std::make_unique<CandidateSearcher>(res.search_lexicon);
    res.config = std::move(config);
    return res;
}

struct DetectionRun {
    std::vector<Token> tokens;
    std::vector<DetectedError> errors;
};

inline DetectionRun run_detection(std::string_view text, const Resources& res) {
    DetectionRun run;
    run.tokens = apply_filters(tokenize(text, res.config.tokenizer), res.filters);
    run.errors = detect(run.tokens, res.contexts, res.unigrams, res.config.thresholds);
    return run;
}

// Candidate search plus the full feature sweep for one detected error.
inline CandidateSet suggest_candidates(const DetectedError& error, const Resources& res) {
    CandidateSet set = build_candidate_set(error, *res.searcher, res.config.delta);
    score_all(set, res.scoring());
    return set;
}

// Ground-truth pairing: detections categorized against the aligned truth.
// Counted bounded/unbounded detections and false positives become evaluation
// items; a false positive's intended word is the word itself.
inline std::vector<EvaluationItem> build_evaluation_items(
    const std::vector<DetectionOutcome>& outcomes) {
    std::vector<EvaluationItem> items;
    for (const auto& out : outcomes) {
        if (!out.counted || !out.detected) continue;
        if (out.category == DetectionCategory::missed) continue;
        items.push_back({*out.detected, out.ground_truth->intended, out.category});
    }
    return items;
}

// Seeded split by error, never by candidate row.
struct TrainTestSplit {
    std::vector<EvaluationItem> train;
    std::vector<EvaluationItem> test;
};

inline TrainTestSplit split_items(const std::vector<EvaluationItem>& items, double train_fraction,
                                  std::uint64_t seed) {
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto cut = static_cast<std::size_t>(train_fraction * static_cast<double>(items.size()));
    TrainTestSplit split;
    for (std::size_t k = 0; k < order.size(); ++k) {
        (k < cut ? split.train : split.test).push_back(items[order[k]]);
    }
    return split;
}

inline std::vector<LabeledError> to_labeled(const std::vector<EvaluationItem>& items) {
    std::vector<LabeledError> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back({item.error, item.intended});
    return out;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open input file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Applies the top-ranked candidate of every detected error to the text.
// Errors without candidates stay untouched; substitution is right-to-left so
// byte spans stay valid.
inline std::string apply_corrections(std::string_view text,
                                     const std::vector<std::pair<Span, std::string>>& replacements) {
    std::string out(text);
    std::vector<std::pair<Span, std::string>> sorted(replacements);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first.begin > b.first.begin; });
    for (const auto& [span, replacement] : sorted) {
        out.replace(span.begin, span.end - span.begin, replacement);
    }
    return out;
}

} // namespace ocrpost
