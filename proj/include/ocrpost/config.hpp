#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ocrpost/detector.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/ranker.hpp"
#include "ocrpost/string_similarity.hpp"
#include "ocrpost/tokenizer.hpp"

namespace ocrpost {

struct LexiconSpec {
    std::string name;
    std::string file;
};

// One structured file captures every threshold and path so a run is
// reproducible from the config plus the seed alone. Flags may override
// individual fields per command.
struct Config {
    std::vector<std::string> unigram_files;
    std::vector<std::string> context_files;
    std::optional<std::string> cache_dir;

    // Candidate-search lexicon: a file, or derived from the unigram index.
    std::optional<LexiconSpec> search_lexicon;
    bool search_lexicon_from_unigrams = true;
    std::vector<LexiconSpec> existence_lexicons;

    TokenizerRules tokenizer;
    bool filter_punctuation = true;
    bool filter_numeric = true;
    std::optional<std::string> common_words_file;

    std::size_t window_order = 5;
    std::size_t delta = 3;
    DetectionThresholds thresholds;

    std::array<double, 4> alphas = {0.25, 0.25, 0.25, 0.25};
    SimilarityNormalization similarity_normalization = SimilarityNormalization::as_paper;

    Hyperparameters ranker;
    std::size_t top_k = 10;
    HyperGrid cv_grid;
    std::size_t cv_folds = 10;
    double train_fraction = 0.8;

    std::uint64_t seed = 1;
    std::string model_file = "model.json";
};

namespace detail {

inline void require_file(const std::string& path, const char* what) {
    if (!std::filesystem::exists(path)) {
        throw config_error(std::string(what) + " does not exist: " + path);
    }
}

} // namespace detail

inline Config parse_config(const nlohmann::json& j) {
    Config cfg;
    if (j.contains("indexes")) {
        const auto& idx = j.at("indexes");
        cfg.unigram_files = idx.value("unigram_files", cfg.unigram_files);
        cfg.context_files = idx.value("context_files", cfg.context_files);
        if (idx.contains("cache_dir")) cfg.cache_dir = idx.at("cache_dir").get<std::string>();
    }
    if (j.contains("lexicons")) {
        const auto& lex = j.at("lexicons");
        if (lex.contains("search")) {
            const auto& s = lex.at("search");
            if (s.contains("file")) {
                cfg.search_lexicon = LexiconSpec{s.value("name", std::string("search")),
                                                 s.at("file").get<std::string>()};
                cfg.search_lexicon_from_unigrams = false;
            } else if (s.value("from_unigrams", false)) {
                cfg.search_lexicon_from_unigrams = true;
            }
        }
        for (const auto& e : lex.value("existence", nlohmann::json::array())) {
            cfg.existence_lexicons.push_back(
                {e.at("name").get<std::string>(), e.at("file").get<std::string>()});
        }
    }
    if (j.contains("tokenizer")) {
        const auto& t = j.at("tokenizer");
        cfg.tokenizer.detach_punctuation =
            t.value("detach_punctuation", cfg.tokenizer.detach_punctuation);
        cfg.tokenizer.keep_internal_apostrophes =
            t.value("keep_internal_apostrophes", cfg.tokenizer.keep_internal_apostrophes);
        cfg.tokenizer.split_internal_hyphens =
            t.value("split_internal_hyphens", cfg.tokenizer.split_internal_hyphens);
    }
    if (j.contains("filters")) {
        const auto& f = j.at("filters");
        cfg.filter_punctuation = f.value("punctuation", cfg.filter_punctuation);
        cfg.filter_numeric = f.value("numeric", cfg.filter_numeric);
        if (f.contains("common_words_file")) {
            cfg.common_words_file = f.at("common_words_file").get<std::string>();
        }
    }
    cfg.window_order = j.value("window_order", cfg.window_order);
    cfg.delta = j.value("delta", cfg.delta);
    if (j.contains("detection")) {
        const auto& d = j.at("detection");
        if (d.contains("unigram_threshold_by_length")) {
            cfg.thresholds.unigram_threshold_by_length.clear();
            for (const auto& [key, value] : d.at("unigram_threshold_by_length").items()) {
                cfg.thresholds.unigram_threshold_by_length[std::stoul(key)] =
                    value.get<std::uint64_t>();
            }
        }
        cfg.thresholds.context_threshold =
            d.value("context_threshold", cfg.thresholds.context_threshold);
    }
    cfg.thresholds.window_order = cfg.window_order;
    if (j.contains("scoring")) {
        const auto& s = j.at("scoring");
        if (s.contains("alphas")) {
            const auto a = s.at("alphas").get<std::vector<double>>();
            if (a.size() != 4) throw config_error("scoring.alphas must have 4 entries");
            std::copy(a.begin(), a.end(), cfg.alphas.begin());
        }
        const auto norm = s.value("similarity_normalization", std::string("as-paper"));
        if (norm == "as-paper") {
            cfg.similarity_normalization = SimilarityNormalization::as_paper;
        } else if (norm == "product-of-lengths") {
            cfg.similarity_normalization = SimilarityNormalization::product_of_lengths;
        } else {
            throw config_error("unknown similarity_normalization: " + norm);
        }
    }
    if (j.contains("ranker")) {
        const auto& r = j.at("ranker");
        cfg.ranker.stages = r.value("stages", cfg.ranker.stages);
        cfg.ranker.max_depth = r.value("max_depth", cfg.ranker.max_depth);
        cfg.ranker.min_samples_leaf = r.value("min_samples_leaf", cfg.ranker.min_samples_leaf);
        cfg.top_k = r.value("top_k", cfg.top_k);
        if (r.contains("cv")) {
            const auto& cv = r.at("cv");
            cfg.cv_grid.stages = cv.value("stages", cfg.cv_grid.stages);
            cfg.cv_grid.depths = cv.value("depths", cfg.cv_grid.depths);
            cfg.cv_folds = cv.value("folds", cfg.cv_folds);
        }
    }
    cfg.train_fraction = j.value("train_fraction", cfg.train_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.model_file = j.value("model_file", cfg.model_file);

    if (cfg.window_order < 2) throw config_error("window_order must be >= 2 for context features");
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction > 1.0) {
        throw config_error("train_fraction must lie in (0, 1]");
    }
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("malformed config file " + path + ": " + e.what());
    }
    Config cfg = parse_config(j);
    for (const auto& f : cfg.unigram_files) detail::require_file(f, "unigram file");
    for (const auto& f : cfg.context_files) detail::require_file(f, "n-gram file");
    if (cfg.search_lexicon) detail::require_file(cfg.search_lexicon->file, "search lexicon");
    for (const auto& lex : cfg.existence_lexicons) detail::require_file(lex.file, "lexicon");
    if (cfg.common_words_file) detail::require_file(*cfg.common_words_file, "common-words file");
    return cfg;
}

// One word per line; used for the common-English-words filter.
inline std::unordered_set<std::string> load_word_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open word list: " + path);
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) words.insert(line);
    }
    return words;
}

} // namespace ocrpost
