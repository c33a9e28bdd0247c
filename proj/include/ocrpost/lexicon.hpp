#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "ocrpost/errors.hpp"
#include "ocrpost/ngram_index.hpp"

namespace ocrpost {

// A named term set over the lexicon alphabet, optionally carrying per-term
// frequencies (present when built from a unigram corpus). Immutable after
// load; terms are kept sorted and unique.
struct Lexicon {
    std::string name;
    std::vector<std::string> terms;
    std::vector<std::uint64_t> frequencies; // parallel to terms; empty when absent

    bool contains(std::string_view term) const {
        return std::binary_search(terms.begin(), terms.end(), term);
    }

    std::uint64_t frequency(std::string_view term) const {
        if (frequencies.empty()) return 0;
        auto it = std::lower_bound(terms.begin(), terms.end(), term);
        if (it == terms.end() || *it != term) return 0;
        return frequencies[static_cast<std::size_t>(it - terms.begin())];
    }

    std::size_t size() const { return terms.size(); }
    bool has_frequencies() const { return !frequencies.empty(); }
};

namespace detail {

inline Lexicon finish_lexicon(std::string name,
                              std::vector<std::pair<std::string, std::uint64_t>> entries,
                              bool with_frequencies) {
    std::sort(entries.begin(), entries.end());
    Lexicon lex;
    lex.name = std::move(name);
    lex.terms.reserve(entries.size());
    if (with_frequencies) lex.frequencies.reserve(entries.size());
    for (auto& [term, freq] : entries) {
        if (!lex.terms.empty() && lex.terms.back() == term) {
            if (with_frequencies) {
                lex.frequencies.back() = checked_add(lex.frequencies.back(), freq);
            }
            continue;
        }
        lex.terms.push_back(std::move(term));
        if (with_frequencies) lex.frequencies.push_back(freq);
    }
    return lex;
}

} // namespace detail

// Loads a lexicon file: UTF-8, one term per line, optional TAB + decimal
// frequency. A unigram corpus file is directly usable as a lexicon.
inline Lexicon load_lexicon(const std::string& path, const std::string& name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open lexicon file: " + path);
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    bool any_freq = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto where = path + ":" + std::to_string(line_no);
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            entries.emplace_back(line, 1);
            continue;
        }
        const std::string term = line.substr(0, tab);
        if (term.empty()) throw parse_error(where + ": empty term");
        std::uint64_t freq = 0;
        const std::string_view count_text(line.data() + tab + 1, line.size() - tab - 1);
        if (count_text.empty()) throw parse_error(where + ": missing frequency");
        for (char c : count_text) {
            if (c < '0' || c > '9') throw parse_error(where + ": malformed frequency");
            freq = freq * 10 + static_cast<std::uint64_t>(c - '0');
        }
        if (freq < 1) throw parse_error(where + ": frequency must be >= 1");
        any_freq = true;
        entries.emplace_back(term, freq);
    }
    return detail::finish_lexicon(name, std::move(entries), any_freq);
}

// Derives the language lexicon from a unigram index, the evaluation-setup
// construction.
inline Lexicon lexicon_from_unigrams(const NgramIndex& unigrams, const std::string& name) {
    if (unigrams.order() != 1) {
        throw usage_error("lexicon construction requires an order-1 index");
    }
    std::vector<std::pair<std::string, std::uint64_t>> entries;
    entries.reserve(unigrams.entry_count());
    unigrams.for_each_gram(
        [&](const std::string& key, std::uint64_t count) { entries.emplace_back(key, count); });
    return detail::finish_lexicon(name, std::move(entries), true);
}

} // namespace ocrpost
