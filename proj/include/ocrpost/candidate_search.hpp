#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ocrpost/candidate.hpp"
#include "ocrpost/detector.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/levenshtein.hpp"
#include "ocrpost/lexicon.hpp"

namespace ocrpost {

struct CandidateSet {
    DetectedError error;
    std::vector<Candidate> candidates;
    std::size_t delta = 3;
};

// Exhaustive scan: distance of every lexicon term against the error surface.
// This is the set definition itself, kept as the reference route and the CLI
// fallback for the trie walk below.
inline std::vector<std::string> search_brute_force(std::string_view error_surface,
                                                   const Lexicon& lexicon, std::size_t delta) {
    if (lexicon.terms.empty()) throw config_error("candidate search over an empty lexicon");
    const std::u32string needle = decode_utf8(error_surface);
    std::vector<std::string> out;
    for (const auto& term : lexicon.terms) {
        if (levenshtein(std::u32string_view(needle), decode_utf8(term)) <= delta) {
            out.push_back(term);
        }
    }
    return out; // lexicon terms are sorted, so the result is too
}

// Character trie over the lexicon with a banded DP walk; rows whose minimum
// exceeds delta prune the whole subtree. Distances are computed over Unicode
// scalar values. Results are sorted and duplicate-free, and always include
// the error surface itself when it is a lexicon term.
class CandidateSearcher {
public:
    explicit CandidateSearcher(const Lexicon& lexicon) : terms_(lexicon.terms) {
        if (terms_.empty()) throw config_error("candidate search over an empty lexicon");
        nodes_.emplace_back();
        for (std::size_t id = 0; id < terms_.size(); ++id) {
            insert(decode_utf8(terms_[id]), static_cast<std::int32_t>(id));
        }
    }

    std::vector<std::string> search(std::string_view error_surface, std::size_t delta) const {
        const std::u32string word = decode_utf8(error_surface);
        const std::size_t m = word.size();
        std::vector<std::string> out;

        std::vector<std::size_t> row(m + 1);
        for (std::size_t j = 0; j <= m; ++j) row[j] = j;
        if (nodes_[0].term >= 0 && row[m] <= delta) {
            out.push_back(terms_[static_cast<std::size_t>(nodes_[0].term)]);
        }
        walk(0, word, row, delta, out);
        return out; // children are visited in codepoint order: output is sorted
    }

private:
    struct Node {
        std::vector<std::pair<char32_t, std::uint32_t>> children; // sorted by codepoint
        std::int32_t term = -1;
    };

    void insert(const std::u32string& term, std::int32_t id) {
        std::uint32_t node = 0;
        for (char32_t c : term) {
            auto& children = nodes_[node].children;
            auto it = std::lower_bound(children.begin(), children.end(), c,
                                       [](const auto& e, char32_t v) { return e.first < v; });
            if (it == children.end() || it->first != c) {
                const auto next = static_cast<std::uint32_t>(nodes_.size());
                it = children.insert(it, {c, next});
                nodes_.emplace_back();
            }
            node = it->second;
        }
        nodes_[node].term = id; // lexicon terms are unique
    }

    void walk(std::uint32_t node, const std::u32string& word, const std::vector<std::size_t>& prev,
              std::size_t delta, std::vector<std::string>& out) const {
        const std::size_t m = word.size();
        std::vector<std::size_t> row(m + 1);
        for (const auto& [ch, child] : nodes_[node].children) {
            row[0] = prev[0] + 1;
            std::size_t row_min = row[0];
            for (std::size_t j = 1; j <= m; ++j) {
                const std::size_t sub = prev[j - 1] + (word[j - 1] == ch ? 0 : 1);
                row[j] = std::min({prev[j] + 1, row[j - 1] + 1, sub});
                row_min = std::min(row_min, row[j]);
            }
            if (nodes_[child].term >= 0 && row[m] <= delta) {
                out.push_back(terms_[static_cast<std::size_t>(nodes_[child].term)]);
            }
            if (row_min <= delta) walk(child, word, row, delta, out);
        }
    }

    std::vector<std::string> terms_; // owned copy; the searcher outlives reloads
    std::vector<Node> nodes_;
};

// Candidate set of one error: all lexicon words within delta, Eq. semantics.
inline std::vector<std::string> search(std::string_view error_surface, const Lexicon& lexicon,
                                       std::size_t delta) {
    return CandidateSearcher(lexicon).search(error_surface, delta);
}

inline CandidateSet build_candidate_set(const DetectedError& error,
                                        const CandidateSearcher& searcher, std::size_t delta) {
    CandidateSet set;
    set.error = error;
    set.delta = delta;
    for (auto& surface : searcher.search(error.token.surface, delta)) {
        Candidate c;
        c.surface = std::move(surface);
        set.candidates.push_back(std::move(c));
    }
    return set;
}

} // namespace ocrpost
