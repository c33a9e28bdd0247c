#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ocrpost/detector.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/feature_scoring.hpp"
#include "ocrpost/levenshtein.hpp"
#include "ocrpost/ranker.hpp"
#include "ocrpost/tokenizer.hpp"

namespace ocrpost {

// One contiguous mismatch between ground truth and OCR text. Multi-token
// sides are space-joined; splitting and merging mistakes land here naturally.
struct GroundTruthError {
    std::string intended;
    std::string observed;
    Span span;                          // byte span in the OCR text
    std::size_t token_begin = 0;        // OCR token range [begin, end)
    std::size_t token_end = 0;
    std::size_t levenshtein_distance = 0;
};

enum class DetectionCategory { bounded, unbounded, false_positive, missed };

inline const char* to_string(DetectionCategory c) {
    switch (c) {
        case DetectionCategory::bounded: return "bounded";
        case DetectionCategory::unbounded: return "unbounded";
        case DetectionCategory::false_positive: return "false_positive";
        case DetectionCategory::missed: return "missed";
    }
    return "?";
}

struct DetectionOutcome {
    DetectionCategory category = DetectionCategory::missed;
    std::optional<GroundTruthError> ground_truth;
    std::optional<DetectedError> detected;
    // Success counting admits at most one detection per ground-truth error;
    // surplus detections overlapping an already-served error keep their
    // category but are not counted.
    bool counted = true;
};

// ---- alignment -------------------------------------------------------------

namespace detail {

// Move set for the token-level alignment DP: match/substitute, token
// insert/delete, and split/merge up to 3-to-1. Costs combine the
// character-level distance of the concatenations with a small per-token
// penalty so plain matches win ties.
struct AlignMove {
    std::size_t truth_take;
    std::size_t ocr_take;
};

inline constexpr AlignMove kAlignMoves[] = {
    {1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}, {0, 1}, {1, 0},
};

inline std::u32string concat_surfaces(std::span<const Token> tokens, std::size_t begin,
                                      std::size_t count) {
    std::string joined;
    for (std::size_t k = 0; k < count; ++k) joined += tokens[begin + k].surface;
    return decode_utf8(joined);
}

} // namespace detail

// Minimal-cost token alignment between the OCR stream and the truth stream,
// banded around the diagonal. Emits one GroundTruthError per contiguous
// run of non-matching moves. Deterministic; both streams must come from the
// same tokenizer rules.
inline std::vector<GroundTruthError> align(const std::vector<Token>& ocr_tokens,
                                           const std::vector<Token>& truth_tokens,
                                           std::size_t band = 256) {
    if (truth_tokens.empty()) throw usage_error("alignment requires a non-empty truth stream");

    const std::size_t T = truth_tokens.size();
    const std::size_t O = ocr_tokens.size();
    const std::size_t size_gap = T > O ? T - O : O - T;
    band = std::max(band, 2 * size_gap + 8);

    constexpr std::uint64_t kInf = ~0ull;
    const auto in_band = [&](std::size_t i, std::size_t j) {
        const auto center = static_cast<std::ptrdiff_t>(j);
        const auto pos = static_cast<std::ptrdiff_t>(i);
        return pos - center <= static_cast<std::ptrdiff_t>(band) &&
               center - pos <= static_cast<std::ptrdiff_t>(band);
    };

    // cost[i][j]: aligning the first i truth tokens with the first j OCR
    // tokens. Stored sparsely per row over the band.
    const std::size_t width = 2 * band + 1;
    const auto col_of = [&](std::size_t i, std::size_t j) -> std::size_t {
        return j + band - i; // valid when in_band(i, j)
    };
    std::vector<std::uint64_t> cost((T + 1) * width, kInf);
    std::vector<std::uint8_t> move((T + 1) * width, 0xff);
    const auto at = [&](std::size_t i, std::size_t j) -> std::size_t {
        return i * width + col_of(i, j);
    };

    const auto char_len = [](const Token& t) { return utf8_length(t.surface); };

    cost[at(0, 0)] = 0;
    for (std::size_t i = 0; i <= T; ++i) {
        for (std::size_t j = (i > band ? i - band : 0); j <= std::min(O, i + band); ++j) {
            const std::uint64_t here = cost[at(i, j)];
            if (here == kInf) continue;
            for (std::uint8_t m = 0; m < std::size(detail::kAlignMoves); ++m) {
                const auto [dt, doc] = detail::kAlignMoves[m];
                const std::size_t ni = i + dt, nj = j + doc;
                if (ni > T || nj > O || !in_band(ni, nj)) continue;
                std::uint64_t step;
                if (dt == 1 && doc == 1 &&
                    truth_tokens[i].surface == ocr_tokens[j].surface) {
                    step = 0;
                } else if (dt == 0) {
                    step = 4 * char_len(ocr_tokens[j]) + 1;
                } else if (doc == 0) {
                    step = 4 * char_len(truth_tokens[i]) + 1;
                } else {
                    const auto a = detail::concat_surfaces(truth_tokens, i, dt);
                    const auto b = detail::concat_surfaces(ocr_tokens, j, doc);
                    step = 4 * levenshtein(std::u32string_view(a), std::u32string_view(b)) +
                           (dt - 1) + (doc - 1);
                }
                const std::uint64_t total = here + step;
                auto& slot = cost[at(ni, nj)];
                if (total < slot) {
                    slot = total;
                    move[at(ni, nj)] = m;
                }
            }
        }
    }
    if (cost[at(T, O)] == kInf) {
        throw usage_error("alignment band exhausted; raise the band parameter");
    }

    // Backtrace into (move, i, j) steps, then group non-match runs.
    struct Step {
        std::size_t truth_begin, truth_end;
        std::size_t ocr_begin, ocr_end;
        bool is_match;
    };
    std::vector<Step> steps;
    {
        std::size_t i = T, j = O;
        while (i != 0 || j != 0) {
            const auto m = move[at(i, j)];
            const auto [dt, doc] = detail::kAlignMoves[m];
            const std::size_t pi = i - dt, pj = j - doc;
            const bool is_match = dt == 1 && doc == 1 &&
                                  truth_tokens[pi].surface == ocr_tokens[pj].surface;
            steps.push_back({pi, i, pj, j, is_match});
            i = pi;
            j = pj;
        }
        std::reverse(steps.begin(), steps.end());
    }

    std::vector<GroundTruthError> errors;
    std::size_t k = 0;
    while (k < steps.size()) {
        if (steps[k].is_match) {
            ++k;
            continue;
        }
        std::size_t end = k;
        while (end < steps.size() && !steps[end].is_match) ++end;

        GroundTruthError err;
        err.token_begin = steps[k].ocr_begin;
        err.token_end = steps[end - 1].ocr_end;
        for (std::size_t s = k; s < end; ++s) {
            for (std::size_t t = steps[s].truth_begin; t < steps[s].truth_end; ++t) {
                if (!err.intended.empty()) err.intended += ' ';
                err.intended += truth_tokens[t].surface;
            }
            for (std::size_t o = steps[s].ocr_begin; o < steps[s].ocr_end; ++o) {
                if (!err.observed.empty()) err.observed += ' ';
                err.observed += ocr_tokens[o].surface;
            }
        }
        if (err.token_begin < err.token_end) {
            err.span = {ocr_tokens[err.token_begin].span.begin,
                        ocr_tokens[err.token_end - 1].span.end};
        } else if (err.token_begin < ocr_tokens.size()) {
            // Pure truth-side deletion: empty span at the gap position.
            err.span = {ocr_tokens[err.token_begin].span.begin,
                        ocr_tokens[err.token_begin].span.begin};
        } else if (!ocr_tokens.empty()) {
            err.span = {ocr_tokens.back().span.end, ocr_tokens.back().span.end};
        }
        err.levenshtein_distance = levenshtein(err.intended, err.observed);
        errors.push_back(std::move(err));
        k = end;
    }
    return errors;
}

// ---- categorization --------------------------------------------------------

// Bounded: detection span equals the truth span exactly. Unbounded: spans
// overlap but differ; at most one per truth error is counted. Detections
// overlapping no truth error are false positives whose intended word is the
// word itself. Every detection and every truth error lands in exactly one
// category.
inline std::vector<DetectionOutcome> categorize(const std::vector<DetectedError>& detections,
                                                const std::vector<GroundTruthError>& truth) {
    std::vector<DetectionOutcome> outcomes;
    std::vector<bool> detection_used(detections.size(), false);
    std::vector<std::optional<std::size_t>> detection_truth(detections.size());

    for (const auto& gt : truth) {
        std::optional<std::size_t> exact, overlap;
        for (std::size_t d = 0; d < detections.size(); ++d) {
            if (detection_used[d]) continue;
            const Span& ds = detections[d].token.span;
            if (ds == gt.span && !exact) exact = d;
            if (spans_overlap(ds, gt.span)) {
                if (!overlap) overlap = d;
                detection_truth[d] = outcomes.size();
            }
        }
        DetectionOutcome out;
        out.ground_truth = gt;
        if (exact) {
            out.category = DetectionCategory::bounded;
            out.detected = detections[*exact];
            detection_used[*exact] = true;
        } else if (overlap) {
            out.category = DetectionCategory::unbounded;
            out.detected = detections[*overlap];
            detection_used[*overlap] = true;
        } else {
            out.category = DetectionCategory::missed;
        }
        outcomes.push_back(std::move(out));
    }

    for (std::size_t d = 0; d < detections.size(); ++d) {
        if (detection_used[d]) continue;
        DetectionOutcome out;
        out.detected = detections[d];
        if (detection_truth[d]) {
            // Surplus detection on an already-served truth error.
            out.category = DetectionCategory::unbounded;
            out.ground_truth = outcomes[*detection_truth[d]].ground_truth;
            out.counted = false;
        } else {
            out.category = DetectionCategory::false_positive;
            GroundTruthError self;
            self.intended = detections[d].token.surface;
            self.observed = detections[d].token.surface;
            self.span = detections[d].token.span;
            self.token_begin = detections[d].token_position;
            self.token_end = detections[d].token_position + 1;
            self.levenshtein_distance = 0;
            out.ground_truth = std::move(self);
        }
        outcomes.push_back(std::move(out));
    }
    return outcomes;
}

// ---- metrics ---------------------------------------------------------------

struct ConfusionMatrix {
    std::uint64_t error_detected = 0;    // truth errors with a counted detection
    std::uint64_t error_missed = 0;      // truth errors nothing overlapped
    std::uint64_t correct_detected = 0;  // false positives
    std::uint64_t correct_undetected = 0;

    std::uint64_t total() const {
        return error_detected + error_missed + correct_detected + correct_undetected;
    }
};

struct MetricsReport {
    ConfusionMatrix confusion;
    std::uint64_t bounded = 0;
    std::uint64_t unbounded = 0;
    std::uint64_t false_positives = 0;
    std::uint64_t missed = 0;
    double recall_total = 0.0;
    double recall_bounded = 0.0;
    double recall_unbounded = 0.0;
    // P@n per category plus "true_positive" (bounded+unbounded) and "total".
    std::map<std::string, std::map<std::size_t, double>> precision_at;
    std::map<std::string, std::size_t> evaluated_errors;
};

// Confusion counts per the recall-oriented reading: the actual-error row is
// counted per truth error, the actual-correct row per evaluatable OCR token
// (non-punctuation tokens outside every truth-error span).
inline ConfusionMatrix confusion_matrix(const std::vector<DetectionOutcome>& outcomes,
                                        const std::vector<Token>& ocr_tokens) {
    ConfusionMatrix m;
    std::vector<Span> truth_spans;
    for (const auto& out : outcomes) {
        if (!out.counted) continue;
        switch (out.category) {
            case DetectionCategory::bounded:
            case DetectionCategory::unbounded:
                ++m.error_detected;
                truth_spans.push_back(out.ground_truth->span);
                break;
            case DetectionCategory::missed:
                ++m.error_missed;
                truth_spans.push_back(out.ground_truth->span);
                break;
            case DetectionCategory::false_positive:
                ++m.correct_detected;
                break;
        }
    }
    std::uint64_t evaluatable = 0;
    for (const auto& t : ocr_tokens) {
        if (t.kind == TokenKind::punctuation) continue;
        bool inside = false;
        for (const auto& s : truth_spans) {
            if (spans_overlap(t.span, s)) {
                inside = true;
                break;
            }
        }
        if (!inside) ++evaluatable;
    }
    m.correct_undetected = evaluatable - std::min<std::uint64_t>(evaluatable, m.correct_detected);
    return m;
}

// P@n = fraction of evaluated errors whose intended word appears in the top n
// ranked candidates.
inline std::map<std::size_t, double>
precision_at(const std::vector<std::pair<std::string, std::vector<std::string>>>& ranked_per_error,
             const std::set<std::size_t>& ns) {
    std::map<std::size_t, double> result;
    const std::size_t total = ranked_per_error.size();
    for (std::size_t n : ns) {
        std::size_t hits = 0;
        for (const auto& [intended, ranked] : ranked_per_error) {
            const std::size_t limit = std::min(n, ranked.size());
            for (std::size_t i = 0; i < limit; ++i) {
                if (ranked[i] == intended) {
                    ++hits;
                    break;
                }
            }
        }
        result[n] = total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
    }
    return result;
}

// ---- candidate-pool analyses ------------------------------------------------

struct EvaluationItem {
    DetectedError error;
    std::string intended;
    DetectionCategory category = DetectionCategory::bounded;
};

struct CoverageRow {
    std::string category;
    std::size_t located = 0;       // intended word inside the pooled top-k
    std::size_t total = 0;         // all errors of this category
    std::size_t in_scope = 0;      // errors with dist(intended, observed) <= delta
    double pct_among_all = 0.0;
    double pct_in_scope = 0.0;
};

namespace detail {

inline void accumulate_coverage(CoverageRow& row, bool located, bool in_scope) {
    ++row.total;
    if (in_scope) ++row.in_scope;
    if (located) ++row.located;
}

inline void finish_coverage(CoverageRow& row) {
    row.pct_among_all =
        row.total == 0 ? 0.0 : static_cast<double>(row.located) / static_cast<double>(row.total);
    row.pct_in_scope = row.in_scope == 0
                           ? 0.0
                           : static_cast<double>(row.located) / static_cast<double>(row.in_scope);
}

} // namespace detail

// Fraction of errors whose intended word lands inside the union-of-top-k
// candidate pool, reported among all errors and among errors within search
// scope (distance <= delta). The pool is the same union used for training.
inline std::vector<CoverageRow> coverage_upper_bound(std::span<const EvaluationItem> items,
                                                     const ScoringResources& resources,
                                                     const CandidateSearcher& searcher,
                                                     std::size_t top_k = 10) {
    std::map<std::string, CoverageRow> rows;
    const auto category_keys = {"bounded", "unbounded", "true_positive", "false_positive", "total"};
    for (const auto* key : category_keys) rows[key].category = key;

    for (const auto& item : items) {
        CandidateSet set = build_candidate_set(item.error, searcher, resources.delta);
        bool located = false;
        if (!set.candidates.empty()) {
            score_all(set, resources);
            const auto rankings = per_feature_rankings(set);
            for (const auto& order : rankings) {
                for (std::size_t r = 0; r < std::min(top_k, order.size()) && !located; ++r) {
                    located = set.candidates[order[r]].surface == item.intended;
                }
                if (located) break;
            }
        }
        const bool in_scope =
            levenshtein(item.intended, item.error.token.surface) <= resources.delta;

        detail::accumulate_coverage(rows[to_string(item.category)], located, in_scope);
        if (item.category == DetectionCategory::bounded ||
            item.category == DetectionCategory::unbounded) {
            detail::accumulate_coverage(rows["true_positive"], located, in_scope);
        }
        detail::accumulate_coverage(rows["total"], located, in_scope);
    }

    std::vector<CoverageRow> out;
    for (const auto* key : category_keys) {
        detail::finish_coverage(rows[key]);
        out.push_back(rows[key]);
    }
    return out;
}

// Distinctiveness analysis: for each feature, how many corrections it locates
// in its top-k, bucketed by how many features locate the same correction.
struct DistinctivenessReport {
    std::vector<std::string> feature_names;
    // counts[f][m-1]: corrections located by feature f that are located by
    // exactly m features in total.
    std::vector<std::vector<std::size_t>> counts;
    std::size_t located_any = 0; // corrections located by at least one feature
    std::size_t total_errors = 0;
};

inline DistinctivenessReport feature_distinctiveness(std::span<const EvaluationItem> items,
                                                     const ScoringResources& resources,
                                                     const CandidateSearcher& searcher,
                                                     std::size_t top_k = 10) {
    DistinctivenessReport report;
    report.feature_names = feature_names(resources);
    const std::size_t arity = report.feature_names.size();
    report.counts.assign(arity, std::vector<std::size_t>(arity, 0));
    report.total_errors = items.size();

    for (const auto& item : items) {
        CandidateSet set = build_candidate_set(item.error, searcher, resources.delta);
        if (set.candidates.empty()) continue;
        score_all(set, resources);
        const auto rankings = per_feature_rankings(set);

        std::vector<bool> located(arity, false);
        std::size_t located_count = 0;
        for (std::size_t f = 0; f < arity; ++f) {
            const auto& order = rankings[f];
            for (std::size_t r = 0; r < std::min(top_k, order.size()); ++r) {
                if (set.candidates[order[r]].surface == item.intended) {
                    located[f] = true;
                    ++located_count;
                    break;
                }
            }
        }
        if (located_count == 0) continue;
        ++report.located_any;
        for (std::size_t f = 0; f < arity; ++f) {
            if (located[f]) ++report.counts[f][located_count - 1];
        }
    }
    return report;
}

// ---- synthetic corruption ----------------------------------------------------

struct ConfusionRule {
    std::string from; // substring to corrupt
    std::string to;
    double probability = 0.0;
};

struct NoiseSpec {
    std::vector<ConfusionRule> confusions;
    double split_probability = 0.0;
    double merge_probability = 0.0;
};

struct SynthesisResult {
    std::string text;
    std::vector<GroundTruthError> errors; // spans index the corrupted text
};

// Corrupts whitespace-delimited chunks of a clean text with character
// confusions, splits and merges, at most one edit per chunk. Deterministic
// per seed; the emitted error list is exact, and splicing every error's
// intended string over its span restores the clean text.
inline SynthesisResult synth_corrupt(std::string_view clean_text, const NoiseSpec& noise,
                                     std::uint64_t seed) {
    for (const auto& rule : noise.confusions) {
        if (rule.probability < 0.0 || rule.probability > 1.0 || rule.from.empty()) {
            throw config_error("confusion rule needs non-empty source and probability in [0,1]");
        }
    }
    if (noise.split_probability < 0.0 || noise.split_probability > 1.0 ||
        noise.merge_probability < 0.0 || noise.merge_probability > 1.0) {
        throw config_error("split/merge probabilities must lie in [0,1]");
    }

    struct Chunk {
        std::string_view text;
        std::string_view gap_after; // whitespace following the chunk
    };
    std::vector<Chunk> chunks;
    std::string_view leading_gap;
    {
        std::size_t i = 0;
        const auto is_ws = [&](char c) {
            return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        };
        std::size_t gap_start = 0;
        while (i < clean_text.size() && is_ws(clean_text[i])) ++i;
        leading_gap = clean_text.substr(gap_start, i);
        while (i < clean_text.size()) {
            const std::size_t begin = i;
            while (i < clean_text.size() && !is_ws(clean_text[i])) ++i;
            const std::size_t end = i;
            while (i < clean_text.size() && is_ws(clean_text[i])) ++i;
            chunks.push_back({clean_text.substr(begin, end - begin),
                              clean_text.substr(end, i - end)});
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    SynthesisResult result;
    result.text.reserve(clean_text.size() + 64);
    result.text += leading_gap;

    std::size_t c = 0;
    while (c < chunks.size()) {
        const std::string original(chunks[c].text);
        std::string corrupted = original;
        bool edited = false;
        std::size_t consumed = 1;

        // Merge joins this chunk with the next, dropping the gap.
        if (!edited && c + 1 < chunks.size() && noise.merge_probability > 0.0 &&
            coin(rng) < noise.merge_probability) {
            corrupted = original + std::string(chunks[c + 1].text);
            edited = true;
            consumed = 2;
        }

        // Character confusion: first applicable rule decides for this chunk.
        if (!edited) {
            for (const auto& rule : noise.confusions) {
                const auto pos = original.find(rule.from);
                if (pos == std::string::npos) continue;
                if (coin(rng) < rule.probability) {
                    // Pick one occurrence uniformly.
                    std::vector<std::size_t> occurrences;
                    for (std::size_t p = original.find(rule.from); p != std::string::npos;
                         p = original.find(rule.from, p + 1)) {
                        occurrences.push_back(p);
                    }
                    std::uniform_int_distribution<std::size_t> pick(0, occurrences.size() - 1);
                    const std::size_t at = occurrences[pick(rng)];
                    corrupted = original.substr(0, at) + rule.to +
                                original.substr(at + rule.from.size());
                    edited = corrupted != original;
                }
                break;
            }
        }

        // Split inserts one space at a random interior codepoint boundary.
        if (!edited && noise.split_probability > 0.0 && original.size() >= 2 &&
            coin(rng) < noise.split_probability) {
            std::vector<std::size_t> boundaries;
            for (std::size_t p = 1; p < original.size(); ++p) {
                if ((static_cast<unsigned char>(original[p]) & 0xc0) != 0x80) {
                    boundaries.push_back(p);
                }
            }
            if (!boundaries.empty()) {
                std::uniform_int_distribution<std::size_t> pick(0, boundaries.size() - 1);
                const std::size_t at = boundaries[pick(rng)];
                corrupted = original.substr(0, at) + " " + original.substr(at);
                edited = true;
            }
        }

        const std::size_t begin = result.text.size();
        result.text += corrupted;
        const std::size_t end = result.text.size();
        if (edited) {
            GroundTruthError err;
            err.intended = consumed == 2
                               ? original + std::string(chunks[c].gap_after) +
                                     std::string(chunks[c + 1].text)
                               : original;
            err.observed = corrupted;
            err.span = {begin, end};
            err.levenshtein_distance = levenshtein(err.intended, err.observed);
            result.errors.push_back(std::move(err));
        }
        result.text += chunks[c + consumed - 1].gap_after;
        c += consumed;
    }
    return result;
}

// Restores the clean text from a synthesis result by splicing each error's
// intended string over its span, right to left.
inline std::string invert_corruption(const SynthesisResult& result) {
    std::string text = result.text;
    for (auto it = result.errors.rbegin(); it != result.errors.rend(); ++it) {
        text.replace(it->span.begin, it->span.end - it->span.begin, it->intended);
    }
    return text;
}

} // namespace ocrpost
