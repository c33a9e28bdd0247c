#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ocrpost/errors.hpp"
#include "ocrpost/unicode.hpp"

namespace ocrpost {

// Byte offsets into the source text, half-open.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const Span&, const Span&) = default;
};

inline bool spans_overlap(const Span& a, const Span& b) {
    return std::max(a.begin, b.begin) < std::min(a.end, b.end);
}

enum class TokenKind { word, punctuation, numeric };

// Parent word a token was split out of, recorded for hyphen-split children.
struct TokenOrigin {
    std::string surface;
    Span span;
};

struct Token {
    std::string surface;
    Span span;
    TokenKind kind = TokenKind::word;
    bool filtered = false;
    std::optional<TokenOrigin> origin;
};

// The paper-style tokenization is not enumerated anywhere authoritative, so
// the rule set is data: whitespace split, detachment of leading/trailing
// punctuation runs, internal apostrophes kept inside the word, internal
// hyphens split into child tokens. Every rule can be switched off.
struct TokenizerRules {
    bool detach_punctuation = true;
    bool keep_internal_apostrophes = true;
    bool split_internal_hyphens = true;
    std::u32string hyphen_chars = U"-";
};

namespace detail {

inline bool is_space_cp(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

inline bool is_digit_cp(char32_t c) { return c >= U'0' && c <= U'9'; }

// ASCII punctuation; non-ASCII scalars are treated as word characters
// (the corpus carries ligatures such as U+00E6).
inline bool is_punct_cp(char32_t c) {
    if (c >= 0x80) return false;
    return (c >= U'!' && c <= U'/') || (c >= U':' && c <= U'@') ||
           (c >= U'[' && c <= U'`') || (c >= U'{' && c <= U'~');
}

inline TokenKind classify(std::u32string_view surface) {
    bool all_digits = !surface.empty();
    bool all_punct = !surface.empty();
    for (char32_t c : surface) {
        all_digits = all_digits && is_digit_cp(c);
        all_punct = all_punct && is_punct_cp(c);
    }
    if (all_digits) return TokenKind::numeric;
    if (all_punct) return TokenKind::punctuation;
    return TokenKind::word;
}

} // namespace detail

// Tokenizes UTF-8 text. Deterministic for a fixed rule set; token spans index
// the source bytes, so the source is reconstructible from spans alone.
// Throws parse_error with a byte offset for malformed encodings.
inline std::vector<Token> tokenize(std::string_view text, const TokenizerRules& rules = {}) {
    const std::u32string cps = decode_utf8(text);

    // Byte offset of each scalar, plus one sentinel at text end.
    std::vector<std::size_t> byte_of(cps.size() + 1);
    {
        std::size_t off = 0;
        std::string tmp;
        for (std::size_t k = 0; k < cps.size(); ++k) {
            byte_of[k] = off;
            tmp.clear();
            append_utf8(cps[k], tmp);
            off += tmp.size();
        }
        byte_of[cps.size()] = off;
    }

    std::vector<Token> tokens;
    const auto emit = [&](std::size_t cp_begin, std::size_t cp_end,
                          const std::optional<TokenOrigin>& origin) {
        Span span{byte_of[cp_begin], byte_of[cp_end]};
        Token t;
        t.surface = std::string(text.substr(span.begin, span.end - span.begin));
        t.span = span;
        t.kind = detail::classify(std::u32string_view(cps).substr(cp_begin, cp_end - cp_begin));
        t.origin = origin;
        tokens.push_back(std::move(t));
    };

    const auto is_hyphen = [&](char32_t c) {
        return rules.hyphen_chars.find(c) != std::u32string::npos;
    };

    std::size_t i = 0;
    while (i < cps.size()) {
        if (detail::is_space_cp(cps[i])) {
            ++i;
            continue;
        }
        std::size_t chunk_end = i;
        while (chunk_end < cps.size() && !detail::is_space_cp(cps[chunk_end])) ++chunk_end;

        std::size_t core_begin = i;
        std::size_t core_end = chunk_end;
        if (rules.detach_punctuation) {
            while (core_begin < core_end && detail::is_punct_cp(cps[core_begin])) ++core_begin;
            while (core_end > core_begin && detail::is_punct_cp(cps[core_end - 1])) --core_end;
        }

        // Leading punctuation run, one token per character.
        for (std::size_t k = i; k < core_begin; ++k) emit(k, k + 1, std::nullopt);

        if (core_begin < core_end) {
            // Internal apostrophes optionally become split points.
            std::vector<std::pair<std::size_t, std::size_t>> pieces;
            if (!rules.keep_internal_apostrophes) {
                std::size_t start = core_begin;
                for (std::size_t k = core_begin; k < core_end; ++k) {
                    if (cps[k] == U'\'') {
                        if (start < k) pieces.emplace_back(start, k);
                        pieces.emplace_back(k, k + 1);
                        start = k + 1;
                    }
                }
                if (start < core_end) pieces.emplace_back(start, core_end);
            } else {
                pieces.emplace_back(core_begin, core_end);
            }

            for (auto [piece_begin, piece_end] : pieces) {
                bool has_internal_hyphen = false;
                if (rules.split_internal_hyphens) {
                    for (std::size_t k = piece_begin; k < piece_end; ++k) {
                        if (is_hyphen(cps[k]) && k > piece_begin && k + 1 < piece_end &&
                            !is_hyphen(cps[k - 1])) {
                            has_internal_hyphen = true;
                            break;
                        }
                    }
                }
                if (!has_internal_hyphen) {
                    emit(piece_begin, piece_end, std::nullopt);
                    continue;
                }
                Span parent_span{byte_of[piece_begin], byte_of[piece_end]};
                TokenOrigin origin{
                    std::string(text.substr(parent_span.begin, parent_span.end - parent_span.begin)),
                    parent_span};
                std::size_t start = piece_begin;
                for (std::size_t k = piece_begin; k <= piece_end; ++k) {
                    if (k == piece_end || is_hyphen(cps[k])) {
                        if (start < k) emit(start, k, origin);
                        start = k + 1;
                    }
                }
            }
        }

        // Trailing punctuation run.
        for (std::size_t k = core_end; k < chunk_end; ++k) emit(k, k + 1, std::nullopt);

        i = chunk_end;
    }
    return tokens;
}

// Token filters of the evaluation setup: punctuation, purely numeric tokens
// and common English words. Filtering marks tokens instead of removing them;
// context windows are built over the full stream and need every neighbor.
struct FilterConfig {
    bool filter_punctuation = true;
    bool filter_numeric = true;
    // User-supplied; no default list ships with the artifact. Filtered common
    // words still contribute their original surface as context words.
    std::unordered_set<std::string> common_words;
};

inline std::vector<Token> apply_filters(std::vector<Token> tokens, const FilterConfig& filters) {
    for (Token& t : tokens) {
        t.filtered = (filters.filter_punctuation && t.kind == TokenKind::punctuation) ||
                     (filters.filter_numeric && t.kind == TokenKind::numeric) ||
                     (t.kind == TokenKind::word && filters.common_words.contains(t.surface));
    }
    return tokens;
}

} // namespace ocrpost
