#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "ocrpost/errors.hpp"

namespace ocrpost {

// Decodes UTF-8 into Unicode scalar values. Rejects overlong encodings,
// surrogates and out-of-range scalars; throws parse_error naming the byte
// offset of the first malformed sequence.
inline std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b = static_cast<unsigned char>(text[i]);
        char32_t cp = 0;
        std::size_t len = 0;
        if (b < 0x80) {
            cp = b;
            len = 1;
        } else if ((b >> 5) == 0x6) {
            cp = b & 0x1f;
            len = 2;
        } else if ((b >> 4) == 0xe) {
            cp = b & 0x0f;
            len = 3;
        } else if ((b >> 3) == 0x1e) {
            cp = b & 0x07;
            len = 4;
        } else {
            throw parse_error("invalid UTF-8 byte at offset " + std::to_string(i));
        }
        if (i + len > text.size()) {
            throw parse_error("truncated UTF-8 sequence at offset " + std::to_string(i));
        }
        for (std::size_t k = 1; k < len; ++k) {
            const auto c = static_cast<unsigned char>(text[i + k]);
            if ((c >> 6) != 0x2) {
                throw parse_error("invalid UTF-8 continuation byte at offset " +
                                  std::to_string(i + k));
            }
            cp = (cp << 6) | (c & 0x3f);
        }
        constexpr char32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < min_for_len[len] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
            throw parse_error("invalid UTF-8 scalar at offset " + std::to_string(i));
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) append_utf8(cp, out);
    return out;
}

// Number of Unicode scalar values in a valid UTF-8 string.
inline std::size_t utf8_length(std::string_view text) {
    std::size_t n = 0;
    for (char c : text) {
        if ((static_cast<unsigned char>(c) & 0xc0) != 0x80) ++n;
    }
    return n;
}

} // namespace ocrpost
