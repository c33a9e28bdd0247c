#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ocrpost/errors.hpp"

namespace ocrpost {

struct NgramRecord {
    std::vector<std::string> tokens;
    std::uint64_t count = 0;
};

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    if (a > std::numeric_limits<std::uint64_t>::max() - b) {
        throw parse_error("n-gram count overflow on summation");
    }
    return a + b;
}

inline std::string join_gram(std::span<const std::string> tokens) {
    std::string key;
    std::size_t total = tokens.size();
    for (const auto& t : tokens) total += t.size();
    key.reserve(total);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) key.push_back(' ');
        key += tokens[i];
    }
    return key;
}

inline std::vector<std::string> split_gram(std::string_view key) {
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (start <= key.size()) {
        std::size_t sp = key.find(' ', start);
        if (sp == std::string_view::npos) {
            tokens.emplace_back(key.substr(start));
            break;
        }
        tokens.emplace_back(key.substr(start, sp - start));
        start = sp + 1;
    }
    return tokens;
}

// Mask key: the gram with one position elided. Unambiguous inside the
// per-position map.
inline std::string masked_key(std::span<const std::string> tokens, std::size_t wild) {
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i == wild) continue;
        if (!key.empty()) key.push_back(' ');
        key += tokens[i];
    }
    return key;
}

} // namespace detail

// Immutable frequency store for n-grams of one order, with exact lookup and
// one-wildcard lookup. Wildcard sums are precomputed per mask position at
// build time: relaxed queries dominate the scoring hot path.
//
// freq() gives 0 for any gram that was never ingested. The wildcard matches
// any valid unigram, including the token originally at the masked position,
// so relaxed_freq(g, p) >= freq(g) always.
class NgramIndex {
public:
    NgramIndex() = default;

    std::size_t order() const { return order_; }
    std::size_t entry_count() const { return exact_.size(); }
    std::size_t vocab_size() const { return vocab_.size(); }
    std::uint64_t total_count() const { return total_count_; }

    std::uint64_t freq(std::span<const std::string> gram) const {
        require_arity(gram.size());
        auto it = exact_.find(detail::join_gram(gram));
        return it == exact_.end() ? 0 : it->second;
    }

    std::uint64_t freq(std::initializer_list<std::string> gram) const {
        return freq(std::span<const std::string>(gram.begin(), gram.size()));
    }

    // Sum of exact counts over all stored grams equal to `gram` everywhere
    // but at wild_position.
    std::uint64_t relaxed_freq(std::span<const std::string> gram, std::size_t wild_position) const {
        require_arity(gram.size());
        if (wild_position >= order_) {
            throw usage_error("wildcard position " + std::to_string(wild_position) +
                              " out of range for order " + std::to_string(order_));
        }
        const auto& map = masked_[wild_position];
        auto it = map.find(detail::masked_key(gram, wild_position));
        return it == map.end() ? 0 : it->second.total;
    }

    std::uint64_t relaxed_freq(std::initializer_list<std::string> gram, std::size_t wild_position) const {
        return relaxed_freq(std::span<const std::string>(gram.begin(), gram.size()), wild_position);
    }

    // Per-filler breakdown of one mask, sorted by filler token. Empty when the
    // mask is unknown.
    std::vector<std::pair<std::string, std::uint64_t>>
    relaxed_fillers(std::span<const std::string> gram, std::size_t wild_position) const {
        require_arity(gram.size());
        if (wild_position >= order_) {
            throw usage_error("wildcard position out of range");
        }
        const auto& map = masked_[wild_position];
        auto it = map.find(detail::masked_key(gram, wild_position));
        if (it == map.end()) return {};
        return it->second.fillers;
    }

    bool contains_token(const std::string& token) const { return vocab_.contains(token); }

    // Visits every stored gram as (space-joined key, count).
    template <class Fn>
    void for_each_gram(Fn&& fn) const {
        for (const auto& [key, count] : exact_) fn(key, count);
    }

    static NgramIndex build(const std::vector<NgramRecord>& records, std::size_t order) {
        if (order < 1) throw usage_error("n-gram order must be >= 1");
        NgramIndex index;
        index.order_ = order;
        for (const auto& rec : records) {
            if (rec.tokens.size() != order) {
                throw parse_error("record arity " + std::to_string(rec.tokens.size()) +
                                  " does not match order " + std::to_string(order));
            }
            for (const auto& t : rec.tokens) {
                if (t.empty() || t.find_first_of(" \t\n") != std::string::npos) {
                    throw parse_error("n-gram token may not be empty or contain whitespace");
                }
            }
            index.add(rec.tokens, rec.count);
        }
        index.finalize();
        return index;
    }

    // Ingests files in the Web-1T layout: tokens joined by single 0x20, one
    // 0x09 separator, ASCII decimal count, 0x0A terminator. Duplicate grams
    // sum their counts. Malformed lines report file and line number.
    static NgramIndex build_from_files(const std::vector<std::string>& paths, std::size_t order) {
        if (order < 1) throw usage_error("n-gram order must be >= 1");
        NgramIndex index;
        index.order_ = order;
        std::vector<std::string> tokens;
        for (const auto& path : paths) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw config_error("cannot open n-gram file: " + path);
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                const auto where = path + ":" + std::to_string(line_no);
                const auto tab = line.find('\t');
                if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
                    throw parse_error(where + ": expected exactly one TAB separator");
                }
                tokens.clear();
                std::size_t start = 0;
                while (start <= tab) {
                    std::size_t sp = line.find(' ', start);
                    if (sp == std::string::npos || sp > tab) sp = tab;
                    if (sp == start) throw parse_error(where + ": empty token");
                    tokens.emplace_back(line.substr(start, sp - start));
                    start = sp + 1;
                }
                if (tokens.size() != order) {
                    throw parse_error(where + ": " + std::to_string(tokens.size()) +
                                      " tokens in an order-" + std::to_string(order) + " build");
                }
                const std::string_view count_text(line.data() + tab + 1, line.size() - tab - 1);
                index.add(tokens, parse_count(count_text, where));
            }
        }
        index.finalize();
        return index;
    }

    // Compact binary cache: exact entries only, masks rebuilt on load. An
    // absent, truncated or mismatching cache yields nullopt so the caller
    // rebuilds from source; it is never an error.
    void save_cache(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot write index cache: " + path);
        out.write(kCacheMagic, 8);
        write_u32(out, kCacheVersion);
        write_u32(out, static_cast<std::uint32_t>(order_));
        write_u64(out, exact_.size());
        std::vector<const std::pair<const std::string, std::uint64_t>*> entries;
        entries.reserve(exact_.size());
        for (const auto& e : exact_) entries.push_back(&e);
        std::sort(entries.begin(), entries.end(),
                  [](auto* a, auto* b) { return a->first < b->first; });
        for (const auto* e : entries) {
            write_u32(out, static_cast<std::uint32_t>(e->first.size()));
            out.write(e->first.data(), static_cast<std::streamsize>(e->first.size()));
            write_u64(out, e->second);
        }
        if (!out) throw config_error("short write on index cache: " + path);
    }

    static std::optional<NgramIndex> load_cache(const std::string& path, std::size_t expected_order) {
        std::ifstream in(path, std::ios::binary);
        if (!in) return std::nullopt;
        char magic[8] = {};
        in.read(magic, 8);
        if (!in || std::string_view(magic, 8) != std::string_view(kCacheMagic, 8)) return std::nullopt;
        std::uint32_t version = 0, order = 0;
        std::uint64_t n = 0;
        if (!read_u32(in, version) || version != kCacheVersion) return std::nullopt;
        if (!read_u32(in, order) || order != expected_order || order < 1) return std::nullopt;
        if (!read_u64(in, n)) return std::nullopt;
        NgramIndex index;
        index.order_ = order;
        std::string key;
        for (std::uint64_t i = 0; i < n; ++i) {
            std::uint32_t len = 0;
            std::uint64_t count = 0;
            if (!read_u32(in, len) || len > (1u << 24)) return std::nullopt;
            key.resize(len);
            in.read(key.data(), len);
            if (!in || !read_u64(in, count)) return std::nullopt;
            auto tokens = detail::split_gram(key);
            if (tokens.size() != order) return std::nullopt;
            index.add(tokens, count);
        }
        index.finalize();
        return index;
    }

private:
    struct MaskedEntry {
        std::uint64_t total = 0;
        std::vector<std::pair<std::string, std::uint64_t>> fillers;
    };

    static constexpr const char* kCacheMagic = "OCRPNGX\0";
    static constexpr std::uint32_t kCacheVersion = 1;

    void require_arity(std::size_t n) const {
        if (n != order_) {
            throw usage_error("gram arity " + std::to_string(n) + " does not match index order " +
                              std::to_string(order_));
        }
    }

    static std::uint64_t parse_count(std::string_view text, const std::string& where) {
        if (text.empty()) throw parse_error(where + ": missing count");
        std::uint64_t value = 0;
        for (char c : text) {
            if (c < '0' || c > '9') throw parse_error(where + ": malformed count");
            const auto digit = static_cast<std::uint64_t>(c - '0');
            if (value > (std::numeric_limits<std::uint64_t>::max() - digit) / 10) {
                throw parse_error(where + ": count out of range");
            }
            value = value * 10 + digit;
        }
        return value;
    }

    void add(const std::vector<std::string>& tokens, std::uint64_t count) {
        auto& cell = exact_[detail::join_gram(tokens)];
        cell = detail::checked_add(cell, count);
        total_count_ = detail::checked_add(total_count_, count);
        for (const auto& t : tokens) vocab_.insert(t);
    }

    // Builds the per-position mask tables from the exact map.
    void finalize() {
        masked_.assign(order_, {});
        for (const auto& [key, count] : exact_) {
            const auto tokens = detail::split_gram(key);
            for (std::size_t p = 0; p < order_; ++p) {
                auto& entry = masked_[p][detail::masked_key(tokens, p)];
                entry.total = detail::checked_add(entry.total, count);
                entry.fillers.emplace_back(tokens[p], count);
            }
        }
        for (auto& map : masked_) {
            for (auto& [key, entry] : map) {
                std::sort(entry.fillers.begin(), entry.fillers.end());
            }
        }
    }

    static void write_u32(std::ostream& out, std::uint32_t v) {
        char buf[4];
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        out.write(buf, 4);
    }
    static void write_u64(std::ostream& out, std::uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        out.write(buf, 8);
    }
    static bool read_u32(std::istream& in, std::uint32_t& v) {
        char buf[4];
        in.read(buf, 4);
        if (!in) return false;
        v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
        return true;
    }
    static bool read_u64(std::istream& in, std::uint64_t& v) {
        char buf[8];
        in.read(buf, 8);
        if (!in) return false;
        v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
        return true;
    }

    std::size_t order_ = 0;
    std::uint64_t total_count_ = 0;
    std::unordered_map<std::string, std::uint64_t> exact_;
    std::vector<std::unordered_map<std::string, MaskedEntry>> masked_;
    std::unordered_set<std::string> vocab_;
};

// Sliding-window n-gram counts of a token-surface stream; feeds build().
inline std::vector<NgramRecord> count_ngrams(const std::vector<std::string>& surfaces,
                                             std::size_t order) {
    if (order < 1) throw usage_error("n-gram order must be >= 1");
    std::vector<NgramRecord> records;
    if (surfaces.size() < order) return records;
    std::unordered_map<std::string, std::uint64_t> counts;
    std::vector<std::string> window;
    for (std::size_t i = 0; i + order <= surfaces.size(); ++i) {
        window.assign(surfaces.begin() + static_cast<std::ptrdiff_t>(i),
                      surfaces.begin() + static_cast<std::ptrdiff_t>(i + order));
        counts[detail::join_gram(window)] += 1;
    }
    records.reserve(counts.size());
    for (const auto& [key, count] : counts) {
        records.push_back({detail::split_gram(key), count});
    }
    std::sort(records.begin(), records.end(),
              [](const NgramRecord& a, const NgramRecord& b) { return a.tokens < b.tokens; });
    return records;
}

} // namespace ocrpost
