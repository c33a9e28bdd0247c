#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "ocrpost/ngram_index.hpp"
#include "support/tempdir.hpp"

using namespace ocrpost;
using testsupport::TempDir;

namespace {

// Linear-scan oracle for one-wildcard lookups: sum counts of every record
// matching the gram everywhere but at the masked position.
std::uint64_t relaxed_oracle(const std::vector<NgramRecord>& records,
                             const std::vector<std::string>& gram, std::size_t wild) {
    std::uint64_t sum = 0;
    for (const auto& rec : records) {
        bool match = true;
        for (std::size_t i = 0; i < gram.size() && match; ++i) {
            if (i == wild) continue;
            match = rec.tokens[i] == gram[i];
        }
        if (match) sum += rec.count;
    }
    return sum;
}

std::vector<NgramRecord> merge_duplicates(std::vector<NgramRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const auto& a, const auto& b) { return a.tokens < b.tokens; });
    std::vector<NgramRecord> merged;
    for (auto& rec : records) {
        if (!merged.empty() && merged.back().tokens == rec.tokens) {
            merged.back().count += rec.count;
        } else {
            merged.push_back(std::move(rec));
        }
    }
    return merged;
}

} // namespace

TEST_CASE("single-record ingestion", "[ngram_index]") {
    TempDir dir;
    const auto path = dir.write("5gm.tsv", "brightly coloured birds in which\t42\n");
    const auto index = NgramIndex::build_from_files({path}, 5);
    CHECK(index.freq({"brightly", "coloured", "birds", "in", "which"}) == 42);
    CHECK(index.entry_count() == 1);
    CHECK(index.vocab_size() == 5);
}

TEST_CASE("duplicate lines sum their counts", "[ngram_index]") {
    TempDir dir;
    const auto path = dir.write("2gm.tsv", "a b\t3\na b\t4\n");
    const auto index = NgramIndex::build_from_files({path}, 2);
    CHECK(index.freq({"a", "b"}) == 7);
}

TEST_CASE("arity mismatch between file and order is a schema error", "[ngram_index]") {
    TempDir dir;
    const auto path = dir.write("bad.tsv", "a b c d\t5\n");
    CHECK_THROWS_AS(NgramIndex::build_from_files({path}, 5), parse_error);
}

TEST_CASE("malformed lines report file and line number", "[ngram_index]") {
    TempDir dir;
    const auto matches_location = Catch::Matchers::MessageMatches(
        Catch::Matchers::ContainsSubstring("bad.tsv:2"));
    const auto p1 = dir.write("bad.tsv", "a b\t1\na b\tx2\n");
    CHECK_THROWS_MATCHES(NgramIndex::build_from_files({p1}, 2), parse_error, matches_location);
    const auto p2 = dir.write("bad.tsv", "a b\t1\na b 3\n");
    CHECK_THROWS_MATCHES(NgramIndex::build_from_files({p2}, 2), parse_error, matches_location);
    const auto p3 = dir.write("bad.tsv", "a b\t1\na  b\t3\n");
    CHECK_THROWS_MATCHES(NgramIndex::build_from_files({p3}, 2), parse_error, matches_location);
}

TEST_CASE("absent grams score zero, exactness matters", "[ngram_index]") {
    const auto index = NgramIndex::build({{{"a", "b", "c"}, 2}}, 3);
    CHECK(index.freq({"x", "y", "z"}) == 0);
    CHECK(index.freq({"a", "b", "c"}) == 2);
    CHECK(index.freq({"a", "b", "d"}) == 0); // one token off
}

TEST_CASE("wrong arity is a usage error", "[ngram_index]") {
    const auto index = NgramIndex::build({{{"a", "b", "c"}, 2}}, 3);
    CHECK_THROWS_AS(index.freq({"a", "b"}), usage_error);
    CHECK_THROWS_AS(index.relaxed_freq({"a", "b"}, 0), usage_error);
    CHECK_THROWS_AS(index.relaxed_freq({"a", "b", "c"}, 3), usage_error);
}

TEST_CASE("relaxed lookup sums the masked column", "[ngram_index]") {
    const auto index = NgramIndex::build(
        {{{"a", "b", "c"}, 2}, {{"a", "x", "c"}, 3}, {{"a", "b", "d"}, 5}}, 3);
    // mask over position 1: "a * c" matches counts 2 and 3
    CHECK(index.relaxed_freq({"a", "b", "c"}, 1) == 5);
    // the mask subsumes the original token: relaxed >= exact
    CHECK(index.relaxed_freq({"a", "b", "c"}, 2) == 7); // "a b *": c=2, d=5
    CHECK(index.relaxed_freq({"q", "b", "c"}, 1) == 0); // no variant anywhere
    const auto fillers = index.relaxed_fillers({"a", "b", "c"}, 1);
    REQUIRE(fillers.size() == 2);
    CHECK(fillers[0] == std::pair<std::string, std::uint64_t>{"b", 2});
    CHECK(fillers[1] == std::pair<std::string, std::uint64_t>{"x", 3});
}

TEST_CASE("paper-style four-pattern relaxed query over a fixture", "[ngram_index]") {
    // Five-gram fixture around "brightly coloured birds in which".
    const std::vector<NgramRecord> records = {
        {{"brightly", "coloured", "birds", "in", "which"}, 42},
        {{"vividly", "coloured", "birds", "in", "which"}, 7},
        {{"brightly", "toned", "birds", "in", "which"}, 5},
        {{"brightly", "coloured", "fish", "in", "which"}, 11},
        {{"brightly", "coloured", "birds", "of", "which"}, 3},
        {{"brightly", "coloured", "birds", "in", "whose"}, 2},
    };
    const auto index = NgramIndex::build(records, 5);
    const std::vector<std::string> gram = {"brightly", "coloured", "birds", "in", "which"};
    // "* coloured birds in which"
    CHECK(index.relaxed_freq(gram, 0) == relaxed_oracle(records, gram, 0));
    CHECK(index.relaxed_freq(gram, 0) == 49);
    // "brightly * birds in which"
    CHECK(index.relaxed_freq(gram, 1) == 47);
    // "brightly coloured * in which"
    CHECK(index.relaxed_freq(gram, 2) == 53);
    // "brightly coloured birds * which"
    CHECK(index.relaxed_freq(gram, 3) == 45);
    for (std::size_t p = 0; p < 5; ++p) {
        CHECK(index.relaxed_freq(gram, p) >= index.freq(gram));
    }
}

TEST_CASE("relaxed equals the linear-scan oracle on random fixtures", "[ngram_index]") {
    std::mt19937_64 rng(11);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
    std::uniform_int_distribution<std::size_t> pick_tok(0, vocab.size() - 1);
    std::uniform_int_distribution<std::uint64_t> pick_count(1, 50);

    std::vector<NgramRecord> raw;
    for (int i = 0; i < 400; ++i) {
        raw.push_back({{vocab[pick_tok(rng)], vocab[pick_tok(rng)], vocab[pick_tok(rng)]},
                       pick_count(rng)});
    }
    const auto records = merge_duplicates(std::move(raw));
    const auto index = NgramIndex::build(records, 3);

    for (int q = 0; q < 300; ++q) {
        const std::vector<std::string> gram = {vocab[pick_tok(rng)], vocab[pick_tok(rng)],
                                               vocab[pick_tok(rng)]};
        const std::size_t wild = rng() % 3;
        CHECK(index.relaxed_freq(gram, wild) == relaxed_oracle(records, gram, wild));
        CHECK(index.relaxed_freq(gram, wild) >= index.freq(gram));
    }

    // rebuild audit: masked totals equal the sum of their fillers
    for (int q = 0; q < 50; ++q) {
        const std::vector<std::string> gram = {vocab[pick_tok(rng)], vocab[pick_tok(rng)],
                                               vocab[pick_tok(rng)]};
        const std::size_t wild = rng() % 3;
        std::uint64_t sum = 0;
        for (const auto& [token, count] : index.relaxed_fillers(gram, wild)) sum += count;
        CHECK(sum == index.relaxed_freq(gram, wild));
    }
}

TEST_CASE("build is order-independent", "[ngram_index]") {
    std::vector<NgramRecord> records = {
        {{"a", "b"}, 1}, {{"b", "c"}, 2}, {{"c", "d"}, 3}, {{"a", "c"}, 4}};
    const auto forward = NgramIndex::build(records, 2);
    std::reverse(records.begin(), records.end());
    const auto backward = NgramIndex::build(records, 2);
    for (const auto& g :
         {std::vector<std::string>{"a", "b"}, {"b", "c"}, {"c", "d"}, {"a", "c"}, {"x", "y"}}) {
        CHECK(forward.freq(g) == backward.freq(g));
        CHECK(forward.relaxed_freq(g, 0) == backward.relaxed_freq(g, 0));
        CHECK(forward.relaxed_freq(g, 1) == backward.relaxed_freq(g, 1));
    }
}

TEST_CASE("count overflow on summation is a checked error", "[ngram_index]") {
    const std::uint64_t huge = ~0ull - 5;
    CHECK_THROWS_AS(NgramIndex::build({{{"a"}, huge}, {{"b"}, 10}}, 1), parse_error);
}

TEST_CASE("binary cache round-trips and rejects mismatches quietly", "[ngram_index]") {
    TempDir dir;
    const auto records = std::vector<NgramRecord>{
        {{"a", "b", "c"}, 2}, {{"a", "x", "c"}, 3}, {{"a", "b", "d"}, 5}};
    const auto index = NgramIndex::build(records, 3);
    const auto cache = dir.file("ngrams-3.idx");
    index.save_cache(cache);

    const auto loaded = NgramIndex::load_cache(cache, 3);
    REQUIRE(loaded.has_value());
    CHECK(loaded->entry_count() == index.entry_count());
    CHECK(loaded->freq({"a", "b", "c"}) == 2);
    CHECK(loaded->relaxed_freq({"a", "b", "c"}, 1) == 5);

    // absence and order mismatch both mean "rebuild", never an error
    CHECK_FALSE(NgramIndex::load_cache(dir.file("missing.idx"), 3).has_value());
    CHECK_FALSE(NgramIndex::load_cache(cache, 5).has_value());
    dir.write("garbage.idx", "not a cache at all");
    CHECK_FALSE(NgramIndex::load_cache(dir.file("garbage.idx"), 3).has_value());
}

TEST_CASE("count_ngrams slides one window per position", "[ngram_index]") {
    const std::vector<std::string> stream = {"a", "b", "a", "b", "c"};
    const auto records = count_ngrams(stream, 2);
    const auto index = NgramIndex::build(records, 2);
    CHECK(index.freq({"a", "b"}) == 2);
    CHECK(index.freq({"b", "a"}) == 1);
    CHECK(index.freq({"b", "c"}) == 1);
    CHECK(count_ngrams({"a"}, 2).empty());
}
