#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "ocrpost/candidate_search.hpp"
#include "ocrpost/levenshtein.hpp"

using namespace ocrpost;

namespace {

// Naive full-matrix DP oracle, no banding, no prefix stripping.
std::size_t lev_oracle(const std::u32string& a, const std::u32string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                            std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        }
    }
    return d[a.size()][b.size()];
}

Lexicon make_lexicon(std::vector<std::string> terms) {
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    Lexicon lex;
    lex.name = "test";
    lex.terms = std::move(terms);
    return lex;
}

std::u32string random_word(std::mt19937_64& rng, std::size_t max_len) {
    static const std::u32string alphabet = U"abcdefgæßü中";
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::u32string word;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) word.push_back(alphabet[pick(rng)]);
    return word;
}

} // namespace

TEST_CASE("distance examples", "[candidate_search]") {
    CHECK(levenshtein("which", "whicli") == 2);
    CHECK(levenshtein("word", "word") == 0);
    CHECK(levenshtein("", "abc") == 3);
    CHECK(levenshtein("abc", "") == 3);
    CHECK(levenshtein("Turdidæ", "Turdidae") == 2);
}

TEST_CASE("distance matches the naive oracle on random pairs", "[candidate_search]") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 500; ++i) {
        const auto a = random_word(rng, 12);
        const auto b = random_word(rng, 12);
        CHECK(levenshtein(std::u32string_view(a), std::u32string_view(b)) == lev_oracle(a, b));
    }
}

TEST_CASE("distance is symmetric and respects the triangle inequality", "[candidate_search]") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_word(rng, 10);
        const auto b = random_word(rng, 10);
        const auto c = random_word(rng, 10);
        const auto ab = levenshtein(std::u32string_view(a), std::u32string_view(b));
        const auto ba = levenshtein(std::u32string_view(b), std::u32string_view(a));
        const auto bc = levenshtein(std::u32string_view(b), std::u32string_view(c));
        const auto ac = levenshtein(std::u32string_view(a), std::u32string_view(c));
        CHECK(ab == ba);
        CHECK(ac <= ab + bc);
        CHECK((ab == 0) == (a == b));
    }
}

TEST_CASE("distance-0 search returns the error itself when in lexicon", "[candidate_search]") {
    const auto lex = make_lexicon({"cat", "cart", "art", "dog"});
    CHECK(search("cat", lex, 0) == std::vector<std::string>{"cat"});
    CHECK(search("cta", lex, 0).empty());
}

TEST_CASE("search equals the brute-force scan on the spec fixture", "[candidate_search]") {
    const auto lex = make_lexicon({"cat", "cart", "art", "dog"});
    const auto expected = search_brute_force("cta", lex, 3);
    CHECK(search("cta", lex, 3) == expected);
    // dist(cta,cat)=2, dist(cta,cart)=3, dist(cta,art)=3, dist(cta,dog)=3
    CHECK(expected == std::vector<std::string>{"art", "cart", "cat", "dog"});
}

TEST_CASE("empty lexicon is a configuration error", "[candidate_search]") {
    Lexicon empty;
    empty.name = "empty";
    CHECK_THROWS_AS(search("word", empty, 2), config_error);
    CHECK_THROWS_AS(search_brute_force("word", empty, 2), config_error);
}

TEST_CASE("trie search set-equals brute force on random lexicons", "[candidate_search]") {
    std::mt19937_64 rng(31);
    std::vector<std::string> terms;
    for (int i = 0; i < 2000; ++i) terms.push_back(encode_utf8(random_word(rng, 9)));
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    terms.erase(std::remove(terms.begin(), terms.end(), std::string()), terms.end());
    const auto lex = make_lexicon(terms);
    const CandidateSearcher searcher(lex);

    for (int q = 0; q < 60; ++q) {
        const auto error = encode_utf8(random_word(rng, 9));
        for (std::size_t delta : {0u, 1u, 2u, 3u}) {
            CAPTURE(error, delta);
            CHECK(searcher.search(error, delta) == search_brute_force(error, lex, delta));
        }
    }
}

TEST_CASE("results grow monotonically with delta", "[candidate_search]") {
    std::mt19937_64 rng(37);
    std::vector<std::string> terms;
    for (int i = 0; i < 500; ++i) terms.push_back(encode_utf8(random_word(rng, 7)));
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    terms.erase(std::remove(terms.begin(), terms.end(), std::string()), terms.end());
    const auto lex = make_lexicon(terms);
    const CandidateSearcher searcher(lex);

    const auto error = encode_utf8(random_word(rng, 7));
    std::vector<std::string> previous;
    for (std::size_t delta = 0; delta <= 4; ++delta) {
        const auto current = searcher.search(error, delta);
        CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
        previous = current;
    }
}

TEST_CASE("candidate sets are duplicate-free and in-lexicon", "[candidate_search]") {
    const auto lex = make_lexicon({"bird", "bind", "bard", "band", "bird"});
    const auto result = search("bird", lex, 2);
    CHECK(std::adjacent_find(result.begin(), result.end()) == result.end());
    for (const auto& term : result) {
        CHECK(lex.contains(term));
        CHECK(levenshtein("bird", term) <= 2);
    }
    CHECK(std::find(result.begin(), result.end(), "bird") != result.end());
}
