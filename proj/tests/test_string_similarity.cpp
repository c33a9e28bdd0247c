#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ocrpost/string_similarity.hpp"

using namespace ocrpost;

namespace {

// Brute-force oracles over all substrings / index subsets would be O(2^n);
// these enumerate all substring pairs, which is enough for the consecutive
// variants. The LCS recursive oracle handles the subsequence case.
std::size_t lcs_oracle(std::u32string_view a, std::u32string_view b) {
    if (a.empty() || b.empty()) return 0;
    if (a.back() == b.back()) {
        return 1 + lcs_oracle(a.substr(0, a.size() - 1), b.substr(0, b.size() - 1));
    }
    return std::max(lcs_oracle(a.substr(0, a.size() - 1), b),
                    lcs_oracle(a, b.substr(0, b.size() - 1)));
}

std::size_t common_substring_oracle(std::u32string_view a, std::u32string_view b) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t len = 1; i + len <= a.size(); ++len) {
            if (b.find(a.substr(i, len)) != std::u32string_view::npos) {
                best = std::max(best, len);
            }
        }
    }
    return best;
}

constexpr std::array<double, 4> kEqual = {0.25, 0.25, 0.25, 0.25};

} // namespace

TEST_CASE("identical strings score by the displayed formula", "[string_similarity]") {
    // length 4, every component len 4: each 2*16/8 = 4, weighted sum 4.0.
    // The displayed normalization exceeds 1 on purpose.
    CHECK(string_similarity_score("bird", "bird", kEqual) ==
          Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("cart/art exercises the anchored variants", "[string_similarity]") {
    // lcs = "art" (3), mclcs1 = "" (0), mclcsn = "art" (3), mclcsz = "art" (3)
    CHECK(lcs_length(U"cart", U"art") == 3);
    CHECK(mclcs1_length(U"cart", U"art") == 0);
    CHECK(mclcsn_length(U"cart", U"art") == 3);
    CHECK(mclcsz_length(U"cart", U"art") == 3);
    const double expected = 3 * 0.25 * (2.0 * 9.0 / 7.0);
    CHECK(string_similarity_score("cart", "art", kEqual) ==
          Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("disjoint alphabets score zero", "[string_similarity]") {
    CHECK(string_similarity_score("abc", "xyz", kEqual) == 0.0);
}

TEST_CASE("empty strings are a scoring error", "[string_similarity]") {
    CHECK_THROWS_AS(string_similarity_score("", "abc", kEqual), usage_error);
    CHECK_THROWS_AS(string_similarity_score("abc", "", kEqual), usage_error);
}

TEST_CASE("alpha isolation: (1,0,0,0) is the NLCS component alone", "[string_similarity]") {
    const std::array<double, 4> only_nlcs = {1.0, 0.0, 0.0, 0.0};
    const auto len = static_cast<double>(lcs_length(U"which", U"whicli"));
    const double expected = 2.0 * len * len / (5.0 + 6.0);
    CHECK(string_similarity_score("which", "whicli", only_nlcs) ==
          Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("product-of-lengths switch uses the conventional normalization",
          "[string_similarity]") {
    const std::array<double, 4> only_nlcs = {1.0, 0.0, 0.0, 0.0};
    const double expected = 16.0 / (4.0 * 4.0); // lcs("bird","bird")^2 / (4*4)
    CHECK(string_similarity_score("bird", "bird", only_nlcs,
                                  SimilarityNormalization::product_of_lengths) ==
          Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("components match brute-force enumeration on random strings", "[string_similarity]") {
    std::mt19937_64 rng(41);
    const std::u32string alphabet = U"abcæ";
    std::uniform_int_distribution<std::size_t> len(0, 8);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    for (int i = 0; i < 200; ++i) {
        std::u32string a, b;
        for (std::size_t k = len(rng); k > 0; --k) a.push_back(alphabet[pick(rng)]);
        for (std::size_t k = len(rng); k > 0; --k) b.push_back(alphabet[pick(rng)]);
        CAPTURE(encode_utf8(a), encode_utf8(b));
        CHECK(lcs_length(a, b) == lcs_oracle(a, b));
        CHECK(mclcsn_length(a, b) == common_substring_oracle(a, b));
        // anchored variants agree with suffix/prefix scans by definition
        std::size_t prefix = 0;
        while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
        CHECK(mclcs1_length(a, b) == prefix);
    }
}
