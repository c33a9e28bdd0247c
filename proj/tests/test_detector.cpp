#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "ocrpost/detector.hpp"
#include "ocrpost/ngram_index.hpp"
#include "ocrpost/tokenizer.hpp"

using namespace ocrpost;

namespace {

std::vector<std::string> stream_surfaces(const std::vector<Token>& tokens) {
    std::vector<std::string> out;
    for (const auto& t : tokens) out.push_back(t.surface);
    return out;
}

NgramIndex unigrams_of(const std::vector<std::pair<std::string, std::uint64_t>>& entries) {
    std::vector<NgramRecord> records;
    for (const auto& [token, count] : entries) records.push_back({{token}, count});
    return NgramIndex::build(records, 1);
}

} // namespace

TEST_CASE("interior token gets exactly n windows", "[detector]") {
    const auto tokens = tokenize("the brightly coloured birds in whicli we could see far away");
    // "whicli" sits at position 5 of 11
    const auto windows = collect_contexts(tokens, 5, 5);
    REQUIRE(windows.size() == 5);
    CHECK(windows.front().words ==
          std::vector<std::string>{"brightly", "coloured", "birds", "in", "whicli"});
    CHECK(windows.front().focus == 4);
    CHECK(windows.back().words ==
          std::vector<std::string>{"whicli", "we", "could", "see", "far"});
    CHECK(windows.back().focus == 0);
    for (const auto& w : windows) {
        REQUIRE(w.words.size() == 5);
        CHECK(w.words[w.focus] == "whicli");
    }
}

TEST_CASE("boundary tokens get clipped windows", "[detector]") {
    const auto tokens = tokenize("one two three four five six seven");
    CHECK(collect_contexts(tokens, 0, 5).size() == 1);
    CHECK(collect_contexts(tokens, 1, 5).size() == 2);
    CHECK(collect_contexts(tokens, 6, 5).size() == 1);
}

TEST_CASE("text shorter than the window order yields zero windows", "[detector]") {
    const auto tokens = tokenize("such short text");
    CHECK(collect_contexts(tokens, 1, 5).empty());
    CHECK_THROWS_AS(collect_contexts(tokens, 1, 0), usage_error);
    CHECK_THROWS_AS(collect_contexts(tokens, 9, 5), usage_error);
}

TEST_CASE("unseen word is detected", "[detector]") {
    const auto tokens =
        apply_filters(tokenize("brightly coloured birds in whicli we could see"), FilterConfig{});
    const auto unigrams = unigrams_of({{"brightly", 5000}, {"coloured", 5000}, {"birds", 9000},
                                       {"in", 100000}, {"which", 90000}, {"we", 80000},
                                       {"could", 70000}, {"see", 60000}});
    const auto contexts = NgramIndex::build(
        {{{"brightly", "coloured", "birds", "in", "which"}, 42}}, 5);
    DetectionThresholds thresholds;
    thresholds.unigram_threshold_by_length = {{1, 100}};
    thresholds.context_threshold = 1;

    const auto errors = detect(tokens, contexts, unigrams, thresholds);
    // the stream spells "whicli", so no window of any token is attested and
    // every word fails the context condition
    REQUIRE(errors.size() == 8);
    // "whicli" is among them with unigram frequency 0
    bool found = false;
    for (const auto& e : errors) {
        if (e.token.surface == "whicli") {
            found = true;
            CHECK(e.unigram_freq == 0);
            CHECK(e.contexts.size() == 5);
        }
    }
    CHECK(found);
}

TEST_CASE("frequent word with one attested context survives", "[detector]") {
    const auto tokens =
        apply_filters(tokenize("brightly coloured birds in which we could see"), FilterConfig{});
    const auto unigrams = unigrams_of({{"which", 90000}});
    const auto contexts = NgramIndex::build(
        {{{"brightly", "coloured", "birds", "in", "which"}, 42}}, 5);
    DetectionThresholds thresholds;
    thresholds.unigram_threshold_by_length = {{1, 100}};

    const auto errors = detect(tokens, contexts, unigrams, thresholds);
    for (const auto& e : errors) CHECK(e.token.surface != "which");
}

TEST_CASE("rare-but-real word with zero attested contexts is detected", "[detector]") {
    // freq_1 above threshold yet every window unattested: condition 2 fails.
    const auto tokens =
        apply_filters(tokenize("a b c d nuthatch e f g h"), FilterConfig{});
    const auto unigrams = unigrams_of({{"nuthatch", 50000}});
    const auto contexts = NgramIndex::build({{{"q", "r", "s", "t", "u"}, 1}}, 5);
    DetectionThresholds thresholds;
    thresholds.unigram_threshold_by_length = {{1, 100}};

    const auto errors = detect(tokens, contexts, unigrams, thresholds);
    bool found = false;
    for (const auto& e : errors) found = found || e.token.surface == "nuthatch";
    CHECK(found);
}

TEST_CASE("filtered tokens are never detected", "[detector]") {
    FilterConfig filters;
    filters.common_words = {"zzqx"};
    const auto tokens = apply_filters(tokenize("zzqx , 99"), filters);
    const auto unigrams = unigrams_of({{"a", 1}});
    const auto contexts = NgramIndex::build({{{"a", "a", "a", "a", "a"}, 1}}, 5);
    const auto errors = detect(tokens, contexts, unigrams, DetectionThresholds{});
    CHECK(errors.empty());
}

TEST_CASE("threshold lookup extends the last entry", "[detector]") {
    DetectionThresholds thresholds;
    thresholds.unigram_threshold_by_length = {{1, 1000}, {3, 100}, {7, 10}};
    CHECK(thresholds.unigram_threshold(1) == 1000);
    CHECK(thresholds.unigram_threshold(2) == 1000);
    CHECK(thresholds.unigram_threshold(3) == 100);
    CHECK(thresholds.unigram_threshold(6) == 100);
    CHECK(thresholds.unigram_threshold(7) == 10);
    CHECK(thresholds.unigram_threshold(40) == 10);
}

TEST_CASE("raising thresholds never shrinks the detected set", "[detector]") {
    const auto tokens = apply_filters(
        tokenize("alpha beta gamma delta epsilon zeta eta theta iota kappa"), FilterConfig{});
    const auto unigrams = unigrams_of({{"alpha", 50}, {"beta", 150}, {"gamma", 400},
                                       {"delta", 800}, {"epsilon", 1600}, {"zeta", 10},
                                       {"eta", 3000}, {"theta", 90}, {"iota", 700},
                                       {"kappa", 40}});
    std::vector<NgramRecord> records;
    const std::vector<std::string> stream = stream_surfaces(tokens);
    for (std::size_t i = 0; i + 5 <= stream.size(); i += 2) {
        records.push_back({{stream[i], stream[i + 1], stream[i + 2], stream[i + 3], stream[i + 4]}, 5});
    }
    const auto contexts = NgramIndex::build(records, 5);

    auto detected_set = [&](std::uint64_t unigram_t, std::uint64_t context_t) {
        DetectionThresholds t;
        t.unigram_threshold_by_length = {{1, unigram_t}};
        t.context_threshold = context_t;
        std::vector<std::string> out;
        for (const auto& e : detect(tokens, contexts, unigrams, t)) out.push_back(e.token.surface);
        return out;
    };

    for (std::uint64_t ut : {0ull, 100ull, 500ull, 2000ull}) {
        for (std::uint64_t ct : {1ull, 6ull}) {
            const auto lo = detected_set(ut, ct);
            for (const auto higher : {detected_set(ut + 100, ct), detected_set(ut, ct + 10)}) {
                for (const auto& s : lo) {
                    CHECK(std::find(higher.begin(), higher.end(), s) != higher.end());
                }
            }
        }
    }
}

TEST_CASE("detections come out in token order", "[detector]") {
    const auto tokens = apply_filters(tokenize("aa bb cc dd ee ff gg"), FilterConfig{});
    const auto unigrams = unigrams_of({{"zz", 1}});
    const auto contexts = NgramIndex::build({{{"z", "z", "z", "z", "z"}, 1}}, 5);
    const auto errors = detect(tokens, contexts, unigrams, DetectionThresholds{});
    REQUIRE(errors.size() == 7);
    for (std::size_t i = 1; i < errors.size(); ++i) {
        CHECK(errors[i - 1].token_position < errors[i].token_position);
    }
}
