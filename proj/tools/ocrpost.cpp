// Command-line front end for the OCR post-correction pipeline. One global
// config file wires every subcommand; individual flags override config
// fields. Diagnostics go to stderr, data to stdout or the named output file.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ocrpost/config.hpp"
#include "ocrpost/evaluation.hpp"
#include "ocrpost/pipeline.hpp"
#include "ocrpost/ranker.hpp"

namespace {

using namespace ocrpost;

std::string fmt_fixed(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string fmt_score(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Output sink: file when a path is given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw config_error("cannot write output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

struct CommonArgs {
    std::string config_path;
    std::optional<std::size_t> delta;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> model_file;
    bool brute_force = false;

    Config load() const {
        Config cfg = config_path.empty() ? Config{} : load_config(config_path);
        if (delta) cfg.delta = *delta;
        if (seed) cfg.seed = *seed;
        if (model_file) cfg.model_file = *model_file;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "global JSON configuration file");
    cmd->add_option("--delta", args.delta, "override: candidate search distance bound");
    cmd->add_option("--seed", args.seed, "override: RNG seed");
    cmd->add_option("--model", args.model_file, "override: model file path");
    cmd->add_flag("--brute-force", args.brute_force,
                  "candidate search via exhaustive lexicon scan instead of the trie");
}

std::vector<std::string> candidate_surfaces(const DetectedError& error, const Resources& res,
                                            bool brute_force) {
    if (brute_force) {
        return search_brute_force(error.token.surface, res.search_lexicon, res.config.delta);
    }
    return res.searcher->search(error.token.surface, res.config.delta);
}

CandidateSet scored_candidates(const DetectedError& error, const Resources& res,
                               bool brute_force) {
    CandidateSet set;
    set.error = error;
    set.delta = res.config.delta;
    for (auto& surface : candidate_surfaces(error, res, brute_force)) {
        Candidate c;
        c.surface = std::move(surface);
        set.candidates.push_back(std::move(c));
    }
    score_all(set, res.scoring());
    return set;
}

// Shared ground-truth preparation for train/evaluate/analyze-features.
struct GroundTruthRun {
    DetectionRun detection;
    std::vector<GroundTruthError> truth;
    std::vector<DetectionOutcome> outcomes;
    std::vector<EvaluationItem> items;
};

GroundTruthRun prepare_ground_truth(const Resources& res, const std::string& ocr_path,
                                    const std::string& truth_path) {
    GroundTruthRun run;
    run.detection = run_detection(read_text_file(ocr_path), res);
    const auto truth_tokens = tokenize(read_text_file(truth_path), res.config.tokenizer);
    run.truth = align(run.detection.tokens, truth_tokens);
    run.outcomes = categorize(run.detection.errors, run.truth);
    run.items = build_evaluation_items(run.outcomes);
    return run;
}

int cmd_build_index(const CommonArgs& common, const std::vector<std::string>& files,
                    std::size_t order, const std::string& out_path) {
    if (!files.empty()) {
        NgramIndex index = NgramIndex::build_from_files(files, order);
        index.save_cache(out_path);
        std::cout << "order\t" << index.order() << "\tentries\t" << index.entry_count()
                  << "\tvocab\t" << index.vocab_size() << "\tcache\t" << out_path << "\n";
        return 0;
    }
    const Config cfg = common.load();
    if (!cfg.cache_dir) {
        throw config_error("build-index without explicit files requires indexes.cache_dir");
    }
    const Resources res = load_resources(cfg);
    std::cout << "order\t1\tentries\t" << res.unigrams.entry_count() << "\tvocab\t"
              << res.unigrams.vocab_size() << "\n";
    std::cout << "order\t" << res.contexts.order() << "\tentries\t"
              << res.contexts.entry_count() << "\tvocab\t" << res.contexts.vocab_size() << "\n";
    return 0;
}

int cmd_detect(const CommonArgs& common, const std::string& input, const std::string& out_path) {
    const Resources res = load_resources(common.load());
    const DetectionRun run = run_detection(read_text_file(input), res);
    Output out(out_path);
    for (const auto& err : run.errors) {
        out.stream() << err.token.span.begin << '\t' << err.token.span.end << '\t'
                     << err.token.surface << '\t' << err.unigram_freq << '\t'
                     << best_context_freq(err, res.contexts) << '\n';
    }
    std::cerr << "detected " << run.errors.size() << " suspected errors in "
              << run.tokens.size() << " tokens\n";
    return 0;
}

int cmd_suggest(const CommonArgs& common, const std::string& input, const std::string& out_path) {
    const Resources res = load_resources(common.load());
    const DetectionRun run = run_detection(read_text_file(input), res);
    Output out(out_path);
    out.stream() << "start\tend\tsurface\tcandidate";
    for (const auto& name : feature_names(res.scoring())) out.stream() << '\t' << name;
    out.stream() << '\n';
    for (const auto& err : run.errors) {
        const CandidateSet set = scored_candidates(err, res, common.brute_force);
        for (const auto& c : set.candidates) {
            out.stream() << err.token.span.begin << '\t' << err.token.span.end << '\t'
                         << err.token.surface << '\t' << c.surface;
            for (double v : c.features.values) out.stream() << '\t' << fmt_score(v);
            out.stream() << '\n';
        }
    }
    return 0;
}

int cmd_correct(const CommonArgs& common, const std::string& input, const std::string& out_path,
                const std::string& suggestions_path, std::size_t top_k) {
    const Resources res = load_resources(common.load());
    const RankingModel model = load_model(res.config.model_file);
    const std::string text = read_text_file(input);
    const DetectionRun run = run_detection(text, res);

    std::vector<std::pair<Span, std::string>> replacements;
    std::unique_ptr<Output> suggestions;
    if (!suggestions_path.empty()) suggestions = std::make_unique<Output>(suggestions_path);

    for (const auto& err : run.errors) {
        CandidateSet set = scored_candidates(err, res, common.brute_force);
        if (set.candidates.empty()) continue;
        rank(model, set);
        replacements.emplace_back(err.token.span, set.candidates.front().surface);
        if (suggestions) {
            const std::size_t limit = std::min(top_k, set.candidates.size());
            for (std::size_t r = 0; r < limit; ++r) {
                suggestions->stream()
                    << err.token.span.begin << '\t' << err.token.span.end << '\t'
                    << err.token.surface << '\t' << (r + 1) << '\t'
                    << set.candidates[r].surface << '\t'
                    << fmt_score(*set.candidates[r].confidence) << '\n';
            }
        }
    }

    Output out(out_path);
    out.stream() << apply_corrections(text, replacements);
    std::cerr << "corrected " << replacements.size() << " of " << run.errors.size()
              << " detected errors\n";
    return 0;
}

int cmd_train(const CommonArgs& common, const std::string& ocr_path,
              const std::string& truth_path, bool with_cv) {
    const Resources res = load_resources(common.load());
    const GroundTruthRun run = prepare_ground_truth(res, ocr_path, truth_path);
    const TrainTestSplit split =
        split_items(run.items, res.config.train_fraction, res.config.seed);

    const TrainingSet data = build_training_set(to_labeled(split.train), res.scoring(),
                                                *res.searcher, res.config.top_k);
    std::cerr << "training rows " << data.rows.size() << " (" << data.positives << " positive, "
              << data.negatives << " negative) from " << data.error_count << " errors\n";

    Hyperparameters hyper = res.config.ranker;
    if (with_cv) {
        const CvResult cv =
            cross_validate(data, res.config.cv_grid, res.config.cv_folds, res.config.seed);
        for (const auto& cell : cv.cells) {
            std::cerr << "cv stages=" << cell.hyper.stages << " depth=" << cell.hyper.max_depth
                      << " mean P@1 " << fmt_fixed(cell.mean_p_at_1) << "\n";
        }
        hyper = cv.best;
        std::cerr << "selected stages=" << hyper.stages << " depth=" << hyper.max_depth << "\n";
    }

    const RankingModel model = train(data, hyper, res.config.seed);
    save_model(model, res.config.model_file);
    std::cerr << "model with " << model.stages.size() << " stages written to "
              << res.config.model_file << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& ocr_path,
                 const std::string& truth_path, const std::string& report_path,
                 const std::string& tsv_path) {
    const Resources res = load_resources(common.load());
    const RankingModel model = load_model(res.config.model_file);
    const GroundTruthRun run = prepare_ground_truth(res, ocr_path, truth_path);
    const TrainTestSplit split =
        split_items(run.items, res.config.train_fraction, res.config.seed);

    MetricsReport report;
    report.confusion = confusion_matrix(run.outcomes, run.detection.tokens);
    for (const auto& out : run.outcomes) {
        if (!out.counted) continue;
        switch (out.category) {
            case DetectionCategory::bounded: ++report.bounded; break;
            case DetectionCategory::unbounded: ++report.unbounded; break;
            case DetectionCategory::false_positive: ++report.false_positives; break;
            case DetectionCategory::missed: ++report.missed; break;
        }
    }
    const std::uint64_t truth_total = report.bounded + report.unbounded + report.missed;
    if (truth_total > 0) {
        const auto d = static_cast<double>(truth_total);
        report.recall_bounded = static_cast<double>(report.bounded) / d;
        report.recall_unbounded = static_cast<double>(report.unbounded) / d;
        report.recall_total = static_cast<double>(report.bounded + report.unbounded) / d;
    }

    // Correction quality on the held-out split.
    const std::set<std::size_t> ns = {1, 3, 5, 10};
    std::map<std::string, std::vector<std::pair<std::string, std::vector<std::string>>>> ranked;
    for (const auto& item : split.test) {
        CandidateSet set = scored_candidates(item.error, res, common.brute_force);
        if (!set.candidates.empty()) rank(model, set);
        std::vector<std::string> surfaces;
        surfaces.reserve(set.candidates.size());
        for (const auto& c : set.candidates) surfaces.push_back(c.surface);
        ranked[to_string(item.category)].emplace_back(item.intended, surfaces);
        if (item.category == DetectionCategory::bounded ||
            item.category == DetectionCategory::unbounded) {
            ranked["true_positive"].emplace_back(item.intended, surfaces);
        }
        ranked["total"].emplace_back(item.intended, surfaces);
    }
    for (const auto& [category, rows] : ranked) {
        report.precision_at[category] = precision_at(rows, ns);
        report.evaluated_errors[category] = rows.size();
    }

    Output out(report_path);
    auto& os = out.stream();
    os << "== detection ==\n";
    os << "truth_errors\t" << truth_total << "\n";
    os << "bounded\t" << report.bounded << "\trecall\t" << fmt_fixed(report.recall_bounded) << "\n";
    os << "unbounded\t" << report.unbounded << "\trecall\t" << fmt_fixed(report.recall_unbounded)
       << "\n";
    os << "total_detected\t" << (report.bounded + report.unbounded) << "\trecall\t"
       << fmt_fixed(report.recall_total) << "\n";
    os << "missed\t" << report.missed << "\n";
    os << "false_positives\t" << report.false_positives << "\n";
    os << "confusion\terror_detected\t" << report.confusion.error_detected << "\terror_missed\t"
       << report.confusion.error_missed << "\tcorrect_detected\t"
       << report.confusion.correct_detected << "\tcorrect_undetected\t"
       << report.confusion.correct_undetected << "\ttotal\t" << report.confusion.total() << "\n";
    os << "\n== correction (held-out split: " << split.test.size() << " errors) ==\n";
    os << "category\tevaluated\tP@1\tP@3\tP@5\tP@10\n";
    for (const char* category :
         {"bounded", "unbounded", "true_positive", "false_positive", "total"}) {
        os << category << '\t' << report.evaluated_errors[category];
        for (std::size_t n : ns) os << '\t' << fmt_fixed(report.precision_at[category][n]);
        os << '\n';
    }

    if (!tsv_path.empty()) {
        Output tsv(tsv_path);
        tsv.stream() << "metric\tvalue\n"
                     << "truth_errors\t" << truth_total << "\n"
                     << "bounded\t" << report.bounded << "\n"
                     << "unbounded\t" << report.unbounded << "\n"
                     << "missed\t" << report.missed << "\n"
                     << "false_positives\t" << report.false_positives << "\n"
                     << "recall_total\t" << fmt_fixed(report.recall_total) << "\n";
        for (const auto& [category, values] : report.precision_at) {
            for (const auto& [n, v] : values) {
                tsv.stream() << "p_at_" << n << "_" << category << "\t" << fmt_fixed(v) << "\n";
            }
        }
    }
    return 0;
}

int cmd_analyze_features(const CommonArgs& common, const std::string& ocr_path,
                         const std::string& truth_path, const std::string& coverage_path,
                         const std::string& distinctiveness_path) {
    const Resources res = load_resources(common.load());
    const GroundTruthRun run = prepare_ground_truth(res, ocr_path, truth_path);

    const auto coverage =
        coverage_upper_bound(run.items, res.scoring(), *res.searcher, res.config.top_k);
    {
        Output out(coverage_path);
        out.stream() << "category\tlocated\ttotal\tin_scope\tpct_among_all\tpct_in_scope\n";
        for (const auto& row : coverage) {
            out.stream() << row.category << '\t' << row.located << '\t' << row.total << '\t'
                         << row.in_scope << '\t' << fmt_fixed(row.pct_among_all) << '\t'
                         << fmt_fixed(row.pct_in_scope) << '\n';
        }
    }
    const auto distinct =
        feature_distinctiveness(run.items, res.scoring(), *res.searcher, res.config.top_k);
    {
        Output out(distinctiveness_path);
        out.stream() << "feature";
        for (std::size_t m = 1; m <= distinct.feature_names.size(); ++m) {
            out.stream() << "\tby_" << m << "_features";
        }
        out.stream() << "\tlocated_total\n";
        for (std::size_t f = 0; f < distinct.feature_names.size(); ++f) {
            out.stream() << distinct.feature_names[f];
            std::size_t total = 0;
            for (std::size_t m = 0; m < distinct.counts[f].size(); ++m) {
                out.stream() << '\t' << distinct.counts[f][m];
                total += distinct.counts[f][m];
            }
            out.stream() << '\t' << total << '\n';
        }
        out.stream() << "any\t";
        for (std::size_t m = 1; m < distinct.feature_names.size(); ++m) out.stream() << '\t';
        out.stream() << distinct.located_any << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"OCR post-processing error detection and correction"};
    app.require_subcommand(1);

    CommonArgs common;

    auto* build_index = app.add_subcommand("build-index", "ingest n-gram files into index caches");
    std::vector<std::string> bi_files;
    std::size_t bi_order = 5;
    std::string bi_out;
    add_common(build_index, common);
    build_index->add_option("files", bi_files, "n-gram files (Web-1T layout)");
    build_index->add_option("--order", bi_order, "n-gram order of the files");
    build_index->add_option("--out", bi_out, "cache file to write");

    auto* detect_cmd = app.add_subcommand("detect", "flag suspected OCR errors");
    std::string det_input, det_out;
    add_common(detect_cmd, common);
    detect_cmd->add_option("input", det_input, "plain-text UTF-8 input")->required();
    detect_cmd->add_option("--out", det_out, "report file (default stdout)");

    auto* suggest_cmd = app.add_subcommand("suggest", "detection plus scored candidates");
    std::string sug_input, sug_out;
    add_common(suggest_cmd, common);
    suggest_cmd->add_option("input", sug_input, "plain-text UTF-8 input")->required();
    suggest_cmd->add_option("--out", sug_out, "TSV file (default stdout)");

    auto* correct_cmd = app.add_subcommand("correct", "full pipeline with a trained model");
    std::string cor_input, cor_out, cor_suggestions;
    std::size_t cor_top_k = 10;
    add_common(correct_cmd, common);
    correct_cmd->add_option("input", cor_input, "plain-text UTF-8 input")->required();
    correct_cmd->add_option("--out", cor_out, "corrected text file (default stdout)");
    correct_cmd->add_option("--suggestions", cor_suggestions, "top-k suggestion TSV");
    correct_cmd->add_option("--top-k", cor_top_k, "suggestions per error");

    auto* train_cmd = app.add_subcommand("train", "build a training set and fit the ranker");
    std::string tr_ocr, tr_truth;
    bool tr_cv = false;
    add_common(train_cmd, common);
    train_cmd->add_option("--ocr", tr_ocr, "OCR text file")->required();
    train_cmd->add_option("--truth", tr_truth, "ground-truth text file")->required();
    train_cmd->add_flag("--cv", tr_cv, "grid search with error-partitioned cross-validation");

    auto* eval_cmd = app.add_subcommand("evaluate", "detection and correction metrics");
    std::string ev_ocr, ev_truth, ev_report, ev_tsv;
    add_common(eval_cmd, common);
    eval_cmd->add_option("--ocr", ev_ocr, "OCR text file")->required();
    eval_cmd->add_option("--truth", ev_truth, "ground-truth text file")->required();
    eval_cmd->add_option("--report", ev_report, "report file (default stdout)");
    eval_cmd->add_option("--tsv", ev_tsv, "machine-readable TSV file");

    auto* feat_cmd = app.add_subcommand("analyze-features",
                                        "coverage upper bound and feature distinctiveness");
    std::string fe_ocr, fe_truth, fe_coverage, fe_distinct;
    add_common(feat_cmd, common);
    feat_cmd->add_option("--ocr", fe_ocr, "OCR text file")->required();
    feat_cmd->add_option("--truth", fe_truth, "ground-truth text file")->required();
    feat_cmd->add_option("--coverage", fe_coverage, "coverage TSV (default stdout)");
    feat_cmd->add_option("--distinctiveness", fe_distinct, "distinctiveness TSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build_index->parsed()) return cmd_build_index(common, bi_files, bi_order, bi_out);
        if (detect_cmd->parsed()) return cmd_detect(common, det_input, det_out);
        if (suggest_cmd->parsed()) return cmd_suggest(common, sug_input, sug_out);
        if (correct_cmd->parsed()) {
            return cmd_correct(common, cor_input, cor_out, cor_suggestions, cor_top_k);
        }
        if (train_cmd->parsed()) return cmd_train(common, tr_ocr, tr_truth, tr_cv);
        if (eval_cmd->parsed()) return cmd_evaluate(common, ev_ocr, ev_truth, ev_report, ev_tsv);
        if (feat_cmd->parsed()) {
            return cmd_analyze_features(common, fe_ocr, fe_truth, fe_coverage, fe_distinct);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
