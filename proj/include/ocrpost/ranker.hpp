#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ocrpost/candidate_search.hpp"
#include "ocrpost/decision_tree.hpp"
#include "ocrpost/errors.hpp"
#include "ocrpost/feature_scoring.hpp"

namespace ocrpost {

struct LabeledError {
    DetectedError error;
    std::string intended;
};

struct TrainingRow {
    std::vector<double> features;
    double label = 0.0;       // 1 = intended correction
    double weight = 1.0;      // class-imbalance sample weight
    std::size_t error_id = 0; // source error; folds never split one error
};

struct TrainingSet {
    std::vector<TrainingRow> rows;
    std::vector<std::string> feature_order;
    std::size_t error_count = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

struct Hyperparameters {
    std::size_t stages = 50;
    std::size_t max_depth = 3;
    std::size_t min_samples_leaf = 2;

    friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

struct BoostStage {
    RegressionTree tree;
    double beta = 0.0;
    double stage_weight = 0.0; // ln(1/beta)
};

// AdaBoost.R2 ensemble over regression trees with linear loss. Prediction is
// the weighted median of stage outputs.
struct RankingModel {
    static constexpr int format_version = 1;

    std::vector<BoostStage> stages;
    Hyperparameters hyper;
    std::vector<std::string> feature_order;
    bool degenerate = false; // training stopped on a degenerate first stage

    double predict(std::span<const double> features) const {
        if (features.size() != feature_order.size()) {
            std::string names;
            for (const auto& n : feature_order) names += (names.empty() ? "" : ",") + n;
            throw usage_error("feature arity " + std::to_string(features.size()) +
                              " does not match model arity " +
                              std::to_string(feature_order.size()) + " (" + names + ")");
        }
        std::vector<std::pair<double, double>> preds; // (prediction, stage weight)
        preds.reserve(stages.size());
        double total = 0.0;
        for (const auto& s : stages) {
            preds.emplace_back(s.tree.predict(features), s.stage_weight);
            total += s.stage_weight;
        }
        std::stable_sort(preds.begin(), preds.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        // Lower weighted median: first prediction whose cumulative weight
        // reaches half the total.
        double cumulative = 0.0;
        for (const auto& [pred, weight] : preds) {
            cumulative += weight;
            if (cumulative >= 0.5 * total) return pred;
        }
        return preds.back().first;
    }

    double predict(const FeatureVector& features) const {
        return predict(std::span<const double>(features.values));
    }
};

// Training-set construction: per error, the candidate pool is the union over
// features of that feature's top-k candidates. Errors whose pool lacks the
// intended word are dropped. Label-1 rows carry the negative/positive count
// ratio as sample weight, label-0 rows carry 1.
inline TrainingSet build_training_set(std::span<const LabeledError> errors,
                                      const ScoringResources& resources,
                                      const CandidateSearcher& searcher, std::size_t top_k = 10) {
    TrainingSet data;
    data.feature_order = feature_names(resources);
    for (const auto& labeled : errors) {
        CandidateSet set = build_candidate_set(labeled.error, searcher, resources.delta);
        if (set.candidates.empty()) continue;
        score_all(set, resources);

        const auto rankings = per_feature_rankings(set);
        std::vector<bool> pooled(set.candidates.size(), false);
        for (const auto& order : rankings) {
            for (std::size_t r = 0; r < std::min(top_k, order.size()); ++r) {
                pooled[order[r]] = true;
            }
        }

        bool intended_in_pool = false;
        for (std::size_t i = 0; i < set.candidates.size(); ++i) {
            if (pooled[i] && set.candidates[i].surface == labeled.intended) {
                intended_in_pool = true;
                break;
            }
        }
        if (!intended_in_pool) continue;

        const std::size_t error_id = data.error_count++;
        for (std::size_t i = 0; i < set.candidates.size(); ++i) {
            if (!pooled[i]) continue;
            TrainingRow row;
            row.features = set.candidates[i].features.values;
            row.label = set.candidates[i].surface == labeled.intended ? 1.0 : 0.0;
            row.error_id = error_id;
            if (row.label == 1.0) {
                ++data.positives;
            } else {
                ++data.negatives;
            }
            data.rows.push_back(std::move(row));
        }
    }
    if (data.positives == 0) throw training_error("no positive rows after pool filtering");
    if (data.negatives == 0) throw training_error("no negative rows after pool filtering");
    const double ratio =
        static_cast<double>(data.negatives) / static_cast<double>(data.positives);
    for (auto& row : data.rows) row.weight = row.label == 1.0 ? ratio : 1.0;
    return data;
}

// AdaBoost.R2 with deterministic reweighting (no resampling; the seed is
// accepted for contract stability but unused). Per stage: fit a tree on the
// current weights, normalize per-row linear losses by the max loss, stop when
// the weighted average loss reaches 0.5, otherwise reweight rows by
// beta^(1-loss) with beta = L/(1-L).
inline RankingModel train(const TrainingSet& data, const Hyperparameters& hyper,
                          [[maybe_unused]] std::uint64_t seed = 0) {
    if (data.rows.empty()) throw training_error("empty training set");
    {
        bool has0 = false, has1 = false;
        for (const auto& row : data.rows) (row.label == 1.0 ? has1 : has0) = true;
        if (!has0 || !has1) throw training_error("training requires both label classes");
    }

    const std::size_t n = data.rows.size();
    std::vector<std::vector<double>> xs(n);
    std::vector<double> ys(n);
    std::vector<double> p(n);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = data.rows[i].features;
        ys[i] = data.rows[i].label;
        p[i] = data.rows[i].weight;
        weight_sum += p[i];
    }
    for (auto& v : p) v /= weight_sum;

    RankingModel model;
    model.hyper = hyper;
    model.feature_order = data.feature_order;

    std::vector<double> losses(n);
    for (std::size_t t = 0; t < hyper.stages; ++t) {
        RegressionTree tree;
        tree.fit(xs, ys, p, hyper.max_depth, hyper.min_samples_leaf);

        double max_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            losses[i] = std::abs(tree.predict(xs[i]) - ys[i]);
            max_loss = std::max(max_loss, losses[i]);
        }
        if (max_loss == 0.0) {
            // Perfect stage; a tiny beta gives it a large finite say and no
            // later stage can improve on it.
            constexpr double beta = 1e-12;
            model.stages.push_back({std::move(tree), beta, std::log(1.0 / beta)});
            break;
        }

        double avg_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) avg_loss += p[i] * (losses[i] / max_loss);

        if (avg_loss >= 0.5) {
            if (model.stages.empty()) {
                // Degenerate data: keep the single stage so the model is
                // usable, flag it.
                model.stages.push_back({std::move(tree), 1.0, 1.0});
                model.degenerate = true;
            }
            break;
        }

        const double beta = avg_loss / (1.0 - avg_loss);
        double renorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] *= std::pow(beta, 1.0 - losses[i] / max_loss);
            renorm += p[i];
        }
        for (auto& v : p) v /= renorm;
        model.stages.push_back({std::move(tree), beta, std::log(1.0 / beta)});
    }
    return model;
}

// Descending confidence; ties broken by higher language popularity, then by
// surface. Deterministic for any input order.
inline void rank(const RankingModel& model, CandidateSet& set) {
    std::ptrdiff_t lang_pop = -1;
    for (std::size_t f = 0; f < model.feature_order.size(); ++f) {
        if (model.feature_order[f] == "language_popularity") {
            lang_pop = static_cast<std::ptrdiff_t>(f);
            break;
        }
    }
    for (auto& c : set.candidates) c.confidence = model.predict(c.features);
    std::sort(set.candidates.begin(), set.candidates.end(),
              [&](const Candidate& a, const Candidate& b) {
                  if (*a.confidence != *b.confidence) return *a.confidence > *b.confidence;
                  if (lang_pop >= 0) {
                      const double pa = a.features.values[static_cast<std::size_t>(lang_pop)];
                      const double pb = b.features.values[static_cast<std::size_t>(lang_pop)];
                      if (pa != pb) return pa > pb;
                  }
                  return a.surface < b.surface;
              });
}

// ---- model serialization -------------------------------------------------

inline nlohmann::ordered_json tree_to_json(const RegressionTree& tree) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes()) {
        nodes.push_back({{"f", n.feature},
                         {"t", n.threshold},
                         {"l", n.left},
                         {"r", n.right},
                         {"v", n.value}});
    }
    return nodes;
}

inline RegressionTree tree_from_json(const nlohmann::json& nodes) {
    std::vector<RegressionTree::Node> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) {
        RegressionTree::Node node;
        node.feature = n.at("f").get<std::int32_t>();
        node.threshold = n.at("t").get<double>();
        node.left = n.at("l").get<std::int32_t>();
        node.right = n.at("r").get<std::int32_t>();
        node.value = n.at("v").get<double>();
        out.push_back(node);
    }
    RegressionTree tree;
    tree.set_nodes(std::move(out));
    return tree;
}

inline nlohmann::ordered_json model_to_json(const RankingModel& model) {
    nlohmann::ordered_json j;
    j["format_version"] = RankingModel::format_version;
    j["feature_order"] = model.feature_order;
    j["hyperparameters"] = {{"stages", model.hyper.stages},
                            {"max_depth", model.hyper.max_depth},
                            {"min_samples_leaf", model.hyper.min_samples_leaf},
                            {"loss", "linear"}};
    j["degenerate"] = model.degenerate;
    nlohmann::ordered_json stages = nlohmann::ordered_json::array();
    for (const auto& s : model.stages) {
        stages.push_back({{"beta", s.beta},
                          {"stage_weight", s.stage_weight},
                          {"tree", tree_to_json(s.tree)}});
    }
    j["stages"] = std::move(stages);
    return j;
}

inline void save_model(const RankingModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << "\n";
    if (!out) throw config_error("short write on model file: " + path);
}

inline RankingModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("malformed model file " + path + ": " + e.what());
    }
    const int version = j.value("format_version", -1);
    if (version != RankingModel::format_version) {
        throw parse_error("model file " + path + " has format_version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(RankingModel::format_version));
    }
    RankingModel model;
    model.feature_order = j.at("feature_order").get<std::vector<std::string>>();
    const auto& h = j.at("hyperparameters");
    model.hyper.stages = h.at("stages").get<std::size_t>();
    model.hyper.max_depth = h.at("max_depth").get<std::size_t>();
    model.hyper.min_samples_leaf = h.at("min_samples_leaf").get<std::size_t>();
    model.degenerate = j.value("degenerate", false);
    for (const auto& s : j.at("stages")) {
        BoostStage stage;
        stage.beta = s.at("beta").get<double>();
        stage.stage_weight = s.at("stage_weight").get<double>();
        stage.tree = tree_from_json(s.at("tree"));
        model.stages.push_back(std::move(stage));
    }
    return model;
}

// ---- cross-validation ------------------------------------------------------

struct HyperGrid {
    std::vector<std::size_t> stages = {25, 50, 100};
    std::vector<std::size_t> depths = {2, 3, 4};
};

struct CvCell {
    Hyperparameters hyper;
    std::vector<double> fold_p_at_1;
    double mean_p_at_1 = 0.0;
};

struct CvResult {
    Hyperparameters best;
    std::vector<CvCell> cells;
};

namespace detail {

// P@1 over the errors of one row subset: for each error, does the
// highest-confidence row carry label 1.
inline double p_at_1(const RankingModel& model, const TrainingSet& data,
                     const std::vector<std::size_t>& row_ids) {
    std::map<std::size_t, std::pair<double, double>> best; // error -> (confidence, label)
    for (std::size_t r : row_ids) {
        const auto& row = data.rows[r];
        const double conf = model.predict(row.features);
        auto it = best.find(row.error_id);
        if (it == best.end() || conf > it->second.first) {
            best[row.error_id] = {conf, row.label};
        }
    }
    if (best.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& [error_id, entry] : best) hits += entry.second == 1.0 ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(best.size());
}

} // namespace detail

// Grid search with error-partitioned folds: all candidates of one error stay
// in the same fold. Selects the grid point with the best mean validation P@1.
inline CvResult cross_validate(const TrainingSet& data, const HyperGrid& grid, std::size_t folds,
                               std::uint64_t seed) {
    if (folds < 2) throw usage_error("cross-validation requires at least 2 folds");
    if (folds > data.error_count) {
        throw usage_error("fold count " + std::to_string(folds) + " exceeds error count " +
                          std::to_string(data.error_count));
    }

    std::vector<std::size_t> error_ids(data.error_count);
    std::iota(error_ids.begin(), error_ids.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(error_ids.begin(), error_ids.end(), rng);
    std::vector<std::size_t> fold_of(data.error_count);
    for (std::size_t i = 0; i < error_ids.size(); ++i) fold_of[error_ids[i]] = i % folds;

    CvResult result;
    for (std::size_t stages : grid.stages) {
        for (std::size_t depth : grid.depths) {
            CvCell cell;
            cell.hyper = Hyperparameters{stages, depth, 2};
            for (std::size_t fold = 0; fold < folds; ++fold) {
                TrainingSet train_split;
                train_split.feature_order = data.feature_order;
                std::vector<std::size_t> validate_rows;
                for (std::size_t r = 0; r < data.rows.size(); ++r) {
                    if (fold_of[data.rows[r].error_id] == fold) {
                        validate_rows.push_back(r);
                    } else {
                        train_split.rows.push_back(data.rows[r]);
                    }
                }
                train_split.error_count = data.error_count;
                RankingModel model = train(train_split, cell.hyper, seed);
                cell.fold_p_at_1.push_back(detail::p_at_1(model, data, validate_rows));
            }
            cell.mean_p_at_1 =
                std::accumulate(cell.fold_p_at_1.begin(), cell.fold_p_at_1.end(), 0.0) /
                static_cast<double>(cell.fold_p_at_1.size());
            result.cells.push_back(std::move(cell));
        }
    }
    const auto best = std::max_element(
        result.cells.begin(), result.cells.end(),
        [](const CvCell& a, const CvCell& b) { return a.mean_p_at_1 < b.mean_p_at_1; });
    result.best = best->hyper;
    return result;
}

} // namespace ocrpost
