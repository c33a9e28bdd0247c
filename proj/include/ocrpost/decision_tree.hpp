#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ocrpost/errors.hpp"

namespace ocrpost {

// Axis-aligned CART-style regression tree. Splits minimize weighted squared
// error; leaves predict the weighted mean. Growth is deterministic: features
// are scanned in index order and ties keep the first candidate, so identical
// inputs always produce an identical tree.
class RegressionTree {
public:
    struct Node {
        std::int32_t feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;

        bool is_leaf() const { return feature < 0; }
    };

    void fit(const std::vector<std::vector<double>>& rows, std::span<const double> targets,
             std::span<const double> weights, std::size_t max_depth,
             std::size_t min_samples_leaf = 2) {
        if (rows.empty()) throw usage_error("cannot fit a tree on zero rows");
        if (rows.size() != targets.size() || rows.size() != weights.size()) {
            throw usage_error("rows, targets and weights must have equal length");
        }
        nodes_.clear();
        min_samples_leaf_ = std::max<std::size_t>(1, min_samples_leaf);
        std::vector<std::size_t> indices(rows.size());
        std::iota(indices.begin(), indices.end(), 0);
        grow(rows, targets, weights, indices, 0, max_depth);
    }

    double predict(std::span<const double> features) const {
        std::int32_t node = 0;
        while (!nodes_[static_cast<std::size_t>(node)].is_leaf()) {
            const Node& n = nodes_[static_cast<std::size_t>(node)];
            node = features[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(node)].value;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    void set_nodes(std::vector<Node> nodes) { nodes_ = std::move(nodes); }

private:
    std::int32_t grow(const std::vector<std::vector<double>>& rows, std::span<const double> y,
                      std::span<const double> w, const std::vector<std::size_t>& indices,
                      std::size_t depth, std::size_t max_depth) {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();

        double weight_sum = 0.0, target_sum = 0.0;
        for (std::size_t i : indices) {
            weight_sum += w[i];
            target_sum += w[i] * y[i];
        }
        const double mean = weight_sum > 0.0 ? target_sum / weight_sum : 0.0;
        nodes_[static_cast<std::size_t>(id)].value = mean;

        if (depth >= max_depth || indices.size() < 2 * min_samples_leaf_) return id;

        const auto split = best_split(rows, y, w, indices);
        if (!split.valid) return id;

        std::vector<std::size_t> left, right;
        left.reserve(indices.size());
        right.reserve(indices.size());
        for (std::size_t i : indices) {
            (rows[i][split.feature] <= split.threshold ? left : right).push_back(i);
        }
        const std::int32_t l = grow(rows, y, w, left, depth + 1, max_depth);
        const std::int32_t r = grow(rows, y, w, right, depth + 1, max_depth);
        Node& n = nodes_[static_cast<std::size_t>(id)];
        n.feature = static_cast<std::int32_t>(split.feature);
        n.threshold = split.threshold;
        n.left = l;
        n.right = r;
        return id;
    }

    struct Split {
        bool valid = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double gain = 0.0;
    };

    Split best_split(const std::vector<std::vector<double>>& rows, std::span<const double> y,
                     std::span<const double> w, const std::vector<std::size_t>& indices) const {
        Split best;
        const std::size_t arity = rows[indices.front()].size();
        std::vector<std::size_t> order(indices);

        for (std::size_t f = 0; f < arity; ++f) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (rows[a][f] != rows[b][f]) return rows[a][f] < rows[b][f];
                return a < b;
            });
            double wl = 0.0, wyl = 0.0;
            double wr = 0.0, wyr = 0.0;
            for (std::size_t i : order) {
                wr += w[i];
                wyr += w[i] * y[i];
            }
            // Candidate cut after each position with distinct neighbor values.
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                const std::size_t i = order[k];
                wl += w[i];
                wyl += w[i] * y[i];
                wr -= w[i];
                wyr -= w[i] * y[i];
                const double a = rows[i][f];
                const double b = rows[order[k + 1]][f];
                if (a == b) continue;
                if (k + 1 < min_samples_leaf_ || order.size() - k - 1 < min_samples_leaf_) continue;
                if (wl <= 0.0 || wr <= 0.0) continue;
                // Maximizing sum of squared child means weighted by mass is
                // equivalent to minimizing the split SSE.
                const double gain = wyl * wyl / wl + wyr * wyr / wr;
                if (!best.valid || gain > best.gain) {
                    // Midpoint, clamped so the threshold partition matches the
                    // prefix exactly even when the midpoint rounds to b.
                    double threshold = a + (b - a) / 2.0;
                    if (!(threshold < b)) threshold = a;
                    best.valid = true;
                    best.feature = f;
                    best.threshold = threshold;
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    std::vector<Node> nodes_;
    std::size_t min_samples_leaf_ = 2;
};

inline bool operator==(const RegressionTree::Node& a, const RegressionTree::Node& b) {
    return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left &&
           a.right == b.right && a.value == b.value;
}

} // namespace ocrpost
