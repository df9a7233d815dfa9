#pragma once

#include "relapse/classifiers/categorical.hpp"
#include "relapse/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace relapse {

struct TreeParams {
    std::size_t max_depth = std::numeric_limits<std::size_t>::max();
    std::size_t min_samples_split = 2;
    /// Features examined per split; 0 means all.
    std::size_t max_features = 0;
};

/// Binary CART tree over ordinal category codes; `x <= threshold` goes left.
/// Leaves hold the (weighted) relapse fraction of their training rows.
class DecisionTree {
public:
    struct Node {
        int feature = -1;  // -1 for leaves
        int threshold = 0;
        int left = -1;
        int right = -1;
        double relapse_probability = 0.0;
        bool is_leaf() const { return feature < 0; }
    };

    /// `rows` selects (with repetition) training rows; `weights` is per
    /// selected row, empty for unit weights.
    static DecisionTree fit(const CategoricalMatrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                            std::span<const double> weights, const TreeParams& params, Rng& rng) {
        DecisionTree tree;
        Builder b{x, y, rows, weights, params, rng, tree.nodes_};
        std::vector<std::size_t> all(rows.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        b.grow(all, 0);
        return tree;
    }

    double predict_probability(std::span<const int> row) const {
        int at = 0;
        while (!nodes_[static_cast<std::size_t>(at)].is_leaf()) {
            const auto& n = nodes_[static_cast<std::size_t>(at)];
            at = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(at)].relapse_probability;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t depth() const { return depth_from(0); }

private:
    std::size_t depth_from(int at) const {
        const auto& n = nodes_[static_cast<std::size_t>(at)];
        if (n.is_leaf()) {
            return 0;
        }
        return 1 + std::max(depth_from(n.left), depth_from(n.right));
    }

    struct Builder {
        const CategoricalMatrix& x;
        std::span<const int> y;
        std::span<const std::size_t> rows;
        std::span<const double> weights;
        const TreeParams& params;
        Rng& rng;
        std::vector<Node>& nodes;

        double weight(std::size_t local) const { return weights.empty() ? 1.0 : weights[local]; }
        int label(std::size_t local) const { return y[rows[local]]; }
        int value(std::size_t local, std::size_t f) const { return x.at(rows[local], f); }

        static double gini(double neg, double pos) {
            const double t = neg + pos;
            if (t <= 0.0) {
                return 0.0;
            }
            const double p = pos / t;
            return 2.0 * p * (1.0 - p);
        }

        int grow(const std::vector<std::size_t>& members, std::size_t depth) {
            const int id = static_cast<int>(nodes.size());
            nodes.push_back(Node{});
            double neg = 0.0, pos = 0.0;
            for (auto m : members) {
                (label(m) ? pos : neg) += weight(m);
            }
            nodes[static_cast<std::size_t>(id)].relapse_probability = neg + pos > 0.0 ? pos / (neg + pos) : 0.0;
            const bool pure = neg == 0.0 || pos == 0.0;
            if (pure || members.size() < params.min_samples_split || depth >= params.max_depth) {
                return id;
            }

            std::vector<std::size_t> order(x.cols());
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[rng.index(i)]);
            }
            const std::size_t wanted = params.max_features == 0 ? order.size() : params.max_features;

            int best_feature = -1;
            int best_threshold = 0;
            double best_impurity = std::numeric_limits<double>::infinity();
            std::size_t examined = 0;
            std::vector<double> hist_neg, hist_pos;
            for (auto f : order) {
                if (examined == wanted) {
                    break;
                }
                int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
                for (auto m : members) {
                    lo = std::min(lo, value(m, f));
                    hi = std::max(hi, value(m, f));
                }
                if (lo == hi) {
                    continue;
                }
                ++examined;
                const auto span = static_cast<std::size_t>(hi - lo + 1);
                hist_neg.assign(span, 0.0);
                hist_pos.assign(span, 0.0);
                for (auto m : members) {
                    const auto k = static_cast<std::size_t>(value(m, f) - lo);
                    (label(m) ? hist_pos[k] : hist_neg[k]) += weight(m);
                }
                double left_neg = 0.0, left_pos = 0.0;
                for (std::size_t k = 0; k + 1 < span; ++k) {
                    left_neg += hist_neg[k];
                    left_pos += hist_pos[k];
                    if (left_neg + left_pos == 0.0) {
                        continue;
                    }
                    const double right_neg = neg - left_neg, right_pos = pos - left_pos;
                    if (right_neg + right_pos <= 0.0) {
                        break;
                    }
                    const double impurity =
                        (left_neg + left_pos) * gini(left_neg, left_pos) + (right_neg + right_pos) * gini(right_neg, right_pos);
                    if (impurity < best_impurity) {
                        best_impurity = impurity;
                        best_feature = static_cast<int>(f);
                        best_threshold = lo + static_cast<int>(k);
                    }
                }
            }
            if (best_feature < 0) {
                return id;
            }

            std::vector<std::size_t> left, right;
            for (auto m : members) {
                (value(m, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(m);
            }
            if (left.empty() || right.empty()) {
                return id;
            }
            nodes[static_cast<std::size_t>(id)].feature = best_feature;
            nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
            const int l = grow(left, depth + 1);
            const int r = grow(right, depth + 1);
            nodes[static_cast<std::size_t>(id)].left = l;
            nodes[static_cast<std::size_t>(id)].right = r;
            return id;
        }
    };

    std::vector<Node> nodes_;
};

} // namespace relapse
