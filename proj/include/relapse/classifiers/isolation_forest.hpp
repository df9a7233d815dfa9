#pragma once

#include "relapse/classifiers/categorical.hpp"
#include "relapse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace relapse {

/// Average unsuccessful-search path length in a binary search tree of n
/// points; 0 for n <= 1.
inline double average_path_length(std::size_t n) {
    if (n <= 1) {
        return 0.0;
    }
    if (n == 2) {
        return 1.0;
    }
    const double m = static_cast<double>(n - 1);
    const double harmonic = std::log(m) + std::numbers::egamma;
    return 2.0 * harmonic - 2.0 * m / static_cast<double>(n);
}

struct IsolationForestParams {
    std::size_t trees = 101;
    std::size_t subsample = 256;
};

/// Isolation trees over category codes treated as ordinals. The relapse class
/// plays the outlier role; labels only enter through threshold calibration.
class IsolationForest {
public:
    struct Node {
        int feature = -1;   // -1 for external nodes
        int split = 0;      // x < split goes left
        int left = -1;
        int right = -1;
        std::size_t size = 0;
    };
    using Tree = std::vector<Node>;

    static IsolationForest fit(const CategoricalMatrix& x, const IsolationForestParams& params, std::uint64_t seed) {
        if (x.rows() == 0) {
            throw std::invalid_argument("iforest_fit: empty training set");
        }
        if (params.trees == 0 || params.subsample == 0) {
            throw std::invalid_argument("iforest_fit: trees and subsample must be positive");
        }
        IsolationForest f;
        f.psi_ = std::min(params.subsample, x.rows());
        const auto height_limit =
            static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(f.psi_, 2)))));
        for (std::size_t t = 0; t < params.trees; ++t) {
            Rng rng(derive_seed(seed, {t}));
            // Sample psi distinct rows (partial Fisher-Yates).
            std::vector<std::size_t> pool(x.rows());
            for (std::size_t i = 0; i < pool.size(); ++i) {
                pool[i] = i;
            }
            for (std::size_t i = 0; i < f.psi_; ++i) {
                std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
            }
            pool.resize(f.psi_);
            Tree tree;
            grow(x, pool, 0, height_limit, rng, tree);
            f.trees_.push_back(std::move(tree));
        }
        return f;
    }

    /// Expected path length of `row` across trees.
    double mean_path_length(std::span<const int> row) const {
        double sum = 0.0;
        for (const auto& tree : trees_) {
            sum += path_length(tree, row);
        }
        return sum / static_cast<double>(trees_.size());
    }

    /// 2^(-E[h] / c(psi)); 0.5 when the normalizer vanishes (psi = 1).
    double score(std::span<const int> row) const { return score_from_path(mean_path_length(row)); }

    double score_from_path(double mean_path) const {
        const double c = average_path_length(psi_);
        if (c <= 0.0) {
            return 0.5;
        }
        return std::pow(2.0, -mean_path / c);
    }

    /// Chooses the threshold so that the fraction of `x` rows scoring at or
    /// above it matches `prevalence` (at least one row when prevalence > 0).
    void calibrate(const CategoricalMatrix& x, double prevalence) {
        std::vector<double> scores(x.rows());
        for (std::size_t r = 0; r < x.rows(); ++r) {
            scores[r] = score(x.row(r));
        }
        std::sort(scores.begin(), scores.end(), std::greater<>());
        if (prevalence <= 0.0 || scores.empty()) {
            threshold_ = std::numeric_limits<double>::infinity();
            return;
        }
        auto k = static_cast<std::size_t>(std::llround(prevalence * static_cast<double>(scores.size())));
        k = std::clamp<std::size_t>(k, 1, scores.size());
        threshold_ = scores[k - 1];
    }

    Prediction predict(std::span<const int> row) const {
        Prediction p;
        p.score = score(row);
        p.label = p.score >= threshold_ ? 1 : 0;
        return p;
    }

    double threshold() const { return threshold_; }
    std::size_t subsample_size() const { return psi_; }
    const std::vector<Tree>& trees() const { return trees_; }

private:
    static int grow(const CategoricalMatrix& x, const std::vector<std::size_t>& rows, std::size_t depth,
                    std::size_t limit, Rng& rng, Tree& tree) {
        const int id = static_cast<int>(tree.size());
        tree.push_back(Node{});
        tree[static_cast<std::size_t>(id)].size = rows.size();
        if (rows.size() <= 1 || depth >= limit) {
            return id;
        }
        // Features that still vary inside this node.
        std::vector<std::size_t> varying;
        std::vector<std::pair<int, int>> ranges;
        for (std::size_t f = 0; f < x.cols(); ++f) {
            int lo = std::numeric_limits<int>::max(), hi = std::numeric_limits<int>::min();
            for (auto r : rows) {
                lo = std::min(lo, x.at(r, f));
                hi = std::max(hi, x.at(r, f));
            }
            if (lo < hi) {
                varying.push_back(f);
                ranges.emplace_back(lo, hi);
            }
        }
        if (varying.empty()) {
            return id;
        }
        const auto pick = rng.index(varying.size());
        const auto f = varying[pick];
        const auto [lo, hi] = ranges[pick];
        // Integer split in (lo, hi]: both sides non-empty.
        const int split = lo + 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(hi - lo)));
        std::vector<std::size_t> left, right;
        for (auto r : rows) {
            (x.at(r, f) < split ? left : right).push_back(r);
        }
        tree[static_cast<std::size_t>(id)].feature = static_cast<int>(f);
        tree[static_cast<std::size_t>(id)].split = split;
        const int l = grow(x, left, depth + 1, limit, rng, tree);
        const int rr = grow(x, right, depth + 1, limit, rng, tree);
        tree[static_cast<std::size_t>(id)].left = l;
        tree[static_cast<std::size_t>(id)].right = rr;
        return id;
    }

    static double path_length(const Tree& tree, std::span<const int> row) {
        int at = 0;
        double depth = 0.0;
        while (tree[static_cast<std::size_t>(at)].feature >= 0) {
            const auto& n = tree[static_cast<std::size_t>(at)];
            at = row[static_cast<std::size_t>(n.feature)] < n.split ? n.left : n.right;
            depth += 1.0;
        }
        return depth + average_path_length(tree[static_cast<std::size_t>(at)].size);
    }

    std::size_t psi_ = 0;
    double threshold_ = std::numeric_limits<double>::infinity();
    std::vector<Tree> trees_;
};

} // namespace relapse
