#pragma once

#include "relapse/classifiers/decision_tree.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace relapse {

/// Rows of one balanced bag: k minority and k majority rows drawn with
/// replacement, k = minority class size. Minority rows come first.
inline std::vector<std::size_t> balanced_bootstrap(std::span<const int> y, Rng& rng) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) {
        (y[i] ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw SingleClassError("balanced_bootstrap: training labels contain a single class");
    }
    const auto& minority = pos.size() <= neg.size() ? pos : neg;
    const auto& majority = pos.size() <= neg.size() ? neg : pos;
    const std::size_t k = minority.size();
    std::vector<std::size_t> bag;
    bag.reserve(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        bag.push_back(minority[rng.index(k)]);
    }
    for (std::size_t i = 0; i < k; ++i) {
        bag.push_back(majority[rng.index(majority.size())]);
    }
    return bag;
}

struct BalancedForestParams {
    std::size_t trees = 51;
    double threshold = 0.5;
    std::size_t min_samples_split = 2;
};

class BalancedRandomForest {
public:
    static BalancedRandomForest fit(const CategoricalMatrix& x, std::span<const int> y,
                                    const BalancedForestParams& params, std::uint64_t seed) {
        if (x.rows() != y.size()) {
            throw std::invalid_argument("brf_fit: row/label count mismatch");
        }
        require_both_classes(y, "brf_fit");
        if (params.trees == 0) {
            throw std::invalid_argument("brf_fit: tree count must be positive");
        }
        BalancedRandomForest forest;
        forest.params_ = params;
        forest.seed_ = seed;
        TreeParams tp;
        tp.min_samples_split = params.min_samples_split;
        tp.max_features = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
        for (std::size_t t = 0; t < params.trees; ++t) {
            Rng rng(derive_seed(seed, {t}));
            const auto bag = balanced_bootstrap(y, rng);
            forest.trees_.push_back(DecisionTree::fit(x, y, bag, {}, tp, rng));
        }
        return forest;
    }

    Prediction predict(std::span<const int> row) const {
        double sum = 0.0;
        for (const auto& t : trees_) {
            sum += t.predict_probability(row);
        }
        Prediction p;
        p.score = sum / static_cast<double>(trees_.size());
        p.label = p.score >= params_.threshold ? 1 : 0;
        return p;
    }

    const std::vector<DecisionTree>& trees() const { return trees_; }
    std::uint64_t seed() const { return seed_; }

private:
    BalancedForestParams params_;
    std::uint64_t seed_ = 0;
    std::vector<DecisionTree> trees_;
};

} // namespace relapse
