#pragma once

#include "relapse/classifiers/balanced_forest.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace relapse {

struct EasyEnsembleParams {
    std::size_t bags = 101;
    std::size_t rounds = 10;
    double threshold = 0.5;
};

/// Balanced bags, each boosted (discrete AdaBoost) over depth-1 trees.
class EasyEnsemble {
public:
    struct Stump {
        DecisionTree tree;
        double weight = 1.0;
    };
    using Chain = std::vector<Stump>;

    static EasyEnsemble fit(const CategoricalMatrix& x, std::span<const int> y, const EasyEnsembleParams& params,
                            std::uint64_t seed) {
        if (x.rows() != y.size()) {
            throw std::invalid_argument("ee_fit: row/label count mismatch");
        }
        require_both_classes(y, "ee_fit");
        if (params.bags == 0 || params.rounds == 0) {
            throw std::invalid_argument("ee_fit: bags and rounds must be positive");
        }
        EasyEnsemble model;
        model.params_ = params;
        TreeParams stump;
        stump.max_depth = 1;
        for (std::size_t b = 0; b < params.bags; ++b) {
            Rng rng(derive_seed(seed, {b}));
            const auto bag = balanced_bootstrap(y, rng);
            model.chains_.push_back(boost(x, y, bag, params.rounds, stump, rng));
        }
        return model;
    }

    /// Mean over bags of the weighted-vote margin mapped from [-1, 1] to [0, 1].
    Prediction predict(std::span<const int> row) const {
        double sum = 0.0;
        for (const auto& chain : chains_) {
            sum += chain_score(chain, row);
        }
        Prediction p;
        p.score = sum / static_cast<double>(chains_.size());
        p.label = p.score >= params_.threshold ? 1 : 0;
        return p;
    }

    static double chain_score(const Chain& chain, std::span<const int> row) {
        double vote = 0.0, total = 0.0;
        for (const auto& s : chain) {
            const double h = s.tree.predict_probability(row) >= 0.5 ? 1.0 : -1.0;
            vote += s.weight * h;
            total += s.weight;
        }
        return total > 0.0 ? 0.5 * (vote / total + 1.0) : 0.5;
    }

    const std::vector<Chain>& chains() const { return chains_; }

private:
    static Chain boost(const CategoricalMatrix& x, std::span<const int> y, const std::vector<std::size_t>& bag,
                       std::size_t rounds, const TreeParams& stump, Rng& rng) {
        Chain chain;
        std::vector<double> w(bag.size(), 1.0 / static_cast<double>(bag.size()));
        for (std::size_t r = 0; r < rounds; ++r) {
            auto tree = DecisionTree::fit(x, y, bag, w, stump, rng);
            std::vector<bool> wrong(bag.size());
            double err = 0.0;
            for (std::size_t i = 0; i < bag.size(); ++i) {
                const int pred = tree.predict_probability(x.row(bag[i])) >= 0.5 ? 1 : 0;
                wrong[i] = pred != y[bag[i]];
                if (wrong[i]) {
                    err += w[i];
                }
            }
            if (err <= 0.0) {
                chain.push_back({std::move(tree), 1.0});
                break;
            }
            if (err >= 0.5) {
                if (chain.empty()) {
                    chain.push_back({std::move(tree), 1.0});
                }
                break;
            }
            const double alpha = 0.5 * std::log((1.0 - err) / err);
            chain.push_back({std::move(tree), alpha});
            double norm = 0.0;
            for (std::size_t i = 0; i < bag.size(); ++i) {
                w[i] *= std::exp(wrong[i] ? alpha : -alpha);
                norm += w[i];
            }
            for (auto& wi : w) {
                wi /= norm;
            }
        }
        return chain;
    }

    EasyEnsembleParams params_;
    std::vector<Chain> chains_;
};

} // namespace relapse
