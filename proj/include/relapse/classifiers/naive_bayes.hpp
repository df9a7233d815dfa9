#pragma once

#include "relapse/classifiers/categorical.hpp"

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace relapse {

/// Categorical naive Bayes over `levels`-valued features with additive smoothing.
class CategoricalNaiveBayes {
public:
    /// Log-posterior differences closer than this are treated as exact ties.
    static constexpr double kTieTolerance = 1e-10;

    CategoricalNaiveBayes() = default;

    static CategoricalNaiveBayes fit(const CategoricalMatrix& x, std::span<const int> y, int levels = 15,
                                     double alpha = 1.0) {
        if (x.rows() != y.size()) {
            throw std::invalid_argument("nb_fit: row/label count mismatch");
        }
        if (levels < 1 || !(alpha > 0.0)) {
            throw std::invalid_argument("nb_fit: levels and alpha must be positive");
        }
        require_both_classes(y, "nb_fit");

        CategoricalNaiveBayes m;
        m.levels_ = levels;
        m.alpha_ = alpha;
        m.features_ = x.cols();
        m.counts_.assign(x.cols() * 2 * static_cast<std::size_t>(levels), 0);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const std::size_t c = y[r] ? 1 : 0;
            ++m.class_count_[c];
            for (std::size_t f = 0; f < x.cols(); ++f) {
                const int v = x.at(r, f);
                if (v < 0 || v >= levels) {
                    throw std::invalid_argument("nb_fit: category out of range");
                }
                ++m.counts_[m.slot(f, c, v)];
            }
        }
        const auto n = static_cast<double>(x.rows());
        m.log_likelihood_.resize(m.counts_.size());
        for (std::size_t c = 0; c < 2; ++c) {
            m.log_prior_[c] = std::log(static_cast<double>(m.class_count_[c]) / n);
            const double denom = static_cast<double>(m.class_count_[c]) + levels * alpha;
            for (std::size_t f = 0; f < m.features_; ++f) {
                for (int v = 0; v < levels; ++v) {
                    const auto s = m.slot(f, c, v);
                    m.log_likelihood_[s] = std::log((static_cast<double>(m.counts_[s]) + alpha) / denom);
                }
            }
        }
        return m;
    }

    /// Relapse iff the log posterior of relapse is strictly larger; score is
    /// the normalized relapse posterior.
    Prediction predict(std::span<const int> x) const {
        if (x.size() != features_) {
            throw std::invalid_argument("nb_predict: feature count mismatch");
        }
        double diff = log_prior_[1] - log_prior_[0];
        for (std::size_t f = 0; f < features_; ++f) {
            int v = x[f];
            if (v < 0 || v >= levels_) {
                throw std::invalid_argument("nb_predict: category out of range");
            }
            diff += log_likelihood_[slot(f, 1, v)] - log_likelihood_[slot(f, 0, v)];
        }
        Prediction p;
        p.score = 1.0 / (1.0 + std::exp(-diff));
        p.label = diff > kTieTolerance ? 1 : 0;
        return p;
    }

    double probability(std::size_t feature, int cls, int value) const {
        return std::exp(log_likelihood_[slot(feature, static_cast<std::size_t>(cls), value)]);
    }
    double prior(int cls) const { return std::exp(log_prior_[static_cast<std::size_t>(cls)]); }
    std::size_t feature_count() const { return features_; }
    int levels() const { return levels_; }
    double alpha() const { return alpha_; }

private:
    std::size_t slot(std::size_t f, std::size_t c, int v) const {
        return (f * 2 + c) * static_cast<std::size_t>(levels_) + static_cast<std::size_t>(v);
    }

    int levels_ = 15;
    double alpha_ = 1.0;
    std::size_t features_ = 0;
    std::array<std::size_t, 2> class_count_{};
    std::array<double, 2> log_prior_{};
    std::vector<std::size_t> counts_;
    std::vector<double> log_likelihood_;
};

} // namespace relapse
