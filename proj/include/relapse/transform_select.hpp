#pragma once

#include "relapse/classifiers/categorical.hpp"
#include "relapse/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relapse {

inline constexpr int kDefaultBinCount = 15;

/// Equal-width histogram bins per feature, fit on a training fold.
class BinningModel {
public:
    struct FeatureBins {
        double imputation = 0.0;
        double min = 0.0;
        double max = 0.0;

        bool degenerate() const { return !(max > min); }
    };

    BinningModel() = default;
    BinningModel(int bin_count, std::vector<FeatureBins> features)
        : bin_count_(bin_count), features_(std::move(features)) {}

    int bin_count() const { return bin_count_; }
    std::size_t feature_count() const { return features_.size(); }
    const FeatureBins& feature(std::size_t i) const { return features_.at(i); }

    /// bin_count + 1 ascending edges spanning [min, max].
    std::vector<double> edges(std::size_t i) const {
        const auto& fb = features_.at(i);
        std::vector<double> e(static_cast<std::size_t>(bin_count_) + 1);
        const double width = (fb.max - fb.min) / bin_count_;
        for (int k = 0; k <= bin_count_; ++k) {
            e[static_cast<std::size_t>(k)] = k == bin_count_ ? fb.max : fb.min + k * width;
        }
        return e;
    }

    int category(std::size_t i, std::optional<double> value) const {
        const auto& fb = features_.at(i);
        const double v = value.value_or(fb.imputation);
        if (fb.degenerate()) {
            return 0;
        }
        const double width = (fb.max - fb.min) / bin_count_;
        const double pos = std::floor((v - fb.min) / width);
        if (!(pos > 0.0)) {
            return 0;
        }
        if (pos >= bin_count_ - 1) {
            return bin_count_ - 1;
        }
        return static_cast<int>(pos);
    }

    std::vector<int> apply(const FeatureVector& v) const {
        std::vector<int> out(features_.size());
        for (std::size_t i = 0; i < features_.size(); ++i) {
            out[i] = category(i, v[i]);
        }
        return out;
    }

    CategoricalMatrix apply_all(std::span<const FeatureWindow> windows) const {
        CategoricalMatrix m(windows.size(), features_.size());
        for (std::size_t r = 0; r < windows.size(); ++r) {
            for (std::size_t i = 0; i < features_.size(); ++i) {
                m.at(r, i) = category(i, windows[r].features[i]);
            }
        }
        return m;
    }

private:
    int bin_count_ = kDefaultBinCount;
    std::vector<FeatureBins> features_;
};

/// Fits imputation means and [min, max] bin ranges on non-missing training values.
inline BinningModel fit_bins(std::span<const FeatureVector> train, int bin_count = kDefaultBinCount) {
    if (train.empty()) {
        throw std::invalid_argument("fit_bins: empty training set");
    }
    if (bin_count < 1) {
        throw std::invalid_argument("fit_bins: bin count must be positive");
    }
    std::vector<BinningModel::FeatureBins> bins(kFeatureCount);
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        double sum = 0.0;
        std::size_t n = 0;
        bool first = true;
        auto& fb = bins[i];
        for (const auto& v : train) {
            if (!v[i]) {
                continue;
            }
            sum += *v[i];
            ++n;
            if (first) {
                fb.min = fb.max = *v[i];
                first = false;
            } else {
                fb.min = std::min(fb.min, *v[i]);
                fb.max = std::max(fb.max, *v[i]);
            }
        }
        fb.imputation = n ? sum / static_cast<double>(n) : 0.0;
    }
    return BinningModel(bin_count, std::move(bins));
}

inline BinningModel fit_bins(std::span<const FeatureWindow> train, int bin_count = kDefaultBinCount) {
    std::vector<FeatureVector> vs;
    vs.reserve(train.size());
    for (const auto& w : train) {
        vs.push_back(w.features);
    }
    return fit_bins(std::span<const FeatureVector>(vs), bin_count);
}

/// Plug-in mutual information (nats) between a categorical column and binary labels.
inline double mutual_information(std::span<const int> x, std::span<const int> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("mutual_information: length mismatch");
    }
    if (x.empty()) {
        throw std::invalid_argument("mutual_information: empty input");
    }
    const int x_levels = *std::max_element(x.begin(), x.end()) + 1;
    if (*std::min_element(x.begin(), x.end()) < 0) {
        throw std::invalid_argument("mutual_information: negative category");
    }
    std::vector<std::size_t> joint(static_cast<std::size_t>(x_levels) * 2, 0);
    std::vector<std::size_t> nx(static_cast<std::size_t>(x_levels), 0);
    std::size_t ny[2] = {0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto xi = static_cast<std::size_t>(x[i]);
        const std::size_t yi = y[i] ? 1 : 0;
        ++joint[xi * 2 + yi];
        ++nx[xi];
        ++ny[yi];
    }
    const auto n = static_cast<double>(x.size());
    double mi = 0.0;
    for (std::size_t xi = 0; xi < nx.size(); ++xi) {
        for (std::size_t yi = 0; yi < 2; ++yi) {
            const auto c = joint[xi * 2 + yi];
            if (c == 0) {
                continue;
            }
            const double pxy = static_cast<double>(c) / n;
            mi += pxy * std::log(static_cast<double>(c) * n / (static_cast<double>(nx[xi]) * static_cast<double>(ny[yi])));
        }
    }
    return std::max(mi, 0.0);
}

/// Indices into `train` of every relapse window plus up to `n` non-relapse
/// windows from the patients closest in age to `test_age` (ties: patient id,
/// then window start).
inline std::vector<std::size_t> build_selection_subsample(std::span<const FeatureWindow> train, double test_age,
                                                          std::size_t n) {
    if (n < 1) {
        throw std::invalid_argument("build_selection_subsample: N must be >= 1");
    }
    std::vector<std::size_t> out;
    std::map<std::string, std::vector<std::size_t>> by_patient;
    std::map<std::string, double> age_of;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train[i].is_relapse()) {
            out.push_back(i);
        } else {
            by_patient[train[i].patient_id()].push_back(i);
            age_of[train[i].patient_id()] = train[i].age();
        }
    }
    std::vector<std::string> patients;
    for (const auto& [id, idx] : by_patient) {
        patients.push_back(id);
    }
    std::stable_sort(patients.begin(), patients.end(), [&](const std::string& a, const std::string& b) {
        return std::abs(age_of[a] - test_age) < std::abs(age_of[b] - test_age);
    });
    std::size_t taken = 0;
    for (const auto& id : patients) {
        auto idx = by_patient[id];
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return train[a].spec.feature_start < train[b].spec.feature_start;
        });
        for (auto i : idx) {
            if (taken == n) {
                break;
            }
            out.push_back(i);
            ++taken;
        }
        if (taken == n) {
            break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct SelectionModel {
    struct Score {
        std::size_t feature = 0;
        double mi = 0.0;
    };
    std::vector<std::size_t> selected;  // feature indices, best first
    std::vector<Score> scores;          // one per candidate, in candidate order
};

class SelectionDegenerateError : public std::invalid_argument {
public:
    SelectionDegenerateError() : std::invalid_argument("selection_degenerate") {}
};

/// Ranks `candidates` (columns of `x`) by MI with `y` and keeps the top `m`;
/// equal scores resolve to the lower feature index.
inline SelectionModel select_features(const CategoricalMatrix& x, std::span<const int> y,
                                      std::span<const std::size_t> candidates, std::size_t m) {
    const auto counts = count_classes(y);
    if (x.rows() == 0 || counts.positive == 0 || counts.negative == 0) {
        throw SelectionDegenerateError();
    }
    SelectionModel model;
    for (auto c : candidates) {
        model.scores.push_back({c, mutual_information(x.column(c), y)});
    }
    auto ranked = model.scores;
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.mi != b.mi) {
            return a.mi > b.mi;
        }
        return a.feature < b.feature;
    });
    for (std::size_t i = 0; i < std::min(m, ranked.size()); ++i) {
        model.selected.push_back(ranked[i].feature);
    }
    return model;
}

/// Convenience overload: bins the subsample windows, then ranks.
inline SelectionModel select_features(std::span<const FeatureWindow> subsample, const BinningModel& bins,
                                      std::span<const std::size_t> candidates, std::size_t m) {
    const auto x = bins.apply_all(subsample);
    Labels y;
    for (const auto& w : subsample) {
        y.push_back(w.is_relapse() ? 1 : 0);
    }
    return select_features(x, y, candidates, m);
}

} // namespace relapse
