#include "relapse/rng.hpp"
#include "relapse/transform_select.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace relapse;

namespace {

FeatureWindow window(const std::string& id, int start, bool relapse, double age) {
    FeatureWindow w;
    w.spec.patient_id = id;
    w.spec.feature_start = Date{start};
    w.spec.feature_end = Date{start + 27};
    w.spec.predict_start = Date{start + 28};
    w.spec.predict_end = Date{start + 34};
    w.spec.label = relapse ? WindowLabel::relapse : WindowLabel::non_relapse;
    w.features[kAgeFeature] = age;
    w.features[kEducationFeature] = 12.0;
    return w;
}

/// MI as H(X) + H(Y) - H(X, Y), from frequency maps.
double entropy_oracle(const std::vector<int>& x, const std::vector<int>& y) {
    std::map<int, double> px, py;
    std::map<std::pair<int, int>, double> pxy;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        px[x[i]] += 1 / n;
        py[y[i]] += 1 / n;
        pxy[{x[i], y[i]}] += 1 / n;
    }
    auto h = [](const auto& m) {
        double s = 0;
        for (const auto& [k, p] : m) s -= p * std::log(p);
        return s;
    };
    return h(px) + h(py) - h(pxy);
}

} // namespace

TEST(Binning, MidpointOfUnitBins) {
    std::vector<FeatureVector> train(2);
    train[0][0] = 0.0;
    train[1][0] = 15.0;
    const auto bins = fit_bins(std::span<const FeatureVector>(train));
    EXPECT_EQ(bins.category(0, 7.5), 7);
    EXPECT_EQ(bins.category(0, 0.0), 0);
    EXPECT_EQ(bins.category(0, 15.0), 14);
    EXPECT_EQ(bins.category(0, 14.999), 14);
    EXPECT_EQ(bins.category(0, 1.0), 1);
    // Out-of-range test values clamp to the end bins.
    EXPECT_EQ(bins.category(0, -100.0), 0);
    EXPECT_EQ(bins.category(0, 1e9), 14);
    // Missing values take the training mean.
    EXPECT_EQ(bins.feature(0).imputation, 7.5);
    EXPECT_EQ(bins.category(0, std::nullopt), 7);
    const auto e = bins.edges(0);
    ASSERT_EQ(e.size(), 16u);
    EXPECT_EQ(e.front(), 0.0);
    EXPECT_EQ(e[1], 1.0);
    EXPECT_EQ(e.back(), 15.0);
}

TEST(Binning, DegenerateAndAllMissingFeatures) {
    std::vector<FeatureVector> train(3);
    for (auto& v : train) v[4] = 2.0;
    const auto bins = fit_bins(std::span<const FeatureVector>(train));
    EXPECT_TRUE(bins.feature(4).degenerate());
    EXPECT_EQ(bins.category(4, 2.0), 0);
    EXPECT_EQ(bins.category(4, 99.0), 0);
    EXPECT_TRUE(bins.feature(5).degenerate());  // never observed
    EXPECT_EQ(bins.category(5, std::nullopt), 0);
    EXPECT_THROW(fit_bins(std::span<const FeatureVector>()), std::invalid_argument);
}

TEST(Binning, ImputationUsesTrainingValuesOnly) {
    std::vector<FeatureVector> train(4);
    train[0][1] = 0.0;
    train[1][1] = 30.0;
    train[2][1] = 3.0;  // train[3] missing
    const auto bins = fit_bins(std::span<const FeatureVector>(train));
    EXPECT_EQ(bins.feature(1).imputation, 11.0);
    EXPECT_EQ(bins.category(1, std::nullopt), 5);
}

TEST(MutualInformation, IdenticalBalancedBinaryIsLn2) {
    const std::vector<int> x = {0, 1, 0, 1, 1, 0};
    const std::vector<int> y = {0, 1, 0, 1, 1, 0};
    EXPECT_NEAR(mutual_information(x, y), 0.6931471805599453, 1e-15);
    EXPECT_NEAR(mutual_information(x, y), std::log(2.0), 1e-15);
}

TEST(MutualInformation, IndependentAndConstant) {
    EXPECT_EQ(mutual_information(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}), 0.0);
    EXPECT_EQ(mutual_information(std::vector<int>{3, 3, 3}, std::vector<int>{0, 1, 1}), 0.0);
    EXPECT_THROW(mutual_information(std::vector<int>{1}, std::vector<int>{0, 1}), std::invalid_argument);
    EXPECT_THROW(mutual_information(std::vector<int>{}, std::vector<int>{}), std::invalid_argument);
}

TEST(MutualInformation, MatchesEntropyOracleOnRandomData) {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 2 + rng.index(300);
        std::vector<int> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.bernoulli(0.2) ? 1 : 0;
            x[i] = static_cast<int>(rng.index(15));
            if (y[i] && rng.bernoulli(0.5)) x[i] = 14;
        }
        const double mi = mutual_information(x, y);
        EXPECT_GE(mi, 0.0);
        EXPECT_NEAR(mi, std::max(0.0, entropy_oracle(x, y)), 1e-12);
        // Never above the label entropy.
        EXPECT_LE(mi, entropy_oracle(y, y) + 1e-12);
    }
}

TEST(SelectionSubsample, KeepsAllRelapsesPlusNClosestInAge) {
    std::vector<FeatureWindow> train;
    // 23 relapse windows spread over patients, plus 30 non-relapse windows each
    // for ten patients aged 20, 25, ..., 65.
    for (int p = 0; p < 10; ++p) {
        const std::string id = "p" + std::to_string(p);
        for (int k = 0; k < 30; ++k) {
            train.push_back(window(id, 7 * k, false, 20 + 5 * p));
        }
    }
    for (int r = 0; r < 23; ++r) {
        train.push_back(window("p" + std::to_string(r % 10), 1000 + r, true, 20 + 5 * (r % 10)));
    }
    const auto idx = build_selection_subsample(train, 41.0, 100);
    ASSERT_EQ(idx.size(), 123u);
    std::size_t relapses = 0;
    std::map<std::string, int> per_patient;
    for (auto i : idx) {
        if (train[i].is_relapse()) {
            ++relapses;
        } else {
            ++per_patient[train[i].patient_id()];
        }
    }
    EXPECT_EQ(relapses, 23u);
    // Ages by distance from 41: 40 (p4), 45 (p5), 35 (p3), 50 (p6, 10 windows).
    EXPECT_EQ(per_patient["p4"], 30);
    EXPECT_EQ(per_patient["p5"], 30);
    EXPECT_EQ(per_patient["p3"], 30);
    EXPECT_EQ(per_patient["p6"], 10);
    EXPECT_EQ(per_patient.size(), 4u);
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
}

TEST(SelectionSubsample, TiesBrokenByPatientIdThenStart) {
    std::vector<FeatureWindow> train;
    for (int k = 0; k < 3; ++k) {
        train.push_back(window("b", 7 * (2 - k), false, 30));  // unsorted starts
        train.push_back(window("a", 7 * (2 - k), false, 50));
    }
    train.push_back(window("c", 0, true, 90));
    // Both 10 years away from 40: "a" wins the tie; its earliest start first.
    const auto idx = build_selection_subsample(train, 40.0, 2);
    ASSERT_EQ(idx.size(), 3u);
    std::vector<std::string> ids;
    std::vector<int> starts;
    for (auto i : idx) {
        if (train[i].is_relapse()) continue;
        ids.push_back(train[i].patient_id());
        starts.push_back(train[i].spec.feature_start.days_since_epoch());
    }
    EXPECT_EQ(ids, (std::vector<std::string>{"a", "a"}));
    std::sort(starts.begin(), starts.end());
    EXPECT_EQ(starts, (std::vector<int>{0, 7}));
    // Fewer non-relapse windows than N: take all of them.
    EXPECT_EQ(build_selection_subsample(train, 40.0, 500).size(), train.size());
}

TEST(SelectFeatures, RanksByMutualInformation) {
    // Columns 0 and 2 copy the label; column 1 is independent of it.
    const auto x = CategoricalMatrix::from_rows(
        {{0, 0, 0}, {0, 1, 0}, {1, 0, 1}, {1, 1, 1}, {0, 0, 0}, {1, 1, 1}, {0, 1, 0}, {1, 0, 1}});
    const std::vector<int> y = {0, 0, 1, 1, 0, 1, 0, 1};
    const std::vector<std::size_t> cand = {0, 1, 2};
    const auto m = select_features(x, y, cand, 2);
    ASSERT_EQ(m.selected.size(), 2u);
    // Columns 0 and 2 are identical here: tie resolves to the lower index.
    EXPECT_EQ(m.selected[0], 0u);
    EXPECT_EQ(m.selected[1], 2u);
    ASSERT_EQ(m.scores.size(), 3u);
    EXPECT_NEAR(m.scores[0].mi, std::log(2.0), 1e-15);
    EXPECT_EQ(m.scores[1].mi, 0.0);
}

TEST(SelectFeatures, AllZeroScoresPickLowestIndices) {
    const auto x = CategoricalMatrix::from_rows({{1, 1, 1, 1}, {1, 1, 1, 1}});
    const std::vector<int> y = {0, 1};
    const std::vector<std::size_t> cand = {3, 1, 2, 0};
    const auto m = select_features(x, y, cand, 3);
    EXPECT_EQ(m.selected, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(SelectFeatures, SingleClassIsDegenerate) {
    const auto x = CategoricalMatrix::from_rows({{1}, {2}});
    const std::vector<std::size_t> cand = {0};
    EXPECT_THROW(select_features(x, std::vector<int>{0, 0}, cand, 1), SelectionDegenerateError);
    try {
        select_features(x, std::vector<int>{1, 1}, cand, 1);
    } catch (const SelectionDegenerateError& e) {
        EXPECT_STREQ(e.what(), "selection_degenerate");
    }
}
