#pragma once

#include "relapse/metrics.hpp"
#include "relapse/rng.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace relapse {

struct RandomBaselineConfig {
    double relapse_ratio = 0.0;  // training prevalence
    std::size_t runs = 1000;
    std::uint64_t seed = 0;
};

struct BaselineSummary {
    Spread precision;
    Spread recall;
    Spread f2;
    std::size_t runs = 0;
};

/// Confusion counts of each run; run r predicts every window relapse with
/// probability relapse_ratio using its own derived stream.
inline std::vector<Confusion> random_baseline_runs(const RandomBaselineConfig& config,
                                                   std::span<const int> test_labels) {
    if (config.runs == 0) {
        throw std::invalid_argument("random_baseline: runs must be >= 1");
    }
    if (config.relapse_ratio < 0.0 || config.relapse_ratio > 1.0) {
        throw std::invalid_argument("random_baseline: relapse ratio outside [0, 1]");
    }
    std::vector<Confusion> out(config.runs);
    for (std::size_t r = 0; r < config.runs; ++r) {
        Rng rng(derive_seed(config.seed, {r}));
        for (int label : test_labels) {
            out[r].add(label, rng.bernoulli(config.relapse_ratio) ? 1 : 0);
        }
    }
    return out;
}

inline BaselineSummary summarize_runs(std::span<const Confusion> runs) {
    std::vector<double> p, r, f;
    p.reserve(runs.size());
    r.reserve(runs.size());
    f.reserve(runs.size());
    for (const auto& c : runs) {
        const auto s = f2_from_counts(c);
        p.push_back(s.precision);
        r.push_back(s.recall);
        f.push_back(s.f2);
    }
    return {mean_and_std(p), mean_and_std(r), mean_and_std(f), runs.size()};
}

inline BaselineSummary random_baseline(const RandomBaselineConfig& config, std::span<const int> test_labels) {
    const auto runs = random_baseline_runs(config, test_labels);
    return summarize_runs(runs);
}

} // namespace relapse
