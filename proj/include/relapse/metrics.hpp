#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace relapse {

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    void add(int label, int predicted) {
        if (label) {
            (predicted ? tp : fn)++;
        } else {
            (predicted ? fp : tn)++;
        }
    }

    Confusion& operator+=(const Confusion& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }

    std::size_t total() const { return tp + fp + fn + tn; }
    bool operator==(const Confusion&) const = default;
};

struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double f2 = 0.0;
};

/// F2 from precision and recall; 0 when both are 0.
inline double f2_score(double precision, double recall) {
    const double denom = 4.0 * precision + recall;
    return denom > 0.0 ? 5.0 * precision * recall / denom : 0.0;
}

inline Scores f2_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
    Scores s;
    s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f2 = f2_score(s.precision, s.recall);
    return s;
}

inline Scores f2_from_counts(const Confusion& c) { return f2_from_counts(c.tp, c.fp, c.fn); }

struct Spread {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and population standard deviation.
inline Spread mean_and_std(std::span<const double> xs) {
    Spread out;
    if (xs.empty()) {
        return out;
    }
    for (double x : xs) {
        out.mean += x;
    }
    out.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - out.mean) * (x - out.mean);
    }
    out.std = std::sqrt(ss / static_cast<double>(xs.size()));
    return out;
}

} // namespace relapse
