#pragma once

#include "relapse/data_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relapse {

/// 24 hourly slots; a slot is empty when nothing was recorded in that hour.
using HourTemplate = std::array<std::optional<double>, kHoursPerDay>;

struct DailyTemplate {
    std::string patient_id;
    Date date;
    SignalKind signal = SignalKind::accel_magnitude;
    HourTemplate hours{};

    bool empty() const {
        return std::none_of(hours.begin(), hours.end(), [](const auto& h) { return h.has_value(); });
    }
};

/// mDT / dDT / mxDT of one signal over a feature window.
struct WindowTemplates {
    SignalKind signal = SignalKind::accel_magnitude;
    HourTemplate mdt{};
    HourTemplate ddt{};
    HourTemplate mxdt{};
    int days_present = 0;
};

/// Moments of a template over its present slots.
struct TemplateMoments {
    double mean = 0.0;
    double std = 0.0;
    double max = 0.0;
    double range = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0; // excess
};

struct MeanStd {
    std::optional<double> mean;
    std::optional<double> std;
};

namespace detail {

inline std::vector<double> present_values(const HourTemplate& t) {
    std::vector<double> out;
    out.reserve(kHoursPerDay);
    for (const auto& h : t) {
        if (h) {
            out.push_back(*h);
        }
    }
    return out;
}

inline double mean_of(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

inline bool all_equal(std::span<const double> xs) {
    return std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end();
}

/// Population standard deviation; exactly 0 for constant input.
inline double population_std(std::span<const double> xs) {
    if (all_equal(xs)) {
        return 0.0;
    }
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(xs.size()));
}

inline MeanStd mean_std(std::span<const double> xs) {
    if (xs.empty()) {
        return {};
    }
    return {mean_of(xs), population_std(xs)};
}

} // namespace detail

inline DailyTemplate build_daily_template(const std::string& patient_id, Date date, SignalKind signal,
                                          std::span<const HourlySample> samples) {
    std::array<double, kHoursPerDay> sum{};
    std::array<int, kHoursPerDay> count{};
    for (const auto& s : samples) {
        if (s.patient_id != patient_id || s.date != date || s.signal != signal) {
            throw std::invalid_argument("build_daily_template: samples with mixed patient/date/signal");
        }
        if (s.hour < 0 || s.hour >= static_cast<int>(kHoursPerDay)) {
            throw std::invalid_argument("build_daily_template: hour out of range");
        }
        sum[static_cast<std::size_t>(s.hour)] += s.value;
        ++count[static_cast<std::size_t>(s.hour)];
    }
    DailyTemplate out{patient_id, date, signal, {}};
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        if (count[h] > 0) {
            out.hours[h] = sum[h] / count[h];
        }
    }
    return out;
}

/// Per-hour mean, population std and max across the given days. Days are
/// expected to belong to one signal and one window.
inline WindowTemplates compute_window_templates(SignalKind signal, std::span<const DailyTemplate> days) {
    WindowTemplates out;
    out.signal = signal;
    for (const auto& d : days) {
        if (!d.empty()) {
            ++out.days_present;
        }
    }
    std::vector<double> column;
    column.reserve(days.size());
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        column.clear();
        for (const auto& d : days) {
            if (d.hours[h]) {
                column.push_back(*d.hours[h]);
            }
        }
        if (column.empty()) {
            continue;
        }
        out.mdt[h] = detail::mean_of(column);
        out.ddt[h] = detail::population_std(column);
        out.mxdt[h] = *std::max_element(column.begin(), column.end());
    }
    return out;
}

/// Mean, population std, max, range, skewness and excess kurtosis over the
/// present slots. Skewness and kurtosis are 0 for a constant template.
inline std::optional<TemplateMoments> mdt_stats(const HourTemplate& mdt) {
    const auto xs = detail::present_values(mdt);
    if (xs.empty()) {
        return std::nullopt;
    }
    TemplateMoments m;
    m.mean = detail::mean_of(xs);
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    m.max = *hi;
    m.range = *hi - *lo;
    if (detail::all_equal(xs)) {
        m.mean = xs.front();
        return m;
    }
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const auto n = static_cast<double>(xs.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.std = std::sqrt(m2);
    if (m2 > 0.0) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

inline std::optional<double> ddt_mean(const HourTemplate& ddt) {
    const auto xs = detail::present_values(ddt);
    if (xs.empty()) {
        return std::nullopt;
    }
    return detail::mean_of(xs);
}

/// max_h |mdt[h] - mxdt[h]| over hours present in both.
inline std::optional<double> max_abs_diff(const HourTemplate& mdt, const HourTemplate& mxdt) {
    std::optional<double> best;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        if (mdt[h] && mxdt[h]) {
            const double d = std::abs(*mdt[h] - *mxdt[h]);
            best = best ? std::max(*best, d) : d;
        }
    }
    return best;
}

/// Divides by the largest present slot; a non-positive maximum maps every
/// present slot to 0.
inline HourTemplate normalize_template(const HourTemplate& t) {
    std::optional<double> max;
    for (const auto& h : t) {
        if (h) {
            max = max ? std::max(*max, *h) : *h;
        }
    }
    HourTemplate out{};
    if (!max) {
        return out;
    }
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
        if (t[h]) {
            out[h] = *max > 0.0 ? *t[h] / *max : 0.0;
        }
    }
    return out;
}

inline constexpr int kDayStartHour = 9;
inline constexpr int kDayEndHour = 21;

/// Sum of squared slot differences over [hour_lo, hour_hi] (inclusive),
/// skipping hours missing in either template. Empty overlap gives no value.
inline std::optional<double> template_distance(const HourTemplate& curr, const HourTemplate& prev,
                                               int hour_lo = 0, int hour_hi = 23) {
    if (hour_lo < 0 || hour_hi > 23 || hour_lo > hour_hi) {
        throw std::invalid_argument("template_distance: invalid hour range");
    }
    bool overlap = false;
    double sum = 0.0;
    for (int h = hour_lo; h <= hour_hi; ++h) {
        const auto& a = curr[static_cast<std::size_t>(h)];
        const auto& b = prev[static_cast<std::size_t>(h)];
        if (a && b) {
            overlap = true;
            sum += (*a - *b) * (*a - *b);
        }
    }
    if (!overlap) {
        return std::nullopt;
    }
    return sum;
}

/// Mean and population std of per-day averages, over days with any data.
inline MeanStd daily_average_stats(std::span<const DailyTemplate> days) {
    std::vector<double> averages;
    averages.reserve(days.size());
    for (const auto& d : days) {
        const auto xs = detail::present_values(d.hours);
        if (!xs.empty()) {
            averages.push_back(detail::mean_of(xs));
        }
    }
    return detail::mean_std(averages);
}

} // namespace relapse
