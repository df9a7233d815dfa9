#pragma once

#include "relapse/data_model.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relapse {

enum class WindowLabel : int { non_relapse = 0, relapse = 1 };

enum class ExclusionReason { insufficient_data, cooloff };

constexpr std::string_view to_string(ExclusionReason r) {
    return r == ExclusionReason::insufficient_data ? "insufficient_data" : "cooloff";
}

struct WindowingConfig {
    int window_days = 28;
    int horizon_days = 7;
    int stride_days = 7;
    int cooloff_days = 28;
    int min_days_with_data = 7;

    void validate() const {
        if (window_days <= 0 || horizon_days <= 0 || stride_days <= 0) {
            throw std::invalid_argument("window, horizon and stride must be positive");
        }
        if (cooloff_days < 0 || min_days_with_data < 0) {
            throw std::invalid_argument("cool-off and minimum data days must be non-negative");
        }
    }
};

/// One (feature window, prediction window) candidate. Evaluable iff no exclusion.
struct WindowSpec {
    std::string patient_id;
    Date feature_start;
    Date feature_end;
    Date predict_start;
    Date predict_end;
    WindowLabel label = WindowLabel::non_relapse;
    std::optional<ExclusionReason> exclusion;

    bool evaluable() const { return !exclusion.has_value(); }
    bool is_relapse() const { return label == WindowLabel::relapse; }
};

/// Walks the stride grid anchored at observation_start and returns every
/// candidate whose prediction window ends inside the observation span.
/// `days_with_data` holds the dates on which any sensor produced a sample.
inline std::vector<WindowSpec> enumerate_windows(const Patient& patient, const std::vector<Date>& relapse_dates,
                                                 const std::set<Date>& days_with_data,
                                                 const WindowingConfig& config) {
    config.validate();
    std::vector<WindowSpec> out;
    std::optional<Date> blocked_until;
    for (Date start = patient.observation_start;; start = start + config.stride_days) {
        WindowSpec w;
        w.patient_id = patient.patient_id;
        w.feature_start = start;
        w.feature_end = start + (config.window_days - 1);
        w.predict_start = w.feature_end + 1;
        w.predict_end = w.predict_start + (config.horizon_days - 1);
        if (w.predict_end > patient.observation_end) {
            break;
        }
        const bool relapse = std::any_of(relapse_dates.begin(), relapse_dates.end(), [&](Date d) {
            return d >= w.predict_start && d <= w.predict_end;
        });
        w.label = relapse ? WindowLabel::relapse : WindowLabel::non_relapse;

        if (blocked_until && w.feature_start < *blocked_until) {
            w.exclusion = ExclusionReason::cooloff;
        } else {
            const auto lo = days_with_data.lower_bound(w.feature_start);
            const auto hi = days_with_data.upper_bound(w.feature_end);
            const auto covered = std::distance(lo, hi);
            if (covered < config.min_days_with_data) {
                w.exclusion = ExclusionReason::insufficient_data;
            } else if (relapse && config.cooloff_days > 0) {
                // A zero cool-off disables the rule entirely.
                blocked_until = w.predict_end + config.cooloff_days;
            }
        }
        out.push_back(std::move(w));
    }
    return out;
}

inline std::vector<WindowSpec> evaluable_only(const std::vector<WindowSpec>& windows) {
    std::vector<WindowSpec> out;
    std::copy_if(windows.begin(), windows.end(), std::back_inserter(out),
                 [](const WindowSpec& w) { return w.evaluable(); });
    return out;
}

} // namespace relapse
