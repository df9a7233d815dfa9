#pragma once

#include "relapse/date.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relapse {

enum class SignalKind : int {
    accel_magnitude = 0,
    light_level,
    distance_traveled,
    call_duration,
    sound_level,
    conversation_duration,
};

inline constexpr std::size_t kSignalCount = 6;
inline constexpr std::size_t kHoursPerDay = 24;
inline constexpr std::size_t kEmaItemCount = 10;
inline constexpr int kEmaMaxAnswer = 3;

inline constexpr std::array<SignalKind, kSignalCount> kAllSignals = {
    SignalKind::accel_magnitude, SignalKind::light_level,  SignalKind::distance_traveled,
    SignalKind::call_duration,   SignalKind::sound_level,  SignalKind::conversation_duration,
};

inline constexpr std::array<std::string_view, kSignalCount> kSignalNames = {
    "accel_magnitude", "light_level",  "distance_traveled",
    "call_duration",   "sound_level",  "conversation_duration",
};

constexpr std::size_t index_of(SignalKind s) { return static_cast<std::size_t>(s); }
constexpr std::string_view to_string(SignalKind s) { return kSignalNames[index_of(s)]; }

inline std::optional<SignalKind> parse_signal(std::string_view name) {
    for (std::size_t i = 0; i < kSignalCount; ++i) {
        if (kSignalNames[i] == name) {
            return kAllSignals[i];
        }
    }
    return std::nullopt;
}

struct HourlySample {
    std::string patient_id;
    Date date;
    int hour = 0;
    SignalKind signal = SignalKind::accel_magnitude;
    double value = 0.0;
};

/// One EMA submission; answers 0..3 = not at all, a little, moderately, extremely.
struct EmaRecord {
    std::string patient_id;
    Date date;
    std::array<int, kEmaItemCount> items{};
};

struct Patient {
    std::string patient_id;
    int age = 0;
    int education_years = 0;
    std::vector<Date> relapse_dates;
    Date observation_start;
    Date observation_end;
};

// ---------------------------------------------------------------------------
// Feature inventory
//
// 100 features = 6 signals x 13 template features + 10 EMA items x 2 + 2
// demographics, laid out in that order.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kTemplateFeaturesPerSignal = 13;
inline constexpr std::size_t kTemplateFeatureCount = kSignalCount * kTemplateFeaturesPerSignal;
inline constexpr std::size_t kEmaFeatureCount = kEmaItemCount * 2;
inline constexpr std::size_t kDemographicFeatureCount = 2;
inline constexpr std::size_t kFeatureCount =
    kTemplateFeatureCount + kEmaFeatureCount + kDemographicFeatureCount;
static_assert(kFeatureCount == 100);

enum class TemplateStat : int {
    mdt_mean = 0,
    mdt_std,
    mdt_max,
    mdt_range,
    mdt_skewness,
    mdt_kurtosis,
    ddt_mean,
    max_diff,
    dist_mdt,
    wdist_mdt,
    dist_mxdt,
    daily_mean,
    daily_std,
};

inline constexpr std::array<std::string_view, kTemplateFeaturesPerSignal> kTemplateStatNames = {
    "mdt_mean", "mdt_std",   "mdt_max",   "mdt_range",  "mdt_skewness", "mdt_kurtosis", "ddt_mean",
    "max_diff", "dist_mdt",  "wdist_mdt", "dist_mxdt",  "daily_mean",   "daily_std",
};

enum class FeatureFamily { template_rhythm, ema, demographic };

struct FeatureName {
    FeatureFamily family = FeatureFamily::template_rhythm;
    /// Signal index for template features, 0-based item index for EMA, 0/1 for demographics.
    int source = 0;
    std::string statistic;

    std::string str() const {
        switch (family) {
        case FeatureFamily::template_rhythm:
            return std::string(kSignalNames[static_cast<std::size_t>(source)]) + "." + statistic;
        case FeatureFamily::ema:
            return "ema_item_" + std::to_string(source + 1) + "." + statistic;
        case FeatureFamily::demographic:
            return statistic;
        }
        return statistic;
    }

    bool operator==(const FeatureName&) const = default;
};

constexpr std::size_t template_feature_index(SignalKind s, TemplateStat stat) {
    return index_of(s) * kTemplateFeaturesPerSignal + static_cast<std::size_t>(stat);
}

/// `item` is 0-based; `stat` 0 = mean, 1 = std.
constexpr std::size_t ema_feature_index(std::size_t item, std::size_t stat) {
    return kTemplateFeatureCount + item * 2 + stat;
}

inline constexpr std::size_t kAgeFeature = kTemplateFeatureCount + kEmaFeatureCount;
inline constexpr std::size_t kEducationFeature = kAgeFeature + 1;

inline const std::vector<FeatureName>& canonical_feature_names() {
    static const std::vector<FeatureName> names = [] {
        std::vector<FeatureName> out;
        out.reserve(kFeatureCount);
        for (std::size_t s = 0; s < kSignalCount; ++s) {
            for (auto stat : kTemplateStatNames) {
                out.push_back({FeatureFamily::template_rhythm, static_cast<int>(s), std::string(stat)});
            }
        }
        for (std::size_t item = 0; item < kEmaItemCount; ++item) {
            out.push_back({FeatureFamily::ema, static_cast<int>(item), "mean"});
            out.push_back({FeatureFamily::ema, static_cast<int>(item), "std"});
        }
        out.push_back({FeatureFamily::demographic, 0, "age"});
        out.push_back({FeatureFamily::demographic, 1, "education_years"});
        return out;
    }();
    return names;
}

inline std::optional<std::size_t> feature_index(std::string_view name) {
    const auto& names = canonical_feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i].str() == name) {
            return i;
        }
    }
    return std::nullopt;
}

/// 100 feature values in canonical order. Missing values stay missing until binning.
using FeatureVector = std::array<std::optional<double>, kFeatureCount>;

} // namespace relapse
