#pragma once

#include "relapse/dataset.hpp"
#include "relapse/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace relapse {

/// Smooth 24-hour rhythm: baseline plus a circular Gaussian bump at the peak hour.
struct SignalRhythm {
    double baseline = 0.0;
    double amplitude = 1.0;
    double peak_hour = 14.0;
    double width_hours = 3.0;
    double noise_std = 0.1;

    double mean_at(double hour) const {
        double d = std::fmod(std::abs(hour - peak_hour), 24.0);
        d = std::min(d, 24.0 - d);
        return baseline + amplitude * std::exp(-0.5 * (d * d) / (width_hours * width_hours));
    }
};

struct ProdromalShift {
    std::vector<SignalKind> signals = {SignalKind::call_duration, SignalKind::distance_traveled};
    int onset_days = 14;             // shift covers [relapse - onset_days, relapse)
    double magnitude = 3.0;          // mean shift in units of the signal's noise std
    double peak_shift_hours = 0.0;   // optional displacement of the rhythm peak
    double ema_shift_per_unit = 0.25; // EMA answer shift per unit of magnitude
};

struct SynthConfig {
    std::size_t patient_count = 40;
    int days_per_patient = 180;
    double relapse_patient_fraction = 0.5;
    std::array<SignalRhythm, kSignalCount> rhythms = {{
        {0.2, 1.0, 14.0, 4.0, 0.3},      // accel_magnitude
        {5.0, 200.0, 13.0, 3.0, 40.0},   // light_level
        {0.0, 500.0, 12.0, 3.0, 150.0},  // distance_traveled
        {10.0, 120.0, 18.0, 2.5, 40.0},  // call_duration
        {30.0, 25.0, 15.0, 5.0, 6.0},    // sound_level
        {20.0, 300.0, 19.0, 3.0, 80.0},  // conversation_duration
    }};
    double between_patient_jitter = 0.2; // relative spread of per-patient baseline/amplitude
    double peak_jitter_hours = 1.0;
    double day_jitter = 0.1;              // relative spread of a day's overall level
    ProdromalShift prodromal;
    double ema_per_week = 3.0;
    double missing_rate = 0.1;
    Date start_date = Date::from_ymd(2020, 1, 6);
    std::uint64_t seed = 0;

    void validate() const {
        auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
        if (!rate(relapse_patient_fraction) || !rate(missing_rate) || !rate(ema_per_week / 7.0)) {
            throw std::invalid_argument("synth: rates must lie in [0, 1] (EMA at most 7 per week)");
        }
        if (prodromal.magnitude < 0.0 || between_patient_jitter < 0.0 || day_jitter < 0.0) {
            throw std::invalid_argument("synth: magnitude and jitters must be non-negative");
        }
        if (days_per_patient < 1 || prodromal.onset_days < 0) {
            throw std::invalid_argument("synth: days_per_patient must be positive");
        }
    }
};

inline std::string synth_patient_id(std::size_t i) {
    auto digits = std::to_string(i + 1);
    if (digits.size() < 3) {
        digits.insert(0, 3 - digits.size(), '0');
    }
    return "P" + digits;
}

/// Seeded cohort: per-patient rhythms with noise and dropout, EMA roughly
/// ema_per_week times a week, one relapse for a fixed fraction of patients,
/// and a prodromal mean shift before each relapse.
inline Dataset generate(const SynthConfig& config) {
    config.validate();
    Dataset ds;
    const std::size_t n = config.patient_count;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    {
        Rng rng(derive_seed(config.seed, {0xC0407}));
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[rng.index(i)]);
        }
    }
    const auto relapsing = static_cast<std::size_t>(std::llround(config.relapse_patient_fraction * static_cast<double>(n)));
    std::vector<bool> has_relapse(n, false);
    for (std::size_t i = 0; i < relapsing; ++i) {
        has_relapse[order[i]] = true;
    }

    const auto& shift = config.prodromal;
    for (std::size_t pi = 0; pi < n; ++pi) {
        Rng rng(derive_seed(config.seed, {pi}));
        Patient p;
        p.patient_id = synth_patient_id(pi);
        p.age = 18 + static_cast<int>(rng.index(48));
        p.education_years = 5 + static_cast<int>(rng.index(10));
        p.observation_start = config.start_date + static_cast<int>(rng.index(30));
        p.observation_end = p.observation_start + (config.days_per_patient - 1);
        if (has_relapse[pi]) {
            const int lo = static_cast<int>(std::floor(0.2 * config.days_per_patient));
            const int hi = std::max(lo + 1, static_cast<int>(std::ceil(0.8 * config.days_per_patient)));
            p.relapse_dates.push_back(p.observation_start + lo + static_cast<int>(rng.index(static_cast<std::uint64_t>(hi - lo))));
        }
        auto prodromal = [&](Date d) {
            return std::any_of(p.relapse_dates.begin(), p.relapse_dates.end(),
                               [&](Date r) { return d >= r - shift.onset_days && d < r; });
        };

        std::array<SignalRhythm, kSignalCount> rhythm = config.rhythms;
        for (auto& r : rhythm) {
            const double scale = std::max(0.0, 1.0 + config.between_patient_jitter * rng.normal());
            r.baseline *= scale;
            r.amplitude *= scale;
            r.peak_hour += config.peak_jitter_hours * rng.normal();
        }

        for (auto s : kAllSignals) {
            const bool affected = std::find(shift.signals.begin(), shift.signals.end(), s) != shift.signals.end();
            for (int day = 0; day < config.days_per_patient; ++day) {
                const Date date = p.observation_start + day;
                const bool shifted = affected && prodromal(date);
                SignalRhythm r = rhythm[index_of(s)];
                if (shifted) {
                    r.peak_hour += shift.peak_shift_hours;
                }
                const double level = std::max(0.0, 1.0 + config.day_jitter * rng.normal());
                for (int h = 0; h < static_cast<int>(kHoursPerDay); ++h) {
                    const bool dropped = rng.bernoulli(config.missing_rate);
                    const double noise = r.noise_std * rng.normal();
                    if (dropped) {
                        continue;
                    }
                    double v = r.mean_at(h) * level + noise;
                    if (shifted) {
                        v += shift.magnitude * r.noise_std;
                    }
                    ds.samples.push_back({p.patient_id, date, h, s, std::max(0.0, v)});
                }
            }
        }

        std::array<double, kEmaItemCount> item_base{};
        for (auto& b : item_base) {
            b = rng.uniform(0.0, 2.0);
        }
        for (int day = 0; day < config.days_per_patient; ++day) {
            const Date date = p.observation_start + day;
            if (!rng.bernoulli(config.ema_per_week / 7.0)) {
                continue;
            }
            const double ema_shift = prodromal(date) ? shift.ema_shift_per_unit * shift.magnitude : 0.0;
            EmaRecord rec{p.patient_id, date, {}};
            for (std::size_t i = 0; i < kEmaItemCount; ++i) {
                const double v = std::round(item_base[i] + 0.5 * rng.normal() + ema_shift);
                rec.items[i] = static_cast<int>(std::clamp(v, 0.0, static_cast<double>(kEmaMaxAnswer)));
            }
            ds.ema.push_back(rec);
        }
        ds.patients.push_back(std::move(p));
    }
    return ds;
}

} // namespace relapse
