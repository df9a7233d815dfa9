#pragma once

#include "relapse/csv.hpp"
#include "relapse/dataset.hpp"
#include "relapse/templates.hpp"
#include "relapse/windowing.hpp"

#include <array>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace relapse {

struct FeatureWindow {
    WindowSpec spec;
    FeatureVector features{};

    bool is_relapse() const { return spec.is_relapse(); }
    const std::string& patient_id() const { return spec.patient_id; }
    /// Demographics are always present in an extracted vector.
    double age() const { return features[kAgeFeature].value_or(0.0); }
};

/// Per-patient view of a Dataset: daily templates per signal and EMA records.
struct PatientRecord {
    Patient patient;
    std::array<std::map<Date, DailyTemplate>, kSignalCount> days;
    std::vector<EmaRecord> ema;
    std::set<Date> days_with_data;
};

inline std::vector<PatientRecord> index_dataset(const Dataset& ds) {
    std::vector<PatientRecord> out;
    out.reserve(ds.patients.size());
    std::map<std::string, std::size_t> at;
    for (const auto& p : ds.patients) {
        at.emplace(p.patient_id, out.size());
        out.push_back(PatientRecord{p, {}, {}, {}});
    }
    // Samples are sorted by (patient, signal, date, hour): each day is a contiguous run.
    const std::span<const HourlySample> all(ds.samples);
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i + 1;
        while (j < all.size() && all[j].patient_id == all[i].patient_id && all[j].signal == all[i].signal &&
               all[j].date == all[i].date) {
            ++j;
        }
        auto& rec = out[at.at(all[i].patient_id)];
        auto t = build_daily_template(all[i].patient_id, all[i].date, all[i].signal, all.subspan(i, j - i));
        rec.days_with_data.insert(all[i].date);
        rec.days[index_of(all[i].signal)].emplace(all[i].date, std::move(t));
        i = j;
    }
    for (const auto& e : ds.ema) {
        out[at.at(e.patient_id)].ema.push_back(e);
    }
    return out;
}

/// Templates plus the contributing days of one signal over one window.
struct SignalWindow {
    WindowTemplates templates;
    std::vector<DailyTemplate> days;
};

inline SignalWindow signal_window(const PatientRecord& rec, SignalKind signal, Date first, Date last) {
    SignalWindow out;
    const auto& days = rec.days[index_of(signal)];
    for (auto it = days.lower_bound(first); it != days.end() && it->first <= last; ++it) {
        out.days.push_back(it->second);
    }
    out.templates = compute_window_templates(signal, out.days);
    return out;
}

using WindowTemplateSet = std::array<WindowTemplates, kSignalCount>;

inline WindowTemplateSet window_template_set(const PatientRecord& rec, Date first, Date last) {
    WindowTemplateSet out;
    for (auto s : kAllSignals) {
        out[index_of(s)] = signal_window(rec, s, first, last).templates;
    }
    return out;
}

/// Builds the 100-feature vector for one window. `prev` holds the templates of
/// the window one stride earlier, or null for a patient's first window.
inline FeatureWindow extract_features(const WindowSpec& window, const PatientRecord& rec,
                                      const WindowTemplateSet* prev) {
    FeatureWindow fw;
    fw.spec = window;
    auto& f = fw.features;

    for (auto s : kAllSignals) {
        const auto sw = signal_window(rec, s, window.feature_start, window.feature_end);
        const auto& t = sw.templates;
        auto set = [&](TemplateStat stat, std::optional<double> v) { f[template_feature_index(s, stat)] = v; };

        if (const auto m = mdt_stats(t.mdt)) {
            set(TemplateStat::mdt_mean, m->mean);
            set(TemplateStat::mdt_std, m->std);
            set(TemplateStat::mdt_max, m->max);
            set(TemplateStat::mdt_range, m->range);
            set(TemplateStat::mdt_skewness, m->skewness);
            set(TemplateStat::mdt_kurtosis, m->kurtosis);
        }
        set(TemplateStat::ddt_mean, ddt_mean(t.ddt));
        set(TemplateStat::max_diff, max_abs_diff(t.mdt, t.mxdt));
        if (prev) {
            const auto curr_mdt = normalize_template(t.mdt);
            const auto curr_mxdt = normalize_template(t.mxdt);
            const auto prev_mdt = normalize_template((*prev)[index_of(s)].mdt);
            set(TemplateStat::dist_mdt, template_distance(curr_mdt, prev_mdt, 0, 23));
            set(TemplateStat::wdist_mdt, template_distance(curr_mdt, prev_mdt, kDayStartHour, kDayEndHour));
            set(TemplateStat::dist_mxdt, template_distance(curr_mxdt, prev_mdt, 0, 23));
        }
        const auto daily = daily_average_stats(sw.days);
        set(TemplateStat::daily_mean, daily.mean);
        set(TemplateStat::daily_std, daily.std);
    }

    for (std::size_t item = 0; item < kEmaItemCount; ++item) {
        std::vector<double> answers;
        for (const auto& e : rec.ema) {
            if (e.date >= window.feature_start && e.date <= window.feature_end) {
                answers.push_back(static_cast<double>(e.items[item]));
            }
        }
        const auto ms = detail::mean_std(answers);
        f[ema_feature_index(item, 0)] = ms.mean;
        f[ema_feature_index(item, 1)] = ms.std;
    }

    f[kAgeFeature] = static_cast<double>(rec.patient.age);
    f[kEducationFeature] = static_cast<double>(rec.patient.education_years);
    return fw;
}

struct FeatureExtraction {
    std::vector<FeatureWindow> windows;  // evaluable, ordered by (patient_id, window start)
    std::vector<WindowSpec> excluded;    // exclusion log entries
};

inline FeatureExtraction extract_all(const std::vector<PatientRecord>& records, const WindowingConfig& config) {
    FeatureExtraction out;
    for (const auto& rec : records) {
        const auto windows = enumerate_windows(rec.patient, rec.patient.relapse_dates, rec.days_with_data, config);
        for (const auto& w : windows) {
            if (!w.evaluable()) {
                out.excluded.push_back(w);
                continue;
            }
            const Date prev_start = w.feature_start - config.stride_days;
            if (prev_start < rec.patient.observation_start) {
                out.windows.push_back(extract_features(w, rec, nullptr));
            } else {
                const auto prev = window_template_set(rec, prev_start, prev_start + (config.window_days - 1));
                out.windows.push_back(extract_features(w, rec, &prev));
            }
        }
    }
    return out;
}

inline FeatureExtraction extract_all(const Dataset& ds, const WindowingConfig& config) {
    return extract_all(index_dataset(ds), config);
}

inline void write_feature_matrix(const std::vector<FeatureWindow>& windows, const std::string& path) {
    auto out = csv::open_output(path);
    out << "patient_id,window_start,label";
    for (const auto& n : canonical_feature_names()) {
        out << ',' << n.str();
    }
    out << '\n';
    for (const auto& w : windows) {
        out << w.spec.patient_id << ',' << w.spec.feature_start.iso() << ',' << (w.is_relapse() ? 1 : 0);
        for (const auto& v : w.features) {
            out << ',';
            if (v) {
                out << csv::format_double(*v);
            }
        }
        out << '\n';
    }
    csv::finish_output(out, path);
}

inline void write_exclusion_log(const std::vector<WindowSpec>& excluded, const std::string& path) {
    auto out = csv::open_output(path);
    out << "patient_id,window_start,reason\n";
    for (const auto& w : excluded) {
        out << w.patient_id << ',' << w.feature_start.iso() << ',' << to_string(*w.exclusion) << '\n';
    }
    csv::finish_output(out, path);
}

} // namespace relapse
