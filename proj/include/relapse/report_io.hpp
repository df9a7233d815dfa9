#pragma once

#include "relapse/csv.hpp"
#include "relapse/eval.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace relapse {

inline void write_predictions(const EvalReport& report, const std::string& path) {
    auto out = csv::open_output(path);
    out << "patient_id,window_start,window_end,prediction_date_range,label,predicted,score\n";
    for (const auto& r : report.rows) {
        out << r.window.patient_id << ',' << r.window.feature_start.iso() << ',' << r.window.feature_end.iso() << ','
            << r.window.predict_start.iso() << '/' << r.window.predict_end.iso() << ',' << r.label << ','
            << r.predicted << ',' << csv::format_fixed(r.score) << '\n';
    }
    csv::finish_output(out, path);
}

inline nlohmann::ordered_json metrics_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["experiment"] = report.experiment;
    j["arm"] = report.arm;
    j["classifier"] = std::string(to_string(report.classifier));
    j["tp"] = report.counts.tp;
    j["fp"] = report.counts.fp;
    j["fn"] = report.counts.fn;
    j["tn"] = report.counts.tn;
    j["precision"] = report.scores.precision;
    j["recall"] = report.scores.recall;
    j["f2"] = report.scores.f2;
    if (report.baseline) {
        const auto& b = *report.baseline;
        j["baseline"] = {
            {"runs", b.runs},
            {"precision_mean", b.precision.mean}, {"precision_std", b.precision.std},
            {"recall_mean", b.recall.mean},       {"recall_std", b.recall.std},
            {"f2_mean", b.f2.mean},               {"f2_std", b.f2.std},
        };
    }
    j["config"] = report.config;
    j["seed"] = report.seed;
    auto folds = nlohmann::ordered_json::array();
    for (const auto& f : report.folds) {
        nlohmann::ordered_json fj;
        fj["test_patient_id"] = f.test_patient_id;
        fj["tp"] = f.counts.tp;
        fj["fp"] = f.counts.fp;
        fj["fn"] = f.counts.fn;
        fj["tn"] = f.counts.tn;
        folds.push_back(std::move(fj));
    }
    j["folds"] = std::move(folds);
    j["warnings"] = report.warnings;
    return j;
}

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
    auto out = csv::open_output(path);
    out << j.dump(2) << '\n';
    csv::finish_output(out, path);
}

inline void write_metrics(const EvalReport& report, const std::string& path) {
    write_json(metrics_to_json(report), path);
}

/// Multi-arm experiments: one document with every arm in report order.
inline void write_metrics(std::span<const EvalReport> reports, const std::string& experiment,
                          const std::string& path) {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    auto arms = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        arms.push_back(metrics_to_json(r));
    }
    j["arms"] = std::move(arms);
    write_json(j, path);
}

/// test_patient_id,rank,feature,mi: the features chosen in each fold.
inline void write_selection_report(const EvalReport& report, const std::string& path) {
    auto out = csv::open_output(path);
    out << "test_patient_id,rank,feature,mi\n";
    const auto& names = canonical_feature_names();
    for (const auto& f : report.folds) {
        for (std::size_t i = 0; i < f.selection.size(); ++i) {
            out << f.test_patient_id << ',' << i + 1 << ',' << names[f.selection[i].feature].str() << ','
                << csv::format_fixed(f.selection[i].mi, 9) << '\n';
        }
    }
    csv::finish_output(out, path);
}

} // namespace relapse
