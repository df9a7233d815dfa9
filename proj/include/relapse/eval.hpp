#pragma once

#include "relapse/classifiers/balanced_forest.hpp"
#include "relapse/classifiers/easy_ensemble.hpp"
#include "relapse/classifiers/isolation_forest.hpp"
#include "relapse/classifiers/naive_bayes.hpp"
#include "relapse/classifiers/random_baseline.hpp"
#include "relapse/features.hpp"
#include "relapse/metrics.hpp"
#include "relapse/transform_select.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace relapse {

enum class ClassifierKind { naive_bayes, balanced_random_forest, easy_ensemble, isolation_forest, random };

inline constexpr std::array<ClassifierKind, 5> kAllClassifiers = {
    ClassifierKind::naive_bayes, ClassifierKind::balanced_random_forest, ClassifierKind::easy_ensemble,
    ClassifierKind::isolation_forest, ClassifierKind::random};

constexpr std::string_view to_string(ClassifierKind k) {
    switch (k) {
    case ClassifierKind::naive_bayes: return "nb";
    case ClassifierKind::balanced_random_forest: return "brf";
    case ClassifierKind::easy_ensemble: return "ee";
    case ClassifierKind::isolation_forest: return "iforest";
    case ClassifierKind::random: return "random";
    }
    return "?";
}

inline std::optional<ClassifierKind> parse_classifier(std::string_view s) {
    for (auto k : kAllClassifiers) {
        if (to_string(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

/// Which feature families are candidates: everything, one signal's 13
/// template features, or the 20 EMA features.
struct Modality {
    enum class Kind { all, signal, ema } kind = Kind::all;
    SignalKind signal = SignalKind::accel_magnitude;

    static Modality all() { return {}; }
    static Modality of(SignalKind s) { return {Kind::signal, s}; }
    static Modality ema() { return {Kind::ema, SignalKind::accel_magnitude}; }

    std::string str() const {
        switch (kind) {
        case Kind::all: return "all";
        case Kind::signal: return std::string(to_string(signal));
        case Kind::ema: return "ema";
        }
        return "all";
    }

    static std::optional<Modality> parse(std::string_view s) {
        if (s == "all") {
            return all();
        }
        if (s == "ema") {
            return ema();
        }
        if (auto sig = parse_signal(s)) {
            return of(*sig);
        }
        return std::nullopt;
    }
};

/// Defaults are the reference configuration: NB on 15 bins, MI selection of
/// the top 5 features from a 100-window age-matched subsample.
struct ExperimentConfig {
    std::string experiment = "evaluate";
    ClassifierKind classifier = ClassifierKind::naive_bayes;
    WindowingConfig windowing;
    int bins = kDefaultBinCount;
    bool selection = true;
    std::size_t selection_n = 100;
    std::size_t selection_m = 5;
    bool include_demographics = true;
    Modality modality;
    double nb_alpha = 1.0;
    BalancedForestParams brf;
    EasyEnsembleParams ee;
    IsolationForestParams iforest;
    std::size_t baseline_runs = 1000;
    std::uint64_t seed = 0;
    /// Worker threads for folds; results do not depend on it (not echoed).
    std::size_t threads = 1;
};

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["experiment"] = c.experiment;
    j["classifier"] = std::string(to_string(c.classifier));
    j["window_days"] = c.windowing.window_days;
    j["horizon_days"] = c.windowing.horizon_days;
    j["stride_days"] = c.windowing.stride_days;
    j["cooloff_days"] = c.windowing.cooloff_days;
    j["min_days_with_data"] = c.windowing.min_days_with_data;
    j["bins"] = c.bins;
    j["selection"] = c.selection;
    j["selection_n"] = c.selection_n;
    j["selection_m"] = c.selection_m;
    j["include_demographics"] = c.include_demographics;
    j["modality"] = c.modality.str();
    j["nb_alpha"] = c.nb_alpha;
    j["brf_trees"] = c.brf.trees;
    j["brf_min_samples_split"] = c.brf.min_samples_split;
    j["ee_bags"] = c.ee.bags;
    j["ee_rounds"] = c.ee.rounds;
    j["if_trees"] = c.iforest.trees;
    j["if_subsample"] = c.iforest.subsample;
    j["decision_threshold"] = c.brf.threshold;
    j["baseline_runs"] = c.baseline_runs;
    j["seed"] = c.seed;
    return j;
}

/// Candidate feature indices for a modality filter and demographics toggle.
inline std::vector<std::size_t> candidate_features(const Modality& modality, bool include_demographics) {
    std::vector<std::size_t> out;
    switch (modality.kind) {
    case Modality::Kind::all:
        for (std::size_t i = 0; i < kTemplateFeatureCount + kEmaFeatureCount; ++i) {
            out.push_back(i);
        }
        break;
    case Modality::Kind::signal:
        for (std::size_t k = 0; k < kTemplateFeaturesPerSignal; ++k) {
            out.push_back(template_feature_index(modality.signal, static_cast<TemplateStat>(k)));
        }
        break;
    case Modality::Kind::ema:
        for (std::size_t i = 0; i < kEmaFeatureCount; ++i) {
            out.push_back(kTemplateFeatureCount + i);
        }
        break;
    }
    if (include_demographics) {
        out.push_back(kAgeFeature);
        out.push_back(kEducationFeature);
    }
    return out;
}

struct PredictionRow {
    WindowSpec window;
    int label = 0;
    int predicted = 0;
    double score = 0.0;
};

struct FoldReport {
    std::string test_patient_id;
    Confusion counts;
    std::vector<SelectionModel::Score> selection;  // selected features, best first
    std::optional<std::string> warning;
};

struct EvalReport {
    std::string experiment;
    std::string arm;
    ClassifierKind classifier = ClassifierKind::naive_bayes;
    nlohmann::ordered_json config;
    std::uint64_t seed = 0;
    std::vector<PredictionRow> rows;
    Confusion counts;
    Scores scores;
    std::vector<FoldReport> folds;
    /// Random classifier only: spread over runs. Rows and counts hold run 0.
    std::optional<BaselineSummary> baseline;
    std::vector<std::string> warnings;

    /// Headline F2: the run mean for the random baseline, pooled F2 otherwise.
    double headline_f2() const { return baseline ? baseline->f2.mean : scores.f2; }
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct FoldOutput {
    FoldReport report;
    std::vector<PredictionRow> rows;
    std::vector<Confusion> baseline_runs;
};

inline FoldOutput run_fold(std::span<const FeatureWindow> windows, const std::string& test_patient,
                           std::size_t fold_index, const ExperimentConfig& config) {
    std::vector<FeatureWindow> train, test;
    for (const auto& w : windows) {
        (w.patient_id() == test_patient ? test : train).push_back(w);
    }
    FoldOutput out;
    out.report.test_patient_id = test_patient;

    Labels y_train, y_test;
    for (const auto& w : train) {
        y_train.push_back(w.is_relapse() ? 1 : 0);
    }
    for (const auto& w : test) {
        y_test.push_back(w.is_relapse() ? 1 : 0);
    }
    const auto classes = count_classes(y_train);
    const double prevalence =
        train.empty() ? 0.0 : static_cast<double>(classes.positive) / static_cast<double>(train.size());

    auto emit = [&](std::size_t i, Prediction p) {
        out.rows.push_back({test[i].spec, y_test[i], p.label, p.score});
        out.report.counts.add(y_test[i], p.label);
    };

    if (config.classifier == ClassifierKind::random) {
        RandomBaselineConfig rc{prevalence, config.baseline_runs, derive_seed(config.seed, {fold_index, 0xBA5E})};
        out.baseline_runs = random_baseline_runs(rc, y_test);
        // Row-level output mirrors run 0.
        Rng rng(derive_seed(rc.seed, {0}));
        for (std::size_t i = 0; i < test.size(); ++i) {
            emit(i, {rng.bernoulli(prevalence) ? 1 : 0, prevalence});
        }
        return out;
    }

    if (classes.positive == 0 || classes.negative == 0) {
        const int majority = classes.positive > classes.negative ? 1 : 0;
        out.report.warning = "fold " + test_patient + ": single-class training data, predicting majority class";
        for (std::size_t i = 0; i < test.size(); ++i) {
            emit(i, {majority, prevalence});
        }
        return out;
    }

    const auto bins = fit_bins(std::span<const FeatureWindow>(train), config.bins);
    const auto x_train_all = bins.apply_all(train);
    const auto x_test_all = bins.apply_all(test);

    const auto candidates = candidate_features(config.modality, config.include_demographics);
    std::vector<std::size_t> selected;
    if (config.selection) {
        const double test_age = test.empty() ? 0.0 : test.front().age();
        const auto sub = build_selection_subsample(train, test_age, config.selection_n);
        Labels y_sub;
        for (auto i : sub) {
            y_sub.push_back(y_train[i]);
        }
        const auto model = select_features(x_train_all.select_rows(sub), y_sub, candidates, config.selection_m);
        selected = model.selected;
        for (auto f : selected) {
            const auto it = std::find_if(model.scores.begin(), model.scores.end(),
                                         [&](const auto& s) { return s.feature == f; });
            out.report.selection.push_back(*it);
        }
    } else {
        selected = candidates;
    }

    const auto x_train = x_train_all.select_cols(selected);
    const auto x_test = x_test_all.select_cols(selected);
    const std::uint64_t fold_seed = derive_seed(config.seed, {fold_index, static_cast<std::uint64_t>(config.classifier)});

    switch (config.classifier) {
    case ClassifierKind::naive_bayes: {
        const auto m = CategoricalNaiveBayes::fit(x_train, y_train, config.bins, config.nb_alpha);
        for (std::size_t i = 0; i < test.size(); ++i) {
            emit(i, m.predict(x_test.row(i)));
        }
        break;
    }
    case ClassifierKind::balanced_random_forest: {
        const auto m = BalancedRandomForest::fit(x_train, y_train, config.brf, fold_seed);
        for (std::size_t i = 0; i < test.size(); ++i) {
            emit(i, m.predict(x_test.row(i)));
        }
        break;
    }
    case ClassifierKind::easy_ensemble: {
        const auto m = EasyEnsemble::fit(x_train, y_train, config.ee, fold_seed);
        for (std::size_t i = 0; i < test.size(); ++i) {
            emit(i, m.predict(x_test.row(i)));
        }
        break;
    }
    case ClassifierKind::isolation_forest: {
        auto m = IsolationForest::fit(x_train, config.iforest, fold_seed);
        m.calibrate(x_train, prevalence);
        for (std::size_t i = 0; i < test.size(); ++i) {
            emit(i, m.predict(x_test.row(i)));
        }
        break;
    }
    case ClassifierKind::random:
        break;
    }
    return out;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    std::vector<std::exception_ptr> errors(count);
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace detail

/// Leave-one-patient-out evaluation over pre-extracted windows. Each fold fits
/// bins, feature selection and the classifier on the other patients only.
inline EvalReport run_lopo(std::span<const FeatureWindow> windows, const ExperimentConfig& config) {
    std::set<std::string> patient_set;
    std::size_t positives = 0;
    for (const auto& w : windows) {
        patient_set.insert(w.patient_id());
        positives += w.is_relapse() ? 1 : 0;
    }
    if (patient_set.size() < 2) {
        throw EvalError("leave-one-patient-out needs at least 2 patients with evaluable windows");
    }
    if (positives == 0) {
        throw EvalError("no_positive_class");
    }
    const std::vector<std::string> patients(patient_set.begin(), patient_set.end());

    std::vector<detail::FoldOutput> folds(patients.size());
    detail::parallel_for(patients.size(), config.threads, [&](std::size_t i) {
        folds[i] = detail::run_fold(windows, patients[i], i, config);
    });

    EvalReport report;
    report.experiment = config.experiment;
    report.arm = config.modality.str();
    report.classifier = config.classifier;
    report.config = config_to_json(config);
    report.seed = config.seed;
    std::vector<Confusion> baseline_runs;
    for (auto& f : folds) {
        report.counts += f.report.counts;
        report.rows.insert(report.rows.end(), f.rows.begin(), f.rows.end());
        if (f.report.warning) {
            report.warnings.push_back(*f.report.warning);
        }
        if (!f.baseline_runs.empty()) {
            baseline_runs.resize(f.baseline_runs.size());
            for (std::size_t r = 0; r < f.baseline_runs.size(); ++r) {
                baseline_runs[r] += f.baseline_runs[r];
            }
        }
        report.folds.push_back(std::move(f.report));
    }
    report.scores = f2_from_counts(report.counts);
    if (config.classifier == ClassifierKind::random) {
        report.baseline = summarize_runs(baseline_runs);
    }
    return report;
}

inline EvalReport run_lopo(const Dataset& ds, const ExperimentConfig& config) {
    const auto extraction = extract_all(ds, config.windowing);
    return run_lopo(extraction.windows, config);
}

/// One LOPO run per classifier (nb, brf, ee, iforest, random).
inline std::vector<EvalReport> run_classifier_comparison(std::span<const FeatureWindow> windows,
                                                         const ExperimentConfig& base) {
    std::vector<EvalReport> out;
    for (auto k : kAllClassifiers) {
        auto c = base;
        c.experiment = "compare-classifiers";
        c.classifier = k;
        auto r = run_lopo(windows, c);
        r.arm = std::string(to_string(k));
        out.push_back(std::move(r));
    }
    return out;
}

/// One arm per signal plus EMA; demographics always among the candidates.
/// Sorted by F2, best first (ties keep canonical arm order).
inline std::vector<EvalReport> run_modality_ablation(std::span<const FeatureWindow> windows,
                                                     const ExperimentConfig& base) {
    std::vector<Modality> arms;
    for (auto s : kAllSignals) {
        arms.push_back(Modality::of(s));
    }
    arms.push_back(Modality::ema());
    std::vector<EvalReport> out;
    for (const auto& m : arms) {
        auto c = base;
        c.experiment = "ablate-modality";
        c.modality = m;
        c.include_demographics = true;
        auto r = run_lopo(windows, c);
        r.arm = m.str();
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const EvalReport& a, const EvalReport& b) { return a.headline_f2() > b.headline_f2(); });
    return out;
}

/// Selection on/off and demographics on/off arms, all on the full feature set.
inline std::vector<EvalReport> run_selection_ablation(std::span<const FeatureWindow> windows,
                                                      const ExperimentConfig& base) {
    struct Arm {
        const char* name;
        bool selection;
        bool demographics;
    };
    const Arm arms[] = {{"selection+demographics", true, true},
                        {"no-selection", false, true},
                        {"no-demographics", true, false}};
    std::vector<EvalReport> out;
    for (const auto& a : arms) {
        auto c = base;
        c.experiment = "ablate-selection";
        c.modality = Modality::all();
        c.selection = a.selection;
        c.include_demographics = a.demographics;
        auto r = run_lopo(windows, c);
        r.arm = a.name;
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace relapse
