// relapse: synthetic cohort generation, feature extraction and
// leave-one-patient-out relapse-prediction experiments.

#include "relapse/relapse.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace relapse;

namespace {

struct DataOptions {
    std::string dir;
    std::string sensors, ema, patients, relapses;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--data", dir, "Directory holding sensors.csv, ema.csv, patients.csv, relapses.csv");
        cmd->add_option("--sensors", sensors, "sensors.csv (overrides --data)");
        cmd->add_option("--ema", ema, "ema.csv (overrides --data)");
        cmd->add_option("--patients", patients, "patients.csv (overrides --data)");
        cmd->add_option("--relapses", relapses, "relapses.csv (overrides --data)");
    }

    DatasetPaths paths() const {
        DatasetPaths p = dir.empty() ? DatasetPaths{} : DatasetPaths::in_directory(dir);
        if (!sensors.empty()) p.sensors = sensors;
        if (!ema.empty()) p.ema = ema;
        if (!patients.empty()) p.patients = patients;
        if (!relapses.empty()) p.relapses = relapses;
        if (p.sensors.empty() || p.ema.empty() || p.patients.empty() || p.relapses.empty()) {
            throw CLI::ValidationError("input", "give --data DIR or all of --sensors --ema --patients --relapses");
        }
        return p;
    }
};

void add_windowing(CLI::App* cmd, WindowingConfig& w) {
    cmd->add_option("--window-days", w.window_days, "Feature window length (days)")->capture_default_str();
    cmd->add_option("--horizon-days", w.horizon_days, "Prediction window length (days)")->capture_default_str();
    cmd->add_option("--stride-days", w.stride_days, "Stride between windows (days)")->capture_default_str();
    cmd->add_option("--cooloff-days", w.cooloff_days, "Cool-off after a relapse window (days)")->capture_default_str();
    cmd->add_option("--min-days", w.min_days_with_data, "Minimum days with sensor data per window")
        ->capture_default_str();
}

struct ExperimentOptions {
    ExperimentConfig config;
    std::string classifier = "nb";
    std::string modality = "all";
    bool no_selection = false;
    bool no_demographics = false;
    double threshold = 0.5;

    void add_to(CLI::App* cmd, bool with_classifier) {
        add_windowing(cmd, config.windowing);
        if (with_classifier) {
            cmd->add_option("--classifier", classifier, "nb | brf | ee | iforest | random")->capture_default_str();
            cmd->add_option("--modality", modality, "all | ema | <signal name>")->capture_default_str();
            cmd->add_flag("--no-selection", no_selection, "Use every candidate feature");
            cmd->add_flag("--no-demographics", no_demographics, "Drop age and education years from candidates");
        }
        cmd->add_option("--bins", config.bins, "Histogram bins per feature")->capture_default_str();
        cmd->add_option("--selection-n", config.selection_n, "Age-matched non-relapse windows for selection")
            ->capture_default_str();
        cmd->add_option("--selection-m", config.selection_m, "Features kept by MI selection")->capture_default_str();
        cmd->add_option("--nb-alpha", config.nb_alpha, "Naive Bayes additive smoothing")->capture_default_str();
        cmd->add_option("--brf-trees", config.brf.trees, "Balanced random forest trees")->capture_default_str();
        cmd->add_option("--ee-bags", config.ee.bags, "EasyEnsemble bags")->capture_default_str();
        cmd->add_option("--ee-rounds", config.ee.rounds, "Boosting rounds per EasyEnsemble bag")->capture_default_str();
        cmd->add_option("--if-trees", config.iforest.trees, "Isolation forest trees")->capture_default_str();
        cmd->add_option("--if-subsample", config.iforest.subsample, "Isolation tree subsample size")
            ->capture_default_str();
        cmd->add_option("--threshold", threshold, "Decision threshold for BRF/EE scores")->capture_default_str();
        cmd->add_option("--baseline-runs", config.baseline_runs, "Random baseline runs")->capture_default_str();
    }

    ExperimentConfig resolve(std::uint64_t seed, std::size_t threads) const {
        ExperimentConfig c = config;
        const auto k = parse_classifier(classifier);
        if (!k) {
            throw CLI::ValidationError("--classifier", "unknown classifier '" + classifier + "'");
        }
        const auto m = Modality::parse(modality);
        if (!m) {
            throw CLI::ValidationError("--modality", "unknown modality '" + modality + "'");
        }
        c.classifier = *k;
        c.modality = *m;
        c.selection = !no_selection;
        c.include_demographics = !no_demographics;
        c.brf.threshold = threshold;
        c.ee.threshold = threshold;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

void print_summary(const EvalReport& r) {
    std::cout << "arm=" << r.arm << '\n'
              << "classifier=" << to_string(r.classifier) << '\n'
              << "windows=" << r.rows.size() << '\n'
              << "tp=" << r.counts.tp << '\n'
              << "fp=" << r.counts.fp << '\n'
              << "fn=" << r.counts.fn << '\n'
              << "tn=" << r.counts.tn << '\n'
              << "precision=" << csv::format_fixed(r.scores.precision) << '\n'
              << "recall=" << csv::format_fixed(r.scores.recall) << '\n'
              << "f2=" << csv::format_fixed(r.scores.f2) << '\n';
    if (r.baseline) {
        std::cout << "baseline_f2_mean=" << csv::format_fixed(r.baseline->f2.mean) << '\n'
                  << "baseline_f2_std=" << csv::format_fixed(r.baseline->f2.std) << '\n'
                  << "baseline_precision_mean=" << csv::format_fixed(r.baseline->precision.mean) << '\n'
                  << "baseline_recall_mean=" << csv::format_fixed(r.baseline->recall.mean) << '\n';
    }
    for (const auto& w : r.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
}

std::vector<FeatureWindow> load_windows(const DataOptions& data, const WindowingConfig& w) {
    const auto ds = load_dataset(data.paths());
    for (const auto& note : ds.notes) {
        std::cerr << "note: " << note.file << ':' << note.line << ": " << note.reason << '\n';
    }
    auto extraction = extract_all(ds, w);
    std::cout << "evaluable_windows=" << extraction.windows.size() << '\n'
              << "excluded_windows=" << extraction.excluded.size() << '\n';
    return std::move(extraction.windows);
}

void write_multi(const std::vector<EvalReport>& reports, const std::string& experiment, const fs::path& out) {
    fs::create_directories(out);
    write_metrics(reports, experiment, (out / "metrics.json").string());
    for (const auto& r : reports) {
        write_predictions(r, (out / ("predictions_" + r.arm + ".csv")).string());
        std::cout << "--\n";
        print_summary(r);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relapse prediction from daily behavioral rhythm templates, EMA and demographics"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--seed", seed, "Seed for all randomness")->capture_default_str();
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort (four interchange files)");
    SynthConfig sc;
    std::string synth_out;
    std::vector<std::string> shift_signals = {"call_duration", "distance_traveled"};
    synth->add_option("--patients", sc.patient_count, "Number of patients")->capture_default_str();
    synth->add_option("--days", sc.days_per_patient, "Observed days per patient")->capture_default_str();
    synth->add_option("--relapse-fraction", sc.relapse_patient_fraction, "Fraction of patients with a relapse")
        ->capture_default_str();
    synth->add_option("--shift", sc.prodromal.magnitude, "Prodromal mean shift (noise std units)")
        ->capture_default_str();
    synth->add_option("--shift-signals", shift_signals, "Signals carrying the prodromal shift")->capture_default_str();
    synth->add_option("--onset-days", sc.prodromal.onset_days, "Prodrome length before relapse (days)")
        ->capture_default_str();
    synth->add_option("--peak-shift", sc.prodromal.peak_shift_hours, "Prodromal rhythm peak shift (hours)")
        ->capture_default_str();
    synth->add_option("--missing-rate", sc.missing_rate, "Probability an hourly sample is absent")
        ->capture_default_str();
    synth->add_option("--ema-per-week", sc.ema_per_week, "Expected EMA submissions per week")->capture_default_str();
    synth->add_option("--out", synth_out, "Output directory")->required();

    // features
    auto* features = app.add_subcommand("features", "Dump the feature matrix and the window exclusion log");
    DataOptions feat_data;
    WindowingConfig feat_w;
    std::string feat_out;
    feat_data.add_to(features);
    add_windowing(features, feat_w);
    features->add_option("--out", feat_out, "Output directory")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Leave-one-patient-out evaluation of one classifier");
    DataOptions eval_data;
    ExperimentOptions eval_opts;
    std::string eval_out;
    eval_data.add_to(evaluate);
    eval_opts.add_to(evaluate, true);
    evaluate->add_option("--out", eval_out, "Output directory")->required();

    struct Grid {
        CLI::App* cmd;
        DataOptions data;
        ExperimentOptions opts;
        std::string out;
    };
    Grid grids[3];
    const char* grid_names[3] = {"compare-classifiers", "ablate-modality", "ablate-selection"};
    const char* grid_help[3] = {"Naive Bayes, BRF, EasyEnsemble, isolation forest and random baseline",
                                "Naive Bayes per single modality (six signals, EMA), demographics included",
                                "Naive Bayes with/without feature selection and demographics"};
    for (int i = 0; i < 3; ++i) {
        grids[i].cmd = app.add_subcommand(grid_names[i], grid_help[i]);
        grids[i].data.add_to(grids[i].cmd);
        grids[i].opts.add_to(grids[i].cmd, false);
        grids[i].cmd->add_option("--out", grids[i].out, "Output directory")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) {
            sc.seed = seed;
            sc.prodromal.signals.clear();
            for (const auto& s : shift_signals) {
                const auto sig = parse_signal(s);
                if (!sig) {
                    throw CLI::ValidationError("--shift-signals", "unknown signal '" + s + "'");
                }
                sc.prodromal.signals.push_back(*sig);
            }
            const auto ds = generate(sc);
            fs::create_directories(synth_out);
            write_dataset(ds, DatasetPaths::in_directory(synth_out));
            std::size_t relapses = 0;
            for (const auto& p : ds.patients) {
                relapses += p.relapse_dates.size();
            }
            std::cout << "patients=" << ds.patients.size() << '\n'
                      << "samples=" << ds.samples.size() << '\n'
                      << "ema_records=" << ds.ema.size() << '\n'
                      << "relapses=" << relapses << '\n';
        } else if (*features) {
            const auto ds = load_dataset(feat_data.paths());
            const auto extraction = extract_all(ds, feat_w);
            fs::create_directories(feat_out);
            write_feature_matrix(extraction.windows, (fs::path(feat_out) / "features.csv").string());
            write_exclusion_log(extraction.excluded, (fs::path(feat_out) / "exclusions.csv").string());
            std::size_t relapse_windows = 0;
            for (const auto& w : extraction.windows) {
                relapse_windows += w.is_relapse() ? 1 : 0;
            }
            std::cout << "evaluable_windows=" << extraction.windows.size() << '\n'
                      << "relapse_windows=" << relapse_windows << '\n'
                      << "excluded_windows=" << extraction.excluded.size() << '\n';
        } else if (*evaluate) {
            auto config = eval_opts.resolve(seed, threads);
            const auto windows = load_windows(eval_data, config.windowing);
            const auto report = run_lopo(windows, config);
            const fs::path out(eval_out);
            fs::create_directories(out);
            write_predictions(report, (out / "predictions.csv").string());
            write_metrics(report, (out / "metrics.json").string());
            write_selection_report(report, (out / "selection.csv").string());
            print_summary(report);
        } else {
            for (int i = 0; i < 3; ++i) {
                if (!*grids[i].cmd) {
                    continue;
                }
                auto config = grids[i].opts.resolve(seed, threads);
                const auto windows = load_windows(grids[i].data, config.windowing);
                std::vector<EvalReport> reports;
                if (i == 0) {
                    reports = run_classifier_comparison(windows, config);
                } else if (i == 1) {
                    reports = run_modality_ablation(windows, config);
                } else {
                    reports = run_selection_ablation(windows, config);
                }
                write_multi(reports, grid_names[i], grids[i].out);
            }
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
