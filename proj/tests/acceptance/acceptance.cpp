// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// if any blocking criterion (1-8) fails; criterion 9 only runs when a
// converted CrossCheck dataset directory is given in RELAPSE_CROSSCHECK_DIR.

#include "../nb_oracle.hpp"
#include "../test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

using namespace relapse;
using namespace relapse::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void require(bool ok, const std::string& what) {
        if (!ok && out_.pass) {
            out_.pass = false;
            out_.detail = what;
        }
    }
    void note(const std::string& s) {
        if (out_.pass) out_.detail = s;
    }
    Outcome result() const { return out_; }

private:
    Outcome out_;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// 1 -----------------------------------------------------------------------
Outcome metric_correctness() {
    Check c;
    c.require(f2_score(1.0, 1.0) == 1.0, "precision 1 / recall 1 should give 1");
    c.require(f2_from_counts(1, 0, 0).f2 == 1.0, "tp=1 alone should give 1");
    c.require(f2_from_counts(0, 3, 4).f2 == 0.0, "zero tp should give 0");
    c.require(f2_from_counts(0, 0, 0).f2 == 0.0, "empty counts should give 0");
    const double v = f2_score(0.22, 0.086);
    c.require(std::abs(v - 0.0979) <= 1e-4, "0.22/0.086 gave " + fmt(v));
    c.note("f2(0.22, 0.086) = " + fmt(v));
    return c.result();
}

// 2 -----------------------------------------------------------------------
Outcome nb_oracle_equivalence() {
    Check c;
    Rng rng(derive_seed(2, {}));
    std::size_t cases = 0, agree = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t features = 1 + rng.index(6);
        const std::size_t rows = 2 + rng.index(199);
        const auto alphabet = static_cast<std::uint64_t>(rng.bernoulli(0.3) ? 2 + rng.index(3) : 15);
        CategoricalMatrix x(rows, features);
        std::vector<int> y(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            y[r] = r < 2 ? static_cast<int>(r) : (rng.bernoulli(0.25) ? 1 : 0);
            for (std::size_t f = 0; f < features; ++f) x.at(r, f) = static_cast<int>(rng.index(alphabet));
        }
        const auto nb = CategoricalNaiveBayes::fit(x, y, 15, 1.0);
        // Every training row plus fresh random rows.
        for (std::size_t q = 0; q < rows + 20; ++q) {
            std::vector<int> row(features);
            if (q < rows) {
                const auto src = x.row(q);
                row.assign(src.begin(), src.end());
            } else {
                for (auto& v : row) v = static_cast<int>(rng.index(15));
            }
            ++cases;
            agree += nb.predict(row).label == nb_oracle_label(x, y, row, 15) ? 1 : 0;
        }
    }
    c.require(agree == cases, std::to_string(cases - agree) + " of " + std::to_string(cases) + " disagree");
    c.note(std::to_string(cases) + " predictions over 200 datasets agree");
    return c.result();
}

// 3 -----------------------------------------------------------------------
double entropy(const std::vector<int>& v) {
    std::map<int, double> p;
    for (int x : v) p[x] += 1.0;
    double h = 0.0;
    for (const auto& [k, n] : p) {
        const double q = n / static_cast<double>(v.size());
        h -= q * std::log(q);
    }
    return h;
}

double joint_table_mi(const std::vector<int>& x, const std::vector<int>& y) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> px, py;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        joint[{x[i], y[i]}] += 1.0;
        px[x[i]] += 1.0;
        py[y[i]] += 1.0;
    }
    double mi = 0.0;
    for (const auto& [k, nxy] : joint) {
        mi += (nxy / n) * std::log((nxy / n) / ((px[k.first] / n) * (py[k.second] / n)));
    }
    return mi;
}

Outcome mi_oracle_equivalence() {
    Check c;
    Rng rng(derive_seed(3, {}));
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng.index(400);
        const auto levels = 1 + rng.index(15);
        std::vector<int> x(n), y(n);
        const double prevalence = rng.uniform(0.0, 0.6);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.bernoulli(prevalence) ? 1 : 0;
            x[i] = static_cast<int>(rng.index(levels));
            if (y[i] && rng.bernoulli(0.4)) x[i] = static_cast<int>(levels - 1);
        }
        const double mi = mutual_information(x, y);
        const double oracle = joint_table_mi(x, y);
        worst = std::max(worst, std::abs(mi - std::max(0.0, oracle)));
        c.require(std::abs(mi - std::max(0.0, oracle)) <= 1e-12, "trial " + std::to_string(trial) + " differs");
        c.require(mi >= 0.0, "negative MI");
        c.require(mi <= std::min(entropy(x), entropy(y)) + 1e-12, "MI above marginal entropy");
    }
    c.note("500 columns, max |diff| = " + fmt(worst));
    return c.result();
}

// 4 -----------------------------------------------------------------------
Outcome windowing_fixture() {
    Check c;
    const Date start = Date::from_ymd(2021, 1, 4);
    Patient p;
    p.patient_id = "p";
    p.age = 30;
    p.observation_start = start;
    p.observation_end = start + 119;
    p.relapse_dates = {start + 70};
    std::set<Date> cov;
    for (int d = 0; d < 120; ++d) cov.insert(start + d);
    const auto ws = enumerate_windows(p, p.relapse_dates, cov, WindowingConfig{});
    c.require(ws.size() == 13, "expected 13 candidates, got " + std::to_string(ws.size()));
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const int s = static_cast<int>(i) * 7;
        c.require(ws[i].feature_start == start + s && ws[i].predict_end == start + s + 34, "start grid mismatch");
        if (s <= 35) {
            c.require(ws[i].evaluable() && !ws[i].is_relapse(), "start " + std::to_string(s) + " should be non-relapse");
        } else if (s == 42) {
            c.require(ws[i].evaluable() && ws[i].is_relapse(), "start 42 should be relapse");
        } else {
            c.require(ws[i].exclusion == ExclusionReason::cooloff, "start " + std::to_string(s) + " should be cool-off");
        }
    }
    c.note("starts 0..35 non-relapse, 42 relapse, 49..84 cool-off");
    return c.result();
}

// 5 -----------------------------------------------------------------------
Outcome feature_inventory() {
    Check c;
    const auto& names = canonical_feature_names();
    c.require(names.size() == 100, "expected 100 feature names");
    std::map<std::string, int> per_source;
    int ema = 0, demo = 0;
    for (const auto& n : names) {
        if (n.family == FeatureFamily::template_rhythm) ++per_source[std::string(kSignalNames[static_cast<std::size_t>(n.source)])];
        if (n.family == FeatureFamily::ema) ++ema;
        if (n.family == FeatureFamily::demographic) ++demo;
    }
    c.require(per_source.size() == 6, "expected 6 signals");
    for (const auto& [s, k] : per_source) c.require(k == 13, s + " has " + std::to_string(k) + " features");
    c.require(ema == 20 && demo == 2, "EMA/demographic counts wrong");

    auto ds = dense_patient("p", Date::from_ymd(2021, 1, 4), 70,
                            [](SignalKind s, int, int) { return s == SignalKind::call_duration ? 5.0 : 1.0; });
    const auto fx = extract_all(ds, WindowingConfig{});
    c.require(fx.windows.size() == 6, "expected 6 windows");
    if (fx.windows.size() == 6) {
        const auto& f = fx.windows[1].features;
        c.require(f.size() == 100, "vector size");
        auto at = [&](TemplateStat st) { return f[template_feature_index(SignalKind::call_duration, st)]; };
        const std::pair<TemplateStat, double> expected[] = {
            {TemplateStat::mdt_mean, 5.0},   {TemplateStat::mdt_std, 0.0},    {TemplateStat::mdt_max, 5.0},
            {TemplateStat::mdt_range, 0.0},  {TemplateStat::mdt_skewness, 0.0}, {TemplateStat::mdt_kurtosis, 0.0},
            {TemplateStat::ddt_mean, 0.0},   {TemplateStat::max_diff, 0.0},   {TemplateStat::dist_mdt, 0.0},
            {TemplateStat::wdist_mdt, 0.0},  {TemplateStat::dist_mxdt, 0.0},  {TemplateStat::daily_mean, 5.0},
            {TemplateStat::daily_std, 0.0}};
        for (const auto& [st, v] : expected) {
            c.require(at(st) == v, "constant window: " + std::string(kTemplateStatNames[static_cast<std::size_t>(st)]));
        }
    }
    c.note("100 names (6x13 + 20 + 2); constant window pattern exact");
    return c.result();
}

// 6 -----------------------------------------------------------------------
Outcome template_properties() {
    Check c;
    Rng rng(derive_seed(6, {}));
    std::size_t violations = 0;
    auto fail = [&](bool ok) { violations += ok ? 0 : 1; };
    for (int trial = 0; trial < 1000; ++trial) {
        const double density = rng.uniform(0.3, 1.0);
        auto make_days = [&] {
            std::vector<DailyTemplate> days;
            for (int d = 0; d < 28; ++d) {
                DailyTemplate t;
                t.patient_id = "p";
                t.date = Date{d};
                t.signal = SignalKind::sound_level;
                for (auto& h : t.hours) {
                    if (rng.bernoulli(density)) h = rng.uniform(0.0, 100.0) * rng.uniform(0.0, 1.0);
                }
                days.push_back(t);
            }
            return days;
        };
        const auto days = make_days();
        const auto prev_days = make_days();
        const auto w = compute_window_templates(SignalKind::sound_level, days);
        const auto pw = compute_window_templates(SignalKind::sound_level, prev_days);
        for (std::size_t h = 0; h < 24; ++h) {
            if (!w.mdt[h]) continue;
            fail(*w.mxdt[h] >= *w.mdt[h]);
            fail(*w.ddt[h] >= 0.0);
        }
        const auto a = normalize_template(w.mdt);
        const auto b = normalize_template(pw.mdt);
        for (const auto& v : a) {
            if (v) fail(*v >= 0.0 && *v <= 1.0);
        }
        const auto dab = template_distance(a, b);
        const auto dba = template_distance(b, a);
        fail(dab.has_value() == dba.has_value());
        if (dab && dba) fail(*dab == *dba);
        if (const auto self = template_distance(a, a)) fail(*self == 0.0);
        if (dab) {
            bool agree = true;
            for (std::size_t h = 0; h < 24; ++h) {
                if (a[h] && b[h] && *a[h] != *b[h]) agree = false;
            }
            fail((*dab == 0.0) == agree);
        }

        // Positive scaling of the raw data leaves the distance features unchanged.
        const double scale = std::exp(rng.uniform(-5.0, 5.0));
        auto scaled_days = days;
        auto scaled_prev = prev_days;
        for (auto* set : {&scaled_days, &scaled_prev}) {
            for (auto& t : *set) {
                for (auto& h : t.hours) {
                    if (h) *h *= scale;
                }
            }
        }
        const auto sw = compute_window_templates(SignalKind::sound_level, scaled_days);
        const auto spw = compute_window_templates(SignalKind::sound_level, scaled_prev);
        const auto sa = normalize_template(sw.mdt);
        const auto sb = normalize_template(spw.mdt);
        const auto smx = normalize_template(sw.mxdt);
        const auto mx = normalize_template(w.mxdt);
        auto close = [](std::optional<double> x, std::optional<double> y) {
            if (x.has_value() != y.has_value()) return false;
            return !x || std::abs(*x - *y) <= 1e-9 * std::max(1.0, std::abs(*x));
        };
        fail(close(template_distance(a, b), template_distance(sa, sb)));
        fail(close(template_distance(a, b, kDayStartHour, kDayEndHour),
                   template_distance(sa, sb, kDayStartHour, kDayEndHour)));
        fail(close(template_distance(mx, b), template_distance(smx, sb)));
    }
    c.require(violations == 0, std::to_string(violations) + " violations");
    c.note("1000 randomized windows, 0 violations");
    return c.result();
}

// 7 -----------------------------------------------------------------------
Outcome synthetic_power() {
    Check c;
    constexpr std::uint64_t kSeed = 42;
    auto run = [&](double magnitude) {
        SynthConfig sc;
        sc.patient_count = 40;
        sc.days_per_patient = 180;
        sc.seed = kSeed;
        sc.prodromal.magnitude = magnitude;
        const auto windows = extract_all(generate(sc), WindowingConfig{}).windows;
        ExperimentConfig ec;
        ec.seed = kSeed;
        ec.threads = std::max(1u, std::thread::hardware_concurrency());
        const auto nb = run_lopo(windows, ec);
        ec.classifier = ClassifierKind::random;
        ec.baseline_runs = 1000;
        const auto base = run_lopo(windows, ec);
        return std::pair{nb.scores.f2, *base.baseline};
    };
    const auto [f2_shift, b_shift] = run(3.0);
    const auto [f2_null, b_null] = run(0.0);
    const double upper = b_shift.f2.mean + 2 * b_shift.f2.std;
    c.require(f2_shift > upper, "shifted NB F2 " + fmt(f2_shift) + " not above " + fmt(upper));
    const double lo = b_null.f2.mean - 3 * b_null.f2.std;
    const double hi = b_null.f2.mean + 3 * b_null.f2.std;
    c.require(f2_null >= lo && f2_null <= hi,
              "null NB F2 " + fmt(f2_null) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
    c.note("shift 3: NB F2 " + fmt(f2_shift) + " > " + fmt(upper) + "; shift 0: NB F2 " + fmt(f2_null) +
           " in [" + fmt(lo) + ", " + fmt(hi) + "]");
    return c.result();
}

// 8 -----------------------------------------------------------------------
std::map<std::string, std::string> run_all_experiments(const std::vector<FeatureWindow>& windows, std::size_t threads,
                                                       const std::filesystem::path& dir) {
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    ExperimentConfig base;
    base.seed = 2024;
    base.threads = threads;
    base.baseline_runs = 200;
    for (auto k : kAllClassifiers) {
        auto c = base;
        c.classifier = k;
        const auto r = run_lopo(windows, c);
        const std::string tag = std::string(to_string(k));
        write_predictions(r, (dir / ("evaluate_" + tag + "_predictions.csv")).string());
        write_metrics(r, (dir / ("evaluate_" + tag + "_metrics.json")).string());
    }
    const std::pair<std::string, std::vector<EvalReport>> grids[] = {
        {"compare-classifiers", run_classifier_comparison(windows, base)},
        {"ablate-modality", run_modality_ablation(windows, base)},
        {"ablate-selection", run_selection_ablation(windows, base)},
    };
    for (const auto& [name, reports] : grids) {
        write_metrics(reports, name, (dir / (name + "_metrics.json")).string());
        for (const auto& r : reports) {
            write_predictions(r, (dir / (name + "_" + r.arm + "_predictions.csv")).string());
        }
    }
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        files[e.path().filename().string()] = read_text(e.path());
    }
    return files;
}

Outcome determinism() {
    Check c;
    SynthConfig sc;
    sc.patient_count = 12;
    sc.days_per_patient = 150;
    sc.seed = 42;
    const auto windows = extract_all(generate(sc), WindowingConfig{}).windows;
    const auto root = std::filesystem::path(RELAPSE_TEST_TMP) / "acceptance_determinism";
    const auto a = run_all_experiments(windows, 1, root / "a");
    const auto b = run_all_experiments(windows, 1, root / "b");
    const auto t = run_all_experiments(windows, 4, root / "threads");
    c.require(!a.empty() && a.size() == b.size() && a.size() == t.size(), "file sets differ");
    std::size_t metrics = 0;
    for (const auto& [name, bytes] : a) {
        c.require(b.count(name) && b.at(name) == bytes, name + " differs between identical runs");
        if (name.ends_with("_metrics.json")) {
            ++metrics;
            c.require(t.count(name) && t.at(name) == bytes, name + " differs with 4 threads");
        }
    }
    c.note(std::to_string(a.size()) + " files byte-identical; " + std::to_string(metrics) +
           " metrics files identical across thread counts");
    return c.result();
}

// 9 -----------------------------------------------------------------------
std::optional<Outcome> crosscheck_dataset() {
    const char* dir = std::getenv("RELAPSE_CROSSCHECK_DIR");
    if (!dir || !*dir) {
        return std::nullopt;
    }
    Check c;
    const auto ds = load_dataset(DatasetPaths::in_directory(dir));
    const auto windows = extract_all(ds, WindowingConfig{}).windows;
    std::size_t relapse = 0;
    for (const auto& w : windows) relapse += w.is_relapse() ? 1 : 0;
    const auto n = static_cast<double>(windows.size());
    c.require(n >= 2386 * 0.85 && n <= 2386 * 1.15, "evaluable windows " + std::to_string(windows.size()));
    c.require(relapse >= 19 && relapse <= 27, "relapse windows " + std::to_string(relapse));

    ExperimentConfig base;
    base.seed = 42;
    base.threads = std::max(1u, std::thread::hardware_concurrency());
    const auto reports = run_classifier_comparison(windows, base);
    const auto& nb = reports[0];
    const auto& random = reports[4];
    c.require(nb.scores.f2 >= 0.04 && nb.scores.f2 <= 0.13, "NB F2 " + fmt(nb.scores.f2) + " outside [0.04, 0.13]");
    c.require(nb.scores.f2 > random.headline_f2(), "NB F2 not above the random baseline");
    for (std::size_t i = 1; i < reports.size(); ++i) {
        c.require(nb.scores.f2 >= reports[i].headline_f2(), "NB is not ranked first (" + reports[i].arm + ")");
    }
    c.note(std::to_string(windows.size()) + " windows, " + std::to_string(relapse) + " relapse, NB F2 " +
           fmt(nb.scores.f2));
    return c.result();
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "metric correctness", 1, metric_correctness},
        {2, "naive Bayes oracle equivalence", 10, nb_oracle_equivalence},
        {3, "mutual information oracle equivalence", 10, mi_oracle_equivalence},
        {4, "windowing fixture", 1, windowing_fixture},
        {5, "feature inventory", 1, feature_inventory},
        {6, "template property suite", 30, template_properties},
        {7, "synthetic end-to-end power check", 300, synthetic_power},
        {8, "determinism", 300, determinism},
    };
    bool all_pass = true;
    for (const auto& cr : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (o.pass && secs > cr.limit_seconds) {
            o = {false, "took " + fmt(secs) + " s, limit " + fmt(cr.limit_seconds) + " s"};
        }
        all_pass = all_pass && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << cr.id << ": " << cr.name << " (" << fmt(secs)
                  << " s) - " << o.detail << std::endl;
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::optional<Outcome> nine;
    try {
        nine = crosscheck_dataset();
    } catch (const std::exception& e) {
        nine = Outcome{false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!nine) {
        std::cout << "SKIP  criterion 9: CrossCheck dataset check (non-blocking) - set RELAPSE_CROSSCHECK_DIR to run"
                  << std::endl;
    } else {
        std::cout << (nine->pass ? "PASS" : "FAIL") << "  criterion 9: CrossCheck dataset check (non-blocking, "
                  << fmt(secs) << " s) - " << nine->detail << std::endl;
    }
    return all_pass ? 0 : 1;
}
