#pragma once

#include "relapse/csv.hpp"
#include "relapse/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace relapse {

/// Validation failure while reading an interchange file.
class IngestError : public std::runtime_error {
public:
    IngestError(std::string file, std::size_t line, const std::string& message)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + message), file_(std::move(file)),
          line_(line) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// A row that was merged or adjusted rather than taken verbatim.
struct IngestNote {
    std::string file;
    std::size_t line = 0;
    std::string reason;
};

struct DatasetPaths {
    std::string sensors;
    std::string ema;
    std::string patients;
    std::string relapses;

    static DatasetPaths in_directory(const std::filesystem::path& dir) {
        return {(dir / "sensors.csv").string(), (dir / "ema.csv").string(), (dir / "patients.csv").string(),
                (dir / "relapses.csv").string()};
    }
};

/// Validated cohort. Patients are sorted by id; samples by
/// (patient, signal, date, hour) with one sample per key; EMA by (patient, date).
struct Dataset {
    std::vector<Patient> patients;
    std::vector<HourlySample> samples;
    std::vector<EmaRecord> ema;
    std::vector<IngestNote> notes;

    const Patient* find_patient(const std::string& id) const {
        auto it = std::lower_bound(patients.begin(), patients.end(), id,
                                   [](const Patient& p, const std::string& key) { return p.patient_id < key; });
        return it != patients.end() && it->patient_id == id ? &*it : nullptr;
    }
};

inline constexpr int kMinAge = 18;
inline constexpr int kMaxAge = 100;
inline constexpr int kMaxEducationYears = 30;

namespace detail {

class LineReader {
public:
    explicit LineReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) {
            throw IngestError(path_, 0, "cannot open file");
        }
    }

    bool next(std::string_view& line) {
        if (!std::getline(in_, buf_)) {
            return false;
        }
        ++line_no_;
        line = csv::strip_cr(buf_);
        return true;
    }

    [[noreturn]] void fail(const std::string& message) const { throw IngestError(path_, line_no_, message); }

    void expect_header(const std::vector<std::string>& expected) {
        std::string_view line;
        if (!next(line)) {
            fail("missing header");
        }
        if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") {
            line.remove_prefix(3);
        }
        const auto fields = csv::split(line);
        if (fields.size() != expected.size() || !std::equal(fields.begin(), fields.end(), expected.begin())) {
            fail("malformed header");
        }
    }

    std::size_t line_no() const { return line_no_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ifstream in_;
    std::string buf_;
    std::size_t line_no_ = 0;
};

inline Date parse_date_field(const LineReader& r, std::string_view text, const char* what) {
    const auto d = Date::parse(text);
    if (!d) {
        r.fail(std::string("invalid ") + what + " '" + std::string(text) + "'");
    }
    return *d;
}

inline int parse_int_field(const LineReader& r, std::string_view text, const char* what) {
    const auto v = csv::parse_int(text);
    if (!v) {
        r.fail(std::string("invalid ") + what + " '" + std::string(text) + "'");
    }
    return static_cast<int>(*v);
}

inline std::vector<std::string> ema_header() {
    std::vector<std::string> h = {"patient_id", "date"};
    for (std::size_t i = 1; i <= kEmaItemCount; ++i) {
        h.push_back("item_" + std::to_string(i));
    }
    return h;
}

struct SpanTracker {
    std::optional<Date> lo, hi;
    void add(Date d) {
        lo = lo ? std::min(*lo, d) : d;
        hi = hi ? std::max(*hi, d) : d;
    }
};

} // namespace detail

/// Reads and validates the four interchange files. Duplicate sensor rows are
/// averaged; every merge is recorded in Dataset::notes.
inline Dataset load_dataset(const DatasetPaths& paths) {
    using detail::LineReader;
    Dataset ds;
    std::set<std::string> explicit_span;
    std::map<std::string, std::size_t> patient_index;

    {
        LineReader r(paths.patients);
        std::string_view line;
        if (!r.next(line)) {
            r.fail("missing header");
        }
        const auto header = csv::split(line);
        const std::vector<std::string> base = {"patient_id", "age", "education_years"};
        const std::vector<std::string> full = {"patient_id", "age", "education_years", "observation_start",
                                               "observation_end"};
        const bool has_span = std::equal(header.begin(), header.end(), full.begin(), full.end());
        if (!has_span && !std::equal(header.begin(), header.end(), base.begin(), base.end())) {
            r.fail("malformed header");
        }
        while (r.next(line)) {
            if (line.empty()) {
                continue;
            }
            const auto f = csv::split(line);
            if (f.size() != header.size()) {
                r.fail("expected " + std::to_string(header.size()) + " fields");
            }
            Patient p;
            p.patient_id = std::string(f[0]);
            if (p.patient_id.empty()) {
                r.fail("empty patient_id");
            }
            p.age = detail::parse_int_field(r, f[1], "age");
            p.education_years = detail::parse_int_field(r, f[2], "education_years");
            if (p.age < kMinAge || p.age > kMaxAge) {
                r.fail("age out of range [18, 100]");
            }
            if (p.education_years < 0 || p.education_years > kMaxEducationYears) {
                r.fail("education_years out of range [0, 30]");
            }
            if (has_span && !(f[3].empty() && f[4].empty())) {
                p.observation_start = detail::parse_date_field(r, f[3], "observation_start");
                p.observation_end = detail::parse_date_field(r, f[4], "observation_end");
                if (p.observation_end < p.observation_start) {
                    r.fail("observation_end before observation_start");
                }
                explicit_span.insert(p.patient_id);
            }
            if (!patient_index.emplace(p.patient_id, ds.patients.size()).second) {
                r.fail("duplicate patient_id '" + p.patient_id + "'");
            }
            ds.patients.push_back(std::move(p));
        }
    }

    std::vector<detail::SpanTracker> spans(ds.patients.size());
    auto check_in_span = [&](const LineReader& r, std::size_t pi, Date d) {
        const auto& p = ds.patients[pi];
        if (explicit_span.count(p.patient_id) && (d < p.observation_start || d > p.observation_end)) {
            r.fail("date " + d.iso() + " outside observation span of patient '" + p.patient_id + "'");
        }
        spans[pi].add(d);
    };
    auto lookup = [&](const LineReader& r, std::string_view id) {
        const auto it = patient_index.find(std::string(id));
        if (it == patient_index.end()) {
            r.fail("unknown patient_id '" + std::string(id) + "'");
        }
        return it->second;
    };

    {
        LineReader r(paths.sensors);
        r.expect_header({"patient_id", "date", "hour", "signal", "value"});
        struct Acc {
            double sum = 0.0;
            int count = 0;
        };
        // key: patient index, signal, date, hour
        std::map<std::tuple<std::size_t, int, int, int>, Acc> acc;
        std::string_view line;
        while (r.next(line)) {
            if (line.empty()) {
                continue;
            }
            const auto f = csv::split(line);
            if (f.size() != 5) {
                r.fail("expected 5 fields");
            }
            const auto pi = lookup(r, f[0]);
            const Date date = detail::parse_date_field(r, f[1], "date");
            const int hour = detail::parse_int_field(r, f[2], "hour");
            if (hour < 0 || hour > 23) {
                r.fail("hour " + std::to_string(hour) + " out of range [0, 23]");
            }
            const auto signal = parse_signal(f[3]);
            if (!signal) {
                r.fail("unknown signal '" + std::string(f[3]) + "'");
            }
            const auto value = csv::parse_double(f[4]);
            if (!value || !std::isfinite(*value)) {
                r.fail("non-finite value '" + std::string(f[4]) + "'");
            }
            if (*value < 0.0) {
                r.fail("negative value '" + std::string(f[4]) + "'");
            }
            check_in_span(r, pi, date);
            auto& a = acc[{pi, static_cast<int>(*signal), date.days_since_epoch(), hour}];
            if (a.count > 0) {
                ds.notes.push_back({r.path(), r.line_no(), "duplicate_merged"});
            }
            a.sum += *value;
            ++a.count;
        }
        ds.samples.reserve(acc.size());
        for (const auto& [key, a] : acc) {
            const auto& [pi, sig, day, hour] = key;
            ds.samples.push_back({ds.patients[pi].patient_id, Date{day}, hour, static_cast<SignalKind>(sig),
                                  a.sum / a.count});
        }
    }

    {
        LineReader r(paths.ema);
        r.expect_header(detail::ema_header());
        std::vector<std::pair<std::size_t, EmaRecord>> rows;
        std::string_view line;
        while (r.next(line)) {
            if (line.empty()) {
                continue;
            }
            const auto f = csv::split(line);
            if (f.size() != 2 + kEmaItemCount) {
                r.fail("expected " + std::to_string(2 + kEmaItemCount) + " fields");
            }
            const auto pi = lookup(r, f[0]);
            EmaRecord rec;
            rec.patient_id = ds.patients[pi].patient_id;
            rec.date = detail::parse_date_field(r, f[1], "date");
            for (std::size_t i = 0; i < kEmaItemCount; ++i) {
                const int v = detail::parse_int_field(r, f[2 + i], "EMA item");
                if (v < 0 || v > kEmaMaxAnswer) {
                    r.fail("EMA item_" + std::to_string(i + 1) + " value " + std::to_string(v) +
                           " outside {0,1,2,3}");
                }
                rec.items[i] = v;
            }
            check_in_span(r, pi, rec.date);
            rows.emplace_back(pi, std::move(rec));
        }
        std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return std::tie(a.first, a.second.date) < std::tie(b.first, b.second.date);
        });
        ds.ema.reserve(rows.size());
        for (auto& [pi, rec] : rows) {
            ds.ema.push_back(std::move(rec));
        }
    }

    for (std::size_t pi = 0; pi < ds.patients.size(); ++pi) {
        auto& p = ds.patients[pi];
        if (explicit_span.count(p.patient_id)) {
            continue;
        }
        if (!spans[pi].lo) {
            throw IngestError(paths.patients, 0,
                              "patient '" + p.patient_id + "' has no observation span and no data");
        }
        p.observation_start = *spans[pi].lo;
        p.observation_end = *spans[pi].hi;
    }

    {
        LineReader r(paths.relapses);
        r.expect_header({"patient_id", "relapse_date"});
        std::string_view line;
        while (r.next(line)) {
            if (line.empty()) {
                continue;
            }
            const auto f = csv::split(line);
            if (f.size() != 2) {
                r.fail("expected 2 fields");
            }
            auto& p = ds.patients[lookup(r, f[0])];
            const Date d = detail::parse_date_field(r, f[1], "relapse_date");
            if (d < p.observation_start || d > p.observation_end) {
                r.fail("relapse date " + d.iso() + " outside observation span of patient '" + p.patient_id + "'");
            }
            if (std::find(p.relapse_dates.begin(), p.relapse_dates.end(), d) != p.relapse_dates.end()) {
                ds.notes.push_back({r.path(), r.line_no(), "duplicate_relapse_ignored"});
                continue;
            }
            p.relapse_dates.push_back(d);
        }
    }

    for (auto& p : ds.patients) {
        std::sort(p.relapse_dates.begin(), p.relapse_dates.end());
    }
    // Patients were read in file order; samples/EMA reference them by index.
    // Re-sort everything by patient id for a canonical layout.
    std::vector<std::size_t> order(ds.patients.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ds.patients[a].patient_id < ds.patients[b].patient_id; });
    std::vector<Patient> sorted;
    sorted.reserve(order.size());
    for (auto i : order) {
        sorted.push_back(std::move(ds.patients[i]));
    }
    ds.patients = std::move(sorted);
    std::stable_sort(ds.samples.begin(), ds.samples.end(), [](const HourlySample& a, const HourlySample& b) {
        return std::tie(a.patient_id, a.signal, a.date, a.hour) < std::tie(b.patient_id, b.signal, b.date, b.hour);
    });
    std::stable_sort(ds.ema.begin(), ds.ema.end(), [](const EmaRecord& a, const EmaRecord& b) {
        return std::tie(a.patient_id, a.date) < std::tie(b.patient_id, b.date);
    });
    return ds;
}

inline Dataset load_dataset(const std::string& sensors_path, const std::string& ema_path,
                            const std::string& patients_path, const std::string& relapses_path) {
    return load_dataset(DatasetPaths{sensors_path, ema_path, patients_path, relapses_path});
}

/// Writes the four interchange files (explicit observation spans included).
inline void write_dataset(const Dataset& ds, const DatasetPaths& paths) {
    {
        auto out = csv::open_output(paths.patients);
        out << "patient_id,age,education_years,observation_start,observation_end\n";
        for (const auto& p : ds.patients) {
            out << p.patient_id << ',' << p.age << ',' << p.education_years << ',' << p.observation_start.iso()
                << ',' << p.observation_end.iso() << '\n';
        }
        csv::finish_output(out, paths.patients);
    }
    {
        auto out = csv::open_output(paths.sensors);
        out << "patient_id,date,hour,signal,value\n";
        std::string row;
        for (const auto& s : ds.samples) {
            row.clear();
            row += s.patient_id;
            row += ',';
            row += s.date.iso();
            row += ',';
            row += std::to_string(s.hour);
            row += ',';
            row += to_string(s.signal);
            row += ',';
            row += csv::format_double(s.value);
            row += '\n';
            out << row;
        }
        csv::finish_output(out, paths.sensors);
    }
    {
        auto out = csv::open_output(paths.ema);
        const auto header = detail::ema_header();
        for (std::size_t i = 0; i < header.size(); ++i) {
            out << (i ? "," : "") << header[i];
        }
        out << '\n';
        for (const auto& e : ds.ema) {
            out << e.patient_id << ',' << e.date.iso();
            for (int v : e.items) {
                out << ',' << v;
            }
            out << '\n';
        }
        csv::finish_output(out, paths.ema);
    }
    {
        auto out = csv::open_output(paths.relapses);
        out << "patient_id,relapse_date\n";
        for (const auto& p : ds.patients) {
            for (const auto& d : p.relapse_dates) {
                out << p.patient_id << ',' << d.iso() << '\n';
            }
        }
        csv::finish_output(out, paths.relapses);
    }
}

} // namespace relapse
