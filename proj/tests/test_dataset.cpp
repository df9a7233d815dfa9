#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace relapse;
using namespace relapse::testing;

namespace {

const char* kEmaHeader = "patient_id,date,item_1,item_2,item_3,item_4,item_5,item_6,item_7,item_8,item_9,item_10\n";

/// Two patients, ten days each, one sensor row per day plus a couple of EMA rows.
DatasetPaths write_fixture(const std::filesystem::path& dir) {
    std::string sensors = "patient_id,date,hour,signal,value\n";
    for (const char* id : {"a", "b"}) {
        for (int d = 1; d <= 10; ++d) {
            char date[16];
            std::snprintf(date, sizeof date, "2021-03-%02d", d);
            sensors += std::string(id) + "," + date + ",12,light_level," + std::to_string(d) + "\n";
        }
    }
    write_text(dir / "sensors.csv", sensors);
    write_text(dir / "ema.csv", std::string(kEmaHeader) + "a,2021-03-02,0,1,2,3,0,1,2,3,0,1\n" +
                                    "b,2021-03-05,3,3,3,3,3,3,3,3,3,3\n");
    write_text(dir / "patients.csv", "patient_id,age,education_years\nb,40,12\na,25,9\n");
    write_text(dir / "relapses.csv", "patient_id,relapse_date\na,2021-03-08\n");
    return DatasetPaths::in_directory(dir);
}

std::string expect_ingest_error(const DatasetPaths& paths) {
    try {
        load_dataset(paths);
    } catch (const IngestError& e) {
        return e.what();
    }
    ADD_FAILURE() << "expected IngestError";
    return {};
}

} // namespace

TEST(LoadDataset, WellFormedFixture) {
    const auto dir = scratch_dir("ds_ok");
    const auto ds = load_dataset(write_fixture(dir));
    ASSERT_EQ(ds.patients.size(), 2u);
    EXPECT_EQ(ds.patients[0].patient_id, "a");  // sorted by id
    EXPECT_EQ(ds.patients[0].age, 25);
    EXPECT_EQ(ds.patients[0].observation_start.iso(), "2021-03-01");  // inferred from data
    EXPECT_EQ(ds.patients[0].observation_end.iso(), "2021-03-10");
    ASSERT_EQ(ds.patients[0].relapse_dates.size(), 1u);
    EXPECT_EQ(ds.samples.size(), 20u);
    EXPECT_EQ(ds.ema.size(), 2u);
    EXPECT_EQ(ds.ema[0].items[3], 3);
    EXPECT_TRUE(ds.notes.empty());
}

TEST(LoadDataset, HourOutOfRangeNamesFileAndLine) {
    const auto dir = scratch_dir("ds_hour");
    auto paths = write_fixture(dir);
    write_text(dir / "sensors.csv", "patient_id,date,hour,signal,value\na,2021-03-01,3,light_level,1\n"
                                    "a,2021-03-01,24,light_level,1\n");
    const auto msg = expect_ingest_error(paths);
    EXPECT_NE(msg.find("sensors.csv:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("hour"), std::string::npos) << msg;
}

TEST(LoadDataset, DuplicateRowsAreAveraged) {
    const auto dir = scratch_dir("ds_dup");
    auto paths = write_fixture(dir);
    write_text(dir / "sensors.csv", "patient_id,date,hour,signal,value\n"
                                    "a,2021-03-01,5,call_duration,2\n"
                                    "a,2021-03-01,5,call_duration,4\n"
                                    "b,2021-03-01,5,call_duration,1\n");
    write_text(dir / "relapses.csv", "patient_id,relapse_date\n");
    const auto ds = load_dataset(paths);
    ASSERT_EQ(ds.samples.size(), 2u);
    EXPECT_EQ(ds.samples[0].patient_id, "a");
    EXPECT_DOUBLE_EQ(ds.samples[0].value, 3.0);
    ASSERT_EQ(ds.notes.size(), 1u);
    EXPECT_EQ(ds.notes[0].reason, "duplicate_merged");
    EXPECT_EQ(ds.notes[0].line, 3u);
}

TEST(LoadDataset, RejectsInvalidRows) {
    struct Case {
        const char* file;
        std::string content;
        const char* needle;
    };
    const std::vector<Case> cases = {
        {"sensors.csv", "patient_id,date,hour,signal,value\na,2021-03-01,1,gps,1\n", "unknown signal"},
        {"sensors.csv", "patient_id,date,hour,signal,value\na,2021-03-01,1,light_level,-1\n", "negative"},
        {"sensors.csv", "patient_id,date,hour,signal,value\na,2021-03-01,1,light_level,nan\n", "non-finite"},
        {"sensors.csv", "patient_id,date,hour,signal,value\nzz,2021-03-01,1,light_level,1\n", "unknown patient_id"},
        {"sensors.csv", "patient,date,hour,signal,value\n", "malformed header"},
        {"ema.csv", std::string(kEmaHeader) + "a,2021-03-02,0,1,2,4,0,1,2,3,0,1\n", "outside {0,1,2,3}"},
        {"relapses.csv", "patient_id,relapse_date\na,2021-04-30\n", "outside observation span"},
        {"patients.csv", "patient_id,age,education_years\na,12,9\nb,40,12\n", "age out of range"},
    };
    for (const auto& c : cases) {
        const auto dir = scratch_dir("ds_bad");
        auto paths = write_fixture(dir);
        write_text(dir / c.file, c.content);
        const auto msg = expect_ingest_error(paths);
        EXPECT_NE(msg.find(c.file), std::string::npos) << msg;
        EXPECT_NE(msg.find(c.needle), std::string::npos) << msg;
    }
}

TEST(LoadDataset, ExplicitSpanIsEnforced) {
    const auto dir = scratch_dir("ds_span");
    auto paths = write_fixture(dir);
    write_text(dir / "patients.csv", "patient_id,age,education_years,observation_start,observation_end\n"
                                     "a,25,9,2021-03-01,2021-03-05\nb,40,12,2021-03-01,2021-03-31\n");
    const auto msg = expect_ingest_error(paths);
    EXPECT_NE(msg.find("sensors.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("outside observation span"), std::string::npos) << msg;
}

TEST(LoadDataset, WriteThenReloadIsLossless) {
    SynthConfig cfg;
    cfg.patient_count = 3;
    cfg.days_per_patient = 40;
    cfg.seed = 11;
    const auto ds = generate(cfg);

    const auto dir1 = scratch_dir("ds_rt1");
    const auto dir2 = scratch_dir("ds_rt2");
    write_dataset(ds, DatasetPaths::in_directory(dir1));
    const auto reloaded = load_dataset(DatasetPaths::in_directory(dir1));
    write_dataset(reloaded, DatasetPaths::in_directory(dir2));
    for (const char* f : {"sensors.csv", "ema.csv", "patients.csv", "relapses.csv"}) {
        EXPECT_EQ(read_text(dir1 / f), read_text(dir2 / f)) << f;
    }
    ASSERT_EQ(reloaded.samples.size(), ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        ASSERT_EQ(reloaded.samples[i].value, ds.samples[i].value);
    }
}
