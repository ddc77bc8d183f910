#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ftmimo/experiments.hpp"

using namespace ftmimo;
using namespace ftmimo::experiments;

namespace {

double num(const csv::Table& t, std::size_t row, const std::string& col) {
    return std::stod(t.rows().at(row).at(t.column(col)));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST(ParallelFor, CoversEveryIndexAndPropagatesErrors) {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
                 std::runtime_error);
}

TEST(CostTable, PaperRow) {
    config::ExperimentConfig c;
    c.nt_list = {8};
    c.nr_list = {64};
    c.iters_list = {3};
    c.alpha_list = {1.0, 0.0};
    const auto r = run_cost_table(c);
    ASSERT_EQ(r.table.rows().size(), 2u);
    EXPECT_EQ(num(r.table, 0, "alpha"), 0.0);
    EXPECT_NEAR(num(r.table, 0, "overhead_ratio"), 0.0431, 1e-4);
    EXPECT_EQ(num(r.table, 1, "flops_mimo"), 61696);
    EXPECT_EQ(num(r.table, 1, "flops_overhead"), 7392);
    EXPECT_NE(r.table.comment().find("config_hash=" + c.hash()), std::string::npos);
    EXPECT_NE(r.table.comment().find("seed=1"), std::string::npos);
}

TEST(OverheadSweep, SpikeAtTileBoundaryAndCountersAgree) {
    config::ExperimentConfig c;
    c.repeats = 2;
    const auto r = run_overhead_sweep(c);
    ASSERT_EQ(r.table.rows().size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(num(r.table, i, "counters_match"), 1);
    EXPECT_EQ(num(r.table, 2, "nt"), 8);
    EXPECT_GT(num(r.table, 2, "tile_ratio"), num(r.table, 1, "tile_ratio"));
    EXPECT_GT(num(r.table, 2, "tile_ratio"), num(r.table, 3, "tile_ratio"));
    EXPECT_NEAR(num(r.table, 2, "flop_ratio_alpha_1"), 0.1198, 1e-4);
    ASSERT_TRUE(r.timing.has_value());
    EXPECT_EQ(r.timing->rows().size(), 5u);
}

TEST(UndervoltSweep, ShapeOnSmallSystem) {
    config::ExperimentConfig c;
    c.nt = 2;
    c.nr = 16;
    c.trials = 30;
    c.v_start = 0.83;
    c.v_stop = 0.77;
    const auto r = run_undervolt_sweep(c);
    ASSERT_EQ(r.table.rows().size(), 7u);
    EXPECT_FALSE(r.crashed);
    for (std::size_t i = 0; i < 7; ++i) {
        const double v = num(r.table, i, "voltage");
        if (v >= 0.807) EXPECT_EQ(num(r.table, i, "abft_detections"), 0);
        else EXPECT_GT(num(r.table, i, "abft_detections"), 0);
        EXPECT_EQ(num(r.table, i, "ber_corrected"), num(r.table, i, "ber_reference"));
    }
}

TEST(UndervoltSweep, CrashMarkerEndsTable) {
    config::ExperimentConfig c;
    c.nt = 2;
    c.nr = 8;
    c.trials = 5;
    c.v_start = 0.75;
    c.v_stop = 0.70;
    const auto r = run_undervolt_sweep(c);
    EXPECT_TRUE(r.crashed);
    ASSERT_EQ(r.table.rows().size(), 3u);  // 0.75, 0.74, then the crash at 0.73
    EXPECT_EQ(r.table.rows().back().back(), "crash");
    EXPECT_EQ(num(r.table, 2, "voltage"), 0.73);
}

TEST(BerSnr, DecreasesWithSnr) {
    config::ExperimentConfig c;
    c.nt = 4;
    c.nr = 16;
    c.trials = 300;
    c.snr_list = {6, -6, 0};
    const auto r = run_ber_snr(c);
    ASSERT_EQ(r.table.rows().size(), 3u);
    EXPECT_EQ(num(r.table, 0, "snr_db"), -6);
    EXPECT_GT(num(r.table, 0, "ber"), num(r.table, 1, "ber"));
    EXPECT_GT(num(r.table, 1, "ber"), num(r.table, 2, "ber"));
}

TEST(Outputs, ThreadCountDoesNotChangeFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "ftmimo_exp_test";
    std::filesystem::remove_all(dir);
    config::ExperimentConfig c;
    c.experiment = config::Experiment::BerSnr;
    c.nt = 2;
    c.nr = 8;
    c.trials = 40;
    c.plot = true;
    c.out = (dir / "a.csv").string();
    c.threads = 1;
    const auto files = write_outputs(run(c), c);
    EXPECT_EQ(files.size(), 2u);
    EXPECT_TRUE(std::filesystem::exists(dir / "a_ber.svg"));
    c.out = (dir / "b.csv").string();
    c.threads = 4;
    write_outputs(run(c), c);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_EQ(slurp(dir / "a_ber.svg"), slurp(dir / "b_ber.svg"));
}
