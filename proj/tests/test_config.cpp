#include <gtest/gtest.h>

#include "ftmimo/config.hpp"
#include "ftmimo/csv.hpp"

#include <filesystem>

using namespace ftmimo;
using namespace ftmimo::config;

namespace {

std::string error_of(const std::string& text) {
    try {
        (void)load_string(text, "cfg.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, DefaultsAreValid) {
    const ExperimentConfig c = load_string("");
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.nt, 8u);
    EXPECT_EQ(c.nr, 64u);
    EXPECT_EQ(c.iters, 3u);
    EXPECT_EQ(c.selected_profile().name, "100MHz");
}

TEST(Config, ParsesSectionsAndRanges) {
    const auto c = load_string(R"(
experiment: undervolt-sweep
seed: 99
threads: 3
output: {csv: out/x.csv, plot: true}
detector: {nt: 4, nr: 32, iters: 2, epsilon_abs: 1.0e-9}
link: {snr_db: 6, constellation: 16qam, trials: 20}
accelerator: {tile: 8, bit_weights: [0, 1, 0, 0]}
sweep:
  nt: {start: 2, stop: 6, step: 2}
  alpha: 0.5
undervolt: {profile: 50MHz, v_start: 0.7, v_stop: 0.68, v_step: 0.005}
ber_snr: {snr_db: [0, 5]}
)");
    EXPECT_EQ(c.experiment, Experiment::UndervoltSweep);
    EXPECT_EQ(c.seed, 99u);
    EXPECT_EQ(c.threads, 3u);
    EXPECT_EQ(c.out, "out/x.csv");
    EXPECT_TRUE(c.plot);
    EXPECT_EQ(c.nt, 4u);
    EXPECT_DOUBLE_EQ(c.epsilon_abs, 1e-9);
    EXPECT_EQ(c.scheme, linksim::Scheme::Qam16);
    EXPECT_EQ(c.tile, 8u);
    EXPECT_EQ(c.nt_list, (std::vector<std::size_t>{2, 4, 6}));
    EXPECT_EQ(c.alpha_list, (std::vector<double>{0.5}));
    EXPECT_EQ(c.selected_profile().freq_mhz, 50.0);
    EXPECT_EQ(c.voltages(), (std::vector<double>{0.7, 0.695, 0.69, 0.685, 0.68}));
    EXPECT_EQ(c.snr_list, (std::vector<double>{0, 5}));
}

TEST(Config, DefaultVoltageGrid) {
    const auto v = ExperimentConfig{}.voltages();
    ASSERT_EQ(v.size(), 27u);
    EXPECT_EQ(v.front(), 1.0);
    EXPECT_EQ(v[19], 0.81);
    EXPECT_EQ(v.back(), 0.74);
}

TEST(Config, CustomProfile) {
    const auto c = load_string(R"(
undervolt: {profile: lab}
profiles:
  lab: {freq_mhz: 60, v_poff: 0.75, v_crash: 0.7, p_max: 0.1, gamma: 1}
  100MHz: {gamma: 3}
)");
    EXPECT_EQ(c.selected_profile().v_poff, 0.75);
    EXPECT_EQ(c.profiles[0].gamma, 3.0);
}

TEST(Config, ErrorsNameFieldAndLine) {
    auto e = error_of("experiment: cost-table\ndetector:\n  nt: 8\n  itters: 3\n");
    EXPECT_NE(e.find("cfg.yaml:4"), std::string::npos) << e;
    EXPECT_NE(e.find("detector.itters"), std::string::npos) << e;

    e = error_of("sweep:\n  nt: {start: 8, stop: 4, step: 1}\n");
    EXPECT_NE(e.find("sweep.nt"), std::string::npos) << e;
    EXPECT_NE(e.find("cfg.yaml:2"), std::string::npos) << e;
    EXPECT_NE(e.find("empty"), std::string::npos) << e;

    e = error_of("detector: {nt: 8, nr: 4}\n");
    EXPECT_NE(e.find("detector.nr"), std::string::npos) << e;
    EXPECT_NE(e.find("cfg.yaml:1"), std::string::npos) << e;

    e = error_of("undervolt:\n  profile: 33MHz\n");
    EXPECT_NE(e.find("cfg.yaml:2"), std::string::npos) << e;
    EXPECT_NE(e.find("unknown profile"), std::string::npos) << e;

    EXPECT_NE(error_of("experiment: fly\n").find("unknown experiment"), std::string::npos);
    EXPECT_NE(error_of("detector: {nt: eight}\n").find("cannot convert"), std::string::npos);
    EXPECT_NE(error_of("seed: [1\n").find("syntax"), std::string::npos);
    EXPECT_NE(error_of("accelerator: {bit_weights: [1, 1]}\n").find("4 weights"), std::string::npos);
    EXPECT_NE(error_of("accelerator: {bit_weights: [1, 1, 0, 0]}\n").find("sum to 1"), std::string::npos);
    EXPECT_NE(error_of("sweep: {alpha: [2]}\n").find("sweep.alpha"), std::string::npos);
    EXPECT_NE(error_of("undervolt: {v_step: 0}\n").find("undervolt.v_step"), std::string::npos);
    EXPECT_NE(error_of("threads: -1\n").find("threads"), std::string::npos);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_file("/nonexistent/cfg.yaml"), ConfigError); }

TEST(Config, HashTracksResultAffectingFields) {
    ExperimentConfig a, b;
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    b.threads = 8;
    b.out = "elsewhere.csv";
    b.plot = true;
    EXPECT_EQ(a.hash(), b.hash());
    b.seed = 2;
    EXPECT_NE(a.hash(), b.hash());
    b = a;
    b.profiles[0].gamma = 2.5;
    EXPECT_NE(a.hash(), b.hash());
}

TEST(Csv, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, -0.0, 5e-324}) {
        const auto s = csv::format_double(v);
        EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
    }
    EXPECT_EQ(csv::format_double(0.1), "0.1");
    EXPECT_EQ(csv::format_double(119.0), "119");
    EXPECT_EQ(csv::format_double(std::nan("")), "nan");
    EXPECT_EQ(csv::format_double(-INFINITY), "-inf");
}

TEST(Csv, WriteAndRead) {
    csv::Table t({"a", "b"});
    t.set_comment("hash=1");
    t.add_row({"1", "x"});
    t.add_row({"2", ""});
    EXPECT_EQ(t.str(), "# hash=1\na,b\n1,x\n2,\n");
    EXPECT_THROW(t.add_row({"1"}), std::invalid_argument);
    const auto r = csv::read(t.str());
    EXPECT_EQ(r.comment(), "hash=1");
    EXPECT_EQ(r.columns(), t.columns());
    EXPECT_EQ(r.rows(), t.rows());
    EXPECT_EQ(r.column("b"), 1u);
    EXPECT_THROW(r.column("c"), std::out_of_range);
}

TEST(ConfigFiles, ShippedExamplesLoad) {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(FTMIMO_CONFIG_DIR)) {
        if (e.path().extension() != ".yaml") continue;
        SCOPED_TRACE(e.path().string());
        EXPECT_NO_THROW(load_file(e.path().string()).validate());
        ++n;
    }
    EXPECT_EQ(n, 4u);
}
