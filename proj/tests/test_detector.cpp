#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "fault_campaign.hpp"
#include "ftmimo/accel.hpp"
#include "ftmimo/detector.hpp"
#include "oracles.hpp"

using namespace ftmimo;
using namespace ftmimo::detector;

namespace {

struct Instance {
    ComplexMatrix h;
    std::vector<Complex> y;
    DetectorConfig cfg;
};

Instance make_instance(std::size_t nt, std::size_t nr, std::size_t iters, std::uint64_t seed, double sigma2 = 0.1) {
    std::mt19937_64 gen(seed);
    Instance in{oracle::random_channel(nr, nt, gen), std::vector<Complex>(nr), {}};
    std::normal_distribution<double> d;
    for (auto& v : in.y) v = Complex(d(gen), d(gen));
    in.cfg.nt = nt;
    in.cfg.nr = nr;
    in.cfg.iters = iters;
    in.cfg.sigma2 = sigma2;
    return in;
}

double row_sum_residual(const RealMatrix& inv) {
    const std::size_t n = inv.rows();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += inv(i, j);
        worst = std::max(worst, std::abs(s - inv(i, n)));
    }
    return worst;
}

}  // namespace

TEST(DetectorConfig, Validation) {
    DetectorConfig c;
    EXPECT_NO_THROW(c.validate());
    c.nr = 4;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.iters = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.sigma2 = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Preprocess, StructureAndRegularizer) {
    auto in = make_instance(2, 6, 3, 1, 0.5);
    TrustedBackend be;
    const auto sys = preprocess(in.h, in.y, in.cfg, be);
    ASSERT_EQ(sys.a_aug.rows(), 5u);
    ASSERT_EQ(sys.a_aug.cols(), 4u);
    ASSERT_EQ(sys.b_aug.size(), 5u);
    const RealMatrix hr = lift_complex_matrix(in.h);
    const RealMatrix gram = trusted_matmul(transpose(hr), hr);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            EXPECT_NEAR(sys.a_aug(i, j), gram(i, j) + (i == j ? 0.5 : 0.0), 1e-12);
    for (std::size_t j = 0; j < 4; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 4; ++i) s += sys.a_aug(i, j);
        EXPECT_NEAR(sys.a_aug(4, j), s, 1e-12);
    }
    double bs = 0.0;
    for (std::size_t i = 0; i < 4; ++i) bs += sys.b_aug[i];
    EXPECT_NEAR(sys.b_aug[4], bs, 1e-12);
    EXPECT_EQ(check_preprocessing(sys, in.cfg.tolerance).status, Status::Ok);
}

TEST(Preprocess, DimensionMismatchThrows) {
    auto in = make_instance(2, 6, 3, 1);
    TrustedBackend be;
    in.cfg.nr = 7;
    EXPECT_THROW(preprocess(in.h, in.y, in.cfg, be), std::invalid_argument);
}

TEST(NewtonInit, SeedAndMultiplier) {
    PreprocessedSystem sys{RealMatrix{{4, 1}, {1, 2}, {5, 3}}, {1, 1, 2}};
    const auto s = newton_init(sys);
    EXPECT_EQ(s.inverse, (RealMatrix{{0.25, 0, 0.25}, {0, 0.5, 0.5}}));
    EXPECT_EQ(s.e, (RealMatrix{{2, 0, 2}, {0, 2, 2}}));
    EXPECT_EQ(s.a, (RealMatrix{{4, 1}, {1, 2}}));
    EXPECT_EQ(row_sum_residual(s.inverse), 0.0);
}

TEST(NewtonInit, ZeroDiagonalIsAnError) {
    PreprocessedSystem sys{RealMatrix{{0, 1}, {1, 2}, {1, 3}}, {1, 1, 2}};
    EXPECT_THROW(newton_init(sys), SingularInitialization);
}

TEST(NewtonStep, ConvergesToInverseAndPreservesChecksums) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto in = make_instance(1 + seed % 5, 8 * (1 + seed % 5), 10, seed);
        TrustedBackend be;
        const auto sys = preprocess(in.h, in.y, in.cfg, be);
        auto st = newton_init(sys);
        for (int k = 0; k < 10; ++k) {
            st = newton_step(st, be);
            const auto rep = abft::verify(abft::ChecksumMatrix::from_augmented(st.inverse, abft::Orientation::ColAppended),
                                          in.cfg.tolerance);
            EXPECT_TRUE(rep.ok) << "seed " << seed << " iter " << k;
        }
        const RealMatrix prod = trusted_matmul(st.a, block(st.inverse, 0, 0, st.a.rows(), st.a.rows()));
        for (std::size_t i = 0; i < prod.rows(); ++i)
            for (std::size_t j = 0; j < prod.cols(); ++j) EXPECT_NEAR(prod(i, j), i == j ? 1.0 : 0.0, 1e-9);
    }
}

TEST(Detect, MatchesComplexMmseOracle) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto in = make_instance(2 + seed % 7, 8 * (2 + seed % 7), 8, 100 + seed, 0.2);
        TrustedBackend be;
        const auto out = detect(in.h, in.y, in.cfg, be);
        ASSERT_EQ(out.status, Status::Ok);
        EXPECT_LT(oracle::max_rel_error(*out.x_hat, oracle::mmse(in.h, in.y, in.cfg.sigma2)), 1e-9);
    }
}

TEST(Detect, DataEntriesIdenticalToBaseline) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto in = make_instance(1 + seed % 8, 16 + seed, 1 + seed % 4, 200 + seed);
        TrustedBackend be;
        const auto out = detect(in.h, in.y, in.cfg, be);
        ASSERT_EQ(out.status, Status::Ok);
        const auto base = detect_baseline(in.h, in.y, in.cfg, be);
        ASSERT_EQ(base.size(), out.x_hat->size());
        for (std::size_t k = 0; k < base.size(); ++k) {
            EXPECT_EQ(std::bit_cast<std::uint64_t>(base[k].real()), std::bit_cast<std::uint64_t>((*out.x_hat)[k].real()));
            EXPECT_EQ(std::bit_cast<std::uint64_t>(base[k].imag()), std::bit_cast<std::uint64_t>((*out.x_hat)[k].imag()));
        }
    }
}

TEST(Detect, EmulatorWithoutFaultsMatchesTrustedBitForBit) {
    auto in = make_instance(8, 64, 3, 5);
    TrustedBackend be;
    accel::AccelEmulator emu;
    const auto a = trace_detect(in.h, in.y, in.cfg, be);
    const auto b = trace_detect(in.h, in.y, in.cfg, emu);
    EXPECT_EQ(a.raw, b.raw);
    EXPECT_EQ(b.status, Status::Ok);
}

TEST(Detect, DisabledAbftReturnsBaseline) {
    auto in = make_instance(3, 12, 3, 6);
    in.cfg.abft_enabled = false;
    TrustedBackend be;
    const auto out = detect(in.h, in.y, in.cfg, be);
    EXPECT_EQ(out.status, Status::Ok);
    EXPECT_EQ(*out.x_hat, detect_baseline(in.h, in.y, in.cfg, be));
}

TEST(Detect, ForcedExponentFlipIsLocalizedByStage) {
    auto in = make_instance(4, 32, 3, 7);
    const std::size_t calls = 3 + 3 * in.cfg.iters + 1;
    for (std::size_t call = 0; call < calls; ++call) {
        accel::AccelEmulator emu;
        emu.force_fault({call, 0, 0, 61});
        const auto out = detect(in.h, in.y, in.cfg, emu);
        EXPECT_EQ(out.status, call < 3 ? Status::ErrorPreprocessing : Status::ErrorIterative) << call;
        EXPECT_FALSE(out.x_hat.has_value());
    }
}

TEST(Detect, ExhaustiveSingleFaultsSmallSystem) {
    auto in = make_instance(2, 8, 2, 9);
    const auto r = oracle::single_fault_campaign(in.h, in.y, in.cfg);
    EXPECT_EQ(r.detected, r.injections);
    EXPECT_EQ(r.subfloor_ok, r.subfloor);
    EXPECT_GT(r.injections, 100u);
    for (const auto& m : r.misses) ADD_FAILURE() << "missed " << m;
}

TEST(Detect, ThresholdSizedFaultsAreCaughtByTheirOwnCheck) {
    // At 10^3 x threshold, faults inside the iterations reach the output
    // check weighted by the matched-filter entry of their row, so only the
    // directly checked stages are guaranteed here.
    auto in = make_instance(2, 16, 2, 9);
    const auto r = oracle::single_fault_campaign(in.h, in.y, in.cfg, oracle::Magnitude::Threshold);
    for (const auto& m : r.misses) {
        const auto call = std::stoul(m.substr(5));
        EXPECT_GE(call, 3u) << m;
        EXPECT_LT(call, 3 + 3 * in.cfg.iters) << m;
    }
    EXPECT_EQ(r.subfloor_ok, r.subfloor);
}

TEST(TraceDetect, ReportsStatusButKeepsOutput) {
    auto in = make_instance(2, 8, 3, 10);
    accel::AccelEmulator emu;
    emu.force_fault({4, 1, 1, 60});
    const auto t = trace_detect(in.h, in.y, in.cfg, emu);
    EXPECT_EQ(t.status, Status::ErrorIterative);
    EXPECT_EQ(t.raw.size(), 5u);
    ASSERT_TRUE(t.diagnostics.output.has_value());
    EXPECT_FALSE(t.diagnostics.output->ok);
}

TEST(TraceDetect, CorruptedDiagonalYieldsNaNOutput) {
    auto in = make_instance(2, 8, 3, 11, 0.0);
    TrustedBackend be;
    const auto sys = preprocess(in.h, in.y, in.cfg, be);
    oracle::DeltaBackend zero(1, 0, 0, -sys.a_aug(0, 0));  // A(0,0) becomes exactly 0
    const auto t = trace_detect(in.h, in.y, in.cfg, zero);
    EXPECT_EQ(t.status, Status::ErrorPreprocessing);
    EXPECT_TRUE(std::isnan(t.raw[0]));
}

TEST(Status, Names) {
    EXPECT_STREQ(to_string(Status::Ok), "ok");
    EXPECT_STREQ(to_string(Status::ErrorIterative), "error-iterative");
}
