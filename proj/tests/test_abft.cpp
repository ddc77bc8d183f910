#include <gtest/gtest.h>

#include <random>

#include "ftmimo/abft.hpp"
#include "oracles.hpp"

using namespace ftmimo;
using namespace ftmimo::abft;

namespace {

RealVector column_sums(const RealMatrix& m) {
    RealVector s(m.cols(), 0.0);
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) s[j] += m(i, j);
    return s;
}

}  // namespace

TEST(Encode, RowChecksumExamples) {
    EXPECT_EQ(encode_row_checksum(RealMatrix::identity(2)).checksum(), (RealVector{1, 1}));
    const auto c = encode_row_checksum(RealMatrix{{1, 2}, {3, 4}});
    EXPECT_EQ(c.checksum(), (RealVector{4, 6}));
    EXPECT_EQ(c.orientation(), Orientation::RowAppended);
    EXPECT_EQ(c.data(), (RealMatrix{{1, 2}, {3, 4}}));
}

TEST(Encode, ZeroRowIsNeutral) {
    const RealMatrix m{{1, 2, 3}, {0, 0, 0}, {4, 5, 6}};
    EXPECT_EQ(encode_row_checksum(m).checksum(), encode_row_checksum(RealMatrix{{1, 2, 3}, {4, 5, 6}}).checksum());
}

TEST(Encode, ColChecksumExamples) {
    EXPECT_EQ(encode_col_checksum(RealMatrix::identity(2)).checksum(), (RealVector{1, 1}));
    EXPECT_EQ(encode_col_checksum(RealMatrix{{1, 2}, {3, 4}}).checksum(), (RealVector{3, 7}));
}

TEST(Encode, TransposeDuality) {
    std::mt19937_64 gen(2);
    const auto m = oracle::integer_matrix(4, 6, gen);
    EXPECT_EQ(encode_col_checksum(transpose(m)).augmented(), transpose(encode_row_checksum(m).augmented()));
}

TEST(Encode, ColumnSumOracleOnRandomMatrices) {
    std::mt19937_64 gen(9);
    for (int rep = 0; rep < 20; ++rep) {
        const auto m = oracle::random_matrix(1 + rep % 9, 1 + rep % 7, gen);
        EXPECT_EQ(encode_row_checksum(m).checksum(), column_sums(m));
        EXPECT_TRUE(verify(encode_row_checksum(m), {}).ok);
        EXPECT_TRUE(verify(encode_col_checksum(m), {}).ok);
    }
}

TEST(ChecksumMatrix, AugmentedRoundTrip) {
    const auto c = encode_row_checksum(RealMatrix{{1, 2}, {3, 4}});
    const RealMatrix aug = c.augmented();
    EXPECT_EQ(aug, (RealMatrix{{1, 2}, {3, 4}, {4, 6}}));
    const auto back = ChecksumMatrix::from_augmented(aug, Orientation::RowAppended);
    EXPECT_EQ(back.data(), c.data());
    EXPECT_EQ(back.checksum(), c.checksum());
    const auto col = ChecksumMatrix::from_augmented(RealMatrix{{1, 2, 3}}, Orientation::ColAppended);
    EXPECT_EQ(col.checksum(), (RealVector{3}));
}

TEST(ChecksumMatrix, RejectsWrongChecksumLength) {
    EXPECT_THROW(ChecksumMatrix(RealMatrix(2, 3), RealVector(2), Orientation::RowAppended), std::invalid_argument);
    EXPECT_THROW(ChecksumMatrix(RealMatrix(2, 3), RealVector(3), Orientation::ColAppended), std::invalid_argument);
}

TEST(Verify, FreshIntegerMatrixHasZeroResidual) {
    const auto r = verify(encode_row_checksum(RealMatrix{{1, 2}, {3, 4}}), {});
    EXPECT_TRUE(r.ok);
    EXPECT_EQ(r.max_residual, 0.0);
    EXPECT_EQ(r.mismatches, 0u);
}

TEST(Verify, PerturbationLocalizesColumn) {
    const auto c = encode_row_checksum(RealMatrix{{1, 2}, {3, 4}});
    RealMatrix d = c.data();
    d(0, 0) += 1;
    const ChecksumMatrix bad(d, c.checksum(), Orientation::RowAppended);
    const auto r = verify(bad, {});
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.worst_index, 0u);
    EXPECT_EQ(r.max_residual, 1.0);
    EXPECT_EQ(r.mismatches, 1u);
}

TEST(Verify, BelowAbsoluteToleranceIsAccepted) {
    const double eps = 1e-3;
    TolerancePolicy pol{eps, 0.0};
    const auto c = encode_row_checksum(RealMatrix{{1, 2}, {3, 4}});
    RealMatrix d = c.data();
    d(1, 1) += eps / 10;
    EXPECT_TRUE(verify(ChecksumMatrix(d, c.checksum(), Orientation::RowAppended), pol).ok);
    d(1, 1) += eps;
    EXPECT_FALSE(verify(ChecksumMatrix(d, c.checksum(), Orientation::RowAppended), pol).ok);
}

TEST(Verify, NonFiniteIsAlwaysAMismatch) {
    const auto c = encode_row_checksum(RealMatrix{{1, 2}, {3, 4}});
    RealMatrix d = c.data();
    d(0, 1) = std::nan("");
    const auto r = verify(ChecksumMatrix(d, c.checksum(), Orientation::RowAppended), {1e300, 1.0});
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.worst_index, 1u);
    EXPECT_EQ(r.mismatches, 1u);
    EXPECT_TRUE(std::isinf(r.max_residual));
}

TEST(Verify, LargeEntryDoesNotMaskOtherColumns) {
    RealMatrix m{{1, 2, 3}, {4, 5, 6}};
    auto c = encode_row_checksum(m);
    RealMatrix d = c.data();
    RealVector chk = c.checksum();
    d(0, 0) = 1e200;
    chk[0] = 1e200 + 4;  // column 0 consistent at its own scale
    d(1, 2) += 1e-3;     // column 2 damaged
    const auto r = verify(ChecksumMatrix(d, chk, Orientation::RowAppended), {});
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.mismatches, 1u);
}

TEST(Verify, IsReadOnly) {
    const auto c = encode_row_checksum(RealMatrix{{1, 2}, {3, 4}});
    const RealMatrix before = c.augmented();
    (void)verify(c, {});
    EXPECT_EQ(c.augmented(), before);
}

TEST(Verify, ExhaustiveSingleFaultDetection) {
    std::mt19937_64 gen(21);
    const TolerancePolicy pol{};
    for (int rep = 0; rep < 10; ++rep) {
        const auto m = oracle::random_matrix(3 + rep % 4, 2 + rep % 5, gen, -10, 10);
        for (auto orient : {Orientation::RowAppended, Orientation::ColAppended}) {
            const auto c = orient == Orientation::RowAppended ? encode_row_checksum(m) : encode_col_checksum(m);
            const std::size_t summed = orient == Orientation::RowAppended ? m.rows() : m.cols();
            const double scale = std::max(max_abs(m.entries()), max_abs(c.checksum()));
            const double delta = 2.0 * pol.threshold(summed, scale) + 1e-12;
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j)
                    for (double sign : {1.0, -1.0}) {
                        RealMatrix d = m;
                        d(i, j) += sign * delta;
                        const auto r = verify(ChecksumMatrix(d, c.checksum(), orient), pol);
                        EXPECT_FALSE(r.ok) << i << ',' << j;
                        EXPECT_EQ(r.worst_index, orient == Orientation::RowAppended ? j : i);
                    }
        }
    }
}

TEST(Verify, LinearityPreservationOverIntegers) {
    std::mt19937_64 gen(4);
    for (int rep = 0; rep < 30; ++rep) {
        const auto x = oracle::integer_matrix(4 + rep % 3, 3 + rep % 4, gen);
        const auto xc = encode_col_checksum(x).augmented();  // consistent X
        const auto m = oracle::integer_matrix(2 + rep % 5, x.rows(), gen);
        const auto prod = trusted_matmul(m, xc);
        const auto r = verify(ChecksumMatrix::from_augmented(prod, Orientation::ColAppended), {0.0, 0.0});
        EXPECT_TRUE(r.ok);
        EXPECT_EQ(r.max_residual, 0.0);
    }
}

TEST(VerifyVector, Examples) {
    EXPECT_TRUE(verify_vector(RealVector{1, 2, 3}, {}).ok);
    const auto r = verify_vector(RealVector{1, 2, 4}, {0.5, 0.0});
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.max_residual, 1.0);
    EXPECT_EQ(r.worst_index, 2u);
    EXPECT_TRUE(verify_vector(RealVector{0, 0, 0}, {0.0, 0.0}).ok);
    EXPECT_THROW(verify_vector(RealVector{1}, {}), std::invalid_argument);
    EXPECT_FALSE(verify_vector(RealVector{1, std::nan(""), 1}, {1e9, 0}).ok);
}

TEST(TolerancePolicy, ThresholdAndValidation) {
    TolerancePolicy p{0.5, 1e-6};
    EXPECT_DOUBLE_EQ(p.threshold(16, 2.0), 0.5 + 1e-6 * 4 * 2.0);
    EXPECT_NO_THROW(p.validate());
    EXPECT_THROW((TolerancePolicy{-1, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((TolerancePolicy{0, std::nan("")}.validate()), std::invalid_argument);
}
