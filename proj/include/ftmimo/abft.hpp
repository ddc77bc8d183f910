#pragma once

#include <cstddef>
#include <span>

#include "ftmimo/linalg.hpp"

namespace ftmimo::abft {

enum class Orientation {
    RowAppended,  ///< checksum row holds column sums
    ColAppended,  ///< checksum column holds row sums
};

/// A matrix together with its weight-1 checksum row or column.
class ChecksumMatrix {
public:
    ChecksumMatrix(RealMatrix data, RealVector checksum, Orientation orientation);

    /// Splits the last row (RowAppended) or last column (ColAppended) off
    /// an augmented matrix produced by checksum-carrying arithmetic.
    static ChecksumMatrix from_augmented(const RealMatrix& augmented, Orientation orientation);

    const RealMatrix& data() const noexcept { return data_; }
    const RealVector& checksum() const noexcept { return checksum_; }
    Orientation orientation() const noexcept { return orientation_; }

    /// Data with the checksum reattached as last row/column.
    RealMatrix augmented() const;

private:
    RealMatrix data_;
    RealVector checksum_;
    Orientation orientation_;
};

/// Acceptance threshold: epsilon_abs + epsilon_rel * sqrt(n) * max|block|,
/// where n is the number of summed entries per checksum.
struct TolerancePolicy {
    double epsilon_abs = 0.0;
    double epsilon_rel = 1e-6;

    double threshold(std::size_t summed, double block_max_abs) const;
    void validate() const;
};

struct VerificationReport {
    bool ok = true;
    double max_residual = 0.0;
    std::size_t worst_index = 0;   ///< column (RowAppended), row (ColAppended) or element
    double threshold = 0.0;        ///< threshold applied at worst_index
    std::size_t mismatches = 0;   ///< checksum entries over threshold
};

ChecksumMatrix encode_row_checksum(const RealMatrix& m);
ChecksumMatrix encode_col_checksum(const RealMatrix& m);

/// Every checksum entry is tested against the scale of its own line: the
/// summed entries together with the checksum itself.
VerificationReport verify(const ChecksumMatrix& c, const TolerancePolicy& policy);

/// Treats the last entry as the checksum of all preceding ones.
VerificationReport verify_vector(std::span<const double> x, const TolerancePolicy& policy);

}  // namespace ftmimo::abft
