#include "ftmimo/abft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ftmimo::abft {

ChecksumMatrix::ChecksumMatrix(RealMatrix data, RealVector checksum, Orientation orientation)
    : data_(std::move(data)), checksum_(std::move(checksum)), orientation_(orientation) {
    const std::size_t expected =
        orientation_ == Orientation::RowAppended ? data_.cols() : data_.rows();
    if (checksum_.size() != expected)
        throw std::invalid_argument("ChecksumMatrix: checksum length does not match orientation");
}

ChecksumMatrix ChecksumMatrix::from_augmented(const RealMatrix& augmented, Orientation orientation) {
    if (orientation == Orientation::RowAppended) {
        if (augmented.rows() < 2) throw std::invalid_argument("from_augmented: need at least 2 rows");
        const std::size_t m = augmented.rows() - 1;
        auto last = augmented.row(m);
        return {block(augmented, 0, 0, m, augmented.cols()), RealVector(last.begin(), last.end()),
                orientation};
    }
    if (augmented.cols() < 2) throw std::invalid_argument("from_augmented: need at least 2 columns");
    const std::size_t n = augmented.cols() - 1;
    RealVector chk(augmented.rows());
    for (std::size_t i = 0; i < augmented.rows(); ++i) chk[i] = augmented(i, n);
    return {block(augmented, 0, 0, augmented.rows(), n), std::move(chk), orientation};
}

RealMatrix ChecksumMatrix::augmented() const {
    if (orientation_ == Orientation::RowAppended) {
        RealMatrix out(data_.rows() + 1, data_.cols());
        for (std::size_t i = 0; i < data_.rows(); ++i)
            std::copy(data_.row(i).begin(), data_.row(i).end(), out.row(i).begin());
        std::copy(checksum_.begin(), checksum_.end(), out.row(data_.rows()).begin());
        return out;
    }
    RealMatrix out(data_.rows(), data_.cols() + 1);
    for (std::size_t i = 0; i < data_.rows(); ++i) {
        std::copy(data_.row(i).begin(), data_.row(i).end(), out.row(i).begin());
        out(i, data_.cols()) = checksum_[i];
    }
    return out;
}

double TolerancePolicy::threshold(std::size_t summed, double block_max_abs) const {
    return epsilon_abs + epsilon_rel * std::sqrt(static_cast<double>(summed)) * block_max_abs;
}

void TolerancePolicy::validate() const {
    if (!std::isfinite(epsilon_abs) || !std::isfinite(epsilon_rel) || epsilon_abs < 0.0 ||
        epsilon_rel < 0.0)
        throw std::invalid_argument("TolerancePolicy: epsilons must be finite and non-negative");
}

ChecksumMatrix encode_row_checksum(const RealMatrix& m) {
    RealVector chk(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) chk[j] += m(i, j);
    return {m, std::move(chk), Orientation::RowAppended};
}

ChecksumMatrix encode_col_checksum(const RealMatrix& m) {
    RealVector chk(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) chk[i] += m(i, j);
    return {m, std::move(chk), Orientation::ColAppended};
}

namespace {

// A NaN residual compares false against any threshold, so non-finite
// values are handled as failures before any comparison happens.
void record(VerificationReport& r, std::size_t index, double residual, double threshold) {
    const bool bad = !std::isfinite(residual) || residual > threshold;
    if (bad) ++r.mismatches;
    const double key = std::isfinite(residual) ? residual : std::numeric_limits<double>::infinity();
    if (index == 0 || key > r.max_residual) {
        r.max_residual = key;
        r.worst_index = index;
        r.threshold = threshold;
    }
}

double block_scale(std::span<const double> data, std::span<const double> chk) {
    const double s = std::max(max_abs(data), max_abs(chk));
    return std::isfinite(s) ? s : 0.0;
}

}  // namespace

VerificationReport verify(const ChecksumMatrix& c, const TolerancePolicy& policy) {
    const RealMatrix& d = c.data();
    const bool by_col = c.orientation() == Orientation::RowAppended;
    const std::size_t summed = by_col ? d.rows() : d.cols();
    VerificationReport r;
    // Each checksum entry is judged against the magnitude of its own line, so
    // one blown-up entry cannot widen the threshold of unrelated lines.
    std::vector<double> line(summed);
    for (std::size_t k = 0; k < c.checksum().size(); ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t < summed; ++t) {
            line[t] = by_col ? d(t, k) : d(k, t);
            s += line[t];
        }
        const double chk = c.checksum()[k];
        record(r, k, std::abs(chk - s), policy.threshold(summed, block_scale(line, {&chk, 1})));
    }
    r.ok = r.mismatches == 0;
    return r;
}

VerificationReport verify_vector(std::span<const double> x, const TolerancePolicy& policy) {
    if (x.size() < 2) throw std::invalid_argument("verify_vector: need data plus checksum");
    const auto data = x.first(x.size() - 1);
    VerificationReport r;
    double s = 0.0;
    for (double v : data) s += v;
    record(r, 0, std::abs(x.back() - s), policy.threshold(data.size(), block_scale(data, x.last(1))));
    r.worst_index = x.size() - 1;
    r.ok = r.mismatches == 0;
    return r;
}

}  // namespace ftmimo::abft
