#include "ftmimo/accel.hpp"

#include <algorithm>
#include <stdexcept>

namespace ftmimo::accel {

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Zero-padded copy of m with shape rows x cols.
std::vector<double> padded(const RealMatrix& m, std::size_t rows, std::size_t cols) {
    std::vector<double> out(rows * cols, 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        std::copy(m.row(i).begin(), m.row(i).end(), out.begin() + static_cast<std::ptrdiff_t>(i * cols));
    return out;
}

}  // namespace

void TileSpec::validate() const {
    if (edge < 1) throw std::invalid_argument("TileSpec: edge must be >= 1");
}

TilePlan plan_tiles(std::size_t m, std::size_t n, std::size_t k, const TileSpec& spec) {
    spec.validate();
    if (m < 1 || n < 1 || k < 1) throw std::invalid_argument("plan_tiles: dimensions must be >= 1");
    const std::size_t t = spec.edge;
    TilePlan p;
    p.grid_rows = ceil_div(m, t);
    p.grid_cols = ceil_div(n, t);
    p.grid_inner = ceil_div(k, t);
    p.pad_rows = p.grid_rows * t - m;
    p.pad_cols = p.grid_cols * t - n;
    p.pad_inner = p.grid_inner * t - k;
    return p;
}

AccelEmulator::AccelEmulator(TileSpec spec, faults::FaultModel model)
    : spec_(spec), stream_(model), tile_(spec.edge * spec.edge) {
    spec_.validate();
}

RealMatrix AccelEmulator::multiply(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("accel multiply: inner dimension mismatch");
    if (a.rows() == 0 || b.cols() == 0 || a.cols() == 0)
        throw std::invalid_argument("accel multiply: empty operand");
    const std::size_t t = spec_.edge;
    const TilePlan plan = plan_tiles(a.rows(), b.cols(), a.cols(), spec_);
    const std::size_t pm = plan.grid_rows * t;
    const std::size_t pn = plan.grid_cols * t;
    const std::size_t pk = plan.grid_inner * t;
    const auto ap = padded(a, pm, pk);
    const auto bp = padded(b, pk, pn);

    RealMatrix out(a.rows(), b.cols());
    for (std::size_t ti = 0; ti < plan.grid_rows; ++ti) {
        for (std::size_t tj = 0; tj < plan.grid_cols; ++tj) {
            std::fill(tile_.begin(), tile_.end(), 0.0);
            for (std::size_t tk = 0; tk < plan.grid_inner; ++tk) {
                for (std::size_t r = 0; r < t; ++r) {
                    const double* arow = ap.data() + (ti * t + r) * pk + tk * t;
                    for (std::size_t c = 0; c < t; ++c) {
                        const double* bcol = bp.data() + (tk * t) * pn + tj * t + c;
                        double acc = tile_[r * t + c];
                        for (std::size_t l = 0; l < t; ++l) acc += arow[l] * bcol[l * pn];
                        tile_[r * t + c] = acc;
                    }
                }
                faults_injected_ += stream_.apply(tile_);
                ++counts_.mul;
            }
            const std::size_t r_end = std::min(t, a.rows() - ti * t);
            const std::size_t c_end = std::min(t, b.cols() - tj * t);
            for (std::size_t r = 0; r < r_end; ++r)
                for (std::size_t c = 0; c < c_end; ++c) out(ti * t + r, tj * t + c) = tile_[r * t + c];
        }
    }
    apply_forced(out);
    ++calls_;
    return out;
}

RealMatrix AccelEmulator::add(const RealMatrix& a, const RealMatrix& b) { return elementwise(a, b, false); }

RealMatrix AccelEmulator::subtract(const RealMatrix& a, const RealMatrix& b) { return elementwise(a, b, true); }

RealMatrix AccelEmulator::elementwise(const RealMatrix& a, const RealMatrix& b, bool subtract) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("accel elementwise: shape mismatch");
    if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("accel elementwise: empty operand");
    const std::size_t t = spec_.edge;
    const TilePlan plan = plan_tiles(a.rows(), a.cols(), 1, spec_);
    RealMatrix out(a.rows(), a.cols());
    for (std::size_t ti = 0; ti < plan.grid_rows; ++ti) {
        for (std::size_t tj = 0; tj < plan.grid_cols; ++tj) {
            const std::size_t r_end = std::min(t, a.rows() - ti * t);
            const std::size_t c_end = std::min(t, a.cols() - tj * t);
            std::fill(tile_.begin(), tile_.end(), 0.0);
            for (std::size_t r = 0; r < r_end; ++r) {
                for (std::size_t c = 0; c < c_end; ++c) {
                    const double x = a(ti * t + r, tj * t + c);
                    const double y = b(ti * t + r, tj * t + c);
                    tile_[r * t + c] = subtract ? x - y : x + y;
                }
            }
            faults_injected_ += stream_.apply(tile_);
            if (subtract) ++counts_.sub; else ++counts_.add;
            for (std::size_t r = 0; r < r_end; ++r)
                for (std::size_t c = 0; c < c_end; ++c) out(ti * t + r, tj * t + c) = tile_[r * t + c];
        }
    }
    apply_forced(out);
    ++calls_;
    return out;
}

void AccelEmulator::apply_forced(RealMatrix& out) {
    for (const auto& f : forced_) {
        if (f.call != calls_) continue;
        if (f.row >= out.rows() || f.col >= out.cols())
            throw std::out_of_range("ForcedFault: position outside call output");
        out(f.row, f.col) = faults::flip_bit(out(f.row, f.col), f.bit);
    }
}

}  // namespace ftmimo::accel
