#include "ftmimo/costmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace ftmimo::costmodel {

namespace {

void check(std::size_t nt, std::size_t nr, double alpha) {
    if (nt < 1 || nr < 1) throw std::invalid_argument("costmodel: nt and nr must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("costmodel: alpha outside [0, 1]");
}

}  // namespace

CostBreakdown flops_mimo(std::size_t nt_, std::size_t nr_, std::size_t iters, double alpha) {
    check(nt_, nr_, alpha);
    const double nt = static_cast<double>(nt_);
    const double nr = static_cast<double>(nr_);
    const double k = static_cast<double>(iters);
    CostBreakdown c;
    c.gram = alpha * 8.0 * nt * nt * nr;
    c.matched_filter = 8.0 * nt * nr;
    c.iterations = k * 16.0 * nt * nt * nt;
    c.backsub = 4.0 * nt * nt;
    c.total = c.gram + c.matched_filter + c.iterations + c.backsub;
    return c;
}

double flops_overhead(std::size_t nt_, std::size_t nr_, std::size_t iters, double alpha) {
    check(nt_, nr_, alpha);
    const double nt = static_cast<double>(nt_);
    const double nr = static_cast<double>(nr_);
    const double k = static_cast<double>(iters);
    return alpha * 12.0 * nt * nr + k * (6.0 * nt * nt + 4.0 * nt);
}

accel::TileOpCounts predict_tile_counts(std::size_t nt, std::size_t nr, std::size_t iters,
                                        const accel::TileSpec& spec, bool abft) {
    const std::size_t n = 2 * nt;       // lifted user dimension
    const std::size_t rx = 2 * nr;      // lifted antenna dimension
    const std::size_t rows = abft ? n + 1 : n;  // checksum row on Gram / matched filter / solve
    const std::size_t cols = abft ? n + 1 : n;  // checksum column on the inverse estimate
    accel::TileOpCounts c;
    auto mul = [&](std::size_t m, std::size_t k, std::size_t ncols) {
        c.mul += accel::plan_tiles(m, ncols, k, spec).product_tile_ops();
    };
    auto elementwise = [&](std::size_t m, std::size_t ncols) {
        return accel::plan_tiles(m, ncols, 1, spec).elementwise_tile_ops();
    };
    mul(rows, rx, n);             // Gram
    c.add += elementwise(rows, n);  // + sigma2 regularizer
    mul(rows, rx, 1);             // matched filter
    for (std::size_t i = 0; i < iters; ++i) {
        mul(n, n, cols);              // A * X
        c.sub += elementwise(n, cols);  // E - A X
        mul(n, n, cols);              // X * (E - A X)
    }
    mul(rows, n, 1);              // solve
    return c;
}

TileOverhead tile_overhead(std::size_t nt, std::size_t nr, std::size_t iters, const accel::TileSpec& spec) {
    TileOverhead t;
    t.baseline = predict_tile_counts(nt, nr, iters, spec, false);
    t.checksummed = predict_tile_counts(nt, nr, iters, spec, true);
    t.total_ratio = static_cast<double>(t.checksummed.total()) / static_cast<double>(t.baseline.total());
    t.mul_ratio = static_cast<double>(t.checksummed.mul) / static_cast<double>(t.baseline.mul);
    return t;
}

}  // namespace ftmimo::costmodel
