#pragma once

#include <cstddef>

#include "ftmimo/accel.hpp"

namespace ftmimo::costmodel {

/// FLOP counts of the baseline detector per pipeline stage.
struct CostBreakdown {
    double gram = 0.0;
    double matched_filter = 0.0;
    double iterations = 0.0;
    double backsub = 0.0;
    double total = 0.0;
};

/// alpha in (0, 1] scales the preprocessing (Gram) cost to model channel
/// reuse across detections. alpha = 0 is accepted as the fully amortized limit.
CostBreakdown flops_mimo(std::size_t nt, std::size_t nr, std::size_t iters, double alpha);

/// Extra FLOPs of the checksum-protected variant.
double flops_overhead(std::size_t nt, std::size_t nr, std::size_t iters, double alpha);

inline double overhead_ratio(std::size_t nt, std::size_t nr, std::size_t iters, double alpha) {
    return flops_overhead(nt, nr, iters, alpha) / flops_mimo(nt, nr, iters, alpha).total;
}

/// Accelerator tile operations of one detection, enumerated from the
/// pipeline's operand shapes.
accel::TileOpCounts predict_tile_counts(std::size_t nt, std::size_t nr, std::size_t iters,
                                        const accel::TileSpec& spec, bool abft);

struct TileOverhead {
    accel::TileOpCounts baseline;
    accel::TileOpCounts checksummed;
    double total_ratio = 1.0;  ///< all tile ops, protected / baseline
    double mul_ratio = 1.0;    ///< multiply tile ops only
};

TileOverhead tile_overhead(std::size_t nt, std::size_t nr, std::size_t iters, const accel::TileSpec& spec);

inline double tile_overhead_ratio(std::size_t nt, std::size_t nr, std::size_t iters, const accel::TileSpec& spec) {
    return tile_overhead(nt, nr, iters, spec).total_ratio;
}

}  // namespace ftmimo::costmodel
