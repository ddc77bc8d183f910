#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ftmimo/backend.hpp"
#include "ftmimo/faults.hpp"

namespace ftmimo::accel {

struct TileSpec {
    std::size_t edge = 16;
    void validate() const;
};

/// Tiling of an (m x k) * (k x n) product, or of an m x n elementwise op
/// when k = 1.
struct TilePlan {
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    std::size_t grid_inner = 0;
    std::size_t pad_rows = 0;
    std::size_t pad_cols = 0;
    std::size_t pad_inner = 0;

    std::uint64_t product_tile_ops() const noexcept {
        return static_cast<std::uint64_t>(grid_rows) * grid_cols * grid_inner;
    }
    std::uint64_t elementwise_tile_ops() const noexcept {
        return static_cast<std::uint64_t>(grid_rows) * grid_cols;
    }
};

TilePlan plan_tiles(std::size_t m, std::size_t n, std::size_t k, const TileSpec& spec);

struct TileOpCounts {
    std::uint64_t mul = 0;
    std::uint64_t add = 0;
    std::uint64_t sub = 0;

    std::uint64_t total() const noexcept { return mul + add + sub; }
    friend bool operator==(const TileOpCounts&, const TileOpCounts&) = default;
    TileOpCounts operator-(const TileOpCounts& o) const { return {mul - o.mul, add - o.add, sub - o.sub}; }
};

/// Deterministic single-bit corruption of one output element of one call.
struct ForcedFault {
    std::uint64_t call = 0;  ///< zero-based index over all accelerator calls
    std::size_t row = 0;
    std::size_t col = 0;
    int bit = 62;
};

/// Emulated fixed-size matrix unit. Operands are zero-padded to whole tiles;
/// every tile-op output element passes through the fault process once.
///
/// Products accumulate inner tiles in ascending order into the running
/// output tile, element by element, so with faults disabled the result is
/// bit-identical to trusted_matmul.
///
/// Stateful (counters, RNG): not safe to share across threads.
class AccelEmulator final : public MatrixBackend {
public:
    explicit AccelEmulator(TileSpec spec = {}, faults::FaultModel model = {});

    RealMatrix multiply(const RealMatrix& a, const RealMatrix& b) override;
    RealMatrix add(const RealMatrix& a, const RealMatrix& b) override;
    RealMatrix subtract(const RealMatrix& a, const RealMatrix& b) override;

    TileOpCounts snapshot_counters() const noexcept { return counts_; }
    std::uint64_t calls() const noexcept { return calls_; }
    std::uint64_t faults_injected() const noexcept { return faults_injected_; }
    const TileSpec& spec() const noexcept { return spec_; }
    const faults::FaultModel& fault_model() const noexcept { return stream_.model(); }

    void reseed(std::uint64_t seed) { stream_.reseed(seed); }
    void set_fault_probability(double p_flip) { stream_.set_probability(p_flip); }
    void force_fault(const ForcedFault& f) { forced_.push_back(f); }

private:
    RealMatrix elementwise(const RealMatrix& a, const RealMatrix& b, bool subtract);
    void apply_forced(RealMatrix& out);

    TileSpec spec_;
    faults::FaultStream stream_;
    TileOpCounts counts_;
    std::uint64_t calls_ = 0;
    std::uint64_t faults_injected_ = 0;
    std::vector<ForcedFault> forced_;
    std::vector<double> tile_;
};

inline RealMatrix accel_matmul(const RealMatrix& a, const RealMatrix& b, AccelEmulator& emu) {
    return emu.multiply(a, b);
}
inline RealMatrix accel_add(const RealMatrix& a, const RealMatrix& b, AccelEmulator& emu) {
    return emu.add(a, b);
}
inline RealMatrix accel_sub(const RealMatrix& a, const RealMatrix& b, AccelEmulator& emu) {
    return emu.subtract(a, b);
}
inline TileOpCounts snapshot_counters(const AccelEmulator& emu) { return emu.snapshot_counters(); }

}  // namespace ftmimo::accel
