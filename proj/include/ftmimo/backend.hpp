#pragma once

#include <cstdint>

#include "ftmimo/linalg.hpp"

namespace ftmimo {

/// Where the matrix arithmetic of a detection runs. The trusted
/// implementation stands for the host processor; the accelerator emulator
/// stands for the undervolted matrix unit.
class MatrixBackend {
public:
    virtual ~MatrixBackend() = default;

    virtual RealMatrix multiply(const RealMatrix& a, const RealMatrix& b) = 0;
    virtual RealMatrix add(const RealMatrix& a, const RealMatrix& b) = 0;
    virtual RealMatrix subtract(const RealMatrix& a, const RealMatrix& b) = 0;
};

class TrustedBackend final : public MatrixBackend {
public:
    RealMatrix multiply(const RealMatrix& a, const RealMatrix& b) override { return trusted_matmul(a, b); }
    RealMatrix add(const RealMatrix& a, const RealMatrix& b) override { return trusted_add(a, b); }
    RealMatrix subtract(const RealMatrix& a, const RealMatrix& b) override { return trusted_sub(a, b); }
};

struct ScalarFlops {
    std::uint64_t multiply = 0;  // 2mnk per product
    std::uint64_t add = 0;       // mn per elementwise op
    std::uint64_t total() const noexcept { return multiply + add; }
};

/// Forwards to another backend and tallies scalar floating-point operations.
class FlopCountingBackend final : public MatrixBackend {
public:
    explicit FlopCountingBackend(MatrixBackend& inner) : inner_(inner) {}

    RealMatrix multiply(const RealMatrix& a, const RealMatrix& b) override {
        flops_.multiply += 2ull * a.rows() * a.cols() * b.cols();
        return inner_.multiply(a, b);
    }
    RealMatrix add(const RealMatrix& a, const RealMatrix& b) override {
        flops_.add += static_cast<std::uint64_t>(a.rows()) * a.cols();
        return inner_.add(a, b);
    }
    RealMatrix subtract(const RealMatrix& a, const RealMatrix& b) override {
        flops_.add += static_cast<std::uint64_t>(a.rows()) * a.cols();
        return inner_.subtract(a, b);
    }

    const ScalarFlops& flops() const noexcept { return flops_; }

private:
    MatrixBackend& inner_;
    ScalarFlops flops_;
};

}  // namespace ftmimo
