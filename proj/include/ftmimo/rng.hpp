#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ftmimo {

/// splitmix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for substream (seed, tags...). Order of tags matters.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;

/// Seeded generator with platform-stable derived distributions.
///
/// The standard library's distribution objects are implementation-defined,
/// so uniform and Gaussian draws are built directly on the raw mt19937_64
/// output, whose sequence is fixed by the standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();
    /// Uniform in (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }
    /// Standard normal via Box-Muller; caches the second variate.
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ftmimo
