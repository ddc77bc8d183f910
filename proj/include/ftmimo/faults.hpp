#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftmimo/rng.hpp"

namespace ftmimo::faults {

/// Bit groups of an IEEE-754 binary64 value.
enum class BitClass : int { Sign = 0, Exponent = 1, MantissaHigh = 2, MantissaLow = 3 };

/// Bit index range [lo, hi) of a class. Mantissa-low is bits 0-8, the band
/// whose flips stay below ~2^-44 relative and are indistinguishable from rounding.
struct BitRange {
    int lo;
    int hi;
};
BitRange bit_range(BitClass c) noexcept;

double flip_bit(double x, int bit) noexcept;

struct FaultModel {
    double p_flip = 0.0;
    /// Weights for sign, exponent, mantissa-high, mantissa-low. The default
    /// is uniform over all 64 bit positions.
    std::array<double, 4> bit_distribution{1.0 / 64, 11.0 / 64, 43.0 / 64, 9.0 / 64};
    std::uint64_t seed = 0;

    void validate() const;
    /// Draws one bit index according to bit_distribution.
    int draw_bit(Rng& rng) const;
};

/// With probability p_flip flips one bit of x. Non-finite results are kept.
double inject(double x, const FaultModel& model, Rng& rng);

/// Per-element fault process over a long stream of values. Equivalent in
/// distribution to calling inject() on every element, but samples the gap
/// to the next fault geometrically so p = 0 costs nothing.
class FaultStream {
public:
    explicit FaultStream(FaultModel model);

    void reseed(std::uint64_t seed);
    void set_probability(double p_flip);
    const FaultModel& model() const noexcept { return model_; }

    /// Passes every element of values through the fault process once.
    /// Returns the number of corrupted elements.
    std::size_t apply(std::span<double> values);

private:
    void draw_gap();

    FaultModel model_;
    Rng rng_;
    std::uint64_t gap_ = 0;
    bool never_ = true;
};

/// Raised when the emulated supply is at or below the crash voltage.
class DeviceCrash : public std::runtime_error {
public:
    explicit DeviceCrash(double volts);
    double volts() const noexcept { return volts_; }

private:
    double volts_;
};

struct VoltageProfile {
    std::string name;
    double freq_mhz = 100.0;
    double v_default = 1.0;
    double v_poff = 0.807;
    double v_crash = 0.730;
    double p_max = 0.05;
    double gamma = 2.0;

    void validate() const;
};

/// Profiles at the four characterized clock frequencies (100, 75, 50, 25 MHz).
std::vector<VoltageProfile> builtin_profiles();
std::optional<VoltageProfile> find_builtin_profile(const std::string& name);

/// Per-element corruption probability at supply v:
/// 0 at or above v_poff, p_max * ((v_poff - v) / (v_poff - v_crash))^gamma below it.
/// Throws DeviceCrash for v <= v_crash.
double error_rate(double v, const VoltageProfile& profile);

struct PowerModel {
    double p_ref_mw = 119.0;
    double v_ref = 1.0;
    double f_ref_mhz = 100.0;
    double static_mw = 0.0;  // additive floor, off by default

    void validate() const;
};

/// p_ref * (f / f_ref) * (v / v_ref)^2 + static_mw
double power(double v, double f_mhz, const PowerModel& model);

/// Measured accelerator power per clock frequency.
struct MeasuredPowerPoint {
    double freq_mhz;
    double v_poff;
    double v_crash;
    double p_default_mw;
    double p_poff_mw;
};
std::span<const MeasuredPowerPoint> measured_power_table() noexcept;

}  // namespace ftmimo::faults
