#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftmimo/accel.hpp"
#include "ftmimo/detector.hpp"
#include "ftmimo/faults.hpp"
#include "ftmimo/rng.hpp"

namespace ftmimo::linksim {

enum class Scheme { Qpsk, Qam16, Qam64 };

std::optional<Scheme> parse_scheme(std::string_view name);
std::string_view to_string(Scheme s) noexcept;

/// Square Gray-labelled QAM with unit average energy. The first bit of each
/// symbol's group selects the in-phase half of the label.
class Constellation {
public:
    explicit Constellation(Scheme scheme);

    Scheme scheme() const noexcept { return scheme_; }
    unsigned bits_per_symbol() const noexcept { return bits_; }
    /// points()[label]
    std::span<const Complex> points() const noexcept { return points_; }

    ComplexVector modulate(std::span<const std::uint8_t> bits) const;
    /// Nearest point; exact ties resolve to the numerically smaller label,
    /// non-finite inputs resolve to label 0.
    std::uint32_t decide(Complex x) const;
    std::vector<std::uint8_t> demodulate(std::span<const Complex> symbols) const;

private:
    Scheme scheme_;
    unsigned bits_;
    std::vector<Complex> points_;
};

/// i.i.d. CN(0, 1) entries.
ComplexMatrix gen_channel(std::size_t nr, std::size_t nt, Rng& rng);

/// Nt / 10^(snr_db / 10): per-receive-antenna SNR of the total unit-energy signal.
double noise_variance(double snr_db, std::size_t nt);

struct NoisyObservation {
    ComplexVector y;
    double sigma2 = 0.0;
};

NoisyObservation add_noise(std::span<const Complex> y_clean, double snr_db, std::size_t nt, Rng& rng);

ComplexVector apply_channel(const ComplexMatrix& h, std::span<const Complex> x);

enum class BackendChoice { Trusted, Emulated };

struct TrialConfig {
    std::size_t nt = 8;
    std::size_t nr = 64;
    double snr_db = 10.0;
    Scheme scheme = Scheme::Qpsk;
    std::size_t trials = 1000;
    detector::DetectorConfig detector{};  // nt, nr and sigma2 are filled in per trial
    BackendChoice backend = BackendChoice::Trusted;
    double voltage = 1.0;                 // used with the emulated backend
    faults::VoltageProfile profile{};
    accel::TileSpec tile{};
    std::array<double, 4> bit_distribution = faults::FaultModel{}.bit_distribution;
    std::uint64_t seed = 1;

    void validate() const;
};

struct BerReport {
    std::uint64_t bits_total = 0;
    std::uint64_t bit_errors = 0;              ///< after reruns of flagged trials
    double ber = 0.0;
    std::uint64_t uncorrected_bit_errors = 0;  ///< accelerator output taken as-is
    std::uint64_t reference_bit_errors = 0;    ///< same pipeline on the trusted path
    std::uint64_t exact_bit_errors = 0;        ///< direct-solve reference detector
    std::uint64_t abft_detections = 0;         ///< failing checksum entries, summed
    std::uint64_t flagged_trials = 0;
    std::uint64_t reruns = 0;
    std::uint64_t false_positives = 0;
    std::uint64_t false_negatives = 0;
    std::uint64_t harmful_false_negatives = 0; ///< false negatives that changed a bit
    double max_false_negative_deviation = 0.0;
    std::uint64_t faults_injected = 0;
    double p_flip = 0.0;

    double ber_uncorrected() const noexcept { return ratio(uncorrected_bit_errors); }
    double ber_reference() const noexcept { return ratio(reference_bit_errors); }
    double ber_exact() const noexcept { return ratio(exact_bit_errors); }

private:
    double ratio(std::uint64_t e) const noexcept {
        return bits_total ? static_cast<double>(e) / static_cast<double>(bits_total) : 0.0;
    }
};

/// Monte-Carlo uplink run. Channel, bits and noise of trial t depend only on
/// (seed, t); accelerator faults only on (seed, voltage, t). Throws
/// faults::DeviceCrash when the emulated voltage is at or below v_crash.
BerReport run_trials(const TrialConfig& cfg);

}  // namespace ftmimo::linksim
