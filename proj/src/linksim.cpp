#include "ftmimo/linksim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ftmimo::linksim {

namespace {

constexpr std::uint64_t kTrialStream = 0x7472696131ull;
constexpr std::uint64_t kFaultStream = 0x6661756c74ull;

unsigned bits_for(Scheme s) {
    switch (s) {
        case Scheme::Qpsk: return 2;
        case Scheme::Qam16: return 4;
        case Scheme::Qam64: return 6;
    }
    return 2;
}

std::uint32_t gray_to_binary(std::uint32_t g) {
    for (std::uint32_t shift = 1; shift < 32; shift <<= 1) g ^= g >> shift;
    return g;
}

}  // namespace

std::optional<Scheme> parse_scheme(std::string_view name) {
    if (name == "qpsk") return Scheme::Qpsk;
    if (name == "qam16" || name == "16qam") return Scheme::Qam16;
    if (name == "qam64" || name == "64qam") return Scheme::Qam64;
    return std::nullopt;
}

std::string_view to_string(Scheme s) noexcept {
    switch (s) {
        case Scheme::Qpsk: return "qpsk";
        case Scheme::Qam16: return "qam16";
        case Scheme::Qam64: return "qam64";
    }
    return "?";
}

Constellation::Constellation(Scheme scheme) : scheme_(scheme), bits_(bits_for(scheme)) {
    const unsigned axis_bits = bits_ / 2;
    const std::uint32_t levels = 1u << axis_bits;
    const double norm = std::sqrt(2.0 * (static_cast<double>(levels) * levels - 1.0) / 3.0);
    auto level = [&](std::uint32_t gray) {
        const auto idx = static_cast<double>(gray_to_binary(gray));
        return (2.0 * idx - (levels - 1.0)) / norm;
    };
    points_.resize(std::size_t{1} << bits_);
    for (std::uint32_t label = 0; label < points_.size(); ++label) {
        const std::uint32_t i_bits = label >> axis_bits;
        const std::uint32_t q_bits = label & (levels - 1);
        points_[label] = Complex(level(i_bits), level(q_bits));
    }
}

ComplexVector Constellation::modulate(std::span<const std::uint8_t> bits) const {
    if (bits.size() % bits_ != 0) throw std::invalid_argument("modulate: bit count not a multiple of bits per symbol");
    ComplexVector out(bits.size() / bits_);
    for (std::size_t s = 0; s < out.size(); ++s) {
        std::uint32_t label = 0;
        for (unsigned b = 0; b < bits_; ++b) {
            const std::uint8_t bit = bits[s * bits_ + b];
            if (bit > 1) throw std::invalid_argument("modulate: bits must be 0 or 1");
            label = (label << 1) | bit;
        }
        out[s] = points_[label];
    }
    return out;
}

std::uint32_t Constellation::decide(Complex x) const {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return 0;
    std::uint32_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t label = 0; label < points_.size(); ++label) {
        const double d = std::norm(x - points_[label]);
        if (d < best_d) {
            best_d = d;
            best = label;
        }
    }
    return best;
}

std::vector<std::uint8_t> Constellation::demodulate(std::span<const Complex> symbols) const {
    std::vector<std::uint8_t> bits(symbols.size() * bits_);
    for (std::size_t s = 0; s < symbols.size(); ++s) {
        const std::uint32_t label = decide(symbols[s]);
        for (unsigned b = 0; b < bits_; ++b) bits[s * bits_ + b] = (label >> (bits_ - 1 - b)) & 1u;
    }
    return bits;
}

ComplexMatrix gen_channel(std::size_t nr, std::size_t nt, Rng& rng) {
    if (nr < 1 || nt < 1) throw std::invalid_argument("gen_channel: dimensions must be >= 1");
    const double s = std::sqrt(0.5);
    ComplexMatrix h(nr, nt);
    for (auto& z : h.entries()) {
        const double re = rng.normal();
        const double im = rng.normal();
        z = Complex(s * re, s * im);
    }
    return h;
}

double noise_variance(double snr_db, std::size_t nt) {
    if (!std::isfinite(snr_db)) throw std::invalid_argument("noise_variance: SNR must be finite");
    return static_cast<double>(nt) / std::pow(10.0, snr_db / 10.0);
}

NoisyObservation add_noise(std::span<const Complex> y_clean, double snr_db, std::size_t nt, Rng& rng) {
    NoisyObservation out;
    out.sigma2 = noise_variance(snr_db, nt);
    const double s = std::sqrt(out.sigma2 / 2.0);
    out.y.resize(y_clean.size());
    for (std::size_t i = 0; i < y_clean.size(); ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        out.y[i] = y_clean[i] + Complex(s * re, s * im);
    }
    return out;
}

ComplexVector apply_channel(const ComplexMatrix& h, std::span<const Complex> x) {
    if (x.size() != h.cols()) throw std::invalid_argument("apply_channel: length mismatch");
    ComplexVector y(h.rows());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        Complex acc{};
        for (std::size_t j = 0; j < h.cols(); ++j) acc += h(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

void TrialConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("TrialConfig: trials must be >= 1");
    if (nt < 1 || nr < nt) throw std::invalid_argument("TrialConfig: need nr >= nt >= 1");
    if (!std::isfinite(snr_db)) throw std::invalid_argument("TrialConfig: snr_db must be finite");
    tile.validate();
    profile.validate();
    faults::FaultModel probe;
    probe.bit_distribution = bit_distribution;
    probe.validate();
}

namespace {

std::uint64_t count_bit_errors(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
    return n;
}

ComplexVector data_symbols(std::span<const double> raw, std::size_t nt) {
    return unlift_vector(raw.first(2 * nt));
}

double max_deviation(std::span<const double> a, std::span<const double> b, std::size_t n) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::abs(a[i] - b[i]);
        if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
        d = std::max(d, e);
    }
    return d;
}

std::uint64_t reported_mismatches(const detector::PipelineTrace& t) {
    const auto& pre = t.diagnostics.preprocessing;
    if (pre.status != detector::Status::Ok) return pre.gram.mismatches + pre.matched_filter.mismatches;
    return t.diagnostics.output ? t.diagnostics.output->mismatches : 0;
}

}  // namespace

BerReport run_trials(const TrialConfig& cfg) {
    cfg.validate();
    const Constellation constellation(cfg.scheme);
    const std::size_t n = 2 * cfg.nt;

    BerReport rep;
    TrustedBackend trusted;
    std::optional<accel::AccelEmulator> emu;
    if (cfg.backend == BackendChoice::Emulated) {
        rep.p_flip = faults::error_rate(cfg.voltage, cfg.profile);
        faults::FaultModel model;
        model.p_flip = rep.p_flip;
        model.bit_distribution = cfg.bit_distribution;
        emu.emplace(cfg.tile, model);
    }

    detector::DetectorConfig dcfg = cfg.detector;
    dcfg.nt = cfg.nt;
    dcfg.nr = cfg.nr;
    dcfg.abft_enabled = true;

    const std::size_t nbits = cfg.nt * constellation.bits_per_symbol();
    std::vector<std::uint8_t> bits(nbits);
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        Rng rng(derive_seed(cfg.seed, {kTrialStream, t}));
        for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() >> 63);
        const ComplexVector s = constellation.modulate(bits);
        const ComplexMatrix h = gen_channel(cfg.nr, cfg.nt, rng);
        const NoisyObservation obs = add_noise(apply_channel(h, s), cfg.snr_db, cfg.nt, rng);
        dcfg.sigma2 = obs.sigma2;

        const detector::PipelineTrace reference = detector::trace_detect(h, obs.y, dcfg, trusted);
        const auto ref_bits = constellation.demodulate(data_symbols(reference.raw, cfg.nt));
        rep.reference_bit_errors += count_bit_errors(ref_bits, bits);
        rep.exact_bit_errors +=
            count_bit_errors(constellation.demodulate(exact_detect(h, obs.y, obs.sigma2)), bits);

        detector::PipelineTrace hw;
        if (emu) {
            emu->reseed(derive_seed(cfg.seed, {kFaultStream, std::bit_cast<std::uint64_t>(cfg.voltage), t}));
            const std::uint64_t before = emu->faults_injected();
            hw = detector::trace_detect(h, obs.y, dcfg, *emu);
            rep.faults_injected += emu->faults_injected() - before;
        } else {
            hw = reference;
        }
        const auto hw_bits = constellation.demodulate(data_symbols(hw.raw, cfg.nt));
        rep.uncorrected_bit_errors += count_bit_errors(hw_bits, bits);
        rep.abft_detections += reported_mismatches(hw);

        const double deviation = max_deviation(hw.raw, reference.raw, n);
        const double allowed =
            dcfg.tolerance.threshold(n, max_abs(std::span<const double>(reference.raw).first(n)));
        const bool matches = deviation <= allowed;
        const bool flagged = hw.status != detector::Status::Ok;
        if (flagged) {
            ++rep.flagged_trials;
            ++rep.reruns;  // one rerun on the trusted path, identical to the reference run
            if (matches) ++rep.false_positives;
            rep.bit_errors += count_bit_errors(ref_bits, bits);
        } else {
            if (!matches) {
                ++rep.false_negatives;
                rep.max_false_negative_deviation = std::max(rep.max_false_negative_deviation, deviation);
                if (hw_bits != ref_bits) ++rep.harmful_false_negatives;
            }
            rep.bit_errors += count_bit_errors(hw_bits, bits);
        }
    }
    rep.bits_total = static_cast<std::uint64_t>(cfg.trials) * nbits;
    rep.ber = static_cast<double>(rep.bit_errors) / static_cast<double>(rep.bits_total);
    return rep;
}

}  // namespace ftmimo::linksim
