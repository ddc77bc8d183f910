#include "ftmimo/faults.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ftmimo::faults {

BitRange bit_range(BitClass c) noexcept {
    switch (c) {
        case BitClass::Sign: return {63, 64};
        case BitClass::Exponent: return {52, 63};
        case BitClass::MantissaHigh: return {9, 52};
        case BitClass::MantissaLow: return {0, 9};
    }
    return {0, 0};
}

double flip_bit(double x, int bit) noexcept {
    const auto raw = std::bit_cast<std::uint64_t>(x) ^ (std::uint64_t{1} << bit);
    return std::bit_cast<double>(raw);
}

void FaultModel::validate() const {
    if (!(p_flip >= 0.0 && p_flip <= 1.0)) throw std::invalid_argument("FaultModel: p_flip outside [0,1]");
    double total = 0.0;
    for (double w : bit_distribution) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("FaultModel: negative or non-finite bit weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("FaultModel: bit weights must sum to 1");
}

int FaultModel::draw_bit(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    int cls = 3;
    for (int c = 0; c < 4; ++c) {
        acc += bit_distribution[c];
        if (u < acc) {
            cls = c;
            break;
        }
    }
    // Rounding in the cumulative sum can leave u above the total; fall back
    // to the last class that carries weight.
    if (bit_distribution[cls] == 0.0)
        for (int c = 3; c >= 0; --c)
            if (bit_distribution[c] > 0.0) {
                cls = c;
                break;
            }
    const BitRange r = bit_range(static_cast<BitClass>(cls));
    return r.lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(r.hi - r.lo)));
}

double inject(double x, const FaultModel& model, Rng& rng) {
    if (model.p_flip <= 0.0) return x;
    if (!rng.bernoulli(model.p_flip)) return x;
    return flip_bit(x, model.draw_bit(rng));
}

FaultStream::FaultStream(FaultModel model) : model_(model), rng_(model.seed) {
    model_.validate();
    draw_gap();
}

void FaultStream::reseed(std::uint64_t seed) {
    model_.seed = seed;
    rng_ = Rng(seed);
    draw_gap();
}

void FaultStream::set_probability(double p_flip) {
    model_.p_flip = p_flip;
    model_.validate();
    draw_gap();
}

void FaultStream::draw_gap() {
    const double p = model_.p_flip;
    never_ = p <= 0.0;
    if (never_) return;
    if (p >= 1.0) {
        gap_ = 0;
        return;
    }
    // Number of clean elements before the next fault: Geometric(p).
    const double g = std::floor(std::log(rng_.uniform_open_low()) / std::log1p(-p));
    gap_ = g >= 9.0e18 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(g);
}

std::size_t FaultStream::apply(std::span<double> values) {
    if (never_) return 0;
    std::size_t hits = 0;
    std::size_t pos = 0;
    while (pos < values.size()) {
        const std::size_t remaining = values.size() - pos;
        if (gap_ >= remaining) {
            gap_ -= remaining;
            break;
        }
        pos += gap_;
        values[pos] = flip_bit(values[pos], model_.draw_bit(rng_));
        ++hits;
        ++pos;
        draw_gap();
    }
    return hits;
}

namespace {

std::string crash_message(double v) {
    std::ostringstream os;
    os << "emulated device crashed at " << v << " V";
    return os.str();
}

}  // namespace

DeviceCrash::DeviceCrash(double volts) : std::runtime_error(crash_message(volts)), volts_(volts) {}

void VoltageProfile::validate() const {
    if (!(freq_mhz > 0.0)) throw std::invalid_argument("VoltageProfile " + name + ": freq_mhz must be positive");
    if (!(v_crash < v_poff && v_poff <= v_default))
        throw std::invalid_argument("VoltageProfile " + name + ": need v_crash < v_poff <= v_default");
    if (!(p_max > 0.0 && p_max <= 1.0))
        throw std::invalid_argument("VoltageProfile " + name + ": p_max outside (0,1]");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw std::invalid_argument("VoltageProfile " + name + ": gamma must be positive");
}

namespace {

constexpr MeasuredPowerPoint kMeasured[] = {
    {100.0, 0.807, 0.730, 119.0, 76.0},
    {75.0, 0.765, 0.680, 117.0, 59.0},
    {50.0, 0.695, 0.670, 102.0, 32.0},
    {25.0, 0.633, 0.620, 75.0, 18.0},
};

}  // namespace

std::span<const MeasuredPowerPoint> measured_power_table() noexcept { return kMeasured; }

std::vector<VoltageProfile> builtin_profiles() {
    std::vector<VoltageProfile> out;
    for (const auto& m : kMeasured) {
        VoltageProfile p;
        p.name = std::to_string(static_cast<int>(m.freq_mhz)) + "MHz";
        p.freq_mhz = m.freq_mhz;
        p.v_poff = m.v_poff;
        p.v_crash = m.v_crash;
        out.push_back(p);
    }
    return out;
}

std::optional<VoltageProfile> find_builtin_profile(const std::string& name) {
    for (auto& p : builtin_profiles())
        if (p.name == name) return p;
    return std::nullopt;
}

double error_rate(double v, const VoltageProfile& profile) {
    if (v <= profile.v_crash) throw DeviceCrash(v);
    if (v >= profile.v_poff) return 0.0;
    const double depth = (profile.v_poff - v) / (profile.v_poff - profile.v_crash);
    return profile.p_max * std::pow(depth, profile.gamma);
}

void PowerModel::validate() const {
    if (!(p_ref_mw > 0.0) || !(v_ref > 0.0) || !(f_ref_mhz > 0.0) || !(static_mw >= 0.0))
        throw std::invalid_argument("PowerModel: reference values must be positive");
}

double power(double v, double f_mhz, const PowerModel& model) {
    if (!(v > 0.0) || !(f_mhz > 0.0)) throw std::invalid_argument("power: v and f must be positive");
    const double vr = v / model.v_ref;
    return model.p_ref_mw * (f_mhz / model.f_ref_mhz) * vr * vr + model.static_mw;
}

}  // namespace ftmimo::faults
