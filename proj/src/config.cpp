#include "ftmimo/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ftmimo/csv.hpp"

namespace ftmimo::config {

std::optional<Experiment> parse_experiment(std::string_view name) {
    if (name == "overhead-sweep") return Experiment::OverheadSweep;
    if (name == "undervolt-sweep") return Experiment::UndervoltSweep;
    if (name == "ber-snr") return Experiment::BerSnr;
    if (name == "cost-table") return Experiment::CostTable;
    return std::nullopt;
}

std::string_view to_string(Experiment e) noexcept {
    switch (e) {
        case Experiment::OverheadSweep: return "overhead-sweep";
        case Experiment::UndervoltSweep: return "undervolt-sweep";
        case Experiment::BerSnr: return "ber-snr";
        case Experiment::CostTable: return "cost-table";
    }
    return "?";
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
    throw ConfigError("field '" + field + "': " + what, field);
}

template <typename T>
void require_nonempty(const std::vector<T>& v, const std::string& field) {
    if (v.empty()) invalid(field, "range is empty");
}

}  // namespace

void ExperimentConfig::validate() const {
    if (threads < 1) invalid("threads", "must be >= 1");
    if (nt < 1) invalid("detector.nt", "must be >= 1");
    if (nr < nt) invalid("detector.nr", "must be >= detector.nt");
    if (iters < 1) invalid("detector.iters", "must be >= 1");
    if (!(epsilon_abs >= 0.0) || !std::isfinite(epsilon_abs)) invalid("detector.epsilon_abs", "must be finite and >= 0");
    if (!(epsilon_rel >= 0.0) || !std::isfinite(epsilon_rel)) invalid("detector.epsilon_rel", "must be finite and >= 0");
    if (!std::isfinite(snr_db)) invalid("link.snr_db", "must be finite");
    if (trials < 1) invalid("link.trials", "must be >= 1");
    if (tile < 1) invalid("accelerator.tile", "must be >= 1");
    try {
        faults::FaultModel m;
        m.bit_distribution = bit_weights;
        m.validate();
    } catch (const std::invalid_argument& e) {
        invalid("accelerator.bit_weights", e.what());
    }

    require_nonempty(nt_list, "sweep.nt");
    require_nonempty(nr_list, "sweep.nr");
    require_nonempty(iters_list, "sweep.iters");
    require_nonempty(alpha_list, "sweep.alpha");
    for (auto v : nt_list)
        if (v < 1) invalid("sweep.nt", "entries must be >= 1");
    for (auto v : iters_list)
        if (v < 1) invalid("sweep.iters", "entries must be >= 1");
    for (auto a : alpha_list)
        if (!(a >= 0.0 && a <= 1.0)) invalid("sweep.alpha", "entries must lie in [0, 1]");
    if (*std::max_element(nr_list.begin(), nr_list.end()) < *std::min_element(nt_list.begin(), nt_list.end()))
        invalid("sweep.nr", "no (nt, nr) pair satisfies nr >= nt");
    if (repeats < 1) invalid("sweep.repeats", "must be >= 1");

    if (!(v_step > 0.0) || !std::isfinite(v_step)) invalid("undervolt.v_step", "must be > 0");
    if (!(v_start >= v_stop)) invalid("undervolt.v_stop", "range is empty (v_stop > v_start)");
    if (!(v_stop > 0.0)) invalid("undervolt.v_stop", "must be > 0");
    for (const auto& p : profiles) {
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            invalid("profiles." + p.name, e.what());
        }
    }
    bool found = false;
    for (const auto& p : profiles) found = found || p.name == profile;
    if (!found) invalid("undervolt.profile", "unknown profile '" + profile + "'");
    try {
        power.validate();
    } catch (const std::invalid_argument& e) {
        invalid("power", e.what());
    }

    require_nonempty(snr_list, "ber_snr.snr_db");
    for (double s : snr_list)
        if (!std::isfinite(s)) invalid("ber_snr.snr_db", "entries must be finite");
}

const faults::VoltageProfile& ExperimentConfig::selected_profile() const {
    for (const auto& p : profiles)
        if (p.name == profile) return p;
    invalid("undervolt.profile", "unknown profile '" + profile + "'");
}

std::vector<double> ExperimentConfig::voltages() const {
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((v_start - v_stop) / v_step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(std::round((v_start - static_cast<double>(i) * v_step) * 1e6) / 1e6);
    return out;
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    auto d = [](double v) { return csv::format_double(v); };
    auto list = [&](const auto& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ';';
            if constexpr (std::is_floating_point_v<std::decay_t<decltype(v[i])>>) s += d(v[i]);
            else s += std::to_string(v[i]);
        }
        return s;
    };
    os << "experiment=" << to_string(experiment) << "\nseed=" << seed << "\nnt=" << nt << "\nnr=" << nr
       << "\niters=" << iters << "\nepsilon_abs=" << d(epsilon_abs) << "\nepsilon_rel=" << d(epsilon_rel)
       << "\nsnr_db=" << d(snr_db) << "\nscheme=" << linksim::to_string(scheme) << "\ntrials=" << trials
       << "\ntile=" << tile << "\nbit_weights=" << list(bit_weights) << "\nsweep.nt=" << list(nt_list)
       << "\nsweep.nr=" << list(nr_list) << "\nsweep.iters=" << list(iters_list)
       << "\nsweep.alpha=" << list(alpha_list) << "\nsweep.repeats=" << repeats << "\nprofile=" << profile
       << "\nv_start=" << d(v_start) << "\nv_stop=" << d(v_stop) << "\nv_step=" << d(v_step);
    for (const auto& p : profiles)
        os << "\nprofile." << p.name << '=' << d(p.freq_mhz) << ';' << d(p.v_default) << ';' << d(p.v_poff) << ';'
           << d(p.v_crash) << ';' << d(p.p_max) << ';' << d(p.gamma);
    os << "\npower=" << d(power.p_ref_mw) << ';' << d(power.v_ref) << ';' << d(power.f_ref_mhz) << ';'
       << d(power.static_mw) << "\nsnr_list=" << list(snr_list) << '\n';
    return os.str();
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return out;
}

namespace {

/// Walks a YAML document, converting values and tracking the line of every
/// field so that validation failures can point back at the file.
class Loader {
public:
    explicit Loader(std::string origin) : origin_(std::move(origin)) {}

    ExperimentConfig load(const YAML::Node& root) {
        ExperimentConfig c;
        if (!root || root.IsNull()) return c;
        if (!root.IsMap()) fail(root, "", "top level must be a mapping");
        allowed(root, "", {"experiment", "seed", "threads", "output", "detector", "link", "accelerator", "sweep",
                           "undervolt", "profiles", "power", "ber_snr"});
        if (auto n = root["experiment"]) {
            auto e = parse_experiment(scalar<std::string>(n, "experiment"));
            if (!e) fail(n, "experiment", "unknown experiment (overhead-sweep, undervolt-sweep, ber-snr, cost-table)");
            c.experiment = *e;
        }
        if (auto n = root["seed"]) c.seed = unsigned_value<std::uint64_t>(n, "seed");
        if (auto n = root["threads"]) c.threads = unsigned_value<unsigned>(n, "threads");
        section(root, "output", {"csv", "plot"}, [&](const YAML::Node& s) {
            if (auto n = s["csv"]) c.out = scalar<std::string>(n, "output.csv");
            if (auto n = s["plot"]) c.plot = scalar<bool>(n, "output.plot");
        });
        section(root, "detector", {"nt", "nr", "iters", "epsilon_abs", "epsilon_rel"}, [&](const YAML::Node& s) {
            if (auto n = s["nt"]) c.nt = unsigned_value<std::size_t>(n, "detector.nt");
            if (auto n = s["nr"]) c.nr = unsigned_value<std::size_t>(n, "detector.nr");
            if (auto n = s["iters"]) c.iters = unsigned_value<std::size_t>(n, "detector.iters");
            if (auto n = s["epsilon_abs"]) c.epsilon_abs = scalar<double>(n, "detector.epsilon_abs");
            if (auto n = s["epsilon_rel"]) c.epsilon_rel = scalar<double>(n, "detector.epsilon_rel");
        });
        section(root, "link", {"snr_db", "constellation", "trials"}, [&](const YAML::Node& s) {
            if (auto n = s["snr_db"]) c.snr_db = scalar<double>(n, "link.snr_db");
            if (auto n = s["constellation"]) {
                auto sc = linksim::parse_scheme(scalar<std::string>(n, "link.constellation"));
                if (!sc) fail(n, "link.constellation", "unknown constellation (qpsk, qam16, qam64)");
                c.scheme = *sc;
            }
            if (auto n = s["trials"]) c.trials = unsigned_value<std::size_t>(n, "link.trials");
        });
        section(root, "accelerator", {"tile", "bit_weights"}, [&](const YAML::Node& s) {
            if (auto n = s["tile"]) c.tile = unsigned_value<std::size_t>(n, "accelerator.tile");
            if (auto n = s["bit_weights"]) {
                auto w = doubles(n, "accelerator.bit_weights");
                if (w.size() != 4) fail(n, "accelerator.bit_weights", "expected 4 weights (sign, exponent, mantissa-high, mantissa-low)");
                std::copy(w.begin(), w.end(), c.bit_weights.begin());
            }
        });
        section(root, "sweep", {"nt", "nr", "iters", "alpha", "repeats"}, [&](const YAML::Node& s) {
            if (auto n = s["nt"]) c.nt_list = counts(n, "sweep.nt");
            if (auto n = s["nr"]) c.nr_list = counts(n, "sweep.nr");
            if (auto n = s["iters"]) c.iters_list = counts(n, "sweep.iters");
            if (auto n = s["alpha"]) c.alpha_list = doubles(n, "sweep.alpha");
            if (auto n = s["repeats"]) c.repeats = unsigned_value<std::size_t>(n, "sweep.repeats");
        });
        section(root, "undervolt", {"profile", "v_start", "v_stop", "v_step"}, [&](const YAML::Node& s) {
            if (auto n = s["profile"]) c.profile = scalar<std::string>(n, "undervolt.profile");
            if (auto n = s["v_start"]) c.v_start = scalar<double>(n, "undervolt.v_start");
            if (auto n = s["v_stop"]) c.v_stop = scalar<double>(n, "undervolt.v_stop");
            if (auto n = s["v_step"]) c.v_step = scalar<double>(n, "undervolt.v_step");
        });
        if (auto s = root["profiles"]) {
            if (!s.IsMap()) fail(s, "profiles", "must be a mapping of profile name to fields");
            for (const auto& kv : s) load_profile(c, kv.first.as<std::string>(), kv.second);
        }
        section(root, "power", {"p_ref_mw", "v_ref", "f_ref_mhz", "static_mw"}, [&](const YAML::Node& s) {
            if (auto n = s["p_ref_mw"]) c.power.p_ref_mw = scalar<double>(n, "power.p_ref_mw");
            if (auto n = s["v_ref"]) c.power.v_ref = scalar<double>(n, "power.v_ref");
            if (auto n = s["f_ref_mhz"]) c.power.f_ref_mhz = scalar<double>(n, "power.f_ref_mhz");
            if (auto n = s["static_mw"]) c.power.static_mw = scalar<double>(n, "power.static_mw");
        });
        section(root, "ber_snr", {"snr_db"}, [&](const YAML::Node& s) {
            if (auto n = s["snr_db"]) c.snr_list = doubles(n, "ber_snr.snr_db");
        });
        return c;
    }

    /// Rethrows a validation failure with the line of the offending field.
    [[noreturn]] void relocate(const ConfigError& e) const {
        std::string f = e.field();
        while (!f.empty()) {
            auto it = lines_.find(f);
            if (it != lines_.end())
                throw ConfigError(origin_ + ":" + std::to_string(it->second) + ": " + e.what(), e.field());
            const auto dot = f.rfind('.');
            f = dot == std::string::npos ? std::string{} : f.substr(0, dot);
        }
        throw ConfigError(origin_ + ": " + e.what(), e.field());
    }

private:
    [[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& what) const {
        std::string where = origin_;
        if (n.Mark().line >= 0) where += ":" + std::to_string(n.Mark().line + 1);
        throw ConfigError(where + ": " + (field.empty() ? what : "field '" + field + "': " + what), field);
    }

    void note(const YAML::Node& n, const std::string& field) {
        if (n.Mark().line >= 0) lines_[field] = n.Mark().line + 1;
    }

    void allowed(const YAML::Node& map, const std::string& prefix, std::initializer_list<const char*> keys) {
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            const std::string field = prefix.empty() ? key : prefix + "." + key;
            if (!ok.count(key)) fail(kv.first, field, "unknown key");
            note(kv.first, field);
        }
    }

    void section(const YAML::Node& root, const std::string& name, std::initializer_list<const char*> keys,
                 const std::function<void(const YAML::Node&)>& body) {
        auto s = root[name];
        if (!s) return;
        if (!s.IsMap()) fail(s, name, "must be a mapping");
        allowed(s, name, keys);
        body(s);
    }

    template <typename T>
    T scalar(const YAML::Node& n, const std::string& field) {
        note(n, field);
        if (!n.IsScalar()) fail(n, field, "expected a scalar value");
        try {
            return n.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(n, field, "cannot convert '" + n.Scalar() + "'");
        }
    }

    template <typename T>
    T unsigned_value(const YAML::Node& n, const std::string& field) {
        const auto v = scalar<long long>(n, field);
        if (v < 0) fail(n, field, "must be non-negative");
        return static_cast<T>(v);
    }

    // Accepts a scalar, a sequence, or {start, stop, step}.
    std::vector<double> doubles(const YAML::Node& n, const std::string& field) {
        note(n, field);
        std::vector<double> out;
        if (n.IsScalar()) {
            out.push_back(scalar<double>(n, field));
        } else if (n.IsSequence()) {
            for (const auto& e : n) out.push_back(scalar<double>(e, field));
        } else if (n.IsMap()) {
            allowed(n, field, {"start", "stop", "step"});
            if (!n["start"] || !n["stop"] || !n["step"]) fail(n, field, "range needs start, stop and step");
            const double start = scalar<double>(n["start"], field + ".start");
            const double stop = scalar<double>(n["stop"], field + ".stop");
            const double step = scalar<double>(n["step"], field + ".step");
            if (!(step > 0.0)) fail(n["step"], field + ".step", "must be > 0");
            for (std::size_t i = 0;; ++i) {
                const double v = std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9;
                if (v > stop + 1e-12) break;
                out.push_back(v);
            }
        } else {
            fail(n, field, "expected a value, list or range");
        }
        return out;
    }

    std::vector<std::size_t> counts(const YAML::Node& n, const std::string& field) {
        std::vector<std::size_t> out;
        for (double v : doubles(n, field)) {
            if (v < 0 || v != std::floor(v)) fail(n, field, "entries must be non-negative integers");
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

    void load_profile(ExperimentConfig& c, const std::string& name, const YAML::Node& s) {
        const std::string base = "profiles." + name;
        if (!s.IsMap()) fail(s, base, "must be a mapping");
        allowed(s, base, {"freq_mhz", "v_default", "v_poff", "v_crash", "p_max", "gamma"});
        auto it = std::find_if(c.profiles.begin(), c.profiles.end(), [&](const auto& p) { return p.name == name; });
        if (it == c.profiles.end()) {
            faults::VoltageProfile p;
            p.name = name;
            c.profiles.push_back(p);
            it = c.profiles.end() - 1;
        }
        if (auto n = s["freq_mhz"]) it->freq_mhz = scalar<double>(n, base + ".freq_mhz");
        if (auto n = s["v_default"]) it->v_default = scalar<double>(n, base + ".v_default");
        if (auto n = s["v_poff"]) it->v_poff = scalar<double>(n, base + ".v_poff");
        if (auto n = s["v_crash"]) it->v_crash = scalar<double>(n, base + ".v_crash");
        if (auto n = s["p_max"]) it->p_max = scalar<double>(n, base + ".p_max");
        if (auto n = s["gamma"]) it->gamma = scalar<double>(n, base + ".gamma");
    }

    std::string origin_;
    std::map<std::string, int> lines_;
};

ExperimentConfig parse(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
    }
    Loader loader(origin);
    ExperimentConfig c = loader.load(root);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        loader.relocate(e);
    }
    return c;
}

}  // namespace

ExperimentConfig load_string(const std::string& text, const std::string& origin) { return parse(text, origin); }

ExperimentConfig load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

}  // namespace ftmimo::config
