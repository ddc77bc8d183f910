#include "ftmimo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "ftmimo/accel.hpp"
#include "ftmimo/costmodel.hpp"
#include "ftmimo/detector.hpp"
#include "ftmimo/linksim.hpp"

namespace ftmimo::experiments {

namespace {

using config::ExperimentConfig;
using csv::format_double;
using csv::format_uint;

constexpr std::uint64_t kTimingStream = 0x7469;

std::string fmt_size(std::size_t v) { return format_uint(v); }

detector::DetectorConfig detector_config(const ExperimentConfig& cfg, std::size_t nt, std::size_t nr,
                                         std::size_t iters) {
    detector::DetectorConfig d;
    d.nt = nt;
    d.nr = nr;
    d.iters = iters;
    d.tolerance.epsilon_abs = cfg.epsilon_abs;
    d.tolerance.epsilon_rel = cfg.epsilon_rel;
    return d;
}

linksim::TrialConfig trial_config(const ExperimentConfig& cfg) {
    linksim::TrialConfig t;
    t.nt = cfg.nt;
    t.nr = cfg.nr;
    t.snr_db = cfg.snr_db;
    t.scheme = cfg.scheme;
    t.trials = cfg.trials;
    t.detector = detector_config(cfg, cfg.nt, cfg.nr, cfg.iters);
    t.tile.edge = cfg.tile;
    t.bit_distribution = cfg.bit_weights;
    t.seed = cfg.seed;
    return t;
}

struct Shape {
    std::size_t nt, nr, iters;
};

std::vector<Shape> shapes(const ExperimentConfig& cfg) {
    auto nts = cfg.nt_list, nrs = cfg.nr_list, ks = cfg.iters_list;
    for (auto* v : {&nts, &nrs, &ks}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    std::vector<Shape> out;
    for (auto nt : nts)
        for (auto nr : nrs)
            for (auto k : ks)
                if (nr >= nt) out.push_back({nt, nr, k});
    return out;
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double cell(const csv::Table& t, std::size_t row, const std::string& col) {
    const auto& s = t.rows()[row][t.column(col)];
    if (s.empty() || s == "nan") return std::nan("");
    return std::stod(s);
}

svg::Series series_of(const csv::Table& t, const std::string& name, const std::string& xcol,
                      const std::string& ycol, const std::function<bool(std::size_t)>& keep = {}) {
    svg::Series s{name, {}, {}};
    for (std::size_t r = 0; r < t.rows().size(); ++r) {
        if (keep && !keep(r)) continue;
        s.x.push_back(cell(t, r, xcol));
        s.y.push_back(cell(t, r, ycol));
    }
    return s;
}

}  // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
}

std::string provenance(const ExperimentConfig& cfg) {
    return "ftmimo experiment=" + std::string(config::to_string(cfg.experiment)) +
           " config_hash=" + cfg.hash() + " seed=" + format_uint(cfg.seed);
}

SweepResult run_overhead_sweep(const ExperimentConfig& cfg) {
    const auto points = shapes(cfg);
    const auto alphas = sorted_unique(cfg.alpha_list);
    const accel::TileSpec spec{cfg.tile};

    std::vector<std::string> cols{"nt", "nr", "iters"};
    for (double a : alphas) cols.push_back("flop_ratio_alpha_" + format_double(a));
    for (const char* c : {"tile_ops_baseline", "tile_ops_abft", "tile_ops_abft_measured", "tile_ratio",
                          "tile_mul_ratio", "counters_match"})
        cols.emplace_back(c);
    SweepResult res{csv::Table(cols)};
    res.table.set_comment(provenance(cfg));
    csv::Table timing({"nt", "nr", "iters", "repeats", "seconds_baseline", "seconds_abft", "wall_ratio"});
    timing.set_comment(provenance(cfg) + " (wall-clock, not reproducible)");

    std::vector<std::vector<std::string>> rows(points.size()), trows(points.size());
    parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
        const auto [nt, nr, k] = points[i];
        Rng rng(derive_seed(cfg.seed, {kTimingStream, nt, nr, k}));
        const ComplexMatrix h = linksim::gen_channel(nr, nt, rng);
        ComplexVector y(nr);
        for (auto& v : y) v = Complex(rng.normal(), rng.normal());
        auto dcfg = detector_config(cfg, nt, nr, k);
        dcfg.sigma2 = linksim::noise_variance(cfg.snr_db, nt);

        const auto over = costmodel::tile_overhead(nt, nr, k, spec);
        accel::AccelEmulator emu(spec);
        (void)detector::detect(h, y, dcfg, emu);
        const auto measured = emu.snapshot_counters();

        std::vector<std::string> r{fmt_size(nt), fmt_size(nr), fmt_size(k)};
        for (double a : alphas) r.push_back(format_double(costmodel::overhead_ratio(nt, nr, k, a)));
        r.push_back(format_uint(over.baseline.total()));
        r.push_back(format_uint(over.checksummed.total()));
        r.push_back(format_uint(measured.total()));
        r.push_back(format_double(over.total_ratio));
        r.push_back(format_double(over.mul_ratio));
        r.push_back(measured == over.checksummed ? "1" : "0");
        rows[i] = std::move(r);

        TrustedBackend trusted;
        using clock = std::chrono::steady_clock;
        const auto t0 = clock::now();
        for (std::size_t rep = 0; rep < cfg.repeats; ++rep) (void)detector::detect_baseline(h, y, dcfg, trusted);
        const auto t1 = clock::now();
        for (std::size_t rep = 0; rep < cfg.repeats; ++rep) (void)detector::detect(h, y, dcfg, trusted);
        const auto t2 = clock::now();
        const double tb = std::chrono::duration<double>(t1 - t0).count();
        const double ta = std::chrono::duration<double>(t2 - t1).count();
        trows[i] = {fmt_size(nt), fmt_size(nr), fmt_size(k), fmt_size(cfg.repeats), format_double(tb),
                    format_double(ta), format_double(tb > 0 ? ta / tb : std::nan(""))};
    });
    for (auto& r : rows) res.table.add_row(std::move(r));
    for (auto& r : trows) timing.add_row(std::move(r));
    res.timing = std::move(timing);

    if (!points.empty()) {
        const auto nr0 = points.front().nr, k0 = points.front().iters;
        auto keep = [&](std::size_t r) {
            return cell(res.table, r, "nr") == static_cast<double>(nr0) &&
                   cell(res.table, r, "iters") == static_cast<double>(k0);
        };
        svg::Chart c{"Checksum overhead (Nr=" + fmt_size(nr0) + ", K=" + fmt_size(k0) + ")", "Nt",
                     "protected / baseline - 1", false, {}};
        auto tiles = series_of(res.table, "tile ops", "nt", "tile_ratio", keep);
        for (auto& v : tiles.y) v -= 1.0;
        c.series.push_back(std::move(tiles));
        for (double a : alphas)
            c.series.push_back(series_of(res.table, "FLOPs, alpha=" + format_double(a), "nt",
                                         "flop_ratio_alpha_" + format_double(a), keep));
        res.plots.push_back({"overhead", std::move(c)});
    }
    return res;
}

SweepResult run_undervolt_sweep(const ExperimentConfig& cfg) {
    const auto& profile = cfg.selected_profile();
    auto volts = cfg.voltages();
    const double p_default = faults::power(profile.v_default, profile.freq_mhz, cfg.power);

    SweepResult res{csv::Table({"voltage", "freq_mhz", "p_flip", "power_mw", "power_saving", "trials", "bits_total",
                                "faults_injected", "abft_detections", "flagged_trials", "reruns",
                                "false_positives", "false_negatives", "harmful_false_negatives",
                                "max_false_negative_deviation", "ber_uncorrected", "ber_corrected",
                                "ber_reference", "ber_exact", "status"})};
    res.table.set_comment(provenance(cfg) + " profile=" + profile.name);

    struct Point {
        std::vector<std::string> row;
        bool crashed = false;
    };
    std::vector<Point> out(volts.size());
    parallel_for(volts.size(), cfg.threads, [&](std::size_t i) {
        const double v = volts[i];
        const double pw = faults::power(v, profile.freq_mhz, cfg.power);
        if (v <= profile.v_crash) {
            std::vector<std::string> r(res.table.columns().size());
            r[0] = format_double(v);
            r[1] = format_double(profile.freq_mhz);
            r.back() = "crash";
            out[i] = {std::move(r), true};
            return;
        }
        auto t = trial_config(cfg);
        t.backend = linksim::BackendChoice::Emulated;
        t.voltage = v;
        t.profile = profile;
        linksim::BerReport b;
        try {
            b = linksim::run_trials(t);
        } catch (const faults::DeviceCrash&) {
            std::vector<std::string> r(res.table.columns().size());
            r[0] = format_double(v);
            r[1] = format_double(profile.freq_mhz);
            r.back() = "crash";
            out[i] = {std::move(r), true};
            return;
        }
        out[i].row = {format_double(v),
                      format_double(profile.freq_mhz),
                      format_double(b.p_flip),
                      format_double(pw),
                      format_double(1.0 - pw / p_default),
                      fmt_size(cfg.trials),
                      format_uint(b.bits_total),
                      format_uint(b.faults_injected),
                      format_uint(b.abft_detections),
                      format_uint(b.flagged_trials),
                      format_uint(b.reruns),
                      format_uint(b.false_positives),
                      format_uint(b.false_negatives),
                      format_uint(b.harmful_false_negatives),
                      format_double(b.max_false_negative_deviation),
                      format_double(b.ber_uncorrected()),
                      format_double(b.ber),
                      format_double(b.ber_reference()),
                      format_double(b.ber_exact()),
                      "ok"};
    });
    // Voltages are already in sweep order (descending); the sweep stops at
    // the first crash.
    for (auto& p : out) {
        res.table.add_row(std::move(p.row));
        if (p.crashed) {
            res.crashed = true;
            break;
        }
    }

    auto ok = [&](std::size_t r) { return res.table.rows()[r].back() == "ok"; };
    svg::Chart ber{"BER vs supply (" + profile.name + ")", "voltage [V]", "BER", true, {}};
    ber.series.push_back(series_of(res.table, "uncorrected", "voltage", "ber_uncorrected", ok));
    ber.series.push_back(series_of(res.table, "with reruns", "voltage", "ber_corrected", ok));
    ber.series.push_back(series_of(res.table, "fault-free", "voltage", "ber_reference", ok));
    res.plots.push_back({"ber", std::move(ber)});
    svg::Chart det{"Checksum detections (" + profile.name + ")", "voltage [V]", "mismatching entries", false, {}};
    det.series.push_back(series_of(res.table, "detections", "voltage", "abft_detections", ok));
    res.plots.push_back({"detections", std::move(det)});
    svg::Chart pw{"Modeled power (" + profile.name + ")", "voltage [V]", "mW", false, {}};
    pw.series.push_back(series_of(res.table, "power", "voltage", "power_mw"));
    res.plots.push_back({"power", std::move(pw)});
    return res;
}

SweepResult run_ber_snr(const ExperimentConfig& cfg) {
    const auto snrs = sorted_unique(cfg.snr_list);
    SweepResult res{csv::Table({"snr_db", "sigma2", "trials", "bits_total", "bit_errors", "ber", "ber_exact",
                                "abft_detections"})};
    res.table.set_comment(provenance(cfg) + " scheme=" + std::string(linksim::to_string(cfg.scheme)));
    std::vector<std::vector<std::string>> rows(snrs.size());
    parallel_for(snrs.size(), cfg.threads, [&](std::size_t i) {
        auto t = trial_config(cfg);
        t.snr_db = snrs[i];
        const auto b = linksim::run_trials(t);
        rows[i] = {format_double(snrs[i]),
                   format_double(linksim::noise_variance(snrs[i], cfg.nt)),
                   fmt_size(cfg.trials),
                   format_uint(b.bits_total),
                   format_uint(b.bit_errors),
                   format_double(b.ber),
                   format_double(b.ber_exact()),
                   format_uint(b.abft_detections)};
    });
    for (auto& r : rows) res.table.add_row(std::move(r));
    svg::Chart c{"BER vs SNR", "SNR [dB]", "BER", true, {}};
    c.series.push_back(series_of(res.table, "Newton, K=" + fmt_size(cfg.iters), "snr_db", "ber"));
    c.series.push_back(series_of(res.table, "exact solve", "snr_db", "ber_exact"));
    res.plots.push_back({"ber", std::move(c)});
    return res;
}

SweepResult run_cost_table(const ExperimentConfig& cfg) {
    const auto alphas = sorted_unique(cfg.alpha_list);
    const accel::TileSpec spec{cfg.tile};
    SweepResult res{csv::Table({"nt", "nr", "iters", "alpha", "gram", "matched_filter", "iterations", "backsub",
                                "flops_mimo", "flops_overhead", "overhead_ratio", "tile_ops_baseline",
                                "tile_ops_abft", "tile_ratio"})};
    res.table.set_comment(provenance(cfg));
    for (const auto& [nt, nr, k] : shapes(cfg)) {
        const auto tiles = costmodel::tile_overhead(nt, nr, k, spec);
        for (double a : alphas) {
            const auto m = costmodel::flops_mimo(nt, nr, k, a);
            const double o = costmodel::flops_overhead(nt, nr, k, a);
            res.table.add_row({fmt_size(nt), fmt_size(nr), fmt_size(k), format_double(a), format_double(m.gram),
                               format_double(m.matched_filter), format_double(m.iterations),
                               format_double(m.backsub), format_double(m.total), format_double(o),
                               format_double(o / m.total), format_uint(tiles.baseline.total()),
                               format_uint(tiles.checksummed.total()), format_double(tiles.total_ratio)});
        }
    }
    if (!res.table.rows().empty()) {
        const double nr0 = cell(res.table, 0, "nr"), k0 = cell(res.table, 0, "iters");
        svg::Chart c{"FLOP overhead ratio", "Nt", "overhead / baseline", false, {}};
        for (double a : alphas)
            c.series.push_back(series_of(res.table, "alpha=" + format_double(a), "nt", "overhead_ratio",
                                         [&](std::size_t r) {
                                             return cell(res.table, r, "alpha") == a &&
                                                    cell(res.table, r, "nr") == nr0 &&
                                                    cell(res.table, r, "iters") == k0;
                                         }));
        res.plots.push_back({"cost", std::move(c)});
    }
    return res;
}

SweepResult run(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case config::Experiment::OverheadSweep: return run_overhead_sweep(cfg);
        case config::Experiment::UndervoltSweep: return run_undervolt_sweep(cfg);
        case config::Experiment::BerSnr: return run_ber_snr(cfg);
        case config::Experiment::CostTable: return run_cost_table(cfg);
    }
    throw std::logic_error("unknown experiment");
}

std::vector<std::string> write_outputs(const SweepResult& result, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path out(cfg.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    const fs::path stem = out.parent_path() / out.stem();

    std::vector<std::string> written;
    auto emit = [&](const fs::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << text;
        written.push_back(p.string());
    };
    emit(out, result.table.str());
    if (result.timing) emit(stem.string() + "_timing.csv", result.timing->str());
    if (cfg.plot)
        for (const auto& p : result.plots) emit(stem.string() + "_" + p.suffix + ".svg", svg::render(p.chart));
    return written;
}

}  // namespace ftmimo::experiments
