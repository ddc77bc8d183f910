#include "ftmimo/detector.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ftmimo::detector {

using abft::ChecksumMatrix;
using abft::Orientation;

void DetectorConfig::validate() const {
    if (nt < 1) throw std::invalid_argument("DetectorConfig: nt must be >= 1");
    if (nr < nt) throw std::invalid_argument("DetectorConfig: nr must be >= nt");
    if (iters < 1) throw std::invalid_argument("DetectorConfig: iters must be >= 1");
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("DetectorConfig: sigma2 must be finite and non-negative");
    tolerance.validate();
}

const char* to_string(Status s) noexcept {
    switch (s) {
        case Status::Ok: return "ok";
        case Status::ErrorPreprocessing: return "error-preprocessing";
        case Status::ErrorIterative: return "error-iterative";
    }
    return "?";
}

namespace {

void check_dims(const ComplexMatrix& h, std::span<const Complex> y, const DetectorConfig& cfg) {
    cfg.validate();
    if (h.rows() != cfg.nr || h.cols() != cfg.nt)
        throw std::invalid_argument("detector: H is " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                                    ", config expects " + std::to_string(cfg.nr) + "x" + std::to_string(cfg.nt));
    if (y.size() != cfg.nr) throw std::invalid_argument("detector: y length does not match nr");
}

RealVector reciprocal_diagonal(const RealMatrix& a) {
    RealVector d(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (a(i, i) == 0.0)
            throw SingularInitialization("newton_init: zero diagonal entry at " + std::to_string(i));
        d[i] = 1.0 / a(i, i);
    }
    return d;
}

}  // namespace

PreprocessedSystem preprocess(const ComplexMatrix& h, std::span<const Complex> y, const DetectorConfig& cfg,
                              MatrixBackend& backend) {
    check_dims(h, y, cfg);
    const RealMatrix hr = lift_complex_matrix(h);
    const RealMatrix yr = column_matrix(lift_complex_vector(y));
    const RealMatrix h_abft = abft::encode_row_checksum(transpose(hr)).augmented();

    const std::size_t n = 2 * cfg.nt;
    RealMatrix reg(n + 1, n);  // sigma2 [I; 1^T]
    for (std::size_t j = 0; j < n; ++j) {
        reg(j, j) = cfg.sigma2;
        reg(n, j) = cfg.sigma2;
    }
    PreprocessedSystem sys;
    sys.a_aug = backend.add(backend.multiply(h_abft, hr), reg);
    sys.b_aug = column_vector(backend.multiply(h_abft, yr));
    return sys;
}

PreprocessingCheck check_preprocessing(const PreprocessedSystem& sys, const abft::TolerancePolicy& tol) {
    PreprocessingCheck out;
    out.gram = abft::verify(ChecksumMatrix::from_augmented(sys.a_aug, Orientation::RowAppended), tol);
    out.matched_filter = abft::verify_vector(sys.b_aug, tol);
    out.status = out.gram.ok && out.matched_filter.ok ? Status::Ok : Status::ErrorPreprocessing;
    return out;
}

IterState newton_init(const PreprocessedSystem& sys) {
    const std::size_t n = sys.a_aug.cols();
    if (sys.a_aug.rows() != n + 1) throw std::invalid_argument("newton_init: a_aug must be (n+1) x n");
    IterState s;
    s.a = block(sys.a_aug, 0, 0, n, n);
    const RealVector d = reciprocal_diagonal(s.a);
    s.inverse = RealMatrix(n, n + 1);
    s.e = RealMatrix(n, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        s.inverse(i, i) = d[i];
        s.inverse(i, n) = d[i];
        s.e(i, i) = 2.0;
        s.e(i, n) = 2.0;
    }
    return s;
}

IterState newton_step(const IterState& state, MatrixBackend& backend) {
    const std::size_t n = state.a.rows();
    if (state.a.cols() != n || state.inverse.rows() != n || state.inverse.cols() != n + 1 ||
        state.e.rows() != n || state.e.cols() != n + 1)
        throw std::invalid_argument("newton_step: inconsistent state shapes");
    // Only the left factor is truncated; the right factor keeps the checksum
    // column, so the product comes out with refreshed row sums.
    const RealMatrix left = block(state.inverse, 0, 0, n, n);
    const RealMatrix correction = backend.subtract(state.e, backend.multiply(state.a, state.inverse));
    return {state.a, backend.multiply(left, correction), state.e};
}

SolveResult solve_and_check(const IterState& state, const PreprocessedSystem& sys,
                            const abft::TolerancePolicy& tol, MatrixBackend& backend) {
    const std::size_t n = state.a.rows();
    if (sys.b_aug.size() != n + 1) throw std::invalid_argument("solve_and_check: b_aug length mismatch");
    // [X_data; checksum column transposed]
    RealMatrix stacked(n + 1, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) stacked(i, j) = state.inverse(i, j);
        stacked(n, i) = state.inverse(i, n);
    }
    const RealMatrix b_data =
        column_matrix(std::span<const double>(sys.b_aug).first(n));
    SolveResult r;
    r.x = column_vector(backend.multiply(stacked, b_data));
    r.report = abft::verify_vector(r.x, tol);
    r.status = r.report.ok ? Status::Ok : Status::ErrorIterative;
    return r;
}

PipelineTrace trace_detect(const ComplexMatrix& h, std::span<const Complex> y, const DetectorConfig& cfg,
                           MatrixBackend& backend) {
    PipelineTrace t;
    const PreprocessedSystem sys = preprocess(h, y, cfg, backend);
    t.diagnostics.preprocessing = check_preprocessing(sys, cfg.tolerance);
    IterState state;
    try {
        state = newton_init(sys);
    } catch (const SingularInitialization&) {
        // Only reachable from corrupted preprocessing output.
        if (t.diagnostics.preprocessing.status == Status::Ok) throw;
        t.status = Status::ErrorPreprocessing;
        t.raw.assign(2 * cfg.nt + 1, std::numeric_limits<double>::quiet_NaN());
        return t;
    }
    for (std::size_t k = 0; k < cfg.iters; ++k) state = newton_step(state, backend);
    SolveResult solved = solve_and_check(state, sys, cfg.tolerance, backend);
    t.diagnostics.output = solved.report;
    t.status = t.diagnostics.preprocessing.status != Status::Ok ? Status::ErrorPreprocessing : solved.status;
    t.raw = std::move(solved.x);
    return t;
}

DetectionOutcome detect(const ComplexMatrix& h, std::span<const Complex> y, const DetectorConfig& cfg,
                        MatrixBackend& backend) {
    DetectionOutcome out;
    if (!cfg.abft_enabled) {
        out.x_hat = detect_baseline(h, y, cfg, backend);
        return out;
    }
    const PreprocessedSystem sys = preprocess(h, y, cfg, backend);
    out.diagnostics.preprocessing = check_preprocessing(sys, cfg.tolerance);
    if (out.diagnostics.preprocessing.status != Status::Ok) {
        out.status = Status::ErrorPreprocessing;
        return out;
    }
    IterState state = newton_init(sys);
    for (std::size_t k = 0; k < cfg.iters; ++k) state = newton_step(state, backend);
    SolveResult solved = solve_and_check(state, sys, cfg.tolerance, backend);
    out.diagnostics.output = solved.report;
    out.status = solved.status;
    if (out.status == Status::Ok)
        out.x_hat = unlift_vector(std::span<const double>(solved.x).first(2 * cfg.nt));
    return out;
}

ComplexVector detect_baseline(const ComplexMatrix& h, std::span<const Complex> y, const DetectorConfig& cfg,
                              MatrixBackend& backend) {
    check_dims(h, y, cfg);
    const std::size_t n = 2 * cfg.nt;
    const RealMatrix hr = lift_complex_matrix(h);
    const RealMatrix hrt = transpose(hr);
    const RealMatrix yr = column_matrix(lift_complex_vector(y));

    RealMatrix reg(n, n);
    for (std::size_t j = 0; j < n; ++j) reg(j, j) = cfg.sigma2;
    const RealMatrix a = backend.add(backend.multiply(hrt, hr), reg);
    const RealMatrix b = backend.multiply(hrt, yr);

    const RealVector d = reciprocal_diagonal(a);
    RealMatrix x(n, n);
    RealMatrix e(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, i) = d[i];
        e(i, i) = 2.0;
    }
    for (std::size_t k = 0; k < cfg.iters; ++k) x = backend.multiply(x, backend.subtract(e, backend.multiply(a, x)));
    return unlift_vector(column_vector(backend.multiply(x, b)));
}

}  // namespace ftmimo::detector
