#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>

#include "ftmimo/abft.hpp"
#include "ftmimo/backend.hpp"
#include "ftmimo/linalg.hpp"

namespace ftmimo::detector {

/// Raised when the Newton seed 1/diag(A) cannot be formed.
class SingularInitialization : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DetectorConfig {
    std::size_t nt = 8;      ///< users (complex columns of H)
    std::size_t nr = 64;     ///< receive antennas (complex rows of H)
    double sigma2 = 0.0;     ///< diagonal regularizer, linear noise power
    std::size_t iters = 3;   ///< Newton iterations, fixed count
    abft::TolerancePolicy tolerance{};
    bool abft_enabled = true;

    void validate() const;
};

enum class Status { Ok, ErrorPreprocessing, ErrorIterative };
const char* to_string(Status s) noexcept;

/// Regularized Gram matrix and matched filter, each carrying a checksum row
/// (a_aug is (2Nt+1) x 2Nt, b_aug has 2Nt+1 entries).
struct PreprocessedSystem {
    RealMatrix a_aug;
    RealVector b_aug;
};

struct PreprocessingCheck {
    Status status = Status::Ok;
    abft::VerificationReport gram;
    abft::VerificationReport matched_filter;
};

/// Newton iteration state. `inverse` is 2Nt x (2Nt+1): the current inverse
/// estimate with a checksum column holding its row sums. `e` is 2[I 1].
struct IterState {
    RealMatrix a;
    RealMatrix inverse;
    RealMatrix e;
};

struct SolveResult {
    RealVector x;  ///< 2Nt data entries followed by their checksum
    Status status = Status::Ok;
    abft::VerificationReport report;
};

struct Diagnostics {
    PreprocessingCheck preprocessing;
    std::optional<abft::VerificationReport> output;  // absent if the stage was not reached
};

struct DetectionOutcome {
    Status status = Status::Ok;
    std::optional<ComplexVector> x_hat;  ///< present only when status == Ok
    Diagnostics diagnostics;
};

PreprocessedSystem preprocess(const ComplexMatrix& h, std::span<const Complex> y,
                              const DetectorConfig& cfg, MatrixBackend& backend);

PreprocessingCheck check_preprocessing(const PreprocessedSystem& sys, const abft::TolerancePolicy& tol);

IterState newton_init(const PreprocessedSystem& sys);

/// inverse <- inverse(:, data) * (E - A * inverse)
IterState newton_step(const IterState& state, MatrixBackend& backend);

SolveResult solve_and_check(const IterState& state, const PreprocessedSystem& sys,
                            const abft::TolerancePolicy& tol, MatrixBackend& backend);

/// Checksum-protected detection. Returns an error status without an
/// estimate as soon as a check fails.
DetectionOutcome detect(const ComplexMatrix& h, std::span<const Complex> y, const DetectorConfig& cfg,
                        MatrixBackend& backend);

/// Same arithmetic as detect() without checksums or checks.
ComplexVector detect_baseline(const ComplexMatrix& h, std::span<const Complex> y, const DetectorConfig& cfg,
                              MatrixBackend& backend);

/// Full run of the protected pipeline that never stops early. `status` is
/// what detect() would have returned; `raw` is the lifted output with its
/// checksum even when a check failed (NaN if initialization was impossible).
struct PipelineTrace {
    Status status = Status::Ok;
    Diagnostics diagnostics;
    RealVector raw;
};

PipelineTrace trace_detect(const ComplexMatrix& h, std::span<const Complex> y, const DetectorConfig& cfg,
                           MatrixBackend& backend);

}  // namespace ftmimo::detector
