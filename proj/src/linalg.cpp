#include "ftmimo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace ftmimo {

namespace {

void require_same_shape(const RealMatrix& a, const RealMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace

RealMatrix lift_complex_matrix(const ComplexMatrix& h) {
    if (!all_finite(h.entries())) throw std::invalid_argument("lift_complex_matrix: non-finite entry");
    const std::size_t m = h.rows();
    const std::size_t n = h.cols();
    RealMatrix out(2 * m, 2 * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex z = h(i, j);
            out(i, j) = z.real();
            out(i, n + j) = -z.imag();
            out(m + i, j) = z.imag();
            out(m + i, n + j) = z.real();
        }
    }
    return out;
}

RealVector lift_complex_vector(std::span<const Complex> y) {
    if (!all_finite(y)) throw std::invalid_argument("lift_complex_vector: non-finite entry");
    const std::size_t n = y.size();
    RealVector out(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = y[k].real();
        out[n + k] = y[k].imag();
    }
    return out;
}

ComplexVector unlift_vector(std::span<const double> x) {
    if (x.size() % 2 != 0) throw std::invalid_argument("unlift_vector: odd length");
    const std::size_t n = x.size() / 2;
    ComplexVector out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = Complex(x[k], x[n + k]);
    return out;
}

RealMatrix trusted_matmul(const RealMatrix& a, const RealMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("trusted_matmul: inner dimension mismatch");
    RealMatrix c(a.rows(), b.cols());
    // Accumulation runs over the inner index in ascending order, starting from +0.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < a.cols(); ++l) acc += a(i, l) * b(l, j);
            c(i, j) = acc;
        }
    }
    return c;
}

RealMatrix trusted_add(const RealMatrix& a, const RealMatrix& b) {
    require_same_shape(a, b, "trusted_add");
    RealMatrix c(a.rows(), a.cols());
    auto ca = a.entries();
    auto cb = b.entries();
    auto cc = c.entries();
    for (std::size_t k = 0; k < cc.size(); ++k) cc[k] = ca[k] + cb[k];
    return c;
}

RealMatrix trusted_sub(const RealMatrix& a, const RealMatrix& b) {
    require_same_shape(a, b, "trusted_sub");
    RealMatrix c(a.rows(), a.cols());
    auto ca = a.entries();
    auto cb = b.entries();
    auto cc = c.entries();
    for (std::size_t k = 0; k < cc.size(); ++k) cc[k] = ca[k] - cb[k];
    return c;
}

RealMatrix transpose(const RealMatrix& m) {
    RealMatrix t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

RealMatrix column_matrix(std::span<const double> v) {
    return RealMatrix(v.size(), 1, RealVector(v.begin(), v.end()));
}

RealVector column_vector(const RealMatrix& m) {
    if (m.cols() != 1) throw std::invalid_argument("column_vector: matrix has more than one column");
    return RealVector(m.entries().begin(), m.entries().end());
}

RealMatrix block(const RealMatrix& m, std::size_t row0, std::size_t col0,
                 std::size_t nrows, std::size_t ncols) {
    if (row0 + nrows > m.rows() || col0 + ncols > m.cols())
        throw std::out_of_range("block: range exceeds matrix");
    RealMatrix out(nrows, ncols);
    for (std::size_t i = 0; i < nrows; ++i)
        for (std::size_t j = 0; j < ncols; ++j) out(i, j) = m(row0 + i, col0 + j);
    return out;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(std::span<const Complex> v) {
    return std::all_of(v.begin(), v.end(), [](const Complex& z) {
        return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
}

RealVector solve_linear(RealMatrix a, RealVector b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_linear: shape mismatch");
    const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                        std::max(max_abs(a.entries()), std::numeric_limits<double>::min());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (!(std::abs(a(piv, k)) > tiny)) throw SingularMatrixError("solve_linear: singular system");
        if (piv != k) {
            std::swap_ranges(a.row(k).begin(), a.row(k).end(), a.row(piv).begin());
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    RealVector x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
        x[k] = s / a(k, k);
    }
    return x;
}

ComplexVector exact_detect(const ComplexMatrix& h, std::span<const Complex> y, double sigma2) {
    if (y.size() != h.rows()) throw std::invalid_argument("exact_detect: y length does not match H");
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("exact_detect: sigma2 must be finite and non-negative");
    const RealMatrix hr = lift_complex_matrix(h);
    const RealMatrix hrt = transpose(hr);
    RealMatrix gram = trusted_matmul(hrt, hr);
    for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += sigma2;
    const RealVector yr = lift_complex_vector(y);
    RealVector mf = column_vector(trusted_matmul(hrt, column_matrix(yr)));
    return unlift_vector(solve_linear(std::move(gram), std::move(mf)));
}

}  // namespace ftmimo
