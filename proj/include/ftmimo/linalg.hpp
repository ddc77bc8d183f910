#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ftmimo {

using Complex = std::complex<double>;

/// Raised when a linear system has no unique solution.
class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix.
template <typename T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("Matrix: entry count does not match shape");
    }
    Matrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<T> entries() noexcept { return data_; }
    std::span<const T> entries() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;
using RealVector = std::vector<double>;
using ComplexVector = std::vector<Complex>;

// Complex -> real lifting.

/// [[Re H, -Im H], [Im H, Re H]]
RealMatrix lift_complex_matrix(const ComplexMatrix& h);
/// [Re y; Im y]
RealVector lift_complex_vector(std::span<const Complex> y);
/// out[k] = x[k] + i x[n/2 + k]. Throws std::invalid_argument on odd length.
ComplexVector unlift_vector(std::span<const double> x);

// Trusted software arithmetic. Never faulted.

RealMatrix trusted_matmul(const RealMatrix& a, const RealMatrix& b);
RealMatrix trusted_add(const RealMatrix& a, const RealMatrix& b);
RealMatrix trusted_sub(const RealMatrix& a, const RealMatrix& b);

RealMatrix transpose(const RealMatrix& m);
RealMatrix column_matrix(std::span<const double> v);
RealVector column_vector(const RealMatrix& m);

/// Copy of rows [row0, row0 + nrows) and columns [col0, col0 + ncols).
RealMatrix block(const RealMatrix& m, std::size_t row0, std::size_t col0,
                 std::size_t nrows, std::size_t ncols);

double max_abs(std::span<const double> v);
bool all_finite(std::span<const double> v);
bool all_finite(std::span<const Complex> v);

/// Solves a x = b with partial-pivot Gaussian elimination.
RealVector solve_linear(RealMatrix a, RealVector b);

/// Regularized least-squares reference detector: solves
/// (H_r^T H_r + sigma2 I) x_r = H_r^T y_r in the lifted domain and unlifts.
ComplexVector exact_detect(const ComplexMatrix& h, std::span<const Complex> y, double sigma2);

}  // namespace ftmimo
