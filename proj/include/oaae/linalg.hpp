#pragma once

#include <cstddef>
#include <vector>

#include "oaae/errors.hpp"

namespace oaae {

// Dense real matrix, row-major, double precision. Substrate for latent
// batches and for the SVD / nuclear-norm machinery.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    Matrix transposed() const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double s);

    double frobenius_norm() const;
    double max_abs() const;
    bool all_finite() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Thin SVD a = u * diag(s) * v^T with r = min(rows, cols).
// u: rows x r, v: cols x r, both with orthonormal columns; s nonincreasing, >= 0.
struct SvdResult {
    Matrix u;
    std::vector<double> singular_values;
    Matrix v;
};

// One-sided Jacobi SVD. Deterministic for identical input bytes: fixed sweep
// order, fixed thresholds, and a sign convention that makes the largest-
// magnitude entry of every u column nonnegative. Singular values below
// 1e-12 * s_max are clamped to exact zero.
// Throws DecompositionError on empty/non-finite input or if the sweep cap is hit.
SvdResult svd(const Matrix& a);

// Sum of singular values.
double nuclear_norm(const Matrix& a);

// Projected subgradient of the nuclear norm: u1 * v1^T restricted to the
// singular triplets with singular value strictly greater than delta.
// Returns the zero matrix when nothing survives the threshold.
Matrix nuclear_norm_subgradient(const Matrix& a, double delta);

} // namespace oaae
