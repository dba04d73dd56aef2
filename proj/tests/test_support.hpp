#pragma once

#include <cmath>
#include <functional>

#include "oaae/linalg.hpp"
#include "oaae/rng.hpp"
#include "oaae/tensor.hpp"

namespace oaae::testsupport {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.normal(0.0, scale);
    return m;
}

inline Matrix householder(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    double nrm = 0.0;
    for (double& x : v) {
        x = rng.normal();
        nrm += x * x;
    }
    nrm = std::sqrt(nrm);
    for (double& x : v) x /= nrm;
    Matrix h = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            h(i, j) -= 2.0 * v[i] * v[j];
    return h;
}

inline Matrix random_orthogonal(Rng& rng, std::size_t n) {
    return householder(rng, n) * householder(rng, n);
}

// Central finite differences of a scalar function of a matrix; the
// independent oracle for everything gradient-shaped.
inline Matrix finite_difference(const std::function<double(const Matrix&)>& f, Matrix point,
                                double h) {
    Matrix g(point.rows(), point.cols());
    for (std::size_t i = 0; i < point.rows(); ++i)
        for (std::size_t j = 0; j < point.cols(); ++j) {
            const double keep = point(i, j);
            point(i, j) = keep + h;
            const double up = f(point);
            point(i, j) = keep - h;
            const double dn = f(point);
            point(i, j) = keep;
            g(i, j) = (up - dn) / (2.0 * h);
        }
    return g;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

inline Tensor4 random_tensor(Rng& rng, int n, int c, int h, int w, double scale = 1.0) {
    Tensor4 t(n, c, h, w);
    for (double& v : t.data) v = rng.normal(0.0, scale);
    return t;
}

// Singular values all above `floor` and pairwise separated by `gap`.
inline bool spectrum_is_clean(const Matrix& m, double floor, double gap) {
    auto r = svd(m);
    for (std::size_t i = 0; i < r.singular_values.size(); ++i) {
        if (r.singular_values[i] < floor) return false;
        if (i + 1 < r.singular_values.size() &&
            r.singular_values[i] - r.singular_values[i + 1] < gap)
            return false;
    }
    return true;
}

} // namespace oaae::testsupport
