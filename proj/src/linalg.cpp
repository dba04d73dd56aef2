#include "oaae/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oaae {

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            t(c, r) = (*this)(r, c);
    return t;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_)
        throw NumericError("matrix multiply: inner dimensions disagree");
    Matrix out(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            double a = (*this)(i, k);
            if (a == 0.0) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j)
                out(i, j) += a * rhs(k, j);
        }
    }
    return out;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw NumericError("matrix add: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw NumericError("matrix subtract: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

double Matrix::frobenius_norm() const {
    double acc = 0.0;
    for (double x : data_) acc += x * x;
    return std::sqrt(acc);
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

bool Matrix::all_finite() const {
    for (double x : data_)
        if (!std::isfinite(x)) return false;
    return true;
}

namespace {

constexpr int kMaxSweeps = 60;

// Orthogonalize the columns of w by plane rotations, accumulating them into v.
// Returns false if the sweep cap is reached before convergence.
bool jacobi_orthogonalize(Matrix& w, Matrix& v) {
    const std::size_t m = w.rows(), n = w.cols();
    const double tol = 1e-15;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    double wp = w(i, p), wq = w(i, q);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;

                double zeta = (beta - alpha) / (2.0 * gamma);
                double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;

                for (std::size_t i = 0; i < m; ++i) {
                    double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) return true;
    }
    return false;
}

// SVD of a tall-or-square matrix (rows >= cols).
SvdResult svd_tall(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Matrix w = a;
    Matrix v = Matrix::identity(n);
    if (!jacobi_orthogonalize(w, v))
        throw DecompositionError("svd: Jacobi sweeps did not converge within the iteration cap");

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += w(i, j) * w(i, j);
        sigma[j] = std::sqrt(acc);
    }

    double smax = *std::max_element(sigma.begin(), sigma.end());
    for (double& s : sigma)
        if (s < 1e-12 * smax) s = 0.0;

    // Stable descending order; ties keep the lower original index first.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

    SvdResult res;
    res.u = Matrix(m, n);
    res.v = Matrix(n, n);
    res.singular_values.resize(n);

    std::vector<std::size_t> zero_cols;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t src = order[k];
        res.singular_values[k] = sigma[src];
        for (std::size_t i = 0; i < n; ++i) res.v(i, k) = v(i, src);
        if (sigma[src] > 0.0) {
            double inv = 1.0 / sigma[src];
            for (std::size_t i = 0; i < m; ++i) res.u(i, k) = w(i, src) * inv;
        } else {
            zero_cols.push_back(k);
        }
    }

    // Null directions get a deterministic orthonormal completion built from
    // canonical basis vectors so that u always has orthonormal columns.
    for (std::size_t k : zero_cols) {
        bool placed = false;
        for (std::size_t t = 0; t < m && !placed; ++t) {
            std::vector<double> cand(m, 0.0);
            cand[t] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t c = 0; c < n; ++c) {
                    if (c == k) continue;
                    bool c_is_pending_zero =
                        std::find(zero_cols.begin(), zero_cols.end(), c) != zero_cols.end() && c > k;
                    if (c_is_pending_zero) continue;
                    double dot = 0.0;
                    for (std::size_t i = 0; i < m; ++i) dot += cand[i] * res.u(i, c);
                    for (std::size_t i = 0; i < m; ++i) cand[i] -= dot * res.u(i, c);
                }
            }
            double nrm = 0.0;
            for (double x : cand) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm > 1e-6) {
                for (std::size_t i = 0; i < m; ++i) res.u(i, k) = cand[i] / nrm;
                placed = true;
            }
        }
        if (!placed)
            throw DecompositionError("svd: failed to complete an orthonormal basis for a null direction");
    }

    return res;
}

void apply_sign_convention(SvdResult& r) {
    const std::size_t m = r.u.rows(), n = r.v.rows(), k = r.singular_values.size();
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            double a = std::abs(r.u(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (r.u(arg, j) < 0.0) {
            for (std::size_t i = 0; i < m; ++i) r.u(i, j) = -r.u(i, j);
            for (std::size_t i = 0; i < n; ++i) r.v(i, j) = -r.v(i, j);
        }
    }
}

} // namespace

SvdResult svd(const Matrix& a) {
    if (a.empty())
        throw DecompositionError("svd: empty input matrix");
    if (!a.all_finite())
        throw DecompositionError("svd: input contains non-finite entries");

    SvdResult res;
    if (a.rows() >= a.cols()) {
        res = svd_tall(a);
    } else {
        SvdResult t = svd_tall(a.transposed());
        res.u = std::move(t.v);
        res.v = std::move(t.u);
        res.singular_values = std::move(t.singular_values);
    }
    apply_sign_convention(res);

    if (!res.u.all_finite() || !res.v.all_finite())
        throw DecompositionError("svd: non-finite entries in decomposition output");
    return res;
}

double nuclear_norm(const Matrix& a) {
    SvdResult r = svd(a);
    double acc = 0.0;
    for (double s : r.singular_values) acc += s;
    return acc;
}

Matrix nuclear_norm_subgradient(const Matrix& a, double delta) {
    if (!(delta >= 0.0))
        throw NumericError("nuclear_norm_subgradient: delta must be nonnegative");
    SvdResult r = svd(a);
    Matrix g(a.rows(), a.cols());
    for (std::size_t k = 0; k < r.singular_values.size(); ++k) {
        if (r.singular_values[k] <= delta) continue;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double ui = r.u(i, k);
            if (ui == 0.0) continue;
            for (std::size_t j = 0; j < a.cols(); ++j)
                g(i, j) += ui * r.v(j, k);
        }
    }
    return g;
}

} // namespace oaae
