#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oaae/linalg.hpp"
#include "test_support.hpp"

using namespace oaae;
using namespace oaae::testsupport;

namespace {

Matrix reconstruct(const SvdResult& r) {
    const std::size_t m = r.u.rows(), n = r.v.rows(), k = r.singular_values.size();
    Matrix rec(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t)
                acc += r.u(i, t) * r.singular_values[t] * r.v(j, t);
            rec(i, j) = acc;
        }
    return rec;
}

double orthonormality_error(const Matrix& m) {
    // max |M^T M - I|
    double worst = 0.0;
    for (std::size_t a = 0; a < m.cols(); ++a)
        for (std::size_t b = 0; b < m.cols(); ++b) {
            double dot = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) dot += m(i, a) * m(i, b);
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

} // namespace

TEST_CASE("svd of a diagonal matrix is the identity decomposition") {
    Matrix a(2, 2);
    a(0, 0) = 3.0;
    a(1, 1) = 2.0;
    auto r = svd(a);
    CHECK(r.singular_values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.singular_values[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(max_abs_diff(r.u, Matrix::identity(2)) < 1e-12);
    CHECK(max_abs_diff(r.v, Matrix::identity(2)) < 1e-12);
}

TEST_CASE("svd of the zero matrix has zero singular values and orthonormal factors") {
    Matrix a(3, 2);
    auto r = svd(a);
    CHECK(r.singular_values.size() == 2);
    CHECK(r.singular_values[0] == 0.0);
    CHECK(r.singular_values[1] == 0.0);
    CHECK(orthonormality_error(r.u) < 1e-12);
    CHECK(orthonormality_error(r.v) < 1e-12);
    CHECK(reconstruct(r).frobenius_norm() == 0.0);
}

TEST_CASE("svd reconstructs random matrices") {
    Rng rng(20240801);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t rows = 1 + rng.uniform_index(12), cols = 1 + rng.uniform_index(12);
        Matrix a = random_matrix(rng, rows, cols);
        auto r = svd(a);

        CHECK(r.singular_values.size() == std::min(rows, cols));
        for (std::size_t i = 0; i + 1 < r.singular_values.size(); ++i)
            CHECK(r.singular_values[i] >= r.singular_values[i + 1]);
        for (double s : r.singular_values) CHECK(s >= 0.0);

        Matrix diff = reconstruct(r);
        diff -= a;
        CHECK(diff.frobenius_norm() <= 1e-8 * a.frobenius_norm());
        CHECK(orthonormality_error(r.u) < 1e-8);
        CHECK(orthonormality_error(r.v) < 1e-8);
    }
}

TEST_CASE("svd on the stated 5x4 example shape") {
    Rng rng(7);
    Matrix a = random_matrix(rng, 5, 4);
    auto r = svd(a);
    Matrix diff = reconstruct(r);
    diff -= a;
    CHECK(diff.frobenius_norm() <= 1e-8 * a.frobenius_norm());
}

TEST_CASE("svd is deterministic for identical input") {
    Rng rng(99);
    Matrix a = random_matrix(rng, 6, 5);
    auto r1 = svd(a);
    auto r2 = svd(a);
    CHECK(r1.u == r2.u);
    CHECK(r1.v == r2.v);
    CHECK(r1.singular_values == r2.singular_values);
}

TEST_CASE("svd sign convention: largest-magnitude entry of each u column is nonnegative") {
    Rng rng(4242);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix a = random_matrix(rng, 7, 4);
        auto r = svd(a);
        for (std::size_t j = 0; j < r.u.cols(); ++j) {
            double best = 0.0;
            std::size_t arg = 0;
            for (std::size_t i = 0; i < r.u.rows(); ++i)
                if (std::abs(r.u(i, j)) > best) {
                    best = std::abs(r.u(i, j));
                    arg = i;
                }
            CHECK(r.u(arg, j) >= 0.0);
        }
    }
}

TEST_CASE("svd rejects empty and non-finite input") {
    CHECK_THROWS_AS(svd(Matrix()), DecompositionError);
    Matrix bad(2, 2);
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(svd(bad), DecompositionError);
}

TEST_CASE("nuclear norm fixtures") {
    Matrix a(2, 2);
    a(0, 0) = 3.0;
    a(1, 1) = 2.0;
    CHECK(nuclear_norm(a) == doctest::Approx(5.0).epsilon(1e-12));

    CHECK(nuclear_norm(Matrix(3, 4)) == 0.0);

    // Two copies of a unit vector stacked as columns: Gram matrix [[1,1],[1,1]]
    // has eigenvalues {2, 0}, so the nuclear norm is sqrt(2).
    Rng rng(11);
    std::vector<double> u(5);
    double nrm = 0.0;
    for (double& x : u) {
        x = rng.normal();
        nrm += x * x;
    }
    nrm = std::sqrt(nrm);
    Matrix uu(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        uu(i, 0) = u[i] / nrm;
        uu(i, 1) = u[i] / nrm;
    }
    CHECK(nuclear_norm(uu) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("nuclear norm subgradient on diagonal fixtures") {
    Matrix a(2, 2);
    a(0, 0) = 3.0;
    a(1, 1) = 0.5;
    Matrix g = nuclear_norm_subgradient(a, 1.0); // only sigma=3 survives
    Matrix want(2, 2);
    want(0, 0) = 1.0;
    CHECK(max_abs_diff(g, want) < 1e-12);

    Matrix b(2, 2);
    b(0, 0) = 3.0;
    b(1, 1) = 2.0;
    CHECK(max_abs_diff(nuclear_norm_subgradient(b, 0.1), Matrix::identity(2)) < 1e-12);
}

TEST_CASE("nuclear norm subgradient matches finite differences at clean points") {
    Rng rng(314159);
    for (int trial = 0; trial < 8; ++trial) {
        Matrix a = random_matrix(rng, 4, 3);
        while (!spectrum_is_clean(a, 1e-3, 1e-3)) a = random_matrix(rng, 4, 3);
        Matrix g = nuclear_norm_subgradient(a, 1e-6);
        Matrix fd = finite_difference([](const Matrix& m) { return nuclear_norm(m); }, a, 1e-6);
        CHECK(max_abs_diff(g, fd) < 1e-4);
    }
}

TEST_CASE("nuclear norm subgradient with nothing above threshold is zero") {
    Matrix a(3, 3);
    a(0, 0) = 0.4;
    a(1, 1) = 0.2;
    Matrix g = nuclear_norm_subgradient(a, 0.5);
    CHECK(g.max_abs() == 0.0);
}

TEST_CASE("nuclear norm is unitarily invariant") {
    Rng rng(555);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t rows = 2 + rng.uniform_index(10), cols = 1 + rng.uniform_index(10);
        Matrix a = random_matrix(rng, rows, cols);
        Matrix q = random_orthogonal(rng, rows);
        CHECK(std::abs(nuclear_norm(q * a) - nuclear_norm(a)) < 1e-8);
    }
}

TEST_CASE("nuclear norm dominates the Frobenius norm, equal only at rank <= 1") {
    Rng rng(777);
    for (int trial = 0; trial < 20; ++trial) {
        // rank-1: outer product
        std::size_t rows = 2 + rng.uniform_index(6), cols = 2 + rng.uniform_index(6);
        Matrix r1(rows, cols);
        std::vector<double> u(rows), v(cols);
        for (double& x : u) x = rng.normal();
        for (double& x : v) x = rng.normal();
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                r1(i, j) = u[i] * v[j];
        CHECK(std::abs(nuclear_norm(r1) - r1.frobenius_norm()) < 1e-8);

        // full-ish rank: strict inequality with real margin
        Matrix a = random_matrix(rng, 4 + rng.uniform_index(4), 3 + rng.uniform_index(4));
        if (!spectrum_is_clean(a, 1e-2, 1e-3)) continue;
        CHECK(nuclear_norm(a) > a.frobenius_norm() + 1e-6);
    }
}

TEST_CASE("nuclear norm is subadditive under column concatenation") {
    Rng rng(901);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t rows = 2 + rng.uniform_index(8);
        std::size_t ca = 1 + rng.uniform_index(5), cb = 1 + rng.uniform_index(5);
        Matrix a = random_matrix(rng, rows, ca);
        Matrix b = random_matrix(rng, rows, cb);
        Matrix ab(rows, ca + cb);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < ca; ++j) ab(i, j) = a(i, j);
            for (std::size_t j = 0; j < cb; ++j) ab(i, ca + j) = b(i, j);
        }
        CHECK(nuclear_norm(ab) <= nuclear_norm(a) + nuclear_norm(b) + 1e-8);
    }
}

TEST_CASE("subgradient spectral norm never exceeds one") {
    Rng rng(2718);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t rows = 1 + rng.uniform_index(16), cols = 1 + rng.uniform_index(16);
        Matrix a = random_matrix(rng, rows, cols);
        Matrix g = nuclear_norm_subgradient(a, trial % 4 == 0 ? 0.5 : 1e-6);
        auto r = svd(g);
        double top = r.singular_values.empty() ? 0.0 : r.singular_values.front();
        CHECK(top <= 1.0 + 1e-8);
    }
}
