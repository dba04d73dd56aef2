#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oaae/ole.hpp"
#include "test_support.hpp"

using namespace oaae;
using namespace oaae::testsupport;

namespace {

LabeledLatentBatch clean_random_batch(Rng& rng, std::size_t d, std::size_t m, int classes) {
    for (;;) {
        LabeledLatentBatch b;
        b.latents = random_matrix(rng, d, m);
        b.labels.resize(m);
        for (std::size_t j = 0; j < m; ++j) b.labels[j] = static_cast<int>(j) % classes;
        bool ok = spectrum_is_clean(b.latents, 1e-3, 1e-3);
        for (const auto& [label, part] : partition_by_class(b))
            ok = ok && spectrum_is_clean(part, 1e-3, 1e-3);
        if (ok) return b;
    }
}

} // namespace

TEST_CASE("partition_by_class splits columns by label, order preserved") {
    Matrix y(2, 4);
    for (std::size_t j = 0; j < 4; ++j) {
        y(0, j) = static_cast<double>(j);
        y(1, j) = 10.0 + j;
    }
    LabeledLatentBatch b{y, {0, 1, 0, 1}};
    auto parts = partition_by_class(b);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].first == 0);
    CHECK(parts[1].first == 1);
    CHECK(parts[0].second(0, 0) == 0.0);
    CHECK(parts[0].second(0, 1) == 2.0);
    CHECK(parts[1].second(0, 0) == 1.0);
    CHECK(parts[1].second(0, 1) == 3.0);
    CHECK(parts[0].second(1, 1) == 12.0);
}

TEST_CASE("partition_by_class with a single label returns the whole matrix") {
    Rng rng(5);
    Matrix y = random_matrix(rng, 3, 5);
    LabeledLatentBatch b{y, {4, 4, 4, 4, 4}};
    auto parts = partition_by_class(b);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].first == 4);
    CHECK(parts[0].second == y);
}

TEST_CASE("partition_by_class emits no entry for absent classes") {
    Matrix y(2, 3, 1.0);
    LabeledLatentBatch b{y, {0, 2, 2}}; // label 1 absent
    auto parts = partition_by_class(b);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].first == 0);
    CHECK(parts[1].first == 2);
    CHECK(parts[0].second.cols() == 1);
    CHECK(parts[1].second.cols() == 2);
}

TEST_CASE("ole_loss on the zero batch is the sum of margins") {
    LabeledLatentBatch b{Matrix(4, 6), {0, 1, 2, 0, 1, 2}};
    CHECK(ole_loss(b, {1.0, 1e-3}) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("ole_loss vanishes on mutually orthogonal class subspaces") {
    Matrix y(4, 4);
    y(0, 0) = 1.0;
    y(1, 1) = 1.0;
    y(2, 2) = 1.0;
    y(3, 3) = 1.0;
    LabeledLatentBatch b{y, {0, 0, 1, 1}};
    CHECK(std::abs(ole_loss(b, {0.0, 1e-3})) < 1e-8);
}

TEST_CASE("ole_loss on one identical unit column per class is 2 - sqrt(2)") {
    Matrix y(3, 2);
    y(0, 0) = 1.0;
    y(0, 1) = 1.0;
    LabeledLatentBatch b{y, {0, 1}};
    CHECK(ole_loss(b, {0.0, 1e-3}) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("ole_grad on the zero batch with positive margin is zero") {
    LabeledLatentBatch b{Matrix(4, 6), {0, 1, 2, 0, 1, 2}};
    Matrix g = ole_grad(b, {1.0, 1e-3});
    CHECK(g.max_abs() == 0.0);
}

TEST_CASE("ole_grad cancels exactly for a single class covering the batch") {
    Rng rng(31);
    LabeledLatentBatch b{random_matrix(rng, 5, 7), std::vector<int>(7, 0)};
    Matrix g = ole_grad(b, {0.0, 1e-9});
    CHECK(g.max_abs() < 1e-14);
}

TEST_CASE("ole_grad matches central finite differences of ole_loss") {
    Rng rng(62831);
    OleConfig cfg{0.0, 1e-6};
    for (int trial = 0; trial < 6; ++trial) {
        LabeledLatentBatch batch = clean_random_batch(rng, 6, 8, trial % 2 == 0 ? 2 : 3);
        Matrix g = ole_grad(batch, cfg);
        Matrix fd = finite_difference(
            [&](const Matrix& y) { return ole_loss({y, batch.labels}, cfg); }, batch.latents,
            1e-6);
        CHECK(max_abs_diff(g, fd) < 1e-4);
    }
}

TEST_CASE("ole_loss is nonnegative at zero margin") {
    Rng rng(140);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t d = 2 + rng.uniform_index(6), m = 2 + rng.uniform_index(10);
        int classes = 1 + static_cast<int>(rng.uniform_index(4));
        LabeledLatentBatch b;
        b.latents = random_matrix(rng, d, m);
        b.labels.resize(m);
        for (std::size_t j = 0; j < m; ++j)
            b.labels[j] = static_cast<int>(rng.uniform_index(classes));
        CHECK(ole_loss(b, {0.0, 1e-3}) >= -1e-8);
    }
}

TEST_CASE("ole_loss is invariant under latent-space rotation") {
    Rng rng(5150);
    OleConfig cfg{0.7, 1e-3};
    for (int trial = 0; trial < 15; ++trial) {
        LabeledLatentBatch b;
        b.latents = random_matrix(rng, 5, 9);
        b.labels = {0, 1, 2, 0, 1, 2, 0, 1, 2};
        Matrix q = random_orthogonal(rng, 5);
        LabeledLatentBatch rotated{q * b.latents, b.labels};
        CHECK(std::abs(ole_loss(rotated, cfg) - ole_loss(b, cfg)) < 1e-8);
    }
}

TEST_CASE("permuting batch columns permutes ole_grad columns and keeps the loss") {
    Rng rng(8088);
    OleConfig cfg{0.0, 1e-3};
    LabeledLatentBatch b;
    b.latents = random_matrix(rng, 4, 6);
    b.labels = {0, 1, 0, 1, 2, 2};

    std::vector<std::size_t> perm = {3, 0, 5, 1, 4, 2};
    LabeledLatentBatch p;
    p.latents = Matrix(4, 6);
    p.labels.resize(6);
    for (std::size_t j = 0; j < 6; ++j) {
        p.labels[j] = b.labels[perm[j]];
        for (std::size_t i = 0; i < 4; ++i) p.latents(i, j) = b.latents(i, perm[j]);
    }

    CHECK(std::abs(ole_loss(p, cfg) - ole_loss(b, cfg)) < 1e-10);

    Matrix g = ole_grad(b, cfg);
    Matrix gp = ole_grad(p, cfg);
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(gp(i, j) == doctest::Approx(g(i, perm[j])).epsilon(1e-10));
}

TEST_CASE("batch validation catches label/shape mismatches") {
    CHECK_THROWS_AS(partition_by_class({Matrix(2, 3), {0, 1}}), NumericError);
    CHECK_THROWS_AS(partition_by_class({Matrix(2, 2), {0, -1}}), NumericError);
    CHECK_THROWS_AS(ole_loss({Matrix(2, 2), {0, 1}}, {-1.0, 1e-3}), ConfigError);
}
