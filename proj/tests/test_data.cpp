#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "oaae/data.hpp"
#include "test_support.hpp"

using namespace oaae;

namespace {

void write_bytes(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    REQUIRE(out.good());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

struct IdxFixture {
    std::string images = "fixture-images-idx3-ubyte";
    std::string labels = "fixture-labels-idx1-ubyte";
    ~IdxFixture() {
        std::remove(images.c_str());
        std::remove(labels.c_str());
    }
};

} // namespace

TEST_CASE("read_idx parses a hand-built two-image fixture") {
    IdxFixture fx;
    std::string ib;
    be32(ib, 0x00000803);
    be32(ib, 2); // images
    be32(ib, 2); // rows
    be32(ib, 2); // cols
    for (unsigned char b : {0, 255, 128, 64, 10, 20, 30, 40}) ib.push_back(static_cast<char>(b));
    write_bytes(fx.images, ib);

    std::string lb;
    be32(lb, 0x00000801);
    be32(lb, 2);
    lb.push_back(7);
    lb.push_back(3);
    write_bytes(fx.labels, lb);

    Dataset ds = read_idx(fx.images, fx.labels);
    CHECK(ds.count() == 2);
    CHECK(ds.images.h == 2);
    CHECK(ds.images.w == 2);
    CHECK(ds.images.data[0] == 0.0);
    CHECK(ds.images.data[1] == 1.0);
    CHECK(ds.images.data[2] == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
    CHECK(ds.images.data[3] == doctest::Approx(64.0 / 255.0).epsilon(1e-15));
    CHECK(ds.labels[0] == 7);
    CHECK(ds.labels[1] == 3);
    CHECK(ds.num_classes == 8);
    for (double p : ds.images.data) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("read_idx rejects a wrong magic naming offset 0") {
    IdxFixture fx;
    std::string ib;
    be32(ib, 0xdeadbeef);
    be32(ib, 0);
    be32(ib, 2);
    be32(ib, 2);
    write_bytes(fx.images, ib);
    std::string lb;
    be32(lb, 0x00000801);
    be32(lb, 0);
    write_bytes(fx.labels, lb);

    try {
        read_idx(fx.images, fx.labels);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
    }
}

TEST_CASE("read_idx rejects truncated payloads and count mismatches") {
    IdxFixture fx;
    std::string ib;
    be32(ib, 0x00000803);
    be32(ib, 2);
    be32(ib, 2);
    be32(ib, 2);
    ib.push_back(1); // 1 of 8 payload bytes
    write_bytes(fx.images, ib);
    std::string lb;
    be32(lb, 0x00000801);
    be32(lb, 2);
    lb.push_back(0);
    lb.push_back(1);
    write_bytes(fx.labels, lb);
    CHECK_THROWS_AS(read_idx(fx.images, fx.labels), ParseError);

    // full payload but label count disagrees
    ib.clear();
    be32(ib, 0x00000803);
    be32(ib, 1);
    be32(ib, 2);
    be32(ib, 2);
    for (int i = 0; i < 4; ++i) ib.push_back(5);
    write_bytes(fx.images, ib);
    CHECK_THROWS_AS(read_idx(fx.images, fx.labels), ParseError);
}

TEST_CASE("write_idx(read_idx(f)) reproduces the file bytes") {
    IdxFixture fx;
    Rng rng(33);
    std::string ib;
    be32(ib, 0x00000803);
    be32(ib, 5);
    be32(ib, 3);
    be32(ib, 4);
    for (int i = 0; i < 5 * 3 * 4; ++i)
        ib.push_back(static_cast<char>(rng.uniform_index(256)));
    std::string lb;
    be32(lb, 0x00000801);
    be32(lb, 5);
    for (int i = 0; i < 5; ++i) lb.push_back(static_cast<char>(rng.uniform_index(10)));
    write_bytes(fx.images, ib);
    write_bytes(fx.labels, lb);

    Dataset ds = read_idx(fx.images, fx.labels);
    const std::string out_i = "fixture-rt-images", out_l = "fixture-rt-labels";
    write_idx(ds, out_i, out_l);
    CHECK(slurp(out_i) == ib);
    CHECK(slurp(out_l) == lb);
    std::remove(out_i.c_str());
    std::remove(out_l.c_str());
}

TEST_CASE("read_idx is bit-deterministic") {
    IdxFixture fx;
    std::string ib;
    be32(ib, 0x00000803);
    be32(ib, 1);
    be32(ib, 2);
    be32(ib, 2);
    for (unsigned char b : {9, 8, 7, 6}) ib.push_back(static_cast<char>(b));
    std::string lb;
    be32(lb, 0x00000801);
    be32(lb, 1);
    lb.push_back(2);
    write_bytes(fx.images, ib);
    write_bytes(fx.labels, lb);

    Dataset a = read_idx(fx.images, fx.labels);
    Dataset b = read_idx(fx.images, fx.labels);
    CHECK(a.images.data == b.images.data);
    CHECK(a.labels == b.labels);
    CHECK(a.source_checksums == b.source_checksums);
}

TEST_CASE("read_cifar10 parses a one-record fixture") {
    const std::string path = "fixture-cifar.bin";
    std::string bytes;
    bytes.push_back(7);
    bytes.append(3072, static_cast<char>(static_cast<unsigned char>(255)));
    write_bytes(path, bytes);

    Dataset ds = read_cifar10({path});
    CHECK(ds.count() == 1);
    CHECK(ds.labels[0] == 7);
    CHECK(ds.images.c == 3);
    CHECK(ds.images.h == 32);
    for (double p : ds.images.data) CHECK(p == 1.0);
    std::remove(path.c_str());
}

TEST_CASE("read_cifar10 on an empty file yields an empty dataset") {
    const std::string path = "fixture-cifar-empty.bin";
    write_bytes(path, "");
    Dataset ds = read_cifar10({path});
    CHECK(ds.count() == 0);
    std::remove(path.c_str());
}

TEST_CASE("read_cifar10 rejects lengths that are not whole records") {
    const std::string path = "fixture-cifar-bad.bin";
    write_bytes(path, std::string(3072, 'x')); // one byte short
    CHECK_THROWS_AS(read_cifar10({path}), ParseError);
    std::remove(path.c_str());
}

TEST_CASE("gaussian_noise with zero std is the identity") {
    Rng rng(44);
    Tensor4 img = testsupport::random_tensor(rng, 2, 1, 4, 4);
    Tensor4 out = gaussian_noise(img, 0.0, std::uint64_t{1});
    CHECK(out.data == img.data);
}

TEST_CASE("gaussian_noise is seed-deterministic") {
    Tensor4 img(2, 1, 8, 8, 0.5);
    Tensor4 a = gaussian_noise(img, 0.02, std::uint64_t{7});
    Tensor4 b = gaussian_noise(img, 0.02, std::uint64_t{7});
    Tensor4 c = gaussian_noise(img, 0.02, std::uint64_t{8});
    CHECK(a.data == b.data);
    CHECK(a.data != c.data);
}

TEST_CASE("gaussian_noise sample statistics match the requested distribution") {
    const int side = 1000; // one million pixels
    Tensor4 img(1, 1, side, side, 0.0);
    Tensor4 noisy = gaussian_noise(img, 0.02, std::uint64_t{123});

    double sum = 0.0;
    for (double v : noisy.data) sum += v;
    const double n = static_cast<double>(noisy.size());
    const double mean = sum / n;
    double var = 0.0;
    for (double v : noisy.data) var += (v - mean) * (v - mean);
    var /= n - 1.0;

    CHECK(std::abs(mean) < 3.0 * 0.02 / std::sqrt(n));
    CHECK(std::abs(std::sqrt(var) - 0.02) < 0.01 * 0.02);
}

TEST_CASE("synthetic_multimodal without noise reproduces the templates") {
    Dataset ds = synthetic_multimodal(2, 1, 8, 5, 0.0);
    REQUIRE(ds.count() == 2);
    for (int i = 0; i < 2; ++i) {
        Tensor4 tpl = synthetic_template(ds.labels[i], 2, 8);
        for (int p = 0; p < 64; ++p)
            CHECK(ds.images.data[i * 64 + p] == doctest::Approx(tpl.data[p]).epsilon(1e-15));
    }
}

TEST_CASE("synthetic_multimodal per-class counts are exact and pixels stay in range") {
    Dataset ds = synthetic_multimodal(4, 25, 16, 99);
    auto hist = label_histogram(ds);
    REQUIRE(hist.size() == 4);
    for (int h : hist) CHECK(h == 25);
    for (double p : ds.images.data) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("templates are separated well beyond the noise scale") {
    const int side = 16;
    const double noise_std = 0.12; // the generator default
    double mean_dist = 0.0;
    int pairs = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            Tensor4 ta = synthetic_template(a, 4, side), tb = synthetic_template(b, 4, side);
            double d = 0.0;
            for (std::size_t i = 0; i < ta.size(); ++i)
                d += (ta.data[i] - tb.data[i]) * (ta.data[i] - tb.data[i]);
            mean_dist += std::sqrt(d);
            ++pairs;
        }
    mean_dist /= pairs;
    CHECK(mean_dist >= 10.0 * noise_std);
    // stronger structural margin: distance also clears the expected noise
    // vector norm over all pixels with room to spare
    const double noise_norm = noise_std * side;
    CHECK(mean_dist >= 3.0 * noise_norm);
}

TEST_CASE("a nearest-template classifier gets at least 99 percent on a fresh sample") {
    const int C = 4, side = 16;
    Dataset ds = synthetic_multimodal(C, 200, side, 4242);
    std::vector<Tensor4> templates;
    for (int c = 0; c < C; ++c) templates.push_back(synthetic_template(c, C, side));

    int correct = 0;
    const std::size_t pixels = static_cast<std::size_t>(side) * side;
    for (int i = 0; i < ds.count(); ++i) {
        double best = 1e300;
        int arg = -1;
        for (int c = 0; c < C; ++c) {
            double d = 0.0;
            for (std::size_t p = 0; p < pixels; ++p) {
                double diff = ds.images.data[i * pixels + p] - templates[c].data[p];
                d += diff * diff;
            }
            if (d < best) {
                best = d;
                arg = c;
            }
        }
        correct += arg == ds.labels[i] ? 1 : 0;
    }
    CHECK(static_cast<double>(correct) / ds.count() >= 0.99);
}

TEST_CASE("filter_and_remap keeps the listed classes with compact labels") {
    Dataset ds = synthetic_multimodal(4, 10, 8, 1);
    Dataset sub = filter_and_remap(ds, {1, 3});
    CHECK(sub.count() == 20);
    CHECK(sub.num_classes == 2);
    for (int l : sub.labels) CHECK((l == 0 || l == 1));
    auto hist = label_histogram(sub);
    CHECK(hist[0] == 10);
    CHECK(hist[1] == 10);
}

// Histogram oracle over the real MNIST files; runs only when a data
// directory is supplied.
TEST_CASE("mnist label histogram matches the published per-digit counts") {
    const char* dir = std::getenv("OAAE_DATA_DIR");
    if (!dir) {
        MESSAGE("OAAE_DATA_DIR not set; skipping the MNIST file check");
        return;
    }
    const std::string base(dir);
    Dataset ds = read_idx(base + "/train-images-idx3-ubyte", base + "/train-labels-idx1-ubyte");
    CHECK(ds.count() == 60000);
    const std::vector<int> published = {5923, 6742, 5958, 6131, 5842,
                                        5421, 5918, 6265, 5851, 5949};
    CHECK(label_histogram(ds) == published);
}
