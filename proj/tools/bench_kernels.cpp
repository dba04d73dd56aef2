// Times the serial reference kernels against the OpenMP variants on
// training-shaped workloads and prints the speedups.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "oaae/kernels.hpp"
#include "oaae/rng.hpp"

using namespace oaae;
using namespace oaae::kernels;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn(); // warm up
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

struct Case {
    std::string name;
    std::function<void()> body;
    int reps;
};

} // namespace

int main(int argc, char** argv) {
    int batch = 64;
    if (argc > 1) batch = std::atoi(argv[1]);

    Rng rng(1);
    auto randv = [&](std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = rng.normal();
        return v;
    };
    auto randt = [&](int n, int c, int h, int w) {
        Tensor4 t(n, c, h, w);
        for (double& x : t.data) x = rng.normal();
        return t;
    };

    // Shapes matching the default model on 16x16 and 28x28 inputs.
    struct ConvShape {
        const char* label;
        ConvGeom g;
        int h, w;
    };
    std::vector<ConvShape> conv_shapes = {
        {"conv 16->32 8x8", {16, 32, 3, 2, 1, 0}, 8, 8},
        {"conv 32->64 4x4", {32, 64, 3, 2, 1, 0}, 4, 4},
        {"conv 16->32 14x14", {16, 32, 3, 2, 1, 0}, 14, 14},
    };

    std::vector<Case> cases;
    // keep inputs alive for the lambdas
    std::vector<std::shared_ptr<void>> keep;

    for (const auto& cs : conv_shapes) {
        auto x = std::make_shared<Tensor4>(randt(batch, cs.g.in_c, cs.h, cs.w));
        auto w = std::make_shared<std::vector<double>>(
            randv(static_cast<std::size_t>(cs.g.out_c) * cs.g.in_c * 9));
        auto b = std::make_shared<std::vector<double>>(randv(cs.g.out_c));
        const int oh = conv_out_extent(cs.h, cs.g), ow = conv_out_extent(cs.w, cs.g);
        auto y = std::make_shared<Tensor4>(batch, cs.g.out_c, oh, ow);
        auto dy = std::make_shared<Tensor4>(randt(batch, cs.g.out_c, oh, ow));
        auto dx = std::make_shared<Tensor4>(batch, cs.g.in_c, cs.h, cs.w);
        auto dw = std::make_shared<std::vector<double>>(w->size());
        auto db = std::make_shared<std::vector<double>>(b->size());
        ConvGeom g = cs.g;
        keep.insert(keep.end(), {x, w, b, y, dy, dx, dw, db});

        cases.push_back({std::string(cs.label) + " fwd",
                         [=]() { conv_forward(*x, *w, *b, g, *y); }, 20});
        cases.push_back({std::string(cs.label) + " bwd-in",
                         [=]() { conv_backward_input(*dy, *w, g, *dx); }, 20});
        cases.push_back({std::string(cs.label) + " bwd-par",
                         [=]() { conv_backward_params(*x, *dy, g, *dw, *db); }, 20});
    }

    {
        const int in_f = 1024, out_f = 128;
        auto x = std::make_shared<Tensor4>(randt(batch, in_f, 1, 1));
        auto w = std::make_shared<std::vector<double>>(randv(static_cast<std::size_t>(out_f) * in_f));
        auto b = std::make_shared<std::vector<double>>(randv(out_f));
        auto y = std::make_shared<Tensor4>(batch, out_f, 1, 1);
        auto dy = std::make_shared<Tensor4>(randt(batch, out_f, 1, 1));
        auto dw = std::make_shared<std::vector<double>>(w->size());
        auto db = std::make_shared<std::vector<double>>(b->size());
        keep.insert(keep.end(), {x, w, b, y, dy, dw, db});

        cases.push_back({"dense 1024->128 fwd",
                         [=]() { dense_forward(*x, *w, *b, in_f, out_f, *y); }, 50});
        cases.push_back({"dense 1024->128 bwd-par",
                         [=]() { dense_backward_params(*x, *dy, in_f, out_f, *dw, *db); }, 50});
    }

    std::printf("%-26s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");
    std::printf("%s\n", std::string(62, '-').c_str());
    for (const auto& c : cases) {
        set_backend(Backend::serial);
        double serial_ms = time_ms(c.body, c.reps);
        set_backend(Backend::parallel);
        double parallel_ms = time_ms(c.body, c.reps);
        std::printf("%-26s %12.3f %12.3f %8.2fx\n", c.name.c_str(), serial_ms, parallel_ms,
                    serial_ms / parallel_ms);
    }
    return 0;
}
