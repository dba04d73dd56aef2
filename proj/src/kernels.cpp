#include "oaae/kernels.hpp"

namespace oaae::kernels {

namespace {
Backend g_backend = Backend::parallel;
}

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }

#define OAAE_DISPATCH(fn, ...)                        \
    do {                                              \
        if (g_backend == Backend::parallel)           \
            detail::parallel_##fn(__VA_ARGS__);       \
        else                                          \
            detail::serial_##fn(__VA_ARGS__);         \
    } while (0)

void conv_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                  const ConvGeom& g, Tensor4& y) {
    OAAE_DISPATCH(conv_forward, x, w, b, g, y);
}
void conv_backward_input(const Tensor4& dy, std::span<const double> w, const ConvGeom& g,
                         Tensor4& dx) {
    OAAE_DISPATCH(conv_backward_input, dy, w, g, dx);
}
void conv_backward_params(const Tensor4& x, const Tensor4& dy, const ConvGeom& g,
                          std::span<double> dw, std::span<double> db) {
    OAAE_DISPATCH(conv_backward_params, x, dy, g, dw, db);
}
void tconv_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                   const ConvGeom& g, Tensor4& y) {
    OAAE_DISPATCH(tconv_forward, x, w, b, g, y);
}
void tconv_backward_input(const Tensor4& dy, std::span<const double> w, const ConvGeom& g,
                          Tensor4& dx) {
    OAAE_DISPATCH(tconv_backward_input, dy, w, g, dx);
}
void tconv_backward_params(const Tensor4& x, const Tensor4& dy, const ConvGeom& g,
                           std::span<double> dw, std::span<double> db) {
    OAAE_DISPATCH(tconv_backward_params, x, dy, g, dw, db);
}
void dense_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                   int in_f, int out_f, Tensor4& y) {
    OAAE_DISPATCH(dense_forward, x, w, b, in_f, out_f, y);
}
void dense_backward_input(const Tensor4& dy, std::span<const double> w, int in_f, int out_f,
                          Tensor4& dx) {
    OAAE_DISPATCH(dense_backward_input, dy, w, in_f, out_f, dx);
}
void dense_backward_params(const Tensor4& x, const Tensor4& dy, int in_f, int out_f,
                           std::span<double> dw, std::span<double> db) {
    OAAE_DISPATCH(dense_backward_params, x, dy, in_f, out_f, dw, db);
}
void leaky_relu_forward(const Tensor4& x, double slope, Tensor4& y) {
    OAAE_DISPATCH(leaky_relu_forward, x, slope, y);
}
void leaky_relu_backward(const Tensor4& x, const Tensor4& dy, double slope, Tensor4& dx) {
    OAAE_DISPATCH(leaky_relu_backward, x, dy, slope, dx);
}
void sigmoid_forward(const Tensor4& x, Tensor4& y) { OAAE_DISPATCH(sigmoid_forward, x, y); }
void sigmoid_backward(const Tensor4& x, const Tensor4& dy, Tensor4& dx) {
    OAAE_DISPATCH(sigmoid_backward, x, dy, dx);
}

#undef OAAE_DISPATCH

} // namespace oaae::kernels
