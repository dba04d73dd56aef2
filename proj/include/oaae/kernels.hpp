#pragma once

#include <span>

#include "oaae/tensor.hpp"

namespace oaae::kernels {

// The hot loops (convolutions, dense layers, elementwise maps) exist twice:
// a plain serial reference and an OpenMP variant parallelized over output
// elements. Every output element is accumulated in a fixed serial order in
// both variants, so results are identical bit-for-bit regardless of backend
// or thread count. The serial build is the oracle in tests and the baseline
// in the benchmark tool.
enum class Backend { serial, parallel };

Backend backend();
void set_backend(Backend b);

struct ConvGeom {
    int in_c = 0, out_c = 0;
    int kernel = 0, stride = 1, padding = 0, out_padding = 0;
};

inline int conv_out_extent(int in, const ConvGeom& g) {
    return (in + 2 * g.padding - g.kernel) / g.stride + 1;
}
inline int tconv_out_extent(int in, const ConvGeom& g) {
    return (in - 1) * g.stride - 2 * g.padding + g.kernel + g.out_padding;
}

// Convolution weights are laid out [out_c][in_c][k][k]; transposed-convolution
// weights [in_c][out_c][k][k]. Output tensors must be pre-shaped by the caller.
void conv_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                  const ConvGeom& g, Tensor4& y);
void conv_backward_input(const Tensor4& dy, std::span<const double> w, const ConvGeom& g,
                         Tensor4& dx);
void conv_backward_params(const Tensor4& x, const Tensor4& dy, const ConvGeom& g,
                          std::span<double> dw, std::span<double> db);

void tconv_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                   const ConvGeom& g, Tensor4& y);
void tconv_backward_input(const Tensor4& dy, std::span<const double> w, const ConvGeom& g,
                          Tensor4& dx);
void tconv_backward_params(const Tensor4& x, const Tensor4& dy, const ConvGeom& g,
                           std::span<double> dw, std::span<double> db);

// Dense layer on flattened features: y[n][o] = b[o] + sum_i w[o][i] * x[n][i].
void dense_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                   int in_f, int out_f, Tensor4& y);
void dense_backward_input(const Tensor4& dy, std::span<const double> w, int in_f, int out_f,
                          Tensor4& dx);
void dense_backward_params(const Tensor4& x, const Tensor4& dy, int in_f, int out_f,
                           std::span<double> dw, std::span<double> db);

void leaky_relu_forward(const Tensor4& x, double slope, Tensor4& y);
void leaky_relu_backward(const Tensor4& x, const Tensor4& dy, double slope, Tensor4& dx);
void sigmoid_forward(const Tensor4& x, Tensor4& y);
void sigmoid_backward(const Tensor4& x, const Tensor4& dy, Tensor4& dx);

namespace detail {

// Serial reference implementations.
void serial_conv_forward(const Tensor4&, std::span<const double>, std::span<const double>,
                         const ConvGeom&, Tensor4&);
void serial_conv_backward_input(const Tensor4&, std::span<const double>, const ConvGeom&, Tensor4&);
void serial_conv_backward_params(const Tensor4&, const Tensor4&, const ConvGeom&,
                                 std::span<double>, std::span<double>);
void serial_tconv_forward(const Tensor4&, std::span<const double>, std::span<const double>,
                          const ConvGeom&, Tensor4&);
void serial_tconv_backward_input(const Tensor4&, std::span<const double>, const ConvGeom&, Tensor4&);
void serial_tconv_backward_params(const Tensor4&, const Tensor4&, const ConvGeom&,
                                  std::span<double>, std::span<double>);
void serial_dense_forward(const Tensor4&, std::span<const double>, std::span<const double>,
                          int, int, Tensor4&);
void serial_dense_backward_input(const Tensor4&, std::span<const double>, int, int, Tensor4&);
void serial_dense_backward_params(const Tensor4&, const Tensor4&, int, int,
                                  std::span<double>, std::span<double>);
void serial_leaky_relu_forward(const Tensor4&, double, Tensor4&);
void serial_leaky_relu_backward(const Tensor4&, const Tensor4&, double, Tensor4&);
void serial_sigmoid_forward(const Tensor4&, Tensor4&);
void serial_sigmoid_backward(const Tensor4&, const Tensor4&, Tensor4&);

// OpenMP implementations.
void parallel_conv_forward(const Tensor4&, std::span<const double>, std::span<const double>,
                           const ConvGeom&, Tensor4&);
void parallel_conv_backward_input(const Tensor4&, std::span<const double>, const ConvGeom&, Tensor4&);
void parallel_conv_backward_params(const Tensor4&, const Tensor4&, const ConvGeom&,
                                   std::span<double>, std::span<double>);
void parallel_tconv_forward(const Tensor4&, std::span<const double>, std::span<const double>,
                            const ConvGeom&, Tensor4&);
void parallel_tconv_backward_input(const Tensor4&, std::span<const double>, const ConvGeom&, Tensor4&);
void parallel_tconv_backward_params(const Tensor4&, const Tensor4&, const ConvGeom&,
                                    std::span<double>, std::span<double>);
void parallel_dense_forward(const Tensor4&, std::span<const double>, std::span<const double>,
                            int, int, Tensor4&);
void parallel_dense_backward_input(const Tensor4&, std::span<const double>, int, int, Tensor4&);
void parallel_dense_backward_params(const Tensor4&, const Tensor4&, int, int,
                                    std::span<double>, std::span<double>);
void parallel_leaky_relu_forward(const Tensor4&, double, Tensor4&);
void parallel_leaky_relu_backward(const Tensor4&, const Tensor4&, double, Tensor4&);
void parallel_sigmoid_forward(const Tensor4&, Tensor4&);
void parallel_sigmoid_backward(const Tensor4&, const Tensor4&, Tensor4&);

} // namespace detail

} // namespace oaae::kernels
