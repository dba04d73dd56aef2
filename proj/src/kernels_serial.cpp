#include "kernels_detail.hpp"

// Serial reference kernels: the plain-loop baseline the OpenMP variants are
// tested and benchmarked against.

namespace oaae::kernels::detail {

void serial_conv_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                         const ConvGeom& g, Tensor4& y) {
    for (int n = 0; n < y.n; ++n)
        for (int oc = 0; oc < y.c; ++oc)
            for (int oy = 0; oy < y.h; ++oy)
                for (int ox = 0; ox < y.w; ++ox)
                    y.at(n, oc, oy, ox) = conv_y_elem(x, w, b, g, n, oc, oy, ox);
}

void serial_conv_backward_input(const Tensor4& dy, std::span<const double> w, const ConvGeom& g,
                                Tensor4& dx) {
    for (int n = 0; n < dx.n; ++n)
        for (int ic = 0; ic < dx.c; ++ic)
            for (int iy = 0; iy < dx.h; ++iy)
                for (int ix = 0; ix < dx.w; ++ix)
                    dx.at(n, ic, iy, ix) = conv_dx_elem(dy, w, g, n, ic, iy, ix);
}

void serial_conv_backward_params(const Tensor4& x, const Tensor4& dy, const ConvGeom& g,
                                 std::span<double> dw, std::span<double> db) {
    const int k = g.kernel;
    for (int oc = 0; oc < g.out_c; ++oc)
        for (int ic = 0; ic < g.in_c; ++ic)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx)
                    dw[((static_cast<std::size_t>(oc) * g.in_c + ic) * k + ky) * k + kx] =
                        conv_dw_elem(x, dy, g, oc, ic, ky, kx);
    for (int oc = 0; oc < g.out_c; ++oc)
        db[oc] = conv_db_elem(dy, oc);
}

void serial_tconv_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                          const ConvGeom& g, Tensor4& y) {
    for (int n = 0; n < y.n; ++n)
        for (int oc = 0; oc < y.c; ++oc)
            for (int oy = 0; oy < y.h; ++oy)
                for (int ox = 0; ox < y.w; ++ox)
                    y.at(n, oc, oy, ox) = tconv_y_elem(x, w, b, g, n, oc, oy, ox);
}

void serial_tconv_backward_input(const Tensor4& dy, std::span<const double> w, const ConvGeom& g,
                                 Tensor4& dx) {
    for (int n = 0; n < dx.n; ++n)
        for (int ic = 0; ic < dx.c; ++ic)
            for (int iy = 0; iy < dx.h; ++iy)
                for (int ix = 0; ix < dx.w; ++ix)
                    dx.at(n, ic, iy, ix) = tconv_dx_elem(dy, w, g, n, ic, iy, ix);
}

void serial_tconv_backward_params(const Tensor4& x, const Tensor4& dy, const ConvGeom& g,
                                  std::span<double> dw, std::span<double> db) {
    const int k = g.kernel;
    for (int ic = 0; ic < g.in_c; ++ic)
        for (int oc = 0; oc < g.out_c; ++oc)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx)
                    dw[((static_cast<std::size_t>(ic) * g.out_c + oc) * k + ky) * k + kx] =
                        tconv_dw_elem(x, dy, g, ic, oc, ky, kx);
    for (int oc = 0; oc < g.out_c; ++oc)
        db[oc] = conv_db_elem(dy, oc);
}

void serial_dense_forward(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                          int in_f, int out_f, Tensor4& y) {
    for (int n = 0; n < x.n; ++n)
        for (int o = 0; o < out_f; ++o)
            y.data[static_cast<std::size_t>(n) * out_f + o] = dense_y_elem(x, w, b, in_f, n, o);
}

void serial_dense_backward_input(const Tensor4& dy, std::span<const double> w, int in_f, int out_f,
                                 Tensor4& dx) {
    for (int n = 0; n < dy.n; ++n)
        for (int i = 0; i < in_f; ++i)
            dx.data[static_cast<std::size_t>(n) * in_f + i] =
                dense_dx_elem(dy, w, in_f, out_f, n, i);
}

void serial_dense_backward_params(const Tensor4& x, const Tensor4& dy, int in_f, int out_f,
                                  std::span<double> dw, std::span<double> db) {
    for (int o = 0; o < out_f; ++o)
        for (int i = 0; i < in_f; ++i)
            dw[static_cast<std::size_t>(o) * in_f + i] = dense_dw_elem(x, dy, in_f, out_f, o, i);
    for (int o = 0; o < out_f; ++o)
        db[o] = dense_db_elem(dy, out_f, o);
}

void serial_leaky_relu_forward(const Tensor4& x, double slope, Tensor4& y) {
    for (std::size_t i = 0; i < x.size(); ++i)
        y.data[i] = leaky_relu_elem(x.data[i], slope);
}

void serial_leaky_relu_backward(const Tensor4& x, const Tensor4& dy, double slope, Tensor4& dx) {
    for (std::size_t i = 0; i < x.size(); ++i)
        dx.data[i] = leaky_relu_grad_elem(x.data[i], dy.data[i], slope);
}

void serial_sigmoid_forward(const Tensor4& x, Tensor4& y) {
    for (std::size_t i = 0; i < x.size(); ++i)
        y.data[i] = sigmoid_elem(x.data[i]);
}

void serial_sigmoid_backward(const Tensor4& x, const Tensor4& dy, Tensor4& dx) {
    for (std::size_t i = 0; i < x.size(); ++i)
        dx.data[i] = sigmoid_grad_elem(x.data[i], dy.data[i]);
}

} // namespace oaae::kernels::detail
