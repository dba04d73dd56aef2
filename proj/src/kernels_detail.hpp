#pragma once

#include <cmath>
#include <cstdint>
#include <span>

#include "oaae/kernels.hpp"

// Per-element accumulators shared by the serial and OpenMP kernel variants.
// Each computes one output element with a fixed accumulation order, which is
// what makes both backends produce identical bits.

namespace oaae::kernels::detail {

inline double conv_y_elem(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                          const ConvGeom& g, int n, int oc, int oy, int ox) {
    const int k = g.kernel;
    double acc = b[oc];
    for (int ic = 0; ic < g.in_c; ++ic) {
        const std::size_t wbase = ((static_cast<std::size_t>(oc) * g.in_c + ic) * k) * k;
        for (int ky = 0; ky < k; ++ky) {
            const int iy = oy * g.stride - g.padding + ky;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < k; ++kx) {
                const int ix = ox * g.stride - g.padding + kx;
                if (ix < 0 || ix >= x.w) continue;
                acc += x.at(n, ic, iy, ix) * w[wbase + static_cast<std::size_t>(ky) * k + kx];
            }
        }
    }
    return acc;
}

inline double conv_dx_elem(const Tensor4& dy, std::span<const double> w, const ConvGeom& g,
                           int n, int ic, int iy, int ix) {
    const int k = g.kernel;
    double acc = 0.0;
    for (int oc = 0; oc < g.out_c; ++oc) {
        const std::size_t wbase = ((static_cast<std::size_t>(oc) * g.in_c + ic) * k) * k;
        for (int ky = 0; ky < k; ++ky) {
            const int num_y = iy + g.padding - ky;
            if (num_y < 0 || num_y % g.stride != 0) continue;
            const int oy = num_y / g.stride;
            if (oy >= dy.h) continue;
            for (int kx = 0; kx < k; ++kx) {
                const int num_x = ix + g.padding - kx;
                if (num_x < 0 || num_x % g.stride != 0) continue;
                const int ox = num_x / g.stride;
                if (ox >= dy.w) continue;
                acc += dy.at(n, oc, oy, ox) * w[wbase + static_cast<std::size_t>(ky) * k + kx];
            }
        }
    }
    return acc;
}

inline double conv_dw_elem(const Tensor4& x, const Tensor4& dy, const ConvGeom& g,
                           int oc, int ic, int ky, int kx) {
    double acc = 0.0;
    for (int n = 0; n < x.n; ++n)
        for (int oy = 0; oy < dy.h; ++oy) {
            const int iy = oy * g.stride - g.padding + ky;
            if (iy < 0 || iy >= x.h) continue;
            for (int ox = 0; ox < dy.w; ++ox) {
                const int ix = ox * g.stride - g.padding + kx;
                if (ix < 0 || ix >= x.w) continue;
                acc += dy.at(n, oc, oy, ox) * x.at(n, ic, iy, ix);
            }
        }
    return acc;
}

inline double conv_db_elem(const Tensor4& dy, int oc) {
    double acc = 0.0;
    for (int n = 0; n < dy.n; ++n)
        for (int oy = 0; oy < dy.h; ++oy)
            for (int ox = 0; ox < dy.w; ++ox)
                acc += dy.at(n, oc, oy, ox);
    return acc;
}

// Transposed convolution, gather form: output pixel (oy, ox) collects every
// input pixel (iy, ix) with iy*stride - padding + ky == oy.
inline double tconv_y_elem(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                           const ConvGeom& g, int n, int oc, int oy, int ox) {
    const int k = g.kernel;
    double acc = b[oc];
    for (int ic = 0; ic < g.in_c; ++ic) {
        const std::size_t wbase = ((static_cast<std::size_t>(ic) * g.out_c + oc) * k) * k;
        for (int ky = 0; ky < k; ++ky) {
            const int num_y = oy + g.padding - ky;
            if (num_y < 0 || num_y % g.stride != 0) continue;
            const int iy = num_y / g.stride;
            if (iy >= x.h) continue;
            for (int kx = 0; kx < k; ++kx) {
                const int num_x = ox + g.padding - kx;
                if (num_x < 0 || num_x % g.stride != 0) continue;
                const int ix = num_x / g.stride;
                if (ix >= x.w) continue;
                acc += x.at(n, ic, iy, ix) * w[wbase + static_cast<std::size_t>(ky) * k + kx];
            }
        }
    }
    return acc;
}

inline double tconv_dx_elem(const Tensor4& dy, std::span<const double> w, const ConvGeom& g,
                            int n, int ic, int iy, int ix) {
    const int k = g.kernel;
    double acc = 0.0;
    for (int oc = 0; oc < g.out_c; ++oc) {
        const std::size_t wbase = ((static_cast<std::size_t>(ic) * g.out_c + oc) * k) * k;
        for (int ky = 0; ky < k; ++ky) {
            const int oy = iy * g.stride - g.padding + ky;
            if (oy < 0 || oy >= dy.h) continue;
            for (int kx = 0; kx < k; ++kx) {
                const int ox = ix * g.stride - g.padding + kx;
                if (ox < 0 || ox >= dy.w) continue;
                acc += dy.at(n, oc, oy, ox) * w[wbase + static_cast<std::size_t>(ky) * k + kx];
            }
        }
    }
    return acc;
}

inline double tconv_dw_elem(const Tensor4& x, const Tensor4& dy, const ConvGeom& g,
                            int ic, int oc, int ky, int kx) {
    double acc = 0.0;
    for (int n = 0; n < x.n; ++n)
        for (int iy = 0; iy < x.h; ++iy) {
            const int oy = iy * g.stride - g.padding + ky;
            if (oy < 0 || oy >= dy.h) continue;
            for (int ix = 0; ix < x.w; ++ix) {
                const int ox = ix * g.stride - g.padding + kx;
                if (ox < 0 || ox >= dy.w) continue;
                acc += x.at(n, ic, iy, ix) * dy.at(n, oc, oy, ox);
            }
        }
    return acc;
}

inline double dense_y_elem(const Tensor4& x, std::span<const double> w, std::span<const double> b,
                           int in_f, int n, int o) {
    const std::size_t xbase = static_cast<std::size_t>(n) * in_f;
    const std::size_t wbase = static_cast<std::size_t>(o) * in_f;
    double acc = b[o];
    for (int i = 0; i < in_f; ++i)
        acc += x.data[xbase + i] * w[wbase + i];
    return acc;
}

inline double dense_dx_elem(const Tensor4& dy, std::span<const double> w, int in_f, int out_f,
                            int n, int i) {
    const std::size_t ybase = static_cast<std::size_t>(n) * out_f;
    double acc = 0.0;
    for (int o = 0; o < out_f; ++o)
        acc += dy.data[ybase + o] * w[static_cast<std::size_t>(o) * in_f + i];
    return acc;
}

inline double dense_dw_elem(const Tensor4& x, const Tensor4& dy, int in_f, int out_f, int o, int i) {
    double acc = 0.0;
    for (int n = 0; n < x.n; ++n)
        acc += dy.data[static_cast<std::size_t>(n) * out_f + o] *
               x.data[static_cast<std::size_t>(n) * in_f + i];
    return acc;
}

inline double dense_db_elem(const Tensor4& dy, int out_f, int o) {
    double acc = 0.0;
    for (int n = 0; n < dy.n; ++n)
        acc += dy.data[static_cast<std::size_t>(n) * out_f + o];
    return acc;
}

inline double leaky_relu_elem(double v, double slope) { return v > 0.0 ? v : slope * v; }
inline double leaky_relu_grad_elem(double v, double g, double slope) {
    return v > 0.0 ? g : slope * g;
}
inline double sigmoid_elem(double v) { return 1.0 / (1.0 + std::exp(-v)); }
inline double sigmoid_grad_elem(double v, double g) {
    double s = sigmoid_elem(v);
    return g * s * (1.0 - s);
}

} // namespace oaae::kernels::detail
