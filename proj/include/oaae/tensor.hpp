#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "oaae/errors.hpp"

namespace oaae {

// Batched image / feature-map tensor, NCHW layout. Latent vectors travel as
// (n, dim, 1, 1). Double precision throughout; checkpoints quantize to
// 32-bit floats at the file boundary.
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_, double fill = 0.0)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

    std::size_t size() const { return data.size(); }
    int features() const { return c * h * w; }

    std::size_t index(int i, int ch, int y, int x) const {
        return ((static_cast<std::size_t>(i) * c + ch) * h + y) * w + x;
    }
    double& at(int i, int ch, int y, int x) { return data[index(i, ch, y, x)]; }
    double at(int i, int ch, int y, int x) const { return data[index(i, ch, y, x)]; }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

} // namespace oaae
