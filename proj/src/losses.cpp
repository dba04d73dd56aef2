#include "oaae/losses.hpp"

#include <algorithm>
#include <cmath>

#include "oaae/errors.hpp"

namespace oaae {

double mse(const Tensor4& x, const Tensor4& xhat) {
    if (!x.same_shape(xhat)) throw NumericError("mse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x.data[i] - xhat.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

Tensor4 mse_grad(const Tensor4& x, const Tensor4& xhat) {
    if (!x.same_shape(xhat)) throw NumericError("mse_grad: shape mismatch");
    Tensor4 g(x.n, x.c, x.h, x.w);
    const double scale = 2.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        g.data[i] = scale * (xhat.data[i] - x.data[i]);
    return g;
}

double recon_sse(const Tensor4& x, const Tensor4& xhat) {
    if (!x.same_shape(xhat)) throw NumericError("recon_sse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x.data[i] - xhat.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(x.n);
}

Tensor4 recon_sse_grad(const Tensor4& x, const Tensor4& xhat) {
    if (!x.same_shape(xhat)) throw NumericError("recon_sse_grad: shape mismatch");
    Tensor4 g(x.n, x.c, x.h, x.w);
    const double scale = 2.0 / static_cast<double>(x.n);
    for (std::size_t i = 0; i < x.size(); ++i)
        g.data[i] = scale * (xhat.data[i] - x.data[i]);
    return g;
}

double bce_logit(double logit, double target) {
    // max(l,0) - l*t + log(1 + exp(-|l|))
    return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

double bce_logit_grad(double logit, double target) {
    return 1.0 / (1.0 + std::exp(-logit)) - target;
}

double bce_logit_batch(const Tensor4& logits, double target) {
    if (logits.features() != 1) throw NumericError("bce_logit_batch: expected a single logit per example");
    double acc = 0.0;
    for (int n = 0; n < logits.n; ++n) acc += bce_logit(logits.data[n], target);
    return acc / static_cast<double>(logits.n);
}

Tensor4 bce_logit_batch_grad(const Tensor4& logits, double target) {
    if (logits.features() != 1) throw NumericError("bce_logit_batch_grad: expected a single logit per example");
    Tensor4 g(logits.n, logits.c, logits.h, logits.w);
    const double inv_n = 1.0 / static_cast<double>(logits.n);
    for (int n = 0; n < logits.n; ++n)
        g.data[n] = bce_logit_grad(logits.data[n], target) * inv_n;
    return g;
}

double cross_entropy(std::span<const double> logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw NumericError("cross_entropy: label out of range");
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - mx);
    return mx + std::log(sum) - logits[label];
}

void cross_entropy_grad(std::span<const double> logits, int label, std::span<double> out) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - mx);
    for (std::size_t i = 0; i < logits.size(); ++i)
        out[i] = std::exp(logits[i] - mx) / sum;
    out[label] -= 1.0;
}

double cross_entropy_batch(const Tensor4& logits, std::span<const int> labels) {
    if (static_cast<std::size_t>(logits.n) != labels.size())
        throw NumericError("cross_entropy_batch: label count mismatch");
    const int k = logits.features();
    double acc = 0.0;
    for (int n = 0; n < logits.n; ++n) {
        std::span<const double> row(logits.data.data() + static_cast<std::size_t>(n) * k, k);
        acc += cross_entropy(row, labels[n]);
    }
    return acc / static_cast<double>(logits.n);
}

Tensor4 cross_entropy_batch_grad(const Tensor4& logits, std::span<const int> labels) {
    if (static_cast<std::size_t>(logits.n) != labels.size())
        throw NumericError("cross_entropy_batch_grad: label count mismatch");
    const int k = logits.features();
    Tensor4 g(logits.n, logits.c, logits.h, logits.w);
    const double inv_n = 1.0 / static_cast<double>(logits.n);
    for (int n = 0; n < logits.n; ++n) {
        std::span<const double> row(logits.data.data() + static_cast<std::size_t>(n) * k, k);
        std::span<double> grow(g.data.data() + static_cast<std::size_t>(n) * k, k);
        cross_entropy_grad(row, labels[n], grow);
        for (double& v : grow) v *= inv_n;
    }
    return g;
}

} // namespace oaae
