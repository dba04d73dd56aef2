#pragma once

#include <span>

#include "oaae/tensor.hpp"

namespace oaae {

// Mean squared error over every element of the batch, and its gradient with
// respect to the reconstruction.
double mse(const Tensor4& x, const Tensor4& xhat);
Tensor4 mse_grad(const Tensor4& x, const Tensor4& xhat);

// Training reconstruction loss: squared L2 norm of the per-image residual,
// averaged over the batch. Scales with the pixel count, which keeps the
// reconstruction term dominant against the unit-scale adversarial losses.
double recon_sse(const Tensor4& x, const Tensor4& xhat);
Tensor4 recon_sse_grad(const Tensor4& x, const Tensor4& xhat);

// Binary cross-entropy on a raw logit, numerically stable form.
double bce_logit(double logit, double target);
double bce_logit_grad(double logit, double target); // d/dlogit = sigmoid(logit) - target

// Batch mean of bce_logit over (n,1,1,1) logits, all against the same target.
double bce_logit_batch(const Tensor4& logits, double target);
Tensor4 bce_logit_batch_grad(const Tensor4& logits, double target);

// Softmax cross-entropy for one example and for a batch (mean).
double cross_entropy(std::span<const double> logits, int label);
void cross_entropy_grad(std::span<const double> logits, int label, std::span<double> out);
double cross_entropy_batch(const Tensor4& logits, std::span<const int> labels);
Tensor4 cross_entropy_batch_grad(const Tensor4& logits, std::span<const int> labels);

} // namespace oaae
