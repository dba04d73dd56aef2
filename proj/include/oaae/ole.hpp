#pragma once

#include <utility>
#include <vector>

#include "oaae/linalg.hpp"

namespace oaae {

// A minibatch of latent codes: one column per example, one row per latent
// dimension, with a class label for every column.
struct LabeledLatentBatch {
    Matrix latents;          // d x m
    std::vector<int> labels; // length m, values >= 0
};

struct OleConfig {
    double delta_margin = 1.0;  // floor inside max(delta, |Y_c|_*)
    double sv_threshold = 1e-3; // singular values <= this are dropped from subgradients
};

void validate(const LabeledLatentBatch& batch);
void validate(const OleConfig& cfg);

// Splits the batch column-wise by class label, ascending label order,
// preserving the original within-batch column order inside each part.
std::vector<std::pair<int, Matrix>> partition_by_class(const LabeledLatentBatch& batch);

// sum_c max(delta, |Y_c|_*) - |Y|_*, over the classes present in the batch.
double ole_loss(const LabeledLatentBatch& batch, const OleConfig& cfg);

// Subgradient of ole_loss with respect to the latent matrix: per-class
// nuclear-norm subgradients scattered into their columns (only where the
// hinge is active, i.e. |Y_c|_* > delta), minus the full-batch subgradient.
Matrix ole_grad(const LabeledLatentBatch& batch, const OleConfig& cfg);

} // namespace oaae
