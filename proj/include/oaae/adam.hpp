#pragma once

#include <span>
#include <vector>

#include "oaae/network.hpp"

namespace oaae {

struct AdamConfig {
    double learning_rate = 0.0004;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First/second moment accumulators, one pair per parameter tensor.
struct AdamState {
    AdamConfig cfg;
    long step = 0;
    std::vector<std::vector<double>> m, v;

    static AdamState for_params(std::span<const std::span<const double>> params, AdamConfig cfg);
    static AdamState for_network(const Network& net, AdamConfig cfg);
};

// One bias-corrected Adam update, in place.
void adam_step(std::span<std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state);

// Convenience wrapper applying a GradBuffer to a network's parameters.
void adam_update(Network& net, const GradBuffer& grads, AdamState& state);

} // namespace oaae
