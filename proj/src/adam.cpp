#include "oaae/adam.hpp"

#include <cmath>

#include "oaae/errors.hpp"

namespace oaae {

AdamState AdamState::for_params(std::span<const std::span<const double>> params, AdamConfig cfg) {
    AdamState st;
    st.cfg = cfg;
    for (const auto& p : params) {
        st.m.emplace_back(p.size(), 0.0);
        st.v.emplace_back(p.size(), 0.0);
    }
    return st;
}

AdamState AdamState::for_network(const Network& net, AdamConfig cfg) {
    auto views = net.param_views();
    return for_params(std::span<const std::span<const double>>(views), cfg);
}

void adam_step(std::span<std::span<double>> params,
               std::span<const std::span<const double>> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw NumericError("adam_step: parameter/gradient/state layout mismatch");

    state.step += 1;
    const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    const double lr = state.cfg.learning_rate, eps = state.cfg.epsilon;

    for (std::size_t t = 0; t < params.size(); ++t) {
        auto p = params[t];
        auto g = grads[t];
        if (p.size() != g.size() || p.size() != state.m[t].size())
            throw NumericError("adam_step: tensor size mismatch at index " + std::to_string(t));
        auto& m = state.m[t];
        auto& v = state.v[t];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

void adam_update(Network& net, const GradBuffer& grads, AdamState& state) {
    auto params = net.param_views();
    std::vector<std::span<const double>> gviews;
    for (std::size_t i = 0; i < grads.weights.size(); ++i) {
        if (grads.weights[i].empty()) continue;
        gviews.emplace_back(grads.weights[i]);
        gviews.emplace_back(grads.bias[i]);
    }
    adam_step(std::span<std::span<double>>(params),
              std::span<const std::span<const double>>(gviews), state);
}

} // namespace oaae
