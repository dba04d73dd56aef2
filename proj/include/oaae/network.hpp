#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oaae/kernels.hpp"
#include "oaae/rng.hpp"
#include "oaae/tensor.hpp"

namespace oaae {

struct Shape3 {
    int c = 0, h = 0, w = 0;
    int features() const { return c * h * w; }
    bool operator==(const Shape3&) const = default;
};

enum class LayerKind { conv, tconv, dense, leaky_relu, sigmoid, reshape };

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

// Declarative layer description; input sizes are derived by shape chaining
// when the network is assembled.
struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    int out_channels = 0;                              // conv / tconv
    int kernel = 0, stride = 1, padding = 0, out_padding = 0;
    int out_features = 0;                              // dense
    double slope = 0.2;                                // leaky_relu
    Shape3 target;                                     // reshape

    static LayerSpec conv2d(int out_channels, int kernel, int stride, int padding);
    static LayerSpec tconv2d(int out_channels, int kernel, int stride, int padding, int out_padding);
    static LayerSpec dense(int out_features);
    static LayerSpec leaky_relu(double slope = 0.2);
    static LayerSpec sigmoid();
    static LayerSpec flatten();                        // reshape to (features, 1, 1)
    static LayerSpec reshape(Shape3 target);
};

struct NetLayer {
    LayerSpec spec;
    Shape3 in_shape, out_shape;
    std::vector<double> weights, bias; // empty for parameterless layers
    kernels::ConvGeom geom() const;
    int dense_in() const { return in_shape.features(); }
    int dense_out() const { return spec.out_features; }
};

// Activations saved by a forward pass for the matching backward pass. The
// cache is stamped with the network's name and parameter version; backward
// refuses a cache taken before the parameters changed.
struct ForwardCache {
    std::vector<Tensor4> layer_inputs;
    Tensor4 output;
    std::string net_name;
    std::uint64_t net_version = ~0ull;
};

// Parameter gradients, aligned with the network's layer list.
struct GradBuffer {
    std::vector<std::vector<double>> weights, bias;
    void zero();
};

class Network {
public:
    Network() = default;
    // Validates that the specs chain consistently from the input shape;
    // throws ConfigError naming the offending layer index otherwise.
    Network(std::string name, Shape3 input_shape, std::vector<LayerSpec> specs);

    const std::string& name() const { return name_; }
    Shape3 input_shape() const { return input_shape_; }
    Shape3 output_shape() const;
    std::size_t num_layers() const { return layers_.size(); }
    const NetLayer& layer(std::size_t i) const { return layers_[i]; }
    std::uint64_t version() const { return version_; }
    std::size_t param_count() const;

    // Zero biases, weights ~ N(0, 1/sqrt(fan_in)).
    void init_params(Rng& rng);

    // Direct parameter access for checkpoint loading and test stubs.
    void set_layer_params(std::size_t i, std::vector<double> weights, std::vector<double> bias);

    std::vector<std::span<double>> param_views();             // mutation entry point: bumps version
    std::vector<std::span<const double>> param_views() const;
    std::vector<double> flat_params() const;

    Tensor4 forward(const Tensor4& x) const;
    Tensor4 forward(const Tensor4& x, ForwardCache& cache) const;

    GradBuffer make_grad_buffer() const;
    // Accumulates parameter gradients into grads and returns the input gradient.
    Tensor4 backward(const ForwardCache& cache, const Tensor4& output_grad, GradBuffer& grads) const;

private:
    void check_input(const Tensor4& x) const;

    std::string name_;
    Shape3 input_shape_;
    std::vector<NetLayer> layers_;
    std::uint64_t version_ = 0;
};

} // namespace oaae
