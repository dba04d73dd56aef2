#include "oaae/network.hpp"

#include <cmath>

#include "oaae/errors.hpp"

namespace oaae {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::conv: return "conv";
        case LayerKind::tconv: return "tconv";
        case LayerKind::dense: return "dense";
        case LayerKind::leaky_relu: return "leaky_relu";
        case LayerKind::sigmoid: return "sigmoid";
        case LayerKind::reshape: return "reshape";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "conv") return LayerKind::conv;
    if (name == "tconv") return LayerKind::tconv;
    if (name == "dense") return LayerKind::dense;
    if (name == "leaky_relu") return LayerKind::leaky_relu;
    if (name == "sigmoid") return LayerKind::sigmoid;
    if (name == "reshape") return LayerKind::reshape;
    throw ParseError("unknown layer kind: " + name);
}

LayerSpec LayerSpec::conv2d(int out_channels, int kernel, int stride, int padding) {
    LayerSpec s;
    s.kind = LayerKind::conv;
    s.out_channels = out_channels;
    s.kernel = kernel;
    s.stride = stride;
    s.padding = padding;
    return s;
}

LayerSpec LayerSpec::tconv2d(int out_channels, int kernel, int stride, int padding, int out_padding) {
    LayerSpec s;
    s.kind = LayerKind::tconv;
    s.out_channels = out_channels;
    s.kernel = kernel;
    s.stride = stride;
    s.padding = padding;
    s.out_padding = out_padding;
    return s;
}

LayerSpec LayerSpec::dense(int out_features) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.out_features = out_features;
    return s;
}

LayerSpec LayerSpec::leaky_relu(double slope) {
    LayerSpec s;
    s.kind = LayerKind::leaky_relu;
    s.slope = slope;
    return s;
}

LayerSpec LayerSpec::sigmoid() {
    LayerSpec s;
    s.kind = LayerKind::sigmoid;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::reshape;
    s.target = Shape3{0, 1, 1}; // channel count resolved at chain time
    return s;
}

LayerSpec LayerSpec::reshape(Shape3 target) {
    LayerSpec s;
    s.kind = LayerKind::reshape;
    s.target = target;
    return s;
}

kernels::ConvGeom NetLayer::geom() const {
    kernels::ConvGeom g;
    g.in_c = in_shape.c;
    g.out_c = spec.out_channels;
    g.kernel = spec.kernel;
    g.stride = spec.stride;
    g.padding = spec.padding;
    g.out_padding = spec.out_padding;
    return g;
}

void GradBuffer::zero() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

namespace {

[[noreturn]] void chain_error(const std::string& net, std::size_t layer, const std::string& what) {
    throw ConfigError("network '" + net + "', layer " + std::to_string(layer) + ": " + what);
}

} // namespace

Network::Network(std::string name, Shape3 input_shape, std::vector<LayerSpec> specs)
    : name_(std::move(name)), input_shape_(input_shape) {
    if (input_shape_.c <= 0 || input_shape_.h <= 0 || input_shape_.w <= 0)
        throw ConfigError("network '" + name_ + "': invalid input shape");

    Shape3 cur = input_shape_;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        NetLayer layer;
        layer.spec = s;
        layer.in_shape = cur;
        switch (s.kind) {
            case LayerKind::conv: {
                if (s.kernel <= 0 || s.stride <= 0 || s.out_channels <= 0)
                    chain_error(name_, i, "bad conv geometry");
                int oh = kernels::conv_out_extent(cur.h, layer.geom());
                int ow = kernels::conv_out_extent(cur.w, layer.geom());
                if (oh <= 0 || ow <= 0)
                    chain_error(name_, i, "conv output collapses to zero extent");
                layer.out_shape = Shape3{s.out_channels, oh, ow};
                layer.weights.assign(static_cast<std::size_t>(s.out_channels) * cur.c * s.kernel * s.kernel, 0.0);
                layer.bias.assign(s.out_channels, 0.0);
                break;
            }
            case LayerKind::tconv: {
                if (s.kernel <= 0 || s.stride <= 0 || s.out_channels <= 0 || s.out_padding < 0)
                    chain_error(name_, i, "bad tconv geometry");
                if (s.out_padding >= s.stride)
                    chain_error(name_, i, "tconv out_padding must be < stride");
                int oh = kernels::tconv_out_extent(cur.h, layer.geom());
                int ow = kernels::tconv_out_extent(cur.w, layer.geom());
                if (oh <= 0 || ow <= 0)
                    chain_error(name_, i, "tconv output collapses to zero extent");
                layer.out_shape = Shape3{s.out_channels, oh, ow};
                layer.weights.assign(static_cast<std::size_t>(cur.c) * s.out_channels * s.kernel * s.kernel, 0.0);
                layer.bias.assign(s.out_channels, 0.0);
                break;
            }
            case LayerKind::dense: {
                if (s.out_features <= 0) chain_error(name_, i, "bad dense width");
                if (cur.h != 1 || cur.w != 1)
                    chain_error(name_, i, "dense layer requires flattened input (insert flatten)");
                layer.out_shape = Shape3{s.out_features, 1, 1};
                layer.weights.assign(static_cast<std::size_t>(s.out_features) * cur.features(), 0.0);
                layer.bias.assign(s.out_features, 0.0);
                break;
            }
            case LayerKind::leaky_relu:
            case LayerKind::sigmoid:
                layer.out_shape = cur;
                break;
            case LayerKind::reshape: {
                Shape3 target = s.target;
                if (target.c == 0) target.c = cur.features(); // flatten
                if (target.features() != cur.features())
                    chain_error(name_, i, "reshape changes the number of features");
                layer.spec.target = target;
                layer.out_shape = target;
                break;
            }
        }
        cur = layer.out_shape;
        layers_.push_back(std::move(layer));
    }
}

Shape3 Network::output_shape() const {
    return layers_.empty() ? input_shape_ : layers_.back().out_shape;
}

std::size_t Network::param_count() const {
    std::size_t total = 0;
    for (const auto& l : layers_) total += l.weights.size() + l.bias.size();
    return total;
}

void Network::init_params(Rng& rng) {
    for (auto& l : layers_) {
        if (l.weights.empty()) continue;
        double fan_in = 0.0;
        switch (l.spec.kind) {
            case LayerKind::conv:
            case LayerKind::tconv:
                fan_in = static_cast<double>(l.in_shape.c) * l.spec.kernel * l.spec.kernel;
                break;
            case LayerKind::dense:
                fan_in = static_cast<double>(l.in_shape.features());
                break;
            default:
                break;
        }
        const double scale = 1.0 / std::sqrt(fan_in);
        for (double& w : l.weights) w = rng.normal(0.0, scale);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    ++version_;
}

void Network::set_layer_params(std::size_t i, std::vector<double> weights, std::vector<double> bias) {
    if (i >= layers_.size())
        throw ConfigError("network '" + name_ + "': no layer " + std::to_string(i));
    NetLayer& l = layers_[i];
    if (weights.size() != l.weights.size() || bias.size() != l.bias.size())
        throw ConfigError("network '" + name_ + "', layer " + std::to_string(i) +
                          ": parameter size mismatch");
    l.weights = std::move(weights);
    l.bias = std::move(bias);
    ++version_;
}

std::vector<std::span<double>> Network::param_views() {
    ++version_;
    std::vector<std::span<double>> v;
    for (auto& l : layers_) {
        if (l.weights.empty()) continue;
        v.emplace_back(l.weights);
        v.emplace_back(l.bias);
    }
    return v;
}

std::vector<std::span<const double>> Network::param_views() const {
    std::vector<std::span<const double>> v;
    for (const auto& l : layers_) {
        if (l.weights.empty()) continue;
        v.emplace_back(l.weights);
        v.emplace_back(l.bias);
    }
    return v;
}

std::vector<double> Network::flat_params() const {
    std::vector<double> out;
    out.reserve(param_count());
    for (const auto& l : layers_) {
        out.insert(out.end(), l.weights.begin(), l.weights.end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

void Network::check_input(const Tensor4& x) const {
    if (x.c != input_shape_.c || x.h != input_shape_.h || x.w != input_shape_.w)
        throw ConfigError("network '" + name_ + "': input shape (" + std::to_string(x.c) + "," +
                          std::to_string(x.h) + "," + std::to_string(x.w) +
                          ") does not match declared (" + std::to_string(input_shape_.c) + "," +
                          std::to_string(input_shape_.h) + "," + std::to_string(input_shape_.w) + ")");
}

Tensor4 Network::forward(const Tensor4& x) const {
    ForwardCache cache;
    return forward(x, cache);
}

Tensor4 Network::forward(const Tensor4& x, ForwardCache& cache) const {
    check_input(x);
    cache.layer_inputs.clear();
    cache.layer_inputs.reserve(layers_.size());
    cache.net_name = name_;
    cache.net_version = version_;

    Tensor4 cur = x;
    for (const auto& l : layers_) {
        cache.layer_inputs.push_back(cur);
        Tensor4 next(cur.n, l.out_shape.c, l.out_shape.h, l.out_shape.w);
        switch (l.spec.kind) {
            case LayerKind::conv:
                kernels::conv_forward(cur, l.weights, l.bias, l.geom(), next);
                break;
            case LayerKind::tconv:
                kernels::tconv_forward(cur, l.weights, l.bias, l.geom(), next);
                break;
            case LayerKind::dense:
                kernels::dense_forward(cur, l.weights, l.bias, l.dense_in(), l.dense_out(), next);
                break;
            case LayerKind::leaky_relu:
                kernels::leaky_relu_forward(cur, l.spec.slope, next);
                break;
            case LayerKind::sigmoid:
                kernels::sigmoid_forward(cur, next);
                break;
            case LayerKind::reshape:
                next.data = cur.data;
                break;
        }
        cur = std::move(next);
    }
    cache.output = cur;
    return cur;
}

GradBuffer Network::make_grad_buffer() const {
    GradBuffer g;
    g.weights.reserve(layers_.size());
    g.bias.reserve(layers_.size());
    for (const auto& l : layers_) {
        g.weights.emplace_back(l.weights.size(), 0.0);
        g.bias.emplace_back(l.bias.size(), 0.0);
    }
    return g;
}

Tensor4 Network::backward(const ForwardCache& cache, const Tensor4& output_grad,
                          GradBuffer& grads) const {
    if (cache.net_name != name_ || cache.net_version != version_)
        throw NumericError("network '" + name_ +
                           "': backward called with a stale or mismatched forward cache");
    if (cache.layer_inputs.size() != layers_.size())
        throw NumericError("network '" + name_ + "': forward cache is incomplete");
    if (!output_grad.same_shape(cache.output))
        throw NumericError("network '" + name_ + "': output gradient shape mismatch");
    if (grads.weights.size() != layers_.size())
        throw NumericError("network '" + name_ + "': gradient buffer layout mismatch");

    Tensor4 dy = output_grad;
    for (std::size_t idx = layers_.size(); idx-- > 0;) {
        const NetLayer& l = layers_[idx];
        const Tensor4& x = cache.layer_inputs[idx];
        Tensor4 dx(x.n, x.c, x.h, x.w);
        switch (l.spec.kind) {
            case LayerKind::conv: {
                std::vector<double> dw(l.weights.size(), 0.0), db(l.bias.size(), 0.0);
                kernels::conv_backward_params(x, dy, l.geom(), dw, db);
                kernels::conv_backward_input(dy, l.weights, l.geom(), dx);
                for (std::size_t i = 0; i < dw.size(); ++i) grads.weights[idx][i] += dw[i];
                for (std::size_t i = 0; i < db.size(); ++i) grads.bias[idx][i] += db[i];
                break;
            }
            case LayerKind::tconv: {
                std::vector<double> dw(l.weights.size(), 0.0), db(l.bias.size(), 0.0);
                kernels::tconv_backward_params(x, dy, l.geom(), dw, db);
                kernels::tconv_backward_input(dy, l.weights, l.geom(), dx);
                for (std::size_t i = 0; i < dw.size(); ++i) grads.weights[idx][i] += dw[i];
                for (std::size_t i = 0; i < db.size(); ++i) grads.bias[idx][i] += db[i];
                break;
            }
            case LayerKind::dense: {
                std::vector<double> dw(l.weights.size(), 0.0), db(l.bias.size(), 0.0);
                kernels::dense_backward_params(x, dy, l.dense_in(), l.dense_out(), dw, db);
                kernels::dense_backward_input(dy, l.weights, l.dense_in(), l.dense_out(), dx);
                for (std::size_t i = 0; i < dw.size(); ++i) grads.weights[idx][i] += dw[i];
                for (std::size_t i = 0; i < db.size(); ++i) grads.bias[idx][i] += db[i];
                break;
            }
            case LayerKind::leaky_relu:
                kernels::leaky_relu_backward(x, dy, l.spec.slope, dx);
                break;
            case LayerKind::sigmoid:
                kernels::sigmoid_backward(x, dy, dx);
                break;
            case LayerKind::reshape:
                dx.data = dy.data;
                break;
        }
        dy = std::move(dx);
    }
    return dy;
}

} // namespace oaae
