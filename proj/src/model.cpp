#include "oaae/model.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "oaae/errors.hpp"

namespace oaae {

using ordered_json = nlohmann::ordered_json;

std::vector<Network*> ModelBundle::networks() {
    return {&encoder, &decoder, &latent_discriminator, &image_discriminator, &classifier};
}

std::vector<const Network*> ModelBundle::networks() const {
    return {&encoder, &decoder, &latent_discriminator, &image_discriminator, &classifier};
}

namespace {

// Encoder halves the spatial extent three times; the decoder inverts each
// stage with a transposed conv whose out_padding restores the exact size.
int halve(int n) { return (n + 2 - 3) / 2 + 1; }
int invert_out_padding(int target, int in) { return target - ((in - 1) * 2 - 2 + 3); }

} // namespace

ModelBundle build_model(const ModelConfig& cfg, Rng& init_rng) {
    if (cfg.latent_dim <= 0 || cfg.num_classes <= 0 || cfg.base_channels <= 0 || cfg.fc_hidden <= 0)
        throw ConfigError("model config: all sizes must be positive");
    const Shape3 img = cfg.image_shape;
    if (img.c <= 0 || img.h < 8 || img.w < 8)
        throw ConfigError("model config: image sides must be at least 8 pixels");

    const int c1 = cfg.base_channels, c2 = 2 * cfg.base_channels, c3 = 4 * cfg.base_channels;
    const int h1 = halve(img.h), h2 = halve(h1), h3 = halve(h2);
    const int w1 = halve(img.w), w2 = halve(w1), w3 = halve(w2);
    const int op_h3 = invert_out_padding(h2, h3), op_h2 = invert_out_padding(h1, h2),
              op_h1 = invert_out_padding(img.h, h1);
    const int op_w3 = invert_out_padding(w2, w3), op_w2 = invert_out_padding(w1, w2),
              op_w1 = invert_out_padding(img.w, w1);
    if (op_h3 != op_w3 || op_h2 != op_w2 || op_h1 != op_w1)
        throw ConfigError("model config: non-square images with mismatched stage paddings are unsupported");

    ModelBundle m;
    m.latent_dim = cfg.latent_dim;
    m.num_classes = cfg.num_classes;
    m.image_shape = img;

    m.encoder = Network("encoder", img,
                        {LayerSpec::conv2d(c1, 3, 2, 1), LayerSpec::leaky_relu(),
                         LayerSpec::conv2d(c2, 3, 2, 1), LayerSpec::leaky_relu(),
                         LayerSpec::conv2d(c3, 3, 2, 1), LayerSpec::leaky_relu(),
                         LayerSpec::flatten(), LayerSpec::dense(cfg.fc_hidden),
                         LayerSpec::leaky_relu(), LayerSpec::dense(cfg.latent_dim)});

    m.decoder = Network("decoder", Shape3{cfg.latent_dim, 1, 1},
                        {LayerSpec::dense(cfg.fc_hidden), LayerSpec::leaky_relu(),
                         LayerSpec::dense(c3 * h3 * w3), LayerSpec::leaky_relu(),
                         LayerSpec::reshape(Shape3{c3, h3, w3}),
                         LayerSpec::tconv2d(c2, 3, 2, 1, op_h3), LayerSpec::leaky_relu(),
                         LayerSpec::tconv2d(c1, 3, 2, 1, op_h2), LayerSpec::leaky_relu(),
                         LayerSpec::tconv2d(img.c, 3, 2, 1, op_h1), LayerSpec::sigmoid()});

    m.latent_discriminator = Network("latent_discriminator", Shape3{cfg.latent_dim, 1, 1},
                                     {LayerSpec::dense(64), LayerSpec::leaky_relu(),
                                      LayerSpec::dense(32), LayerSpec::leaky_relu(),
                                      LayerSpec::dense(1)});

    m.image_discriminator = Network("image_discriminator", img,
                                    {LayerSpec::conv2d(c1, 3, 2, 1), LayerSpec::leaky_relu(),
                                     LayerSpec::conv2d(c2, 3, 2, 1), LayerSpec::leaky_relu(),
                                     LayerSpec::conv2d(c3, 3, 2, 1), LayerSpec::leaky_relu(),
                                     LayerSpec::flatten(), LayerSpec::dense(1)});

    m.classifier = Network("classifier", Shape3{cfg.latent_dim, 1, 1},
                           {LayerSpec::dense(64), LayerSpec::leaky_relu(),
                            LayerSpec::dense(cfg.num_classes)});

    for (Network* net : m.networks()) net->init_params(init_rng);
    return m;
}

Matrix latents_to_matrix(const Tensor4& latents) {
    if (latents.h != 1 || latents.w != 1)
        throw NumericError("latents_to_matrix: expected (n, dim, 1, 1) tensor");
    Matrix y(latents.c, latents.n);
    for (int j = 0; j < latents.n; ++j)
        for (int i = 0; i < latents.c; ++i)
            y(i, j) = latents.at(j, i, 0, 0);
    return y;
}

Tensor4 matrix_to_latents(const Matrix& m) {
    Tensor4 t(static_cast<int>(m.cols()), static_cast<int>(m.rows()), 1, 1);
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i)
            t.at(static_cast<int>(j), static_cast<int>(i), 0, 0) = m(i, j);
    return t;
}

namespace {

constexpr char kMagic[4] = {'O', 'A', 'A', 'E'};
constexpr unsigned char kVersion = 1;

ordered_json layer_spec_json(const LayerSpec& s) {
    ordered_json j;
    j["kind"] = layer_kind_name(s.kind);
    switch (s.kind) {
        case LayerKind::conv:
        case LayerKind::tconv:
            j["out_channels"] = s.out_channels;
            j["kernel"] = s.kernel;
            j["stride"] = s.stride;
            j["padding"] = s.padding;
            if (s.kind == LayerKind::tconv) j["out_padding"] = s.out_padding;
            break;
        case LayerKind::dense:
            j["out_features"] = s.out_features;
            break;
        case LayerKind::leaky_relu:
            j["slope"] = s.slope;
            break;
        case LayerKind::sigmoid:
            break;
        case LayerKind::reshape:
            j["target"] = {s.target.c, s.target.h, s.target.w};
            break;
    }
    return j;
}

LayerSpec layer_spec_from_json(const ordered_json& j) {
    LayerKind kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (kind) {
        case LayerKind::conv:
            return LayerSpec::conv2d(j.at("out_channels"), j.at("kernel"), j.at("stride"),
                                     j.at("padding"));
        case LayerKind::tconv:
            return LayerSpec::tconv2d(j.at("out_channels"), j.at("kernel"), j.at("stride"),
                                      j.at("padding"), j.at("out_padding"));
        case LayerKind::dense:
            return LayerSpec::dense(j.at("out_features"));
        case LayerKind::leaky_relu:
            return LayerSpec::leaky_relu(j.at("slope"));
        case LayerKind::sigmoid:
            return LayerSpec::sigmoid();
        case LayerKind::reshape: {
            auto t = j.at("target");
            return LayerSpec::reshape(Shape3{t.at(0), t.at(1), t.at(2)});
        }
    }
    throw ParseError("checkpoint manifest: unreachable layer kind");
}

void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32_le(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32_le(out, bits);
}

} // namespace

void save_checkpoint(const ModelBundle& m, const std::string& path) {
    ordered_json manifest;
    manifest["latent_dim"] = m.latent_dim;
    manifest["num_classes"] = m.num_classes;
    manifest["image_shape"] = {m.image_shape.c, m.image_shape.h, m.image_shape.w};
    manifest["networks"] = ordered_json::array();

    for (const Network* net : m.networks()) {
        ordered_json jn;
        jn["name"] = net->name();
        jn["input_shape"] = {net->input_shape().c, net->input_shape().h, net->input_shape().w};
        jn["layers"] = ordered_json::array();
        for (std::size_t i = 0; i < net->num_layers(); ++i) {
            const NetLayer& l = net->layer(i);
            ordered_json jl = layer_spec_json(l.spec);
            jl["weight_count"] = l.weights.size();
            jl["bias_count"] = l.bias.size();
            jn["layers"].push_back(jl);
        }
        manifest["networks"].push_back(jn);
    }

    std::string blob;
    blob.append(kMagic, 4);
    blob.push_back(static_cast<char>(kVersion));
    const std::string text = manifest.dump();
    put_u32_le(blob, static_cast<std::uint32_t>(text.size()));
    blob += text;
    for (const Network* net : m.networks()) {
        for (std::size_t i = 0; i < net->num_layers(); ++i) {
            const NetLayer& l = net->layer(i);
            for (double wv : l.weights) put_f32_le(blob, static_cast<float>(wv));
            for (double bv : l.bias) put_f32_le(blob, static_cast<float>(bv));
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("short write while saving checkpoint: " + path);
}

ModelBundle load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (blob.size() < 9 || std::memcmp(blob.data(), kMagic, 4) != 0)
        throw ParseError("not an OAAE checkpoint (bad magic): " + path);
    if (static_cast<unsigned char>(blob[4]) != kVersion)
        throw ParseError("unsupported checkpoint version in " + path);

    std::uint32_t text_len = 0;
    for (int i = 0; i < 4; ++i)
        text_len |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[5 + i])) << (8 * i);
    if (blob.size() < 9 + static_cast<std::size_t>(text_len))
        throw ParseError("truncated checkpoint manifest in " + path);

    ordered_json manifest;
    try {
        manifest = ordered_json::parse(blob.substr(9, text_len));
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad checkpoint manifest: ") + e.what());
    }

    ModelBundle m;
    m.latent_dim = manifest.at("latent_dim");
    m.num_classes = manifest.at("num_classes");
    auto is = manifest.at("image_shape");
    m.image_shape = Shape3{is.at(0), is.at(1), is.at(2)};

    std::size_t offset = 9 + text_len;
    auto read_f32 = [&](double& out) {
        if (offset + 4 > blob.size())
            throw ParseError("truncated parameter payload at byte " + std::to_string(offset) +
                             " in " + path);
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i)
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[offset + i])) << (8 * i);
        float f;
        std::memcpy(&f, &bits, 4);
        out = static_cast<double>(f);
        offset += 4;
    };

    auto nets = m.networks();
    const auto& jnets = manifest.at("networks");
    if (jnets.size() != nets.size())
        throw ParseError("checkpoint manifest: expected 5 networks");

    for (std::size_t ni = 0; ni < nets.size(); ++ni) {
        const auto& jn = jnets.at(ni);
        auto ish = jn.at("input_shape");
        std::vector<LayerSpec> specs;
        for (const auto& jl : jn.at("layers")) specs.push_back(layer_spec_from_json(jl));
        *nets[ni] = Network(jn.at("name").get<std::string>(),
                            Shape3{ish.at(0), ish.at(1), ish.at(2)}, std::move(specs));

        for (std::size_t li = 0; li < nets[ni]->num_layers(); ++li) {
            const auto& jl = jn.at("layers").at(li);
            std::vector<double> w(jl.at("weight_count").get<std::size_t>());
            std::vector<double> b(jl.at("bias_count").get<std::size_t>());
            for (double& x : w) read_f32(x);
            for (double& x : b) read_f32(x);
            nets[ni]->set_layer_params(li, std::move(w), std::move(b));
        }
    }
    if (offset != blob.size())
        throw ParseError("checkpoint has " + std::to_string(blob.size() - offset) +
                         " trailing bytes: " + path);
    return m;
}

std::uint64_t checksum_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for checksum: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes.data(), bytes.size());
}

} // namespace oaae
