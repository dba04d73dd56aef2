#pragma once

#include <string>

#include "oaae/linalg.hpp"
#include "oaae/network.hpp"

namespace oaae {

struct ModelConfig {
    Shape3 image_shape{1, 28, 28};
    int latent_dim = 32;
    int num_classes = 10;
    int base_channels = 16; // conv widths: base, 2*base, 4*base
    int fc_hidden = 128;
};

// The five networks: encoder and decoder (three conv stages plus two dense
// layers each), a latent discriminator, an image discriminator, and a
// classifier on the latent code.
struct ModelBundle {
    Network encoder, decoder, latent_discriminator, image_discriminator, classifier;
    int latent_dim = 0;
    int num_classes = 0;
    Shape3 image_shape;

    std::vector<Network*> networks();
    std::vector<const Network*> networks() const;
};

ModelBundle build_model(const ModelConfig& cfg, Rng& init_rng);

// Latent tensors travel as (n, dim, 1, 1); the OLE machinery wants one
// column per example.
Matrix latents_to_matrix(const Tensor4& latents);
Tensor4 matrix_to_latents(const Matrix& m);

// Checkpoint file: "OAAE" magic, one version byte, a little-endian u32
// manifest length, a JSON manifest (names, layer specs, parameter shapes),
// then raw little-endian float32 parameter arrays in manifest order.
// load(save(m)) is byte-exact.
void save_checkpoint(const ModelBundle& m, const std::string& path);
ModelBundle load_checkpoint(const std::string& path);

// FNV-1a of the checkpoint bytes; used as the checkpoint id in reports.
std::uint64_t checksum_file(const std::string& path);

} // namespace oaae
