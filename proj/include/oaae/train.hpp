#pragma once

#include <optional>
#include <string>

#include "oaae/adam.hpp"
#include "oaae/data.hpp"
#include "oaae/model.hpp"
#include "oaae/ole.hpp"

namespace oaae {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 64;
    double learning_rate = 0.0004;
    double noise_std = 0.02;
    int generator_period = 5; // generator trains on iterations 0, p, 2p, ...

    double lambda_recon = 1.0;
    double lambda_adv_enc = 0.1;
    double lambda_adv_dec = 0.1;
    double lambda_ole = 0.1;
    double lambda_cls = 0.1;

    OleConfig ole;

    std::uint64_t seed = 1;
    int latent_dim = 32;
    int base_channels = 16;
    int fc_hidden = 128;

    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    bool clamp_noisy_inputs = false;
    int checkpoint_every = 0; // epochs between intermediate checkpoints; 0 = final only

    AdamConfig adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }
};

void validate(const TrainConfig& cfg);
TrainConfig train_config_from_json_file(const std::string& path);
TrainConfig train_config_from_json_text(const std::string& text);
std::string train_config_to_json(const TrainConfig& cfg);

struct EpochStats {
    int epoch = 0;
    double l_latent = 0, l_image = 0;                       // discriminator phase means
    double l_recon = 0, l_enc = 0, l_dec = 0, l_ole = 0, l_cls = 0; // generator phase means
    double seconds = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    long total_discriminator_steps = 0;
    long total_generator_steps = 0;
    std::string checkpoint_path;
};

struct DiscLosses {
    double latent = 0, image = 0;
};

struct GenLosses {
    double recon = 0, enc = 0, dec = 0, ole = 0, cls = 0;
    double total = 0;
};

// Owns the optimizer states and noise streams for one training run and
// mutates the bundle in place. Discriminator steps touch only the two
// discriminators; generator steps touch only encoder, decoder, classifier.
class Trainer {
public:
    Trainer(ModelBundle& model, const TrainConfig& cfg);

    DiscLosses discriminator_step(const Tensor4& x, std::span<const int> labels);
    GenLosses generator_step(const Tensor4& x, std::span<const int> labels);

private:
    Tensor4 noisy(const Tensor4& x);
    Tensor4 sample_prior(int n);

    ModelBundle& model_;
    TrainConfig cfg_;
    AdamState st_enc_, st_dec_, st_cls_, st_dlat_, st_dimg_;
    Rng noise_rng_, prior_rng_;
};

// The full training phase: per-epoch shuffles, discriminator steps every
// iteration, generator steps on the period, a checkpoint at the end.
// Labels must already be compact (0..C-1) with the novelty class absent.
ModelBundle train(const Dataset& dataset, const TrainConfig& cfg, TrainReport& report,
                  const std::string& checkpoint_path = "");

// Loss log CSV: epoch, l_latent, l_image, l_recon, l_enc, l_dec, l_ole, l_cls.
void write_loss_csv(const TrainReport& report, const std::string& path);

} // namespace oaae
