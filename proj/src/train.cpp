#include "oaae/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "oaae/losses.hpp"

namespace oaae {

using ordered_json = nlohmann::ordered_json;

void validate(const TrainConfig& cfg) {
    if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.generator_period < 1)
        throw ConfigError("train config: epochs, batch_size and generator_period must be >= 1");
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
        throw ConfigError("train config: learning_rate must be positive");
    // noise_std == 0 is allowed: it makes Enc see the clean input.
    if (!(cfg.noise_std >= 0.0) || !std::isfinite(cfg.noise_std))
        throw ConfigError("train config: noise_std must be nonnegative");
    for (double w : {cfg.lambda_recon, cfg.lambda_adv_enc, cfg.lambda_adv_dec, cfg.lambda_ole,
                     cfg.lambda_cls})
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ConfigError("train config: loss weights must be nonnegative");
    if (cfg.latent_dim < 1 || cfg.base_channels < 1 || cfg.fc_hidden < 1)
        throw ConfigError("train config: model sizes must be >= 1");
    if (cfg.checkpoint_every < 0)
        throw ConfigError("train config: checkpoint_every must be >= 0");
    validate(cfg.ole);
}

namespace {

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

TrainConfig train_config_from_json_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("train config: invalid JSON: ") + e.what());
    }

    static const std::vector<std::string> known = {
        "epochs", "batch_size", "learning_rate", "noise_std", "generator_period",
        "lambda_recon", "lambda_adv_enc", "lambda_adv_dec", "lambda_ole", "lambda_cls",
        "ole_delta_margin", "ole_sv_threshold", "seed", "latent_dim", "base_channels",
        "fc_hidden", "adam_beta1", "adam_beta2", "adam_epsilon", "clamp_noisy_inputs",
        "checkpoint_every"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("train config: unknown key '" + key + "'");

    TrainConfig cfg;
    read_field(j, "epochs", cfg.epochs);
    read_field(j, "batch_size", cfg.batch_size);
    read_field(j, "learning_rate", cfg.learning_rate);
    read_field(j, "noise_std", cfg.noise_std);
    read_field(j, "generator_period", cfg.generator_period);
    read_field(j, "lambda_recon", cfg.lambda_recon);
    read_field(j, "lambda_adv_enc", cfg.lambda_adv_enc);
    read_field(j, "lambda_adv_dec", cfg.lambda_adv_dec);
    read_field(j, "lambda_ole", cfg.lambda_ole);
    read_field(j, "lambda_cls", cfg.lambda_cls);
    read_field(j, "ole_delta_margin", cfg.ole.delta_margin);
    read_field(j, "ole_sv_threshold", cfg.ole.sv_threshold);
    read_field(j, "seed", cfg.seed);
    read_field(j, "latent_dim", cfg.latent_dim);
    read_field(j, "base_channels", cfg.base_channels);
    read_field(j, "fc_hidden", cfg.fc_hidden);
    read_field(j, "adam_beta1", cfg.adam_beta1);
    read_field(j, "adam_beta2", cfg.adam_beta2);
    read_field(j, "adam_epsilon", cfg.adam_epsilon);
    read_field(j, "clamp_noisy_inputs", cfg.clamp_noisy_inputs);
    read_field(j, "checkpoint_every", cfg.checkpoint_every);
    validate(cfg);
    return cfg;
}

TrainConfig train_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("train config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return train_config_from_json_text(text);
}

std::string train_config_to_json(const TrainConfig& cfg) {
    ordered_json j;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["learning_rate"] = cfg.learning_rate;
    j["noise_std"] = cfg.noise_std;
    j["generator_period"] = cfg.generator_period;
    j["lambda_recon"] = cfg.lambda_recon;
    j["lambda_adv_enc"] = cfg.lambda_adv_enc;
    j["lambda_adv_dec"] = cfg.lambda_adv_dec;
    j["lambda_ole"] = cfg.lambda_ole;
    j["lambda_cls"] = cfg.lambda_cls;
    j["ole_delta_margin"] = cfg.ole.delta_margin;
    j["ole_sv_threshold"] = cfg.ole.sv_threshold;
    j["seed"] = cfg.seed;
    j["latent_dim"] = cfg.latent_dim;
    j["base_channels"] = cfg.base_channels;
    j["fc_hidden"] = cfg.fc_hidden;
    j["adam_beta1"] = cfg.adam_beta1;
    j["adam_beta2"] = cfg.adam_beta2;
    j["adam_epsilon"] = cfg.adam_epsilon;
    j["clamp_noisy_inputs"] = cfg.clamp_noisy_inputs;
    j["checkpoint_every"] = cfg.checkpoint_every;
    return j.dump(2);
}

Trainer::Trainer(ModelBundle& model, const TrainConfig& cfg)
    : model_(model), cfg_(cfg),
      st_enc_(AdamState::for_network(model.encoder, cfg.adam())),
      st_dec_(AdamState::for_network(model.decoder, cfg.adam())),
      st_cls_(AdamState::for_network(model.classifier, cfg.adam())),
      st_dlat_(AdamState::for_network(model.latent_discriminator, cfg.adam())),
      st_dimg_(AdamState::for_network(model.image_discriminator, cfg.adam())),
      noise_rng_(Rng::substream(cfg.seed, "noise")),
      prior_rng_(Rng::substream(cfg.seed, "sampling")) {
    validate(cfg_);
}

Tensor4 Trainer::noisy(const Tensor4& x) {
    return gaussian_noise(x, cfg_.noise_std, noise_rng_, cfg_.clamp_noisy_inputs);
}

Tensor4 Trainer::sample_prior(int n) {
    Tensor4 z(n, model_.latent_dim, 1, 1);
    for (double& v : z.data) v = prior_rng_.normal();
    return z;
}

DiscLosses Trainer::discriminator_step(const Tensor4& x, std::span<const int> labels) {
    (void)labels; // the discriminator phase is label-free
    const int n = x.n;

    Tensor4 x_noisy = noisy(x);
    Tensor4 z_prior = sample_prior(n);
    Tensor4 z_enc = model_.encoder.forward(x_noisy);
    Tensor4 x_gen = model_.decoder.forward(z_prior);

    // Latent discriminator: prior real, encoded fake.
    ForwardCache c_real, c_fake;
    Tensor4 lo_real = model_.latent_discriminator.forward(z_prior, c_real);
    Tensor4 lo_fake = model_.latent_discriminator.forward(z_enc, c_fake);
    DiscLosses out;
    out.latent = bce_logit_batch(lo_real, 1.0) + bce_logit_batch(lo_fake, 0.0);

    GradBuffer g_dlat = model_.latent_discriminator.make_grad_buffer();
    model_.latent_discriminator.backward(c_real, bce_logit_batch_grad(lo_real, 1.0), g_dlat);
    model_.latent_discriminator.backward(c_fake, bce_logit_batch_grad(lo_fake, 0.0), g_dlat);

    // Image discriminator: dataset real, decoded prior fake.
    ForwardCache ci_real, ci_fake;
    Tensor4 io_real = model_.image_discriminator.forward(x, ci_real);
    Tensor4 io_fake = model_.image_discriminator.forward(x_gen, ci_fake);
    out.image = bce_logit_batch(io_real, 1.0) + bce_logit_batch(io_fake, 0.0);

    GradBuffer g_dimg = model_.image_discriminator.make_grad_buffer();
    model_.image_discriminator.backward(ci_real, bce_logit_batch_grad(io_real, 1.0), g_dimg);
    model_.image_discriminator.backward(ci_fake, bce_logit_batch_grad(io_fake, 0.0), g_dimg);

    adam_update(model_.latent_discriminator, g_dlat, st_dlat_);
    adam_update(model_.image_discriminator, g_dimg, st_dimg_);
    return out;
}

GenLosses Trainer::generator_step(const Tensor4& x, std::span<const int> labels) {
    if (static_cast<int>(labels.size()) != x.n)
        throw NumericError("generator_step: label count does not match batch");
    const int n = x.n;

    Tensor4 x_noisy = noisy(x);
    Tensor4 z_fresh = sample_prior(n); // resampled between the two phases

    ForwardCache c_enc;
    Tensor4 z_enc = model_.encoder.forward(x_noisy, c_enc);

    ForwardCache c_dec_recon;
    Tensor4 x_rec = model_.decoder.forward(z_enc, c_dec_recon);

    ForwardCache c_dlat;
    Tensor4 lo_enc = model_.latent_discriminator.forward(z_enc, c_dlat);

    ForwardCache c_dec_gen;
    Tensor4 x_gen = model_.decoder.forward(z_fresh, c_dec_gen);
    ForwardCache c_dimg;
    Tensor4 io_gen = model_.image_discriminator.forward(x_gen, c_dimg);

    ForwardCache c_cls;
    Tensor4 logits = model_.classifier.forward(z_enc, c_cls);

    LabeledLatentBatch latent_batch{latents_to_matrix(z_enc),
                                    std::vector<int>(labels.begin(), labels.end())};

    GenLosses out;
    out.recon = recon_sse(x, x_rec);
    out.enc = bce_logit_batch(lo_enc, 1.0);
    out.dec = bce_logit_batch(io_gen, 1.0);
    out.ole = ole_loss(latent_batch, cfg_.ole);
    out.cls = cross_entropy_batch(logits, labels);
    out.total = cfg_.lambda_recon * out.recon + cfg_.lambda_adv_enc * out.enc +
                cfg_.lambda_adv_dec * out.dec + cfg_.lambda_ole * out.ole +
                cfg_.lambda_cls * out.cls;

    GradBuffer g_enc = model_.encoder.make_grad_buffer();
    GradBuffer g_dec = model_.decoder.make_grad_buffer();
    GradBuffer g_cls = model_.classifier.make_grad_buffer();
    GradBuffer g_scratch_dlat = model_.latent_discriminator.make_grad_buffer(); // discarded
    GradBuffer g_scratch_dimg = model_.image_discriminator.make_grad_buffer(); // discarded

    // Latent gradient accumulates from every head before one encoder backward.
    Tensor4 dz(n, model_.latent_dim, 1, 1);

    // Reconstruction path: through the decoder back to the latent.
    {
        Tensor4 dxr = recon_sse_grad(x, x_rec);
        for (double& v : dxr.data) v *= cfg_.lambda_recon;
        Tensor4 dz_rec = model_.decoder.backward(c_dec_recon, dxr, g_dec);
        for (std::size_t i = 0; i < dz.data.size(); ++i) dz.data[i] += dz_rec.data[i];
    }
    // Adversarial latent path: through the frozen latent discriminator.
    {
        Tensor4 dlo = bce_logit_batch_grad(lo_enc, 1.0);
        for (double& v : dlo.data) v *= cfg_.lambda_adv_enc;
        Tensor4 dz_adv = model_.latent_discriminator.backward(c_dlat, dlo, g_scratch_dlat);
        for (std::size_t i = 0; i < dz.data.size(); ++i) dz.data[i] += dz_adv.data[i];
    }
    // Adversarial image path: through the frozen image discriminator into the
    // decoder; the prior sample absorbs the rest.
    {
        Tensor4 dio = bce_logit_batch_grad(io_gen, 1.0);
        for (double& v : dio.data) v *= cfg_.lambda_adv_dec;
        Tensor4 dx_gen = model_.image_discriminator.backward(c_dimg, dio, g_scratch_dimg);
        model_.decoder.backward(c_dec_gen, dx_gen, g_dec);
    }
    // OLE path: the subgradient is injected directly as a latent gradient.
    {
        Matrix g_ole = ole_grad(latent_batch, cfg_.ole);
        Tensor4 dz_ole = matrix_to_latents(g_ole);
        for (std::size_t i = 0; i < dz.data.size(); ++i)
            dz.data[i] += cfg_.lambda_ole * dz_ole.data[i];
    }
    // Classifier path.
    {
        Tensor4 dlogits = cross_entropy_batch_grad(logits, labels);
        for (double& v : dlogits.data) v *= cfg_.lambda_cls;
        Tensor4 dz_cls = model_.classifier.backward(c_cls, dlogits, g_cls);
        for (std::size_t i = 0; i < dz.data.size(); ++i) dz.data[i] += dz_cls.data[i];
    }

    model_.encoder.backward(c_enc, dz, g_enc);

    adam_update(model_.encoder, g_enc, st_enc_);
    adam_update(model_.decoder, g_dec, st_dec_);
    adam_update(model_.classifier, g_cls, st_cls_);
    return out;
}

namespace {

Tensor4 gather_batch(const Tensor4& images, const std::vector<int>& order, std::size_t begin,
                     std::size_t end) {
    const std::size_t pixels = static_cast<std::size_t>(images.c) * images.h * images.w;
    Tensor4 out(static_cast<int>(end - begin), images.c, images.h, images.w);
    for (std::size_t k = begin; k < end; ++k)
        std::copy_n(images.data.begin() + static_cast<std::size_t>(order[k]) * pixels, pixels,
                    out.data.begin() + (k - begin) * pixels);
    return out;
}

void check_finite(double v, const char* term, int epoch, long iter) {
    if (!std::isfinite(v))
        throw NumericError("training aborted: non-finite " + std::string(term) + " at epoch " +
                           std::to_string(epoch) + ", iteration " + std::to_string(iter));
}

} // namespace

ModelBundle train(const Dataset& dataset, const TrainConfig& cfg, TrainReport& report,
                  const std::string& checkpoint_path) {
    validate(cfg);
    if (dataset.count() == 0) throw ConfigError("train: dataset is empty");
    for (int l : dataset.labels)
        if (l < 0 || l >= dataset.num_classes)
            throw ConfigError("train: label outside 0.." + std::to_string(dataset.num_classes - 1));

    ModelConfig mc;
    mc.image_shape = Shape3{dataset.images.c, dataset.images.h, dataset.images.w};
    mc.latent_dim = cfg.latent_dim;
    mc.num_classes = dataset.num_classes;
    mc.base_channels = cfg.base_channels;
    mc.fc_hidden = cfg.fc_hidden;

    Rng init_rng = Rng::substream(cfg.seed, "init");
    ModelBundle model = build_model(mc, init_rng);
    Trainer trainer(model, cfg);
    Rng shuffle_rng = Rng::substream(cfg.seed, "shuffle");

    report = TrainReport{};
    std::vector<int> order(dataset.count());
    std::iota(order.begin(), order.end(), 0);
    long iter = 0; // global iteration counter; the generator fires when iter % period == 0

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(order);

        EpochStats stats;
        stats.epoch = epoch;
        long disc_steps = 0, gen_steps = 0;

        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++iter) {
            const std::size_t end = std::min(begin + cfg.batch_size, order.size());
            Tensor4 batch = gather_batch(dataset.images, order, begin, end);
            std::vector<int> labels(end - begin);
            for (std::size_t k = begin; k < end; ++k) labels[k - begin] = dataset.labels[order[k]];

            DiscLosses dl = trainer.discriminator_step(batch, labels);
            check_finite(dl.latent, "l_latent", epoch, iter);
            check_finite(dl.image, "l_image", epoch, iter);
            stats.l_latent += dl.latent;
            stats.l_image += dl.image;
            ++disc_steps;

            if (iter % cfg.generator_period == 0) {
                GenLosses gl = trainer.generator_step(batch, labels);
                check_finite(gl.recon, "l_recon", epoch, iter);
                check_finite(gl.enc, "l_enc", epoch, iter);
                check_finite(gl.dec, "l_dec", epoch, iter);
                check_finite(gl.ole, "l_ole", epoch, iter);
                check_finite(gl.cls, "l_cls", epoch, iter);
                stats.l_recon += gl.recon;
                stats.l_enc += gl.enc;
                stats.l_dec += gl.dec;
                stats.l_ole += gl.ole;
                stats.l_cls += gl.cls;
                ++gen_steps;
            }
        }

        stats.l_latent /= static_cast<double>(disc_steps);
        stats.l_image /= static_cast<double>(disc_steps);
        if (gen_steps > 0) {
            stats.l_recon /= static_cast<double>(gen_steps);
            stats.l_enc /= static_cast<double>(gen_steps);
            stats.l_dec /= static_cast<double>(gen_steps);
            stats.l_ole /= static_cast<double>(gen_steps);
            stats.l_cls /= static_cast<double>(gen_steps);
        }
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.epochs.push_back(stats);
        report.total_discriminator_steps += disc_steps;
        report.total_generator_steps += gen_steps;

        if (!checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
            (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.epochs)
            save_checkpoint(model, checkpoint_path + ".epoch" + std::to_string(epoch));
    }

    if (!checkpoint_path.empty()) {
        save_checkpoint(model, checkpoint_path);
        report.checkpoint_path = checkpoint_path;
    }
    return model;
}

void write_loss_csv(const TrainReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open loss csv for writing: " + path);
    out << "epoch,l_latent,l_image,l_recon,l_enc,l_dec,l_ole,l_cls\n";
    char line[512];
    for (const auto& e : report.epochs) {
        std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", e.epoch,
                      e.l_latent, e.l_image, e.l_recon, e.l_enc, e.l_dec, e.l_ole, e.l_cls);
        out << line;
    }
}

} // namespace oaae
