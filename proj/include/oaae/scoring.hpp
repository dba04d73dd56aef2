#pragma once

#include <span>
#include <string>
#include <vector>

#include "oaae/model.hpp"

namespace oaae {

enum class ScoreKind { angle, mse };

const char* score_kind_name(ScoreKind k);
ScoreKind score_kind_from_name(const std::string& name);

struct ScoredExample {
    int id = 0;
    double score = 0.0;
    bool is_novel = false;
    bool has_label = false;
};

// Angle between two latent codes, radians in [0, pi], cosine clamped to
// [-1, 1]. Throws DegenerateLatentError when either norm is below 1e-12.
double latent_angle(std::span<const double> z0, std::span<const double> z1);

// The novelty score of the test phase: angle between Enc(x) and
// Enc(Dec(Enc(x))). No noise is added at test time.
double novelty_score(const ModelBundle& model, const Tensor4& image);

// Baseline score: mean squared pixel error of the autoencoder round trip.
double recon_error_score(const ModelBundle& model, const Tensor4& image);

// Scores every image, order-preserving and deterministic. Degenerate latents
// are collected and reported together with their indices.
std::vector<ScoredExample> score_batch(const ModelBundle& model, const Tensor4& images,
                                       ScoreKind kind,
                                       std::span<const int> novelty_flags = {});

// CSV columns: example_id, score, is_novel (blank without labels), score_kind.
void write_scores_csv(std::span<const ScoredExample> scores, ScoreKind kind,
                      const std::string& path);
std::vector<ScoredExample> read_scores_csv(const std::string& path);

} // namespace oaae
