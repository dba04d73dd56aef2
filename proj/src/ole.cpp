#include "oaae/ole.hpp"

#include <cmath>
#include <map>

namespace oaae {

void validate(const LabeledLatentBatch& batch) {
    if (batch.latents.empty())
        throw NumericError("latent batch: empty latent matrix");
    if (batch.labels.size() != batch.latents.cols())
        throw NumericError("latent batch: label count does not match column count");
    for (int l : batch.labels)
        if (l < 0) throw NumericError("latent batch: negative class label");
    if (!batch.latents.all_finite())
        throw NumericError("latent batch: non-finite latent entries");
}

void validate(const OleConfig& cfg) {
    if (!(cfg.delta_margin >= 0.0) || !std::isfinite(cfg.delta_margin))
        throw ConfigError("ole config: delta_margin must be finite and nonnegative");
    if (!(cfg.sv_threshold >= 0.0) || !std::isfinite(cfg.sv_threshold))
        throw ConfigError("ole config: sv_threshold must be finite and nonnegative");
}

std::vector<std::pair<int, Matrix>> partition_by_class(const LabeledLatentBatch& batch) {
    validate(batch);
    const std::size_t d = batch.latents.rows(), m = batch.latents.cols();

    std::map<int, std::vector<std::size_t>> columns; // ascending label order
    for (std::size_t j = 0; j < m; ++j)
        columns[batch.labels[j]].push_back(j);

    std::vector<std::pair<int, Matrix>> parts;
    parts.reserve(columns.size());
    for (const auto& [label, cols] : columns) {
        Matrix part(d, cols.size());
        for (std::size_t k = 0; k < cols.size(); ++k)
            for (std::size_t i = 0; i < d; ++i)
                part(i, k) = batch.latents(i, cols[k]);
        parts.emplace_back(label, std::move(part));
    }
    return parts;
}

double ole_loss(const LabeledLatentBatch& batch, const OleConfig& cfg) {
    validate(cfg);
    auto parts = partition_by_class(batch);
    double acc = 0.0;
    for (const auto& [label, part] : parts)
        acc += std::max(cfg.delta_margin, nuclear_norm(part));
    return acc - nuclear_norm(batch.latents);
}

Matrix ole_grad(const LabeledLatentBatch& batch, const OleConfig& cfg) {
    validate(cfg);
    validate(batch);
    const std::size_t d = batch.latents.rows(), m = batch.latents.cols();

    std::map<int, std::vector<std::size_t>> columns;
    for (std::size_t j = 0; j < m; ++j)
        columns[batch.labels[j]].push_back(j);

    Matrix g(d, m);
    for (const auto& [label, cols] : columns) {
        Matrix part(d, cols.size());
        for (std::size_t k = 0; k < cols.size(); ++k)
            for (std::size_t i = 0; i < d; ++i)
                part(i, k) = batch.latents(i, cols[k]);
        // Hinge inactive when the class norm does not exceed the margin.
        if (nuclear_norm(part) <= cfg.delta_margin) continue;
        Matrix sub = nuclear_norm_subgradient(part, cfg.sv_threshold);
        for (std::size_t k = 0; k < cols.size(); ++k)
            for (std::size_t i = 0; i < d; ++i)
                g(i, cols[k]) += sub(i, k);
    }

    g -= nuclear_norm_subgradient(batch.latents, cfg.sv_threshold);
    return g;
}

} // namespace oaae
