#pragma once

#include <span>
#include <string>
#include <vector>

#include "oaae/scoring.hpp"
#include "oaae/train.hpp"

namespace oaae {

// Probability that a random novel example outscores a random normal one,
// ties counted half (Mann-Whitney). Higher score must mean "more novel".
// Throws UndefinedAurocError unless both groups are nonempty.
double auroc(std::span<const double> scores, std::span<const char> is_novel);
double auroc(std::span<const ScoredExample> scores);

// One row of the protocol: hold one class out as novelty, train on the rest.
struct ProtocolSpec {
    std::string dataset_id = "synthetic";
    std::vector<int> novelty_classes; // cells of the sweep
    std::uint64_t seed = 1;
    ScoreKind score_kind = ScoreKind::angle;
    std::string method_label = "oaae";
};

struct EvalCell {
    int novelty_class = -1;
    double auroc_value = 0.0;
    bool ok = false;
    std::string error;
    std::uint64_t checkpoint_hash = 0;
};

struct EvalReport {
    std::string method_label;
    int num_classes = 0;
    std::vector<EvalCell> cells;
    std::string config_json;
    std::vector<std::string> dataset_paths;
    std::vector<std::uint64_t> dataset_checksums;

    double mean_auroc() const; // over the cells that succeeded
};

// Trains on the normal classes of the train split (labels remapped to a
// compact range) and scores the full test split; one cell per novelty class.
// Cell failures are recorded, not thrown, so a sweep always completes.
EvalReport run_protocol(const Dataset& train_split, const Dataset& test_split,
                        const ProtocolSpec& spec, const TrainConfig& train_cfg,
                        const std::string& artifact_dir = "");

// CSV: method, one column per novelty class, mean. Failed cells print NA.
void write_eval_csv(std::span<const EvalReport> reports, const std::string& path);
// Aligned text table, one row per method, one column per class plus Mean.
std::string render_eval_table(std::span<const EvalReport> reports);
// Sidecar metadata: config snapshot, dataset provenance, checkpoint ids.
void write_eval_meta(std::span<const EvalReport> reports, const std::string& path);

} // namespace oaae
