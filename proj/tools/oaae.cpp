// Command-line front end: train, score, eval, check, report.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>

#include "oaae/checks.hpp"
#include "oaae/eval.hpp"
#include "oaae/kernels.hpp"

using namespace oaae;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct DatasetFlags {
    std::string kind = "synthetic"; // synthetic | idx | mnist | cifar10
    // synthetic
    int classes = 4;
    int per_class = 500;
    int test_per_class = 200;
    int side = 16;
    std::uint64_t data_seed = 1;
    double gen_noise_std = 0.12;
    // idx / mnist / cifar10
    std::string images_path, labels_path;
    std::string data_dir;
    std::vector<std::string> cifar_batches;
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& f) {
    cmd->add_option("--dataset", f.kind, "Dataset source: synthetic, idx, mnist, cifar10")
        ->check(CLI::IsMember({"synthetic", "idx", "mnist", "cifar10"}));
    cmd->add_option("--classes", f.classes, "Synthetic: number of classes");
    cmd->add_option("--per-class", f.per_class, "Synthetic: training images per class");
    cmd->add_option("--test-per-class", f.test_per_class, "Synthetic: test images per class");
    cmd->add_option("--side", f.side, "Synthetic: image side in pixels");
    cmd->add_option("--data-seed", f.data_seed, "Synthetic: generation seed");
    cmd->add_option("--gen-noise-std", f.gen_noise_std, "Synthetic: generation noise std");
    cmd->add_option("--images", f.images_path, "IDX image file");
    cmd->add_option("--labels", f.labels_path, "IDX label file");
    cmd->add_option("--data-dir", f.data_dir,
                    "Dataset root (defaults to the OAAE_DATA_DIR environment variable)");
    cmd->add_option("--cifar-batch", f.cifar_batches, "CIFAR-10 batch file (repeatable)");
}

std::string data_root(const DatasetFlags& f) {
    if (!f.data_dir.empty()) return f.data_dir;
    if (const char* env = std::getenv("OAAE_DATA_DIR")) return env;
    return "";
}

std::string under_root(const DatasetFlags& f, const std::string& path) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    const std::string root = data_root(f);
    if (root.empty()) return path;
    return (std::filesystem::path(root) / path).string();
}

Dataset load_single_split(const DatasetFlags& f, bool train_split) {
    if (f.kind == "synthetic") {
        const char* tag = train_split ? "train" : "test";
        Dataset ds = synthetic_multimodal(f.classes, train_split ? f.per_class : f.test_per_class,
                                          f.side, Rng::substream(f.data_seed, tag).next_u64(),
                                          f.gen_noise_std);
        ds.split = tag;
        return ds;
    }
    if (f.kind == "idx") {
        if (f.images_path.empty() || f.labels_path.empty())
            throw ConfigError("idx dataset needs --images and --labels");
        Dataset ds = read_idx(under_root(f, f.images_path), under_root(f, f.labels_path));
        ds.split = train_split ? "train" : "test";
        return ds;
    }
    if (f.kind == "mnist") {
        const std::string root = data_root(f);
        if (root.empty())
            throw ConfigError("mnist dataset needs --data-dir or OAAE_DATA_DIR");
        const std::string img = train_split ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
        const std::string lbl = train_split ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";
        Dataset ds = read_idx((std::filesystem::path(root) / img).string(),
                              (std::filesystem::path(root) / lbl).string());
        ds.split = train_split ? "train" : "test";
        return ds;
    }
    // cifar10
    std::vector<std::string> files = f.cifar_batches;
    if (files.empty()) {
        const std::string root = data_root(f);
        if (root.empty())
            throw ConfigError("cifar10 dataset needs --cifar-batch files or a data dir");
        if (train_split)
            for (int i = 1; i <= 5; ++i)
                files.push_back((std::filesystem::path(root) /
                                 ("data_batch_" + std::to_string(i) + ".bin")).string());
        else
            files.push_back((std::filesystem::path(root) / "test_batch.bin").string());
    } else {
        for (std::string& p : files) p = under_root(f, p);
    }
    Dataset ds = read_cifar10(files);
    ds.split = train_split ? "train" : "test";
    return ds;
}

struct ConfigOverrides {
    std::optional<int> epochs, batch_size, latent_dim, base_channels, fc_hidden, generator_period;
    std::optional<double> learning_rate, noise_std;
    std::optional<double> lambda_recon, lambda_adv_enc, lambda_adv_dec, lambda_ole, lambda_cls;
    std::optional<double> ole_delta, ole_threshold;
    std::optional<std::uint64_t> seed;
};

void add_override_flags(CLI::App* cmd, ConfigOverrides& o) {
    cmd->add_option("--epochs", o.epochs, "Override: training epochs");
    cmd->add_option("--batch-size", o.batch_size, "Override: minibatch size");
    cmd->add_option("--lr", o.learning_rate, "Override: learning rate");
    cmd->add_option("--noise-std", o.noise_std, "Override: training input noise std");
    cmd->add_option("--generator-period", o.generator_period,
                    "Override: discriminator iterations per generator iteration");
    cmd->add_option("--latent-dim", o.latent_dim, "Override: latent dimension");
    cmd->add_option("--base-channels", o.base_channels, "Override: first conv width");
    cmd->add_option("--fc-hidden", o.fc_hidden, "Override: dense hidden width");
    cmd->add_option("--lambda-recon", o.lambda_recon, "Override: reconstruction weight");
    cmd->add_option("--lambda-adv-enc", o.lambda_adv_enc, "Override: encoder adversarial weight");
    cmd->add_option("--lambda-adv-dec", o.lambda_adv_dec, "Override: decoder adversarial weight");
    cmd->add_option("--lambda-ole", o.lambda_ole, "Override: orthogonal-embedding weight");
    cmd->add_option("--lambda-cls", o.lambda_cls, "Override: classifier weight");
    cmd->add_option("--ole-delta", o.ole_delta, "Override: per-class nuclear norm margin");
    cmd->add_option("--ole-threshold", o.ole_threshold, "Override: singular value cutoff");
    cmd->add_option("--seed", o.seed, "Override: root seed");
}

TrainConfig resolve_config(const std::string& config_path, const ConfigOverrides& o) {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = train_config_from_json_file(config_path);
    if (o.epochs) cfg.epochs = *o.epochs;
    if (o.batch_size) cfg.batch_size = *o.batch_size;
    if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
    if (o.noise_std) cfg.noise_std = *o.noise_std;
    if (o.generator_period) cfg.generator_period = *o.generator_period;
    if (o.latent_dim) cfg.latent_dim = *o.latent_dim;
    if (o.base_channels) cfg.base_channels = *o.base_channels;
    if (o.fc_hidden) cfg.fc_hidden = *o.fc_hidden;
    if (o.lambda_recon) cfg.lambda_recon = *o.lambda_recon;
    if (o.lambda_adv_enc) cfg.lambda_adv_enc = *o.lambda_adv_enc;
    if (o.lambda_adv_dec) cfg.lambda_adv_dec = *o.lambda_adv_dec;
    if (o.lambda_ole) cfg.lambda_ole = *o.lambda_ole;
    if (o.lambda_cls) cfg.lambda_cls = *o.lambda_cls;
    if (o.ole_delta) cfg.ole.delta_margin = *o.ole_delta;
    if (o.ole_threshold) cfg.ole.sv_threshold = *o.ole_threshold;
    if (o.seed) cfg.seed = *o.seed;
    validate(cfg);
    return cfg;
}

int run_train(const std::string& config_path, const ConfigOverrides& overrides,
              const DatasetFlags& data_flags, const std::string& out_path,
              const std::string& losses_path) {
    TrainConfig cfg = resolve_config(config_path, overrides);
    Dataset ds = load_single_split(data_flags, /*train_split=*/true);

    std::fprintf(stderr, "training on %d examples, %d classes, %dx%dx%d\n", ds.count(),
                 ds.num_classes, ds.images.c, ds.images.h, ds.images.w);

    TrainReport report;
    train(ds, cfg, report, out_path);
    if (!losses_path.empty()) write_loss_csv(report, losses_path);

    for (const auto& e : report.epochs)
        std::fprintf(stderr,
                     "epoch %d: l_latent=%.4f l_image=%.4f l_recon=%.4f l_ole=%.4f l_cls=%.4f"
                     " (%.1fs)\n",
                     e.epoch, e.l_latent, e.l_image, e.l_recon, e.l_ole, e.l_cls, e.seconds);
    std::printf("checkpoint written to %s\n", out_path.c_str());
    return kExitOk;
}

int run_score(const std::string& checkpoint, const DatasetFlags& data_flags,
              const std::string& kind_name, int novelty_class, const std::string& out_path) {
    ModelBundle model = load_checkpoint(checkpoint);
    Dataset ds = load_single_split(data_flags, /*train_split=*/false);
    ScoreKind kind = score_kind_from_name(kind_name);

    std::vector<int> flags;
    if (novelty_class >= 0) {
        flags.resize(ds.count());
        for (int i = 0; i < ds.count(); ++i)
            flags[i] = ds.labels[i] == novelty_class ? 1 : 0;
    }
    auto scores = score_batch(model, ds.images, kind, flags);
    write_scores_csv(scores, kind, out_path);
    std::printf("%zu scores written to %s\n", scores.size(), out_path.c_str());
    return kExitOk;
}

int run_eval(const std::string& config_path, const ConfigOverrides& overrides,
             const DatasetFlags& data_flags, int novelty_class, bool all_classes,
             const std::string& kind_name, const std::string& method_label,
             const std::string& out_prefix, std::uint64_t protocol_seed) {
    TrainConfig cfg = resolve_config(config_path, overrides);
    Dataset train_split = load_single_split(data_flags, true);
    Dataset test_split = load_single_split(data_flags, false);

    ProtocolSpec spec;
    spec.dataset_id = data_flags.kind;
    spec.score_kind = score_kind_from_name(kind_name);
    spec.method_label = method_label;
    spec.seed = protocol_seed;
    if (all_classes)
        for (int c = 0; c < train_split.num_classes; ++c) spec.novelty_classes.push_back(c);
    else if (novelty_class >= 0)
        spec.novelty_classes.push_back(novelty_class);
    else
        throw ConfigError("eval needs --novelty-class or --all-classes");

    const std::string model_dir = out_prefix + "_models";
    std::filesystem::create_directories(model_dir);
    EvalReport report = run_protocol(train_split, test_split, spec, cfg, model_dir);
    std::vector<EvalReport> reports = {report};

    write_eval_csv(reports, out_prefix + ".csv");
    write_eval_meta(reports, out_prefix + ".meta.json");
    const std::string table = render_eval_table(reports);
    {
        std::ofstream txt(out_prefix + ".txt", std::ios::trunc);
        txt << table;
    }
    std::fputs(table.c_str(), stdout);

    for (const auto& cell : report.cells)
        if (!cell.ok)
            std::fprintf(stderr, "cell %d failed: %s\n", cell.novelty_class, cell.error.c_str());
    return kExitOk;
}

int run_check(std::uint64_t seed, const std::string& fault_name) {
    Fault fault = Fault::none;
    if (fault_name == "ole-grad-sign") fault = Fault::ole_grad_sign;
    else if (!fault_name.empty())
        throw ConfigError("unknown fault '" + fault_name + "'");

    auto results = run_checks(seed, fault);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%-34s margin=%-12.3e tol=%-9.0e %s\n", r.name.c_str(), r.margin, r.tolerance,
                    r.pass ? "PASS" : "FAIL");
        all_pass = all_pass && r.pass;
    }
    if (!all_pass) {
        for (const auto& r : results)
            if (!r.pass) std::fprintf(stderr, "check failed: %s\n", r.name.c_str());
        return kExitNumeric;
    }
    return kExitOk;
}

int run_report(const std::vector<std::string>& score_files, const std::string& out_path) {
    std::vector<EvalReport> reports;
    for (const auto& path : score_files) {
        auto scores = read_scores_csv(path);
        EvalReport r;
        r.method_label = std::filesystem::path(path).stem().string();
        r.num_classes = 0;
        r.config_json = "{}";
        EvalCell cell;
        cell.novelty_class = 0;
        try {
            cell.auroc_value = auroc(scores);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
            cell.ok = false;
        }
        r.cells.push_back(cell);
        reports.push_back(std::move(r));
    }
    const std::string table = render_eval_table(reports);
    std::fputs(table.c_str(), stdout);
    if (!out_path.empty()) write_eval_csv(reports, out_path);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial autoencoder novelty detection with an orthogonalized latent space"};
    app.require_subcommand(1);

    bool serial = false;
    app.add_flag("--serial", serial, "Use the serial reference kernels");

    // train
    auto* cmd_train = app.add_subcommand("train", "Train a model and write a checkpoint");
    std::string train_config, train_out = "model.oaae", train_losses = "losses.csv";
    DatasetFlags train_data;
    ConfigOverrides train_over;
    cmd_train->add_option("--config", train_config, "Train config JSON");
    cmd_train->add_option("--out", train_out, "Checkpoint output path");
    cmd_train->add_option("--losses-csv", train_losses, "Per-epoch loss CSV output");
    add_dataset_flags(cmd_train, train_data);
    add_override_flags(cmd_train, train_over);

    // score
    auto* cmd_score = app.add_subcommand("score", "Score images against a trained model");
    std::string score_ckpt, score_kind = "angle", score_out = "scores.csv";
    int score_novelty = -1;
    DatasetFlags score_data;
    cmd_score->add_option("--checkpoint", score_ckpt, "Model checkpoint")->required();
    cmd_score->add_option("--kind", score_kind, "Score kind: angle or mse")
        ->check(CLI::IsMember({"angle", "mse"}));
    cmd_score->add_option("--novelty-class", score_novelty,
                          "Label treated as novel when emitting is_novel");
    cmd_score->add_option("--out", score_out, "Score CSV output");
    add_dataset_flags(cmd_score, score_data);

    // eval
    auto* cmd_eval = app.add_subcommand("eval", "Run the held-out-class protocol and report AUROC");
    std::string eval_config, eval_kind = "angle", eval_label = "oaae", eval_out = "eval";
    int eval_novelty = -1;
    bool eval_all = false;
    std::uint64_t eval_seed = 1;
    DatasetFlags eval_data;
    ConfigOverrides eval_over;
    cmd_eval->add_option("--config", eval_config, "Train config JSON");
    cmd_eval->add_option("--novelty-class", eval_novelty, "Single held-out class");
    cmd_eval->add_flag("--all-classes", eval_all, "Sweep every class as the novelty");
    cmd_eval->add_option("--kind", eval_kind, "Score kind: angle or mse")
        ->check(CLI::IsMember({"angle", "mse"}));
    cmd_eval->add_option("--method-label", eval_label, "Row label in the report");
    cmd_eval->add_option("--out", eval_out, "Output prefix (.csv, .txt, .meta.json)");
    cmd_eval->add_option("--protocol-seed", eval_seed, "Seed for the per-cell training seeds");
    add_dataset_flags(cmd_eval, eval_data);
    add_override_flags(cmd_eval, eval_over);

    // check
    auto* cmd_check = app.add_subcommand("check", "Run the numerical self-test suite");
    std::uint64_t check_seed = 1;
    std::string check_fault;
    cmd_check->add_option("--seed", check_seed, "Seed for the randomized checks");
    cmd_check->add_option("--inject-fault", check_fault, "")->group(""); // harness hook, hidden

    // report
    auto* cmd_report = app.add_subcommand("report", "Compute AUROC from score CSVs");
    std::vector<std::string> report_scores;
    std::string report_out;
    cmd_report->add_option("--scores", report_scores, "Score CSV with is_novel labels")
        ->required();
    cmd_report->add_option("--out", report_out, "Optional CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    kernels::set_backend(serial ? kernels::Backend::serial : kernels::Backend::parallel);

    try {
        if (cmd_train->parsed())
            return run_train(train_config, train_over, train_data, train_out, train_losses);
        if (cmd_score->parsed())
            return run_score(score_ckpt, score_data, score_kind, score_novelty, score_out);
        if (cmd_eval->parsed())
            return run_eval(eval_config, eval_over, eval_data, eval_novelty, eval_all, eval_kind,
                            eval_label, eval_out, eval_seed);
        if (cmd_check->parsed()) return run_check(check_seed, check_fault);
        if (cmd_report->parsed()) return run_report(report_scores, report_out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitIo;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return kExitConfig;
}
