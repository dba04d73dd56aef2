#include "oaae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace oaae {

double auroc(std::span<const double> scores, std::span<const char> is_novel) {
    const std::size_t n = scores.size();
    if (n == 0 || is_novel.size() != n)
        throw UndefinedAurocError("auroc: empty input or flag count mismatch");

    std::size_t n_pos = 0;
    for (char f : is_novel) n_pos += f ? 1 : 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw UndefinedAurocError("auroc: need at least one novel and one normal example");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks inside tie groups; ranks are 1-based.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>((i + 1) + (j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (is_novel[order[k]]) rank_sum_pos += avg_rank;
        i = j + 1;
    }

    const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auroc(std::span<const ScoredExample> scores) {
    std::vector<double> s(scores.size());
    std::vector<char> f(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i].has_label)
            throw UndefinedAurocError("auroc: example " + std::to_string(scores[i].id) +
                                      " has no novelty label");
        s[i] = scores[i].score;
        f[i] = scores[i].is_novel ? 1 : 0;
    }
    return auroc(s, f);
}

double EvalReport::mean_auroc() const {
    double acc = 0.0;
    int k = 0;
    for (const auto& c : cells)
        if (c.ok) {
            acc += c.auroc_value;
            ++k;
        }
    return k > 0 ? acc / k : std::nan("");
}

EvalReport run_protocol(const Dataset& train_split, const Dataset& test_split,
                        const ProtocolSpec& spec, const TrainConfig& train_cfg,
                        const std::string& artifact_dir) {
    if (spec.novelty_classes.empty())
        throw ConfigError("run_protocol: no novelty classes requested");
    if (train_split.num_classes != test_split.num_classes)
        throw ConfigError("run_protocol: train/test class counts disagree");

    EvalReport report;
    report.method_label = spec.method_label;
    report.num_classes = train_split.num_classes;
    report.config_json = train_config_to_json(train_cfg);
    report.dataset_paths = train_split.source_paths;
    report.dataset_checksums = train_split.source_checksums;
    report.dataset_paths.insert(report.dataset_paths.end(), test_split.source_paths.begin(),
                                test_split.source_paths.end());
    report.dataset_checksums.insert(report.dataset_checksums.end(),
                                    test_split.source_checksums.begin(),
                                    test_split.source_checksums.end());

    for (int novelty : spec.novelty_classes) {
        EvalCell cell;
        cell.novelty_class = novelty;
        try {
            if (novelty < 0 || novelty >= train_split.num_classes)
                throw ConfigError("novelty class " + std::to_string(novelty) + " out of range");

            std::vector<int> normals;
            for (int c = 0; c < train_split.num_classes; ++c)
                if (c != novelty) normals.push_back(c);

            Dataset train_normals = filter_and_remap(train_split, normals);
            TrainConfig cell_cfg = train_cfg;
            cell_cfg.seed = Rng::substream(spec.seed, "cell-" + std::to_string(novelty)).next_u64();

            std::string ckpt;
            if (!artifact_dir.empty())
                ckpt = artifact_dir + "/" + spec.method_label + "_novel" + std::to_string(novelty) +
                       ".oaae";

            TrainReport train_report;
            ModelBundle model = train(train_normals, cell_cfg, train_report, ckpt);
            if (!ckpt.empty()) cell.checkpoint_hash = checksum_file(ckpt);

            std::vector<int> flags(test_split.count());
            for (int i = 0; i < test_split.count(); ++i)
                flags[i] = test_split.labels[i] == novelty ? 1 : 0;

            auto scores = score_batch(model, test_split.images, spec.score_kind, flags);
            cell.auroc_value = auroc(scores);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
            cell.ok = false;
        }
        report.cells.push_back(cell);
    }
    return report;
}

namespace {

std::string format_cell(const EvalCell& c) {
    if (!c.ok) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", c.auroc_value);
    return buf;
}

std::string format_mean(const EvalReport& r) {
    double m = r.mean_auroc();
    if (std::isnan(m)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", m);
    return buf;
}

} // namespace

void write_eval_csv(std::span<const EvalReport> reports, const std::string& path) {
    if (reports.empty()) throw ConfigError("write_eval_csv: nothing to write");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open eval csv for writing: " + path);

    out << "method";
    for (const auto& c : reports.front().cells) out << ",class_" << c.novelty_class;
    out << ",mean\n";
    for (const auto& r : reports) {
        out << r.method_label;
        for (const auto& c : r.cells) out << "," << format_cell(c);
        out << "," << format_mean(r) << "\n";
    }
}

std::string render_eval_table(std::span<const EvalReport> reports) {
    if (reports.empty()) return "";

    std::vector<std::string> headers = {"method"};
    for (const auto& c : reports.front().cells)
        headers.push_back(std::to_string(c.novelty_class));
    headers.push_back("Mean");

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        std::vector<std::string> row = {r.method_label};
        for (const auto& c : r.cells) row.push_back(format_cell(c));
        row.push_back(format_mean(r));
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(headers.size());
    for (std::size_t i = 0; i < headers.size(); ++i) {
        widths[i] = headers[i].size();
        for (const auto& row : rows) widths[i] = std::max(widths[i], row[i].size());
    }

    std::ostringstream os;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i == 0 ? "" : "  ");
            os << row[i] << std::string(widths[i] - row[i].size(), ' ');
        }
        os << "\n";
    };
    emit_row(headers);
    std::size_t total = 0;
    for (std::size_t wd : widths) total += wd + 2;
    os << std::string(total > 2 ? total - 2 : total, '-') << "\n";
    for (const auto& row : rows) emit_row(row);
    return os.str();
}

void write_eval_meta(std::span<const EvalReport> reports, const std::string& path) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json jr;
        jr["method"] = r.method_label;
        jr["num_classes"] = r.num_classes;
        jr["config"] = nlohmann::ordered_json::parse(r.config_json);
        jr["dataset_paths"] = r.dataset_paths;
        std::vector<std::string> sums;
        for (auto c : r.dataset_checksums) {
            char buf[24];
            std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(c));
            sums.emplace_back(buf);
        }
        jr["dataset_checksums"] = sums;
        nlohmann::ordered_json cells = nlohmann::ordered_json::array();
        for (const auto& c : r.cells) {
            nlohmann::ordered_json jc;
            jc["novelty_class"] = c.novelty_class;
            jc["ok"] = c.ok;
            if (c.ok) {
                jc["auroc"] = c.auroc_value;
                char buf[24];
                std::snprintf(buf, sizeof(buf), "%016llx",
                              static_cast<unsigned long long>(c.checkpoint_hash));
                jc["checkpoint_id"] = buf;
            } else {
                jc["error"] = c.error;
            }
            cells.push_back(jc);
        }
        jr["cells"] = cells;
        j.push_back(jr);
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open eval meta for writing: " + path);
    out << j.dump(2) << "\n";
}

} // namespace oaae
