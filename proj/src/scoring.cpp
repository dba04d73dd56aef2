#include "oaae/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "oaae/errors.hpp"
#include "oaae/losses.hpp"

namespace oaae {

const char* score_kind_name(ScoreKind k) { return k == ScoreKind::angle ? "angle" : "mse"; }

ScoreKind score_kind_from_name(const std::string& name) {
    if (name == "angle") return ScoreKind::angle;
    if (name == "mse") return ScoreKind::mse;
    throw ConfigError("unknown score kind '" + name + "' (expected angle or mse)");
}

double latent_angle(std::span<const double> z0, std::span<const double> z1) {
    if (z0.size() != z1.size())
        throw NumericError("latent_angle: dimension mismatch");
    double dot = 0.0, n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < z0.size(); ++i) {
        dot += z0[i] * z1[i];
        n0 += z0[i] * z0[i];
        n1 += z1[i] * z1[i];
    }
    n0 = std::sqrt(n0);
    n1 = std::sqrt(n1);
    if (n0 < 1e-12 || n1 < 1e-12)
        throw DegenerateLatentError("latent_angle: near-zero latent norm");
    double cosine = std::clamp(dot / (n0 * n1), -1.0, 1.0);
    return std::acos(cosine);
}

namespace {

// One batched pass of the test-phase pipeline; returns z0 and z1 per example.
void roundtrip_latents(const ModelBundle& model, const Tensor4& images, Tensor4& z0, Tensor4& z1) {
    z0 = model.encoder.forward(images);
    Tensor4 reconstructed = model.decoder.forward(z0);
    z1 = model.encoder.forward(reconstructed);
}

} // namespace

double novelty_score(const ModelBundle& model, const Tensor4& image) {
    if (image.n != 1)
        throw NumericError("novelty_score: expected a single image; use score_batch for batches");
    Tensor4 z0, z1;
    roundtrip_latents(model, image, z0, z1);
    return latent_angle(z0.data, z1.data);
}

double recon_error_score(const ModelBundle& model, const Tensor4& image) {
    if (image.n != 1)
        throw NumericError("recon_error_score: expected a single image");
    Tensor4 z = model.encoder.forward(image);
    Tensor4 rec = model.decoder.forward(z);
    return mse(image, rec);
}

std::vector<ScoredExample> score_batch(const ModelBundle& model, const Tensor4& images,
                                       ScoreKind kind, std::span<const int> novelty_flags) {
    if (!novelty_flags.empty() && static_cast<int>(novelty_flags.size()) != images.n)
        throw NumericError("score_batch: novelty flag count does not match image count");

    std::vector<ScoredExample> out(images.n);
    if (images.n == 0) return out;

    const std::size_t pixels = static_cast<std::size_t>(images.c) * images.h * images.w;
    constexpr int kChunk = 64;
    std::vector<int> degenerate;

    for (int begin = 0; begin < images.n; begin += kChunk) {
        const int end = std::min(begin + kChunk, images.n);
        Tensor4 chunk(end - begin, images.c, images.h, images.w);
        std::copy_n(images.data.begin() + static_cast<std::size_t>(begin) * pixels,
                    static_cast<std::size_t>(end - begin) * pixels, chunk.data.begin());

        if (kind == ScoreKind::angle) {
            Tensor4 z0, z1;
            roundtrip_latents(model, chunk, z0, z1);
            const int d = z0.c;
            for (int i = 0; i < chunk.n; ++i) {
                std::span<const double> a(z0.data.data() + static_cast<std::size_t>(i) * d, d);
                std::span<const double> b(z1.data.data() + static_cast<std::size_t>(i) * d, d);
                try {
                    out[begin + i].score = latent_angle(a, b);
                } catch (const DegenerateLatentError&) {
                    degenerate.push_back(begin + i);
                }
            }
        } else {
            Tensor4 z = model.encoder.forward(chunk);
            Tensor4 rec = model.decoder.forward(z);
            for (int i = 0; i < chunk.n; ++i) {
                double acc = 0.0;
                const std::size_t base = static_cast<std::size_t>(i) * pixels;
                for (std::size_t p = 0; p < pixels; ++p) {
                    double diff = chunk.data[base + p] - rec.data[base + p];
                    acc += diff * diff;
                }
                out[begin + i].score = acc / static_cast<double>(pixels);
            }
        }
    }

    if (!degenerate.empty()) {
        std::string msg = "score_batch: degenerate latent at indices";
        for (int i : degenerate) msg += " " + std::to_string(i);
        throw DegenerateLatentError(msg, degenerate);
    }

    for (int i = 0; i < images.n; ++i) {
        out[i].id = i;
        if (!novelty_flags.empty()) {
            out[i].is_novel = novelty_flags[i] != 0;
            out[i].has_label = true;
        }
    }
    return out;
}

void write_scores_csv(std::span<const ScoredExample> scores, ScoreKind kind,
                      const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open score csv for writing: " + path);
    out << "example_id,score,is_novel,score_kind\n";
    char line[256];
    for (const auto& s : scores) {
        std::snprintf(line, sizeof(line), "%d,%.17g,%s,%s\n", s.id, s.score,
                      s.has_label ? (s.is_novel ? "1" : "0") : "", score_kind_name(kind));
        out << line;
    }
}

std::vector<ScoredExample> read_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open score csv: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty score csv");

    std::vector<ScoredExample> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id_s, score_s, novel_s, kind_s;
        if (!std::getline(ss, id_s, ',') || !std::getline(ss, score_s, ',') ||
            !std::getline(ss, novel_s, ',') || !std::getline(ss, kind_s))
            throw ParseError(path + ": malformed row at line " + std::to_string(line_no));
        ScoredExample s;
        try {
            s.id = std::stoi(id_s);
            s.score = std::stod(score_s);
        } catch (const std::exception&) {
            throw ParseError(path + ": bad numeric field at line " + std::to_string(line_no));
        }
        if (!novel_s.empty()) {
            s.has_label = true;
            s.is_novel = novel_s == "1";
        }
        out.push_back(s);
    }
    return out;
}

} // namespace oaae
