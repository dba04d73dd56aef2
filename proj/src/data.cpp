#include "oaae/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "oaae/errors.hpp"

namespace oaae {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::uint32_t be32(const std::string& bytes, std::size_t offset, const std::string& path) {
    if (offset + 4 > bytes.size())
        throw ParseError(path + ": truncated header at byte " + std::to_string(offset));
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset])) << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 1])) << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 2])) << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + 3]));
}

void append_be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

} // namespace

Dataset read_idx(const std::string& images_path, const std::string& labels_path) {
    const std::string ib = read_file(images_path);
    const std::string lb = read_file(labels_path);

    if (be32(ib, 0, images_path) != kIdxImagesMagic)
        throw ParseError(images_path + ": bad IDX image magic at offset 0");
    if (be32(lb, 0, labels_path) != kIdxLabelsMagic)
        throw ParseError(labels_path + ": bad IDX label magic at offset 0");

    const std::uint32_t n = be32(ib, 4, images_path);
    const std::uint32_t rows = be32(ib, 8, images_path);
    const std::uint32_t cols = be32(ib, 12, images_path);
    const std::uint32_t ln = be32(lb, 4, labels_path);

    if (n != ln)
        throw ParseError("IDX image count " + std::to_string(n) + " does not match label count " +
                         std::to_string(ln));

    const std::size_t want_pixels = static_cast<std::size_t>(n) * rows * cols;
    if (ib.size() != 16 + want_pixels)
        throw ParseError(images_path + ": payload is " + std::to_string(ib.size() - 16) +
                         " bytes at offset 16, expected " + std::to_string(want_pixels));
    if (lb.size() != 8 + static_cast<std::size_t>(n))
        throw ParseError(labels_path + ": payload is " + std::to_string(lb.size() - 8) +
                         " bytes at offset 8, expected " + std::to_string(n));

    Dataset ds;
    ds.images = Tensor4(static_cast<int>(n), 1, static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t i = 0; i < want_pixels; ++i)
        ds.images.data[i] = static_cast<unsigned char>(ib[16 + i]) / 255.0;

    ds.labels.resize(n);
    int max_label = -1;
    for (std::uint32_t i = 0; i < n; ++i) {
        ds.labels[i] = static_cast<unsigned char>(lb[8 + i]);
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.num_classes = max_label + 1;
    ds.source_paths = {images_path, labels_path};
    ds.source_checksums = {fnv1a64(ib.data(), ib.size()), fnv1a64(lb.data(), lb.size())};
    return ds;
}

void write_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path) {
    if (ds.images.c != 1)
        throw IoError("write_idx: only single-channel images fit the IDX image format");

    std::string ib;
    append_be32(ib, kIdxImagesMagic);
    append_be32(ib, static_cast<std::uint32_t>(ds.images.n));
    append_be32(ib, static_cast<std::uint32_t>(ds.images.h));
    append_be32(ib, static_cast<std::uint32_t>(ds.images.w));
    for (double p : ds.images.data) {
        long v = std::lround(p * 255.0);
        if (v < 0 || v > 255) throw IoError("write_idx: pixel out of [0,1] range");
        ib.push_back(static_cast<char>(static_cast<unsigned char>(v)));
    }

    std::string lb;
    append_be32(lb, kIdxLabelsMagic);
    append_be32(lb, static_cast<std::uint32_t>(ds.labels.size()));
    for (int l : ds.labels) {
        if (l < 0 || l > 255) throw IoError("write_idx: label out of byte range");
        lb.push_back(static_cast<char>(static_cast<unsigned char>(l)));
    }

    std::ofstream io(images_path, std::ios::binary | std::ios::trunc);
    if (!io) throw IoError("cannot open for writing: " + images_path);
    io.write(ib.data(), static_cast<std::streamsize>(ib.size()));
    std::ofstream lo(labels_path, std::ios::binary | std::ios::trunc);
    if (!lo) throw IoError("cannot open for writing: " + labels_path);
    lo.write(lb.data(), static_cast<std::streamsize>(lb.size()));
}

Dataset read_cifar10(const std::vector<std::string>& batch_files) {
    constexpr std::size_t kRecord = 3073;
    constexpr int kSide = 32;

    std::vector<std::string> blobs;
    std::size_t total = 0;
    for (const auto& path : batch_files) {
        blobs.push_back(read_file(path));
        if (blobs.back().size() % kRecord != 0)
            throw ParseError(path + ": size " + std::to_string(blobs.back().size()) +
                             " is not a multiple of the 3073-byte record");
        total += blobs.back().size() / kRecord;
    }

    Dataset ds;
    ds.images = Tensor4(static_cast<int>(total), 3, kSide, kSide);
    ds.labels.resize(total);
    ds.num_classes = 10;

    std::size_t img = 0;
    for (std::size_t f = 0; f < blobs.size(); ++f) {
        const std::string& b = blobs[f];
        for (std::size_t r = 0; r + kRecord <= b.size(); r += kRecord, ++img) {
            int label = static_cast<unsigned char>(b[r]);
            if (label > 9)
                throw ParseError(batch_files[f] + ": label byte " + std::to_string(label) +
                                 " at offset " + std::to_string(r) + " exceeds 9");
            ds.labels[img] = label;
            const std::size_t base = img * 3 * kSide * kSide;
            for (std::size_t p = 0; p < 3072; ++p)
                ds.images.data[base + p] = static_cast<unsigned char>(b[r + 1 + p]) / 255.0;
        }
        ds.source_paths.push_back(batch_files[f]);
        ds.source_checksums.push_back(fnv1a64(b.data(), b.size()));
    }
    return ds;
}

Tensor4 gaussian_noise(const Tensor4& images, double stddev, Rng& rng, bool clamp) {
    if (!(stddev >= 0.0))
        throw ConfigError("gaussian_noise: stddev must be nonnegative");
    Tensor4 out = images;
    if (stddev == 0.0) return out;
    for (double& p : out.data) {
        p += rng.normal(0.0, stddev);
        if (clamp) p = std::clamp(p, 0.0, 1.0);
    }
    return out;
}

Tensor4 gaussian_noise(const Tensor4& images, double stddev, std::uint64_t seed, bool clamp) {
    Rng rng(seed);
    return gaussian_noise(images, stddev, rng, clamp);
}

Tensor4 synthetic_template(int label, int num_classes, int side) {
    // Oriented sinusoidal grating; orientation is the class identity. The
    // orientations span only a quarter turn, so neighbouring classes stay
    // close enough that a held-out one can be synthesized by blending the
    // others; that keeps class structure, not pixel distance, the signal.
    const double theta = 1.5707963267948966 * label / num_classes;
    const double freq = 3.0;
    const double phase = 0.9 * label;
    Tensor4 t(1, 1, side, side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            double u = (x * std::cos(theta) + y * std::sin(theta)) / side;
            t.at(0, 0, y, x) = 0.5 + 0.45 * std::sin(2.0 * 3.14159265358979323846 * freq * u + phase);
        }
    return t;
}

Dataset synthetic_multimodal(int num_classes, int per_class, int side, std::uint64_t seed,
                             double noise_std) {
    if (num_classes < 2) throw ConfigError("synthetic_multimodal: need at least 2 classes");
    if (per_class < 1 || side < 4) throw ConfigError("synthetic_multimodal: bad size arguments");

    std::vector<Tensor4> templates;
    templates.reserve(num_classes);
    for (int c = 0; c < num_classes; ++c)
        templates.push_back(synthetic_template(c, num_classes, side));

    const int total = num_classes * per_class;
    Dataset ds;
    ds.images = Tensor4(total, 1, side, side);
    ds.labels.resize(total);
    ds.num_classes = num_classes;
    ds.split = "synthetic";
    ds.source_paths = {"synthetic:C=" + std::to_string(num_classes) +
                       ",n=" + std::to_string(per_class) + ",s=" + std::to_string(side) +
                       ",seed=" + std::to_string(seed)};
    ds.source_checksums = {seed};

    Rng rng = Rng::substream(seed, "synthetic");
    const std::size_t pixels = static_cast<std::size_t>(side) * side;
    for (int i = 0; i < total; ++i) {
        const int label = i % num_classes;
        ds.labels[i] = label;
        const std::size_t base = static_cast<std::size_t>(i) * pixels;
        for (std::size_t p = 0; p < pixels; ++p) {
            double v = templates[label].data[p];
            if (noise_std > 0.0) v += rng.normal(0.0, noise_std);
            ds.images.data[base + p] = std::clamp(v, 0.0, 1.0);
        }
    }
    return ds;
}

Dataset filter_and_remap(const Dataset& ds, const std::vector<int>& keep_classes) {
    std::vector<int> sorted = keep_classes;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    if (sorted.empty()) throw ConfigError("filter_and_remap: empty class list");

    std::vector<int> remap(ds.num_classes, -1);
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (sorted[k] < 0 || sorted[k] >= ds.num_classes)
            throw ConfigError("filter_and_remap: class " + std::to_string(sorted[k]) +
                              " not present in dataset");
        remap[sorted[k]] = static_cast<int>(k);
    }

    std::vector<int> take;
    for (int i = 0; i < ds.count(); ++i)
        if (remap[ds.labels[i]] >= 0) take.push_back(i);

    Dataset out;
    out.images = Tensor4(static_cast<int>(take.size()), ds.images.c, ds.images.h, ds.images.w);
    out.labels.resize(take.size());
    out.num_classes = static_cast<int>(sorted.size());
    out.split = ds.split;
    out.source_paths = ds.source_paths;
    out.source_checksums = ds.source_checksums;

    const std::size_t pixels = static_cast<std::size_t>(ds.images.c) * ds.images.h * ds.images.w;
    for (std::size_t k = 0; k < take.size(); ++k) {
        const std::size_t src = static_cast<std::size_t>(take[k]) * pixels;
        std::copy_n(ds.images.data.begin() + src, pixels, out.images.data.begin() + k * pixels);
        out.labels[k] = remap[ds.labels[take[k]]];
    }
    return out;
}

std::vector<int> label_histogram(const Dataset& ds) {
    std::vector<int> hist(ds.num_classes, 0);
    for (int l : ds.labels)
        if (l >= 0 && l < ds.num_classes) ++hist[l];
    return hist;
}

} // namespace oaae
