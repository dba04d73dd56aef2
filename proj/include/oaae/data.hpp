#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oaae/rng.hpp"
#include "oaae/tensor.hpp"

namespace oaae {

// Immutable image dataset: pixels in [0, 1], one integer class label per image.
struct Dataset {
    Tensor4 images;
    std::vector<int> labels;
    int num_classes = 0;
    std::string split;                     // "train" / "test" / caller's tag
    std::vector<std::string> source_paths; // provenance
    std::vector<std::uint64_t> source_checksums;

    int count() const { return images.n; }
};

// IDX (MNIST-style) container: big-endian magic 0x00000803 for images /
// 0x00000801 for labels, big-endian dimension sizes, unsigned byte payload.
// Pixels are scaled to [0, 1] by /255. Parse errors name byte offsets.
Dataset read_idx(const std::string& images_path, const std::string& labels_path);

// Inverse of read_idx, used to build fixtures; write_idx(read_idx(f)) == f.
void write_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path);

// CIFAR-10 binary batches: 3073-byte records, 1 label byte + 3072 channel-
// planar pixel bytes. An empty file yields an empty dataset.
Dataset read_cifar10(const std::vector<std::string>& batch_files);

// Adds i.i.d. N(0, stddev^2) per pixel. Output is not clamped unless asked:
// training noise may leave [0, 1].
Tensor4 gaussian_noise(const Tensor4& images, double stddev, Rng& rng, bool clamp = false);
Tensor4 gaussian_noise(const Tensor4& images, double stddev, std::uint64_t seed, bool clamp = false);

// Seeded multi-class toy dataset: each class is a fixed oriented-grating
// template plus pixel noise, clamped to [0, 1]. Labels cycle 0..C-1.
Dataset synthetic_multimodal(int num_classes, int per_class, int side, std::uint64_t seed,
                             double noise_std = 0.12);

// The noiseless class template used by synthetic_multimodal.
Tensor4 synthetic_template(int label, int num_classes, int side);

// Protocol helpers: keep only the listed classes and remap their labels to
// 0..k-1 in ascending original order.
Dataset filter_and_remap(const Dataset& ds, const std::vector<int>& keep_classes);

std::vector<int> label_histogram(const Dataset& ds);

} // namespace oaae
