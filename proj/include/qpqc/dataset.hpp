#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpqc/encodings.hpp"
#include "qpqc/tensor.hpp"

namespace qpqc {

struct Sample {
  Tensor image;  // (C, H, W), values in [0, 1]
  int label = 0;
  std::string file;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> val;
};

/// QIMG file: "QIMG", u32 H, W, C (little-endian), then H*W*C little-endian
/// float32 values in (y, x, c) order.
void write_qimg(const std::string& path, const Tensor& image);
/// Returns a (C, H, W) tensor. Throws IngestionError naming the file on a bad
/// header, truncated payload or a shape different from `expected`.
Tensor read_qimg(const std::string& path, ImageShape expected);

/// Reads `dir`/manifest.csv (`filename,label`, optional header row) and
/// splits every class `split_fraction` / rest, shuffled under `seed`.
/// Pixel values above 1 are read as 8-bit intensities and divided by 255.
/// Throws IngestionError on a missing manifest, labels outside [0, class_count),
/// absent classes or corrupt images.
Dataset load_dataset(const std::string& dir, ImageShape shape, int class_count, std::uint64_t seed,
                     double split_fraction = 0.8);

/// Writes `per_class` procedural texture images per class plus manifest.csv
/// into `dir` (created if needed). Classes differ in texture family and hue.
/// Returns the manifest path. Output is byte-identical for equal arguments.
std::string synth_dataset(const std::string& dir, ImageShape shape, int class_count, int per_class,
                          std::uint64_t seed);

/// Held-out accuracy of a softmax regression on raw pixels (standardized with
/// training statistics), trained by full-batch gradient descent.
double linear_probe_accuracy(const Dataset& data, int class_count, int iterations = 300);

}  // namespace qpqc
