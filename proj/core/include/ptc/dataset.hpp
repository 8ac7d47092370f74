#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptc/net.hpp"

namespace ptc {

struct ImageSet {
  int rows = 0;
  int cols = 0;
  std::vector<Eigen::MatrixXd> images;  // grayscale in [0,1], row 0 on top
  std::vector<int> labels;
};

// Standard IDX containers, big-endian headers (magic 2051 for image
// stacks, 2049 for label lists).
ImageSet load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);

// Bilinear sample of the image at each vertex's stored (u, v), with
// v = 1 at the image's top row. Returns an n x 1 signal.
Eigen::MatrixXd image_to_signal(const TriangleMesh& mesh,
                                const Eigen::MatrixXd& image);

// Pairs an image set with a mesh: one single-channel signal per image.
// `offset`/`limit` slice the set; limit 0 means everything remaining.
Dataset make_dataset(const TriangleMesh& mesh, const ImageSet& images,
                     int offset = 0, int limit = 0);

// Procedural stand-in corpus for offline runs: per-class polyline
// skeletons rendered at 28x28 with seeded affine and thickness jitter.
// Deterministic for a fixed (count, seed).
ImageSet generate_synthetic_digits(int count, uint64_t seed);

struct MnistData {
  ImageSet train;
  ImageSet test;
  bool synthetic = false;
};

// Reads the four uncompressed IDX files from `dir` when they are all
// present, otherwise falls back to the synthetic corpus. `dir` may be
// empty to go straight to the fallback.
MnistData load_mnist_or_synthetic(const std::string& dir, int train_limit,
                                  int test_limit, uint64_t seed);

}  // namespace ptc
