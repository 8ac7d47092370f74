#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "ptc/dataset.hpp"

namespace ptc {

namespace {

uint32_t read_be32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) |
         (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

}  // namespace

ImageSet load_idx_images(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const uint32_t magic = read_be32(in);
  if (!in || magic != 2051)
    throw std::runtime_error(path + ": not an IDX image file (magic " +
                             std::to_string(magic) + ")");
  const uint32_t count = read_be32(in);
  const uint32_t rows = read_be32(in);
  const uint32_t cols = read_be32(in);
  if (!in || rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
    throw std::runtime_error(path + ": bad IDX image header");
  ImageSet set;
  set.rows = static_cast<int>(rows);
  set.cols = static_cast<int>(cols);
  set.images.reserve(count);
  std::vector<unsigned char> buf(rows * cols);
  for (uint32_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (!in) throw std::runtime_error(path + ": truncated image data");
    Eigen::MatrixXd img(rows, cols);
    for (uint32_t r = 0; r < rows; ++r)
      for (uint32_t c = 0; c < cols; ++c)
        img(r, c) = buf[r * cols + c] / 255.0;
    set.images.push_back(std::move(img));
  }
  return set;
}

std::vector<int> load_idx_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  const uint32_t magic = read_be32(in);
  if (!in || magic != 2049)
    throw std::runtime_error(path + ": not an IDX label file (magic " +
                             std::to_string(magic) + ")");
  const uint32_t count = read_be32(in);
  std::vector<unsigned char> buf(count);
  in.read(reinterpret_cast<char*>(buf.data()), count);
  if (!in) throw std::runtime_error(path + ": truncated label data");
  return std::vector<int>(buf.begin(), buf.end());
}

Eigen::MatrixXd image_to_signal(const TriangleMesh& mesh,
                                const Eigen::MatrixXd& image) {
  if (mesh.uv.size() != static_cast<size_t>(mesh.vertex_count()))
    throw std::invalid_argument(
        "image_to_signal: mesh carries no (u,v) parameters");
  const long rows = image.rows(), cols = image.cols();
  Eigen::MatrixXd signal(mesh.vertex_count(), 1);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double cx = std::clamp(mesh.uv[v].x(), 0.0, 1.0) * (cols - 1);
    const double ry = (1.0 - std::clamp(mesh.uv[v].y(), 0.0, 1.0)) * (rows - 1);
    const long c0 = std::min(static_cast<long>(cx), cols - 2);
    const long r0 = std::min(static_cast<long>(ry), rows - 2);
    const double fc = cx - c0, fr = ry - r0;
    signal(v, 0) = image(r0, c0) * (1 - fr) * (1 - fc) +
                   image(r0, c0 + 1) * (1 - fr) * fc +
                   image(r0 + 1, c0) * fr * (1 - fc) +
                   image(r0 + 1, c0 + 1) * fr * fc;
  }
  return signal;
}

Dataset make_dataset(const TriangleMesh& mesh, const ImageSet& images,
                     int offset, int limit) {
  if (images.images.size() != images.labels.size())
    throw std::invalid_argument("make_dataset: images and labels differ");
  const int total = static_cast<int>(images.images.size());
  if (offset < 0 || offset > total)
    throw std::invalid_argument("make_dataset: bad offset");
  const int count =
      limit > 0 ? std::min(limit, total - offset) : total - offset;
  Dataset data;
  data.signals.reserve(count);
  data.labels.reserve(count);
  for (int i = offset; i < offset + count; ++i) {
    data.signals.push_back(image_to_signal(mesh, images.images[i]));
    data.labels.push_back(images.labels[i]);
  }
  return data;
}

namespace {

using Stroke = std::vector<Eigen::Vector2d>;

// Hand-laid polyline skeletons in the unit square, y pointing down.
const std::array<std::vector<Stroke>, 10>& digit_strokes() {
  static const std::array<std::vector<Stroke>, 10> strokes = {{
      // 0: closed oval
      {{{0.38, 0.2}, {0.62, 0.2}, {0.74, 0.42}, {0.72, 0.66}, {0.58, 0.8},
        {0.4, 0.8}, {0.27, 0.62}, {0.28, 0.38}, {0.38, 0.2}}},
      // 1: flagged vertical with base
      {{{0.36, 0.32}, {0.52, 0.2}, {0.52, 0.8}},
       {{0.36, 0.8}, {0.66, 0.8}}},
      // 2: cap, diagonal, foot
      {{{0.3, 0.32}, {0.4, 0.2}, {0.62, 0.2}, {0.7, 0.36}, {0.56, 0.55},
        {0.3, 0.8}, {0.72, 0.8}}},
      // 3: double bump
      {{{0.3, 0.26}, {0.48, 0.2}, {0.66, 0.3}, {0.52, 0.47}, {0.68, 0.62},
        {0.52, 0.8}, {0.3, 0.74}},
       {{0.44, 0.47}, {0.56, 0.47}}},
      // 4: angled stem and crossbar
      {{{0.6, 0.8}, {0.6, 0.2}, {0.28, 0.62}, {0.74, 0.62}}},
      // 5: cap, spine, belly
      {{{0.68, 0.2}, {0.34, 0.2}, {0.32, 0.48}, {0.58, 0.46}, {0.7, 0.62},
        {0.56, 0.8}, {0.32, 0.76}}},
      // 6: hook into loop
      {{{0.64, 0.2}, {0.44, 0.3}, {0.33, 0.52}, {0.36, 0.74}, {0.56, 0.8},
        {0.68, 0.64}, {0.54, 0.52}, {0.36, 0.6}}},
      // 7: bar and slash
      {{{0.28, 0.2}, {0.72, 0.2}, {0.46, 0.8}}},
      // 8: stacked loops
      {{{0.5, 0.2}, {0.66, 0.3}, {0.55, 0.46}, {0.7, 0.64}, {0.5, 0.8},
        {0.3, 0.64}, {0.45, 0.46}, {0.34, 0.3}, {0.5, 0.2}}},
      // 9: loop with tail
      {{{0.66, 0.34}, {0.54, 0.2}, {0.36, 0.28}, {0.35, 0.46}, {0.55, 0.52},
        {0.66, 0.34}},
       {{0.66, 0.34}, {0.6, 0.8}}},
  }};
  return strokes;
}

double point_segment_distance(const Eigen::Vector2d& p,
                              const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 1e-30) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double stroke_distance(const Eigen::Vector2d& p,
                       const std::vector<Stroke>& strokes) {
  double best = 1e9;
  for (const auto& stroke : strokes)
    for (size_t i = 0; i + 1 < stroke.size(); ++i)
      best = std::min(best,
                      point_segment_distance(p, stroke[i], stroke[i + 1]));
  return best;
}

double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

}  // namespace

ImageSet generate_synthetic_digits(int count, uint64_t seed) {
  if (count < 0) throw std::invalid_argument("generate_synthetic_digits");
  constexpr int kSize = 28;
  ImageSet set;
  set.rows = set.cols = kSize;
  set.images.reserve(count);
  set.labels.reserve(count);
  std::mt19937_64 rng(seed);
  const Eigen::Vector2d center(0.5, 0.5);
  for (int i = 0; i < count; ++i) {
    const int digit = static_cast<int>(rng() % 10);
    const double tx = (unit_draw(rng) - 0.5) * 0.12;
    const double ty = (unit_draw(rng) - 0.5) * 0.12;
    const double scale = 0.85 + 0.3 * unit_draw(rng);
    const double rot = (unit_draw(rng) - 0.5) * 0.36;
    const double thickness = 0.045 * (0.8 + 0.5 * unit_draw(rng));
    const double cr = std::cos(rot), sr = std::sin(rot);
    const auto& strokes = digit_strokes()[digit];
    Eigen::MatrixXd img(kSize, kSize);
    for (int r = 0; r < kSize; ++r) {
      for (int c = 0; c < kSize; ++c) {
        // Pull the pixel back into the canonical stroke space.
        const Eigen::Vector2d p((c + 0.5) / kSize, (r + 0.5) / kSize);
        Eigen::Vector2d q = p - center - Eigen::Vector2d(tx, ty);
        q = Eigen::Vector2d(cr * q.x() + sr * q.y(),
                            -sr * q.x() + cr * q.y()) /
                scale +
            center;
        const double d = stroke_distance(q, strokes);
        img(r, c) = std::exp(-(d * d) / (2.0 * thickness * thickness));
      }
    }
    set.images.push_back(std::move(img));
    set.labels.push_back(digit);
  }
  return set;
}

MnistData load_mnist_or_synthetic(const std::string& dir, int train_limit,
                                  int test_limit, uint64_t seed) {
  namespace fs = std::filesystem;
  MnistData data;
  const std::array<std::string, 4> names = {
      "train-images-idx3-ubyte", "train-labels-idx1-ubyte",
      "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"};
  bool have_all = !dir.empty();
  if (have_all)
    for (const auto& name : names)
      if (!fs::exists(fs::path(dir) / name)) have_all = false;
  if (have_all) {
    const fs::path base(dir);
    data.train = load_idx_images((base / names[0]).string());
    data.train.labels = load_idx_labels((base / names[1]).string());
    data.test = load_idx_images((base / names[2]).string());
    data.test.labels = load_idx_labels((base / names[3]).string());
    if (data.train.images.size() != data.train.labels.size() ||
        data.test.images.size() != data.test.labels.size())
      throw std::runtime_error(dir + ": image/label counts disagree");
  } else {
    data.synthetic = true;
    const int train_n = train_limit > 0 ? train_limit : 10000;
    const int test_n = test_limit > 0 ? test_limit : 2000;
    data.train = generate_synthetic_digits(train_n, seed);
    data.test = generate_synthetic_digits(test_n, seed + 0x517cc1b727220a95ull);
  }
  auto clip = [](ImageSet& set, int limit) {
    if (limit > 0 && static_cast<int>(set.images.size()) > limit) {
      set.images.resize(limit);
      set.labels.resize(limit);
    }
  };
  clip(data.train, train_limit);
  clip(data.test, test_limit);
  return data;
}

}  // namespace ptc
