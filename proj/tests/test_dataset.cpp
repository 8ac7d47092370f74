#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "ptc/dataset.hpp"

using namespace ptc;

namespace {

TriangleMesh flat_grid(int n) {
  SurfaceSpec spec;
  spec.nu = spec.nv = n;
  return generate_surface(spec);
}

void put_be32(std::ofstream& out, uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void write_idx_images(const std::string& path,
                      const std::vector<std::vector<unsigned char>>& images,
                      int rows, int cols) {
  std::ofstream out(path, std::ios::binary);
  put_be32(out, 2051);
  put_be32(out, static_cast<uint32_t>(images.size()));
  put_be32(out, static_cast<uint32_t>(rows));
  put_be32(out, static_cast<uint32_t>(cols));
  for (const auto& img : images)
    out.write(reinterpret_cast<const char*>(img.data()),
              static_cast<long>(img.size()));
}

void write_idx_labels(const std::string& path,
                      const std::vector<unsigned char>& labels) {
  std::ofstream out(path, std::ios::binary);
  put_be32(out, 2049);
  put_be32(out, static_cast<uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<long>(labels.size()));
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("idx files read back exactly what was written") {
  const std::string img_path = "/tmp/ptc_test_images-idx3-ubyte";
  const std::string lbl_path = "/tmp/ptc_test_labels-idx1-ubyte";
  std::vector<std::vector<unsigned char>> raw(2,
                                              std::vector<unsigned char>(12));
  for (int i = 0; i < 12; ++i) {
    raw[0][i] = static_cast<unsigned char>(i);
    raw[1][i] = static_cast<unsigned char>(255 - i);
  }
  write_idx_images(img_path, raw, 3, 4);
  write_idx_labels(lbl_path, {7, 1});

  const ImageSet set = load_idx_images(img_path);
  CHECK(set.rows == 3);
  CHECK(set.cols == 4);
  REQUIRE(set.images.size() == 2);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) {
      CHECK(set.images[0](r, c) == raw[0][r * 4 + c] / 255.0);
      CHECK(set.images[1](r, c) == raw[1][r * 4 + c] / 255.0);
    }

  const std::vector<int> labels = load_idx_labels(lbl_path);
  CHECK(labels == std::vector<int>{7, 1});

  std::remove(img_path.c_str());
  std::remove(lbl_path.c_str());
}

TEST_CASE("wrong magic numbers are refused") {
  const std::string path = "/tmp/ptc_bad_idx";
  {
    std::ofstream out(path, std::ios::binary);
    put_be32(out, 2049);  // label magic in an image slot
    put_be32(out, 0);
    put_be32(out, 28);
    put_be32(out, 28);
  }
  CHECK_THROWS_WITH_AS(load_idx_images(path), doctest::Contains("magic"),
                       std::runtime_error);
  CHECK_THROWS_AS(load_idx_labels("/tmp/ptc_does_not_exist"),
                  std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("image sampling is bilinear in the stored uv") {
  const TriangleMesh mesh = flat_grid(3);  // uv lattice {0, 0.5, 1}^2
  Eigen::MatrixXd img(2, 2);
  img << 0.1, 0.9,  // top row (v = 1)
      0.3, 0.5;     // bottom row (v = 0)
  const Eigen::MatrixXd signal = image_to_signal(mesh, img);
  REQUIRE(signal.rows() == 9);
  CHECK(signal(mesh.grid_vertex(0, 2), 0) == doctest::Approx(0.1));  // u=0,v=1
  CHECK(signal(mesh.grid_vertex(2, 2), 0) == doctest::Approx(0.9));
  CHECK(signal(mesh.grid_vertex(0, 0), 0) == doctest::Approx(0.3));
  CHECK(signal(mesh.grid_vertex(2, 0), 0) == doctest::Approx(0.5));
  CHECK(signal(mesh.grid_vertex(1, 1), 0) ==
        doctest::Approx((0.1 + 0.9 + 0.3 + 0.5) / 4.0));
  CHECK(signal(mesh.grid_vertex(1, 2), 0) == doctest::Approx(0.5));

  const TriangleMesh sphere = make_icosphere(0);
  CHECK_THROWS_AS(image_to_signal(sphere, img), std::invalid_argument);
}

TEST_CASE("datasets slice the image set") {
  const TriangleMesh mesh = flat_grid(4);
  ImageSet set;
  set.rows = set.cols = 2;
  for (int i = 0; i < 5; ++i) {
    set.images.push_back(Eigen::MatrixXd::Constant(2, 2, 0.1 * i));
    set.labels.push_back(i);
  }
  const Dataset mid = make_dataset(mesh, set, 1, 2);
  REQUIRE(mid.size() == 2);
  CHECK(mid.labels == std::vector<int>{1, 2});
  CHECK((mid.signals[0] - image_to_signal(mesh, set.images[1]))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  const Dataset tail = make_dataset(mesh, set, 3);
  REQUIRE(tail.size() == 2);
  CHECK(tail.labels == std::vector<int>{3, 4});

  CHECK_THROWS_AS(make_dataset(mesh, set, 9), std::invalid_argument);
}

TEST_CASE("synthetic digits are deterministic and in range") {
  const ImageSet a = generate_synthetic_digits(40, 123);
  const ImageSet b = generate_synthetic_digits(40, 123);
  REQUIRE(a.images.size() == 40);
  CHECK(a.rows == 28);
  CHECK(a.cols == 28);
  CHECK(a.labels == b.labels);
  for (int i = 0; i < 40; ++i) {
    CHECK(a.labels[i] >= 0);
    CHECK(a.labels[i] <= 9);
    CHECK((a.images[i] - b.images[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.images[i].minCoeff() >= 0.0);
    CHECK(a.images[i].maxCoeff() <= 1.0);
    CHECK(a.images[i].maxCoeff() > 0.1);  // something was drawn
  }
  const std::set<int> classes(a.labels.begin(), a.labels.end());
  CHECK(classes.size() >= 6);

  const ImageSet other = generate_synthetic_digits(40, 124);
  bool differs = false;
  for (int i = 0; i < 40 && !differs; ++i)
    differs = (a.images[i] - other.images[i]).cwiseAbs().maxCoeff() > 0.0;
  CHECK(differs);
}

TEST_CASE("missing idx directory falls back to synthetic data") {
  const MnistData data = load_mnist_or_synthetic("", 80, 30, 9);
  CHECK(data.synthetic);
  CHECK(data.train.images.size() == 80);
  CHECK(data.test.images.size() == 30);
  CHECK((data.train.images[0] - data.test.images[0]).cwiseAbs().maxCoeff() >
        0.0);

  const MnistData again = load_mnist_or_synthetic("", 80, 30, 9);
  CHECK(again.train.labels == data.train.labels);
  CHECK((again.train.images[5] - data.train.images[5]).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("a complete idx directory is preferred over synthetic") {
  namespace fs = std::filesystem;
  const fs::path dir = "/tmp/ptc_idx_dir";
  fs::create_directories(dir);
  std::vector<std::vector<unsigned char>> imgs(
      3, std::vector<unsigned char>(4, 128));
  imgs[1][0] = 255;
  write_idx_images((dir / "train-images-idx3-ubyte").string(), imgs, 2, 2);
  write_idx_labels((dir / "train-labels-idx1-ubyte").string(), {3, 1, 4});
  write_idx_images((dir / "t10k-images-idx3-ubyte").string(), {imgs[0]}, 2, 2);
  write_idx_labels((dir / "t10k-labels-idx1-ubyte").string(), {9});

  const MnistData data = load_mnist_or_synthetic(dir.string(), 2, 0, 1);
  CHECK(!data.synthetic);
  CHECK(data.train.images.size() == 2);  // train_limit clips 3 -> 2
  CHECK(data.train.labels == std::vector<int>{3, 1});
  CHECK(data.test.images.size() == 1);
  CHECK(data.test.labels == std::vector<int>{9});
  CHECK(data.train.images[1](0, 0) == 1.0);

  fs::remove_all(dir);
}

TEST_SUITE_END();
