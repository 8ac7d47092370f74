#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "ptc/kernel.hpp"
#include "support/oracles.hpp"

using namespace ptc;

namespace {

constexpr double kPi = std::numbers::pi;

TriangleMesh flat_grid(int n) {
  SurfaceSpec spec;
  spec.nu = spec.nv = n;
  return generate_surface(spec);
}

GeodesicField line_field(const TriangleMesh& mesh) {
  std::vector<int> sources;
  for (int iv = 0; iv < mesh.grid_nv; ++iv)
    sources.push_back(mesh.grid_vertex(0, iv));
  return fast_marching(mesh, sources);
}

// On a flat convex domain the straight chord IS the geodesic, so wide
// chord seeding makes every patch coordinate exact. Used by the tests
// that compare against Euclidean formulas at tight tolerance.
FastMarchingOptions exact_flat_patches() {
  FastMarchingOptions opts;
  opts.exact_init_rings = 16;
  opts.exact_init_factor = 16.0;
  return opts;
}

struct FlatSetup {
  TriangleMesh mesh;
  GeodesicField field;
  FrameField frames;
  KernelBasis basis;
};

FlatSetup flat_setup(int n, double delta_edges) {
  FlatSetup s{flat_grid(n), {}, {}, {}};
  s.field = line_field(s.mesh);
  s.frames = build_frames(s.mesh, s.field);
  const double delta = delta_edges * s.mesh.mean_edge_length();
  s.basis = build_basis(s.mesh, s.frames, s.field, s.mesh.grid_vertex(n / 2, n / 2),
                        delta, 3, 8, exact_flat_patches());
  return s;
}

KernelTemplate random_template(int anchor, double delta, int n_r, int n_theta,
                               unsigned seed) {
  KernelTemplate t;
  t.anchor = anchor;
  t.delta = delta;
  t.n_r = n_r;
  t.n_theta = n_theta;
  t.weights.resize(t.bins());
  std::mt19937_64 rng(seed);
  for (int b = 0; b < t.bins(); ++b)
    t.weights[b] = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  return t;
}

double max_abs_diff(const Eigen::SparseMatrix<double>& A,
                    const Eigen::SparseMatrix<double>& B) {
  Eigen::SparseMatrix<double> D = A - B;
  double m = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(D, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("kernel");

TEST_CASE("template JSON survives a round trip unchanged") {
  const KernelTemplate t = make_gaussian_template(5, 0.37, 3, 8, 0.15);
  const KernelTemplate back = KernelTemplate::from_json_text(t.to_json_text());
  CHECK(back.anchor == t.anchor);
  CHECK(back.delta == t.delta);
  CHECK(back.n_r == t.n_r);
  CHECK(back.n_theta == t.n_theta);
  REQUIRE(back.weights.size() == t.weights.size());
  for (int b = 0; b < t.bins(); ++b) CHECK(back.weights[b] == t.weights[b]);

  const std::string path = "/tmp/ptc_template_roundtrip.json";
  t.save_json(path);
  const KernelTemplate loaded = KernelTemplate::load_json(path);
  CHECK(loaded.to_json_text() == t.to_json_text());
  std::remove(path.c_str());

  CHECK_THROWS_AS(KernelTemplate::from_json_text("{not json"),
                  std::invalid_argument);
  KernelTemplate bad = t;
  bad.delta = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = t;
  bad.weights.resize(3);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("edge detector is odd and has zero mean") {
  const double delta = 0.1;
  const KernelTemplate fwd = edge_detector_template(0.0, delta, 2, 8);
  const KernelTemplate rev = edge_detector_template(kPi, delta, 2, 8);
  REQUIRE(fwd.bins() == rev.bins());
  for (int b = 0; b < fwd.bins(); ++b)
    CHECK(fwd.weights[b] == doctest::Approx(-rev.weights[b]).epsilon(1e-12));
  double mean = 0.0;
  for (int b = 0; b < fwd.bins(); ++b)
    mean += fwd.weights[b] * bin_area(delta, fwd.n_r, fwd.n_theta, b / fwd.n_theta);
  CHECK(std::abs(mean) <= 1e-12);
}

TEST_CASE("interpolation taps sum to one inside the disc") {
  const FlatSetup s = flat_setup(20, 2.6);
  const TapTable plain = make_tap_table(s.basis);
  CHECK(plain.clipped_fraction == 0.0);
  for (int e = 0; e < s.basis.entries(); ++e) {
    double sum = 0.0;
    for (int t = plain.entry_offsets[e]; t < plain.entry_offsets[e + 1]; ++t)
      sum += plain.tap_weight[t];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  const TapTable stretched = make_tap_table(s.basis, 1.5, 0.0);
  CHECK(stretched.clipped_fraction > 0.0);
  for (int e = 0; e < s.basis.entries(); ++e) {
    double sum = 0.0;
    for (int t = stretched.entry_offsets[e]; t < stretched.entry_offsets[e + 1];
         ++t)
      sum += stretched.tap_weight[t];
    CHECK((std::abs(sum - 1.0) <= 1e-12 || sum == 0.0));
  }
}

TEST_CASE("single-bin kernel is the disc indicator") {
  const TriangleMesh mesh = flat_grid(20);
  const GeodesicField field = line_field(mesh);
  const FrameField frames = build_frames(mesh, field);
  const double delta = 2.2 * mesh.mean_edge_length();
  const KernelBasis basis =
      build_basis(mesh, frames, field, mesh.grid_vertex(10, 10), delta, 1, 1,
                  exact_flat_patches());
  KernelTemplate ind;
  ind.anchor = basis.anchor;
  ind.delta = delta;
  ind.weights = Eigen::VectorXd::Ones(1);
  const KernelMatrix km = assemble(basis, ind);
  for (int x = 0; x < mesh.vertex_count(); ++x) {
    std::set<int> support;
    for (Eigen::SparseMatrix<double>::InnerIterator it(km.K, x); it; ++it) {
      CHECK(it.value() == doctest::Approx(1.0).epsilon(1e-15));
      support.insert(static_cast<int>(it.row()));
    }
    std::set<int> expect;
    for (int y = 0; y < mesh.vertex_count(); ++y)
      if ((mesh.vertices[y] - mesh.vertices[x]).norm() <= delta * (1 + 1e-12))
        expect.insert(y);
    CHECK(support == expect);
  }
}

TEST_CASE("kernel columns on a flat grid are translates") {
  const FlatSetup s = flat_setup(24, 3.0);
  const KernelTemplate t =
      make_gaussian_template(s.basis.anchor, s.basis.delta, 3, 8, 0.4 * s.basis.delta);
  const KernelMatrix km = assemble(s.basis, t);
  const int nu = s.mesh.grid_nu;
  const int x0 = s.mesh.grid_vertex(10, 10);
  const int x1 = s.mesh.grid_vertex(13, 12);
  int compared = 0;
  for (int e = s.basis.offsets[x0]; e < s.basis.offsets[x0 + 1]; ++e) {
    const int y0 = s.basis.neighbors[e];
    const int y1 = s.mesh.grid_vertex(y0 % nu + 3, y0 / nu + 2);
    CHECK(km.K.coeff(y1, x1) ==
          doctest::Approx(km.K.coeff(y0, x0)).epsilon(1e-12));
    ++compared;
  }
  CHECK(compared > 20);
}

TEST_CASE("assembled entries match an independent polar sampler") {
  const FlatSetup s = flat_setup(24, 3.0);
  const KernelTemplate t =
      random_template(s.basis.anchor, s.basis.delta, 3, 8, 2024);
  const double checks[][2] = {{1.0, 0.0}, {0.5, 0.0}, {1.0, 1.1}, {-1.0, 0.4}};
  for (const auto& [scale, rot] : checks) {
    const KernelMatrix km = assemble(s.basis, t, scale, rot);
    for (int x : {s.basis.anchor, s.mesh.grid_vertex(6, 15)}) {
      for (int e = s.basis.offsets[x]; e < s.basis.offsets[x + 1]; ++e) {
        const int y = s.basis.neighbors[e];
        const double du = s.mesh.uv[y].x() - s.mesh.uv[x].x();
        const double dv = s.mesh.uv[y].y() - s.mesh.uv[x].y();
        const double expect = oracle::sample_template(t, scale, rot, du, dv);
        CHECK(km.K.coeff(y, x) == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("rotating the lookup rotates the stencil") {
  const FlatSetup s = flat_setup(24, 3.0);
  const int x = s.mesh.grid_vertex(12, 12);
  const int nu = s.mesh.grid_nu;

  // Anisotropic weights: a quarter turn must permute the stencil.
  const KernelTemplate t =
      random_template(s.basis.anchor, s.basis.delta, 3, 8, 7);
  const KernelMatrix base = assemble(s.basis, t);
  const KernelMatrix quarter = assemble(s.basis, t, 1.0, kPi / 2.0);
  for (int e = s.basis.offsets[x]; e < s.basis.offsets[x + 1]; ++e) {
    const int y = s.basis.neighbors[e];
    const int du = y % nu - x % nu;
    const int dv = y / nu - x / nu;
    const int rotated = s.mesh.grid_vertex(x % nu - dv, x / nu + du);
    CHECK(quarter.K.coeff(y, x) ==
          doctest::Approx(base.K.coeff(rotated, x)).epsilon(1e-9));
  }

  // Smooth positive template against the same Euclidean oracle, at the
  // published interpolation tolerance.
  const KernelTemplate g =
      make_gaussian_template(s.basis.anchor, s.basis.delta, 3, 8, 0.4 * s.basis.delta);
  const KernelMatrix gq = assemble(s.basis, g, 1.0, kPi / 2.0);
  const double peak = g.weights.maxCoeff();
  for (int e = s.basis.offsets[x]; e < s.basis.offsets[x + 1]; ++e) {
    const int y = s.basis.neighbors[e];
    const double du = s.mesh.uv[y].x() - s.mesh.uv[x].x();
    const double dv = s.mesh.uv[y].y() - s.mesh.uv[x].y();
    const double expect = oracle::sample_template(g, 1.0, 0.0, -dv, du);
    CHECK(std::abs(gq.K.coeff(y, x) - expect) <= 5e-2 * peak);
  }

  const KernelMatrix wrap = assemble(s.basis, t, 1.0, 2.0 * kPi);
  CHECK(max_abs_diff(wrap.K, base.K) <= 1e-12);

  const KernelMatrix reflected = assemble(s.basis, t, -1.0, 0.0);
  const KernelMatrix half_turn = assemble(s.basis, t, 1.0, kPi);
  CHECK(max_abs_diff(reflected.K, half_turn.K) <= 1e-12);
}

TEST_CASE("assembly is linear in the weights") {
  const FlatSetup s = flat_setup(16, 2.5);
  const KernelTemplate t1 = random_template(s.basis.anchor, s.basis.delta, 3, 8, 11);
  KernelTemplate t2 = random_template(s.basis.anchor, s.basis.delta, 3, 8, 12);
  KernelTemplate mix = t1;
  mix.weights = 0.7 * t1.weights - 1.3 * t2.weights;
  const Eigen::SparseMatrix<double> lhs = assemble(s.basis, mix).K;
  const Eigen::SparseMatrix<double> rhs =
      0.7 * assemble(s.basis, t1).K - 1.3 * assemble(s.basis, t2).K;
  CHECK(max_abs_diff(lhs, rhs) <= 1e-12);

  // The same matrix from the per-bin derivative matrices.
  Eigen::SparseMatrix<double> fromBins(s.basis.n, s.basis.n);
  for (int b = 0; b < mix.bins(); ++b)
    fromBins += mix.weights[b] * bin_matrix(s.basis, b);
  CHECK(max_abs_diff(fromBins, lhs) <= 1e-12);

  // Same nonzero pattern no matter the weights.
  CHECK(assemble(s.basis, t1).K.nonZeros() == assemble(s.basis, t2).K.nonZeros());
}

TEST_CASE("neighborhoods on a sphere match per-vertex marching") {
  const TriangleMesh sphere = make_icosphere(3);
  int north = 0;
  for (int v = 1; v < sphere.vertex_count(); ++v)
    if (sphere.vertices[v].z() > sphere.vertices[north].z()) north = v;
  const GeodesicField field = fast_marching(sphere, {north});
  const FrameField frames = build_frames(sphere, field);
  const double delta = 0.3;
  const KernelBasis basis =
      build_basis(sphere, frames, field, north, delta, 3, 8);
  CHECK(basis.n == sphere.vertex_count());
  for (int x = 7; x < sphere.vertex_count(); x += 31) {
    const GeodesicField full = fast_marching(sphere, {x});
    std::set<int> expect;
    for (int y = 0; y < sphere.vertex_count(); ++y)
      if (full.dist[y] <= delta) expect.insert(y);
    std::set<int> got(basis.neighbors.begin() + basis.offsets[x],
                      basis.neighbors.begin() + basis.offsets[x + 1]);
    CHECK(got == expect);
  }
}

TEST_CASE("normalization equalizes kernel mass across the surface") {
  SurfaceSpec spec;
  spec.function = "bumps";
  spec.nu = spec.nv = 24;
  spec.heights = {0.5};
  spec.centers = {Vec2(0.5, 0.5)};
  spec.sigmas = {0.3};
  const TriangleMesh mesh = generate_surface(spec);
  const GeodesicField field = fast_marching(mesh, {0});
  const FrameField frames = build_frames(mesh, field);
  const int anchor = mesh.grid_vertex(12, 12);
  const double delta = 3.0 * mesh.mean_edge_length();
  const KernelBasis basis = build_basis(mesh, frames, field, anchor, delta, 3, 8);
  const KernelTemplate t = make_gaussian_template(anchor, delta, 3, 8, 0.4 * delta);

  const KernelMatrix raw = assemble(basis, t, 1.0, 0.0, false);
  const KernelMatrix norm = assemble(basis, t, 1.0, 0.0, true);
  CHECK(!raw.normalized);
  CHECK(norm.normalized);
  CHECK(norm.norm_constants[anchor] == doctest::Approx(1.0).epsilon(1e-12));

  auto mass_of = [&](const Eigen::SparseMatrix<double>& K, int x) {
    double m = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, x); it; ++it)
      m += std::abs(it.value()) * basis.mass[it.row()];
    return m;
  };
  const double target = mass_of(raw.K, anchor);
  double spread = 0.0;
  for (int x = 0; x < mesh.vertex_count(); ++x) {
    CHECK(mass_of(norm.K, x) == doctest::Approx(target).epsilon(1e-9));
    spread = std::max(spread, std::abs(mass_of(raw.K, x) - target));
  }
  CHECK(spread > 1e-6);  // normalization had something to do
}

TEST_CASE("oriented detector fires on the step, not beside it") {
  const FlatSetup s = flat_setup(32, 3.0);
  const TriangleMesh& mesh = s.mesh;
  const MassMatrix mass = mass_matrix(mesh);
  const double delta = s.basis.delta;
  const KernelTemplate det = edge_detector_template(0.0, delta, 3, 8);
  const KernelMatrix km = assemble(s.basis, det);

  Eigen::VectorXd f(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v)
    f[v] = mesh.uv[v].x() >= 0.5 ? 1.0 : 0.0;
  const Eigen::VectorXd response =
      km.K.transpose() * mass.diag.cwiseProduct(f).eval();

  const double h = 1.0 / (mesh.grid_nu - 1);
  const double margin = delta + 2.0 * h;
  double on_step = 0.0, off_step = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double u = mesh.uv[v].x();
    const double w = mesh.uv[v].y();
    if (u < margin || u > 1.0 - margin || w < margin || w > 1.0 - margin)
      continue;
    if (std::abs(u - 0.5) <= h)
      on_step = std::max(on_step, std::abs(response[v]));
    else if (std::abs(u - 0.5) > margin)
      off_step = std::max(off_step, std::abs(response[v]));
  }
  CHECK(on_step >= 2.0 * off_step);
  CHECK(on_step > 0.0);

  const Eigen::VectorXd reference =
      oracle::dense_correlation(mesh, mass.diag, det, 1.0, 0.0, f);
  double worst = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double u = mesh.uv[v].x();
    const double w = mesh.uv[v].y();
    if (u < margin || u > 1.0 - margin || w < margin || w > 1.0 - margin)
      continue;
    worst = std::max(worst, std::abs(response[v] - reference[v]));
  }
  CHECK(worst <= 1e-2 * reference.cwiseAbs().maxCoeff());
}

TEST_CASE("radius below the local edge length is an error") {
  const TriangleMesh mesh = flat_grid(8);
  const GeodesicField field = line_field(mesh);
  const FrameField frames = build_frames(mesh, field);
  const double h = mesh.mean_edge_length();
  try {
    build_basis(mesh, frames, field, 0, 0.05 * h, 1, 1);
    FAIL("expected EmptyNeighborhoodError");
  } catch (const EmptyNeighborhoodError& e) {
    CHECK(static_cast<int>(e.vertices().size()) == mesh.vertex_count());
    CHECK(e.vertices().front() == 0);
    CHECK(std::string(e.what()).find("without neighbors") != std::string::npos);
  }
}

TEST_CASE("matrix market export is well formed") {
  const FlatSetup s = flat_setup(10, 2.2);
  const KernelTemplate t =
      make_gaussian_template(s.basis.anchor, s.basis.delta, 3, 8, 0.4 * s.basis.delta);
  const KernelMatrix km = assemble(s.basis, t);
  const std::string path = "/tmp/ptc_kernel_export.mtx";
  write_matrix_market(path, km.K);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  std::string line;
  do {
    std::getline(in, line);
  } while (!line.empty() && line[0] == '%');
  std::istringstream dims(line);
  int rows = 0, cols = 0;
  long nnz = 0;
  dims >> rows >> cols >> nnz;
  CHECK(rows == s.basis.n);
  CHECK(cols == s.basis.n);
  CHECK(nnz == static_cast<long>(km.K.nonZeros()));
  long seen = 0;
  int r = 0, c = 0;
  double value = 0.0;
  while (in >> r >> c >> value) {
    CHECK(km.K.coeff(r - 1, c - 1) == doctest::Approx(value).epsilon(1e-15));
    ++seen;
  }
  CHECK(seen == nnz);
  std::remove(path.c_str());
}

TEST_SUITE_END();
