// Micro benchmarks for the hot paths: distance fields, basis
// construction, kernel assembly and the convolution forward/backward.

#include <random>

#include <benchmark/benchmark.h>

#include <ptc/conv.hpp>
#include <ptc/geodesic.hpp>
#include <ptc/kernel.hpp>
#include <ptc/mesh.hpp>
#include <ptc/net.hpp>
#include <ptc/transport.hpp>

using namespace ptc;

namespace {

TriangleMesh bump_grid(int n) {
  SurfaceSpec spec;
  spec.function = "bumps";
  spec.nu = spec.nv = n;
  spec.heights = {0.3};
  spec.sigmas = {0.25};
  spec.centers = {{0.5, 0.5}};
  return generate_surface(spec);
}

Eigen::MatrixXd random_signal(int n, int q, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd F(n, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < n; ++i)
      F(i, j) = static_cast<double>(rng() >> 11) * 0x1p-52 - 1.0;
  return F;
}

// Field, frames and basis for a 16-filter bank on an n x n bump grid.
struct Fixture {
  TriangleMesh mesh;
  MassMatrix mass;
  VectorFieldSet fields;
  FilterBank bank;

  explicit Fixture(int n, int p = 16) : mesh(bump_grid(n)) {
    mass = mass_matrix(mesh);
    fields = build_field_set(mesh, {{0}}, p);
    bank = make_filter_bank(1, p, 2.6 * mesh.mean_edge_length(), 3, 8,
                            fields.filter_to_field);
    bind_bank(bank, mesh, fields);
    std::mt19937_64 rng(3);
    for (long i = 0; i < bank.weights.size(); ++i)
      bank.weights.data()[i] = static_cast<double>(rng() >> 11) * 0x1p-52 - 1.0;
  }
};

void fast_marching_grid(benchmark::State& state) {
  const TriangleMesh mesh = bump_grid(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const GeodesicField field = fast_marching(mesh, {0});
    benchmark::DoNotOptimize(field.dist.data());
  }
  state.SetItemsProcessed(state.iterations() * mesh.vertex_count());
}
BENCHMARK(fast_marching_grid)->Arg(32)->Arg(64)->Arg(128);

void basis_construction(benchmark::State& state) {
  const TriangleMesh mesh = bump_grid(static_cast<int>(state.range(0)));
  const GeodesicField field = fast_marching(mesh, {0});
  const FrameField frames = build_frames(mesh, field);
  const double delta = 2.6 * mesh.mean_edge_length();
  for (auto _ : state) {
    const KernelBasis basis =
        build_basis(mesh, frames, field, 0, delta, 3, 8);
    benchmark::DoNotOptimize(basis.neighbors.data());
  }
  state.SetItemsProcessed(state.iterations() * mesh.vertex_count());
}
BENCHMARK(basis_construction)->Arg(32)->Arg(64);

void kernel_assembly(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)), 1);
  const KernelTemplate tmpl = fx.bank.filter_template(0, 0);
  const KernelBasis& basis = fx.bank.bases[0];
  for (auto _ : state) {
    const KernelMatrix K = assemble(basis, tmpl);
    benchmark::DoNotOptimize(K.K.valuePtr());
  }
  state.SetItemsProcessed(state.iterations() * fx.mesh.vertex_count());
}
BENCHMARK(kernel_assembly)->Arg(32)->Arg(64);

void convolution_apply(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)), 1);
  const KernelMatrix K = assemble(fx.bank.bases[0], fx.bank.filter_template(0, 0));
  const Eigen::VectorXd f = random_signal(fx.mesh.vertex_count(), 1, 5);
  for (auto _ : state) {
    const Eigen::VectorXd out = ptc_apply(K, fx.mass, f);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * fx.mesh.vertex_count());
}
BENCHMARK(convolution_apply)->Arg(32)->Arg(64);

void forward_16_filters(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  const Eigen::MatrixXd F = random_signal(fx.mesh.vertex_count(), 1, 7);
  for (auto _ : state) {
    const Eigen::MatrixXd out = ptc_forward_batched(fx.bank, fx.mass, F);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * fx.mesh.vertex_count());
}
BENCHMARK(forward_16_filters)->Arg(28)->Arg(64);

void backward_16_filters(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  const Eigen::MatrixXd F = random_signal(fx.mesh.vertex_count(), 1, 7);
  const Eigen::MatrixXd G = random_signal(fx.mesh.vertex_count(), 16, 9);
  for (auto _ : state) {
    const PtcGradients grads = ptc_backward(fx.bank, fx.mass, F, G);
    benchmark::DoNotOptimize(grads.weights.data());
  }
  state.SetItemsProcessed(state.iterations() * fx.mesh.vertex_count());
}
BENCHMARK(backward_16_filters)->Arg(28)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
