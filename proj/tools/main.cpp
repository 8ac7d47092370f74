// ptconv: command line driver for the transported-kernel convolution
// library. Subcommands generate synthetic surfaces and digit corpora,
// solve distance fields, dump frame glyphs, demo oriented filters, and
// run the training, transfer and field-layout experiments from JSON
// configs.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <ptc/conv.hpp>
#include <ptc/dataset.hpp>
#include <ptc/geodesic.hpp>
#include <ptc/kernel.hpp>
#include <ptc/mesh.hpp>
#include <ptc/net.hpp>
#include <ptc/transport.hpp>

using nlohmann::json;
using namespace ptc;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

// Re-embeds a generated surface with one unit per grid step so vertex
// masses are near 1 and filter responses share a dense convolution's
// scale. Sampling coordinates stay in [0,1].
TriangleMesh pixel_units(const TriangleMesh& mesh) {
  if (mesh.grid_nu < 2)
    throw std::runtime_error("pixel_units needs a generated surface");
  std::vector<Vec3> scaled = mesh.vertices;
  const double s = static_cast<double>(mesh.grid_nu - 1);
  for (auto& v : scaled) v *= s;
  TriangleMesh out = TriangleMesh::build(std::move(scaled), mesh.faces);
  out.uv = mesh.uv;
  out.grid_nu = mesh.grid_nu;
  out.grid_nv = mesh.grid_nv;
  return out;
}

// A config names its domain either by "mesh" (OFF/OBJ path) or by
// "surface" (generator spec). "pixel_units" rescales a generated
// surface; its default differs per subcommand.
TriangleMesh mesh_from_config(const json& j, bool pixel_default) {
  TriangleMesh mesh;
  if (j.contains("mesh")) {
    mesh = load_mesh(j.at("mesh").get<std::string>());
  } else if (j.contains("surface")) {
    mesh = generate_surface(SurfaceSpec::from_json_text(j.at("surface").dump()));
  } else {
    throw std::runtime_error("config needs a \"mesh\" path or a \"surface\" spec");
  }
  if (j.value("pixel_units", pixel_default)) mesh = pixel_units(mesh);
  return mesh;
}

// Field sources: an array of groups, each entry either a vertex id or
// an [iu, iv] grid position. Defaults to one field rooted at the first
// vertex (the grid corner on generated surfaces).
std::vector<std::vector<int>> sources_from_config(const json& j,
                                                  const TriangleMesh& mesh) {
  std::vector<std::vector<int>> groups;
  if (!j.contains("fields")) return {{0}};
  for (const auto& group : j.at("fields")) {
    std::vector<int> ids;
    for (const auto& entry : group) {
      if (entry.is_array())
        ids.push_back(mesh.grid_vertex(entry.at(0).get<int>(),
                                       entry.at(1).get<int>()));
      else
        ids.push_back(entry.get<int>());
    }
    groups.push_back(std::move(ids));
  }
  return groups;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.iterations = j.value("iterations", cfg.iterations);
  const std::string opt = j.value("optimizer", std::string("sgd"));
  if (opt == "sgd")
    cfg.optimizer = Optimizer::Sgd;
  else if (opt == "adam")
    cfg.optimizer = Optimizer::Adam;
  else
    throw std::runtime_error("unknown optimizer '" + opt + "'");
  cfg.seed = j.value("seed", cfg.seed);
  cfg.metrics_every = j.value("metrics_every", cfg.metrics_every);
  cfg.eval_subset = j.value("eval_subset", cfg.eval_subset);
  cfg.validate();
  return cfg;
}

MnistData digits_from_config(const json& j) {
  std::string dir = j.value("mnist_dir", std::string());
  if (dir.empty())
    if (const char* env = std::getenv("PTC_MNIST_DIR")) dir = env;
  return load_mnist_or_synthetic(dir, j.value("train_limit", 10000),
                                 j.value("test_limit", 2000),
                                 j.value("data_seed", uint64_t{7}));
}

// Classifier used by every experiment subcommand: one transported-kernel
// layer, ReLU, then either a direct full connection over the flattened
// feature maps (head "fc") or a mass-weighted mean pool feeding a small
// full connection (head "pool", vertex-count independent).
Network build_classifier(const TriangleMesh& mesh, const VectorFieldSet& fields,
                         const json& j, uint64_t seed) {
  const int q = j.value("channels", 1);
  const int p = j.value("filters", 16);
  const double delta =
      j.value("delta_factor", 2.6) * mesh.mean_edge_length();
  const int n_r = j.value("n_r", 3);
  const int n_theta = j.value("n_theta", 8);
  const std::string head = j.value("head", std::string("fc"));

  Network net;
  net.layers.push_back(
      PtcLayer{make_filter_bank(q, p, delta, n_r, n_theta, fields.filter_to_field)});
  net.layers.push_back(ReluLayer{});
  if (head == "pool") {
    net.layers.push_back(GlobalPoolLayer{});
    net.layers.push_back(
        FcLayer{Eigen::MatrixXd::Zero(10, p), Eigen::VectorXd::Zero(10)});
  } else if (head == "fc") {
    net.layers.push_back(FcLayer{
        Eigen::MatrixXd::Zero(10, mesh.vertex_count() * p),
        Eigen::VectorXd::Zero(10)});
  } else {
    throw std::runtime_error("unknown head '" + head + "' (want fc or pool)");
  }
  init_network(net, seed);
  bind_network(net, mesh, fields);
  return net;
}

void write_big_endian_u32(std::ofstream& out, uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
      static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void save_idx_images(const std::string& path, const ImageSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_big_endian_u32(out, 2051);
  write_big_endian_u32(out, static_cast<uint32_t>(set.images.size()));
  write_big_endian_u32(out, static_cast<uint32_t>(set.rows));
  write_big_endian_u32(out, static_cast<uint32_t>(set.cols));
  for (const auto& img : set.images)
    for (int r = 0; r < set.rows; ++r)
      for (int c = 0; c < set.cols; ++c) {
        const double v = std::min(1.0, std::max(0.0, img(r, c)));
        out.put(static_cast<char>(std::lround(v * 255.0)));
      }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void save_idx_labels(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_big_endian_u32(out, 2049);
  write_big_endian_u32(out, static_cast<uint32_t>(labels.size()));
  for (int l : labels) out.put(static_cast<char>(l));
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_gen_surface(const std::string& spec_path, const std::string& out,
                    const std::string& ply, bool pixels) {
  TriangleMesh mesh = generate_surface(SurfaceSpec::from_json_file(spec_path));
  if (pixels) mesh = pixel_units(mesh);
  const auto format = out.size() > 4 && out.substr(out.size() - 4) == ".obj"
                          ? MeshFormat::Obj
                          : MeshFormat::Off;
  save_mesh(out, mesh, format);
  if (!ply.empty()) {
    Eigen::VectorXd height(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v)
      height[v] = mesh.vertices[v].z();
    write_ply(ply, mesh, {{"height", height}});
  }
  std::printf("%d vertices, %d faces -> %s\n", mesh.vertex_count(),
              mesh.face_count(), out.c_str());
  return 0;
}

int run_gen_digits(const std::string& dir, int train_count, int test_count,
                   uint64_t seed) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  const ImageSet train = generate_synthetic_digits(train_count, seed);
  const ImageSet test =
      generate_synthetic_digits(test_count, seed + 0x517cc1b727220a95ull);
  save_idx_images((base / "train-images-idx3-ubyte").string(), train);
  save_idx_labels((base / "train-labels-idx1-ubyte").string(), train.labels);
  save_idx_images((base / "t10k-images-idx3-ubyte").string(), test);
  save_idx_labels((base / "t10k-labels-idx1-ubyte").string(), test.labels);
  std::printf("%d train / %d test -> %s\n", train_count, test_count,
              dir.c_str());
  return 0;
}

int run_geodesic(const std::string& mesh_path, const std::string& spec_path,
                 std::vector<int> sources, double max_distance,
                 const std::string& out, const std::string& ply) {
  const TriangleMesh mesh =
      spec_path.empty()
          ? load_mesh(mesh_path)
          : generate_surface(SurfaceSpec::from_json_file(spec_path));
  FastMarchingOptions options;
  if (max_distance > 0.0) {
    options.max_distance = max_distance;
    options.require_full_coverage = false;
  }
  const GeodesicField field = fast_marching(mesh, sources, options);

  Signal signal;
  signal.values = field.dist;
  signal.channel_names = {"distance"};
  save_signal_csv(out, signal);
  if (!ply.empty()) write_ply(ply, mesh, {{"distance", field.dist}});

  const double mean = field.dist.mean();
  std::printf("%d vertices, max distance %.6g, mean %.6g -> %s\n",
              mesh.vertex_count(), field.dist.maxCoeff(), mean, out.c_str());
  return 0;
}

int run_frames(const std::string& mesh_path, const std::string& spec_path,
               std::vector<int> sources, const std::string& out, double scale,
               int axis) {
  const TriangleMesh mesh =
      spec_path.empty()
          ? load_mesh(mesh_path)
          : generate_surface(SurfaceSpec::from_json_file(spec_path));
  GeodesicField field = fast_marching(mesh, sources);
  const FrameField frames = build_frames(mesh, field);

  const double len = scale * mesh.mean_edge_length();
  std::vector<std::pair<Vec3, Vec3>> segments;
  segments.reserve(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& p = mesh.vertices[v];
    segments.emplace_back(p, p + len * frames.vertex_frames[v].col(axis));
  }
  write_ply_segments(out, segments);

  int singular = 0;
  for (char s : frames.vertex_singular) singular += s != 0;
  std::printf("%zu glyphs (%d singular vertices) -> %s\n", segments.size(),
              singular, out.c_str());
  return 0;
}

int run_filter_demo(const std::string& config_path) {
  const json j = read_json_file(config_path);
  const TriangleMesh mesh = mesh_from_config(j, false);
  const MassMatrix mass = mass_matrix(mesh);
  const auto groups = sources_from_config(j, mesh);
  const VectorFieldSet fields = build_field_set(mesh, groups, 1);
  const FrameField frames = build_frames(mesh, fields.fields[0]);

  const double delta = j.value("delta_factor", 2.6) * mesh.mean_edge_length();
  const int n_r = j.value("n_r", 3);
  const int n_theta = j.value("n_theta", 8);
  int anchor = mesh.vertex_count() / 2;
  if (j.contains("anchor")) anchor = j.at("anchor").get<int>();
  else if (mesh.grid_nu >= 2)
    anchor = mesh.grid_vertex(mesh.grid_nu / 2, mesh.grid_nv / 2);
  const KernelBasis basis =
      build_basis(mesh, frames, fields.fields[0], anchor, delta, n_r, n_theta);

  // Input signal: a named builtin on generated surfaces, otherwise a
  // stored signal file.
  const std::string source = j.value("signal", std::string("stripes-v"));
  Eigen::VectorXd f;
  if (source == "stripes-v" || source == "stripes-h") {
    const int size = j.value("image_size", 64);
    const int period = j.value("stripe_period", 8);
    Eigen::MatrixXd img(size, size);
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        const int k = source == "stripes-v" ? c : r;
        img(r, c) = (k / period) % 2 == 0 ? 1.0 : 0.0;
      }
    f = image_to_signal(mesh, img);
  } else if (source == "impulse") {
    f = Eigen::VectorXd::Zero(mesh.vertex_count());
    f[anchor] = 1.0;
  } else {
    const Signal stored = source.size() > 4 &&
                                  source.substr(source.size() - 4) == ".bin"
                              ? load_signal_binary(source)
                              : load_signal_csv(source);
    f = stored.values.col(0);
  }

  const KernelTemplate gauss = make_gaussian_template(
      anchor, delta, n_r, n_theta, j.value("sigma_factor", 0.5) * delta);
  const KernelTemplate edge = edge_detector_template(0.0, delta, n_r, n_theta);

  std::vector<std::pair<std::string, Eigen::VectorXd>> scalars;
  scalars.emplace_back("input", f);
  scalars.emplace_back("gaussian", ptc_apply(assemble(basis, gauss), mass, f));

  std::vector<double> rotations;
  if (j.contains("rotations"))
    for (const auto& r : j.at("rotations")) rotations.push_back(r.get<double>());
  else
    for (int k = 0; k < 8; ++k)
      rotations.push_back(k * std::numbers::pi / 4.0);

  const std::string prefix = j.value("out_prefix", std::string("filter_demo"));
  std::ofstream sweep(prefix + "_sweep.csv");
  sweep << "rotation,mean_abs_response\n";
  for (size_t k = 0; k < rotations.size(); ++k) {
    const KernelMatrix K = assemble(basis, edge, 1.0, rotations[k]);
    const Eigen::VectorXd resp = ptc_apply(K, mass, f);
    char name[32];
    std::snprintf(name, sizeof(name), "edge_%03d",
                  static_cast<int>(std::lround(rotations[k] * 180.0 /
                                               std::numbers::pi)));
    scalars.emplace_back(name, resp);
    sweep << rotations[k] << "," << resp.cwiseAbs().mean() << "\n";
    if (K.clipped_fraction > 0.0)
      std::printf("warning: rotation %.3f clipped %.2f%% of samples\n",
                  rotations[k], 100.0 * K.clipped_fraction);
  }
  write_ply(prefix + "_responses.ply", mesh, scalars);
  std::printf("%zu responses -> %s_responses.ply, sweep -> %s_sweep.csv\n",
              scalars.size() - 2, prefix.c_str(), prefix.c_str());
  return 0;
}

int run_train_mnist(const std::string& config_path) {
  const json j = read_json_file(config_path);
  const TriangleMesh mesh = mesh_from_config(j, true);
  const MnistData data = digits_from_config(j);
  std::printf("%s: %zu train / %zu test on %d vertices\n",
              data.synthetic ? "synthetic corpus" : "IDX files",
              data.train.images.size(), data.test.images.size(),
              mesh.vertex_count());

  const VectorFieldSet fields =
      build_field_set(mesh, sources_from_config(j, mesh), j.value("filters", 16));
  const TrainConfig cfg = train_config_from_json(j.value("train", json::object()));
  Network net = build_classifier(mesh, fields, j, cfg.seed);

  const Dataset train_set = make_dataset(mesh, data.train);
  const Dataset test_set = make_dataset(mesh, data.test);
  const TrainResult result = train(net, train_set, test_set, cfg);

  const std::string prefix = j.value("out_prefix", std::string("run"));
  save_metrics_csv(prefix + "_metrics.csv", result.metrics);
  save_checkpoint(prefix + "_model.ptcn", net);
  const double acc = evaluate(net, test_set);
  std::printf("final test accuracy %.4f -> %s_model.ptcn, %s_metrics.csv\n",
              acc, prefix.c_str(), prefix.c_str());
  return 0;
}

int run_eval_transfer(const std::string& config_path) {
  const json j = read_json_file(config_path);
  Network net = load_checkpoint(j.at("checkpoint").get<std::string>());
  const MnistData data = digits_from_config(j);

  json targets = json::array();
  if (j.contains("targets"))
    targets = j.at("targets");
  else
    targets.push_back(j);

  std::ofstream csv;
  if (j.contains("out_csv")) {
    csv.open(j.at("out_csv").get<std::string>());
    csv << "target,accuracy\n";
  }
  for (size_t k = 0; k < targets.size(); ++k) {
    const json& t = targets[k];
    const std::string name =
        t.value("name", std::string("target") + std::to_string(k));
    const TriangleMesh mesh = mesh_from_config(t, j.value("pixel_units", true));
    const int p = std::get<PtcLayer>(net.layers[0]).bank.p;
    const VectorFieldSet fields =
        build_field_set(mesh, sources_from_config(t, mesh), p);
    bind_network(net, mesh, fields);
    const double acc = evaluate(net, make_dataset(mesh, data.test));
    std::printf("%s: accuracy %.4f\n", name.c_str(), acc);
    if (csv.is_open()) csv << name << "," << acc << "\n";
  }
  return 0;
}

int run_singularity_study(const std::string& config_path) {
  const json j = read_json_file(config_path);
  const TriangleMesh mesh = mesh_from_config(j, true);
  const MnistData data = digits_from_config(j);
  const Dataset train_set = make_dataset(mesh, data.train);
  const Dataset test_set = make_dataset(mesh, data.test);
  const TrainConfig base_cfg =
      train_config_from_json(j.value("train", json::object()));

  std::vector<uint64_t> seeds{1, 2, 3};
  if (j.contains("seeds")) {
    seeds.clear();
    for (const auto& s : j.at("seeds")) seeds.push_back(s.get<uint64_t>());
  }

  // Default layouts: one field at the grid corner, one at the center,
  // and fields split over two or four interior points.
  json layouts = json::array();
  if (j.contains("layouts")) {
    layouts = j.at("layouts");
  } else {
    if (mesh.grid_nu < 2)
      throw std::runtime_error("default layouts need a generated surface");
    const int lo = mesh.grid_nu / 4;
    const int mid = mesh.grid_nu / 2;
    const int hi = std::min(mesh.grid_nu - 1, (3 * mesh.grid_nu) / 4);
    layouts.push_back({{"name", "corner"}, {"fields", {{{0, 0}}}}});
    layouts.push_back({{"name", "center"}, {"fields", {{{mid, mid}}}}});
    layouts.push_back(
        {{"name", "two"}, {"fields", {{{lo, lo}}, {{hi, hi}}}}});
    layouts.push_back({{"name", "four"},
                       {"fields", {{{lo, lo}}, {{hi, lo}}, {{lo, hi}}, {{hi, hi}}}}});
  }

  std::ofstream csv;
  if (j.contains("out_csv")) {
    csv.open(j.at("out_csv").get<std::string>());
    csv << "layout,seed,accuracy\n";
  }
  for (const auto& layout : layouts) {
    const std::string name = layout.at("name").get<std::string>();
    const VectorFieldSet fields = build_field_set(
        mesh, sources_from_config(layout, mesh), j.value("filters", 16));
    Network net = build_classifier(mesh, fields, j, seeds[0]);
    double sum = 0.0;
    for (uint64_t seed : seeds) {
      init_network(net, seed);
      TrainConfig cfg = base_cfg;
      cfg.seed = seed;
      train(net, train_set, test_set, cfg);
      const double acc = evaluate(net, test_set);
      sum += acc;
      if (csv.is_open()) csv << name << "," << seed << "," << acc << "\n";
    }
    std::printf("%s: mean accuracy %.4f over %zu seeds\n", name.c_str(),
                sum / static_cast<double>(seeds.size()), seeds.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transported-kernel convolution on triangle meshes"};
  app.require_subcommand(1);

  auto* gen_surface = app.add_subcommand(
      "gen-surface", "Generate a synthetic surface from a JSON spec");
  std::string gs_spec, gs_out, gs_ply;
  bool gs_pixels = false;
  gen_surface->add_option("--spec", gs_spec, "surface spec JSON")->required();
  gen_surface->add_option("--out", gs_out, "output mesh (.off or .obj)")
      ->required();
  gen_surface->add_option("--ply", gs_ply, "also write a PLY colored by height");
  gen_surface->add_flag("--pixel-units", gs_pixels,
                        "rescale to one unit per grid step");

  auto* gen_digits = app.add_subcommand(
      "gen-digits", "Write the synthetic digit corpus as IDX files");
  std::string gd_dir = "digits";
  int gd_train = 10000, gd_test = 2000;
  uint64_t gd_seed = 7;
  gen_digits->add_option("--out-dir", gd_dir, "output directory");
  gen_digits->add_option("--train", gd_train, "training image count");
  gen_digits->add_option("--test", gd_test, "test image count");
  gen_digits->add_option("--seed", gd_seed, "generator seed");

  auto* geodesic = app.add_subcommand(
      "geodesic", "Distance field from source vertices by fast marching");
  std::string ge_mesh, ge_spec, ge_out = "dist.csv", ge_ply;
  std::vector<int> ge_sources{0};
  double ge_max = 0.0;
  geodesic->add_option("--mesh", ge_mesh, "input mesh (.off or .obj)");
  geodesic->add_option("--spec", ge_spec, "surface spec JSON instead of a mesh");
  geodesic->add_option("--source", ge_sources, "source vertex ids");
  geodesic->add_option("--max-distance", ge_max, "truncation radius (0 = none)");
  geodesic->add_option("--out", ge_out, "per-vertex distance CSV");
  geodesic->add_option("--ply", ge_ply, "also write a PLY colored by distance");

  auto* frames = app.add_subcommand(
      "frames", "Dump the transport frames of a distance field as PLY glyphs");
  std::string fr_mesh, fr_spec, fr_out = "frames.ply";
  std::vector<int> fr_sources{0};
  double fr_scale = 0.5;
  int fr_axis = 0;
  frames->add_option("--mesh", fr_mesh, "input mesh (.off or .obj)");
  frames->add_option("--spec", fr_spec, "surface spec JSON instead of a mesh");
  frames->add_option("--source", fr_sources, "source vertex ids");
  frames->add_option("--out", fr_out, "output PLY of line segments");
  frames->add_option("--scale", fr_scale, "glyph length in mean edge lengths");
  frames->add_option("--axis", fr_axis, "frame column to draw (0, 1 or 2)")
      ->check(CLI::Range(0, 2));

  auto* filter_demo = app.add_subcommand(
      "filter-demo", "Oriented filter responses and a rotation sweep");
  std::string fd_config;
  filter_demo->add_option("--config", fd_config, "demo config JSON")->required();

  auto* train_mnist = app.add_subcommand(
      "train-mnist", "Train a digit classifier on a surface");
  std::string tm_config;
  train_mnist->add_option("--config", tm_config, "training config JSON")
      ->required();

  auto* eval_transfer = app.add_subcommand(
      "eval-transfer", "Evaluate a checkpoint on other surfaces");
  std::string et_config;
  eval_transfer->add_option("--config", et_config, "transfer config JSON")
      ->required();

  auto* study = app.add_subcommand(
      "singularity-study", "Compare direction-field layouts by accuracy");
  std::string st_config;
  study->add_option("--config", st_config, "study config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_surface->parsed())
      return run_gen_surface(gs_spec, gs_out, gs_ply, gs_pixels);
    if (gen_digits->parsed())
      return run_gen_digits(gd_dir, gd_train, gd_test, gd_seed);
    if (geodesic->parsed()) {
      if (ge_mesh.empty() == ge_spec.empty())
        throw std::runtime_error("give exactly one of --mesh and --spec");
      return run_geodesic(ge_mesh, ge_spec, ge_sources, ge_max, ge_out, ge_ply);
    }
    if (frames->parsed()) {
      if (fr_mesh.empty() == fr_spec.empty())
        throw std::runtime_error("give exactly one of --mesh and --spec");
      return run_frames(fr_mesh, fr_spec, fr_sources, fr_out, fr_scale, fr_axis);
    }
    if (filter_demo->parsed()) return run_filter_demo(fd_config);
    if (train_mnist->parsed()) return run_train_mnist(tm_config);
    if (eval_transfer->parsed()) return run_eval_transfer(et_config);
    if (study->parsed()) return run_singularity_study(st_config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
