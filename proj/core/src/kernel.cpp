#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "parallel_for.hpp"
#include "ptc/kernel.hpp"

namespace ptc {

using detail::parallel_for;

namespace {

constexpr double kPi = std::numbers::pi;

std::string empty_neighborhood_message(const std::vector<int>& vs) {
  std::string msg = "kernel radius leaves " + std::to_string(vs.size()) +
                    " vertices without neighbors:";
  for (size_t i = 0; i < vs.size() && i < 8; ++i)
    msg += " " + std::to_string(vs[i]);
  if (vs.size() > 8) msg += " ...";
  return msg;
}

}  // namespace

EmptyNeighborhoodError::EmptyNeighborhoodError(std::vector<int> vertices)
    : std::runtime_error(empty_neighborhood_message(vertices)),
      vertices_(std::move(vertices)) {}

void KernelTemplate::validate() const {
  if (n_r < 1 || n_theta < 1)
    throw std::invalid_argument("kernel template: grid dims must be >= 1");
  if (!(delta > 0.0))
    throw std::invalid_argument("kernel template: radius must be positive");
  if (weights.size() != bins())
    throw std::invalid_argument("kernel template: expected " +
                                std::to_string(bins()) + " weights, got " +
                                std::to_string(weights.size()));
  if (!weights.allFinite())
    throw std::invalid_argument("kernel template: weights must be finite");
}

std::string KernelTemplate::to_json_text() const {
  nlohmann::json j;
  j["anchor"] = anchor;
  j["delta"] = delta;
  j["n_r"] = n_r;
  j["n_theta"] = n_theta;
  j["weights"] = std::vector<double>(weights.begin(), weights.end());
  return j.dump(2) + "\n";
}

KernelTemplate KernelTemplate::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("kernel template: ") + e.what());
  }
  KernelTemplate t;
  t.anchor = j.at("anchor").get<int>();
  t.delta = j.at("delta").get<double>();
  t.n_r = j.at("n_r").get<int>();
  t.n_theta = j.at("n_theta").get<int>();
  const auto w = j.at("weights").get<std::vector<double>>();
  t.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  t.validate();
  return t;
}

void KernelTemplate::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json_text();
}

KernelTemplate KernelTemplate::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

double bin_area(double delta, int n_r, int n_theta, int ir) {
  const double r0 = delta * ir / n_r;
  const double r1 = delta * (ir + 1) / n_r;
  return kPi * (r1 * r1 - r0 * r0) / n_theta;
}

KernelTemplate make_gaussian_template(int anchor, double delta, int n_r,
                                      int n_theta, double sigma) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("gaussian template: sigma must be positive");
  KernelTemplate t;
  t.anchor = anchor;
  t.delta = delta;
  t.n_r = n_r;
  t.n_theta = n_theta;
  t.weights.resize(t.bins());
  for (int ir = 0; ir < n_r; ++ir) {
    const double rc = delta * (ir + 0.5) / n_r;
    const double w = std::exp(-rc * rc / (2.0 * sigma * sigma));
    for (int it = 0; it < n_theta; ++it) t.weights[ir * n_theta + it] = w;
  }
  t.validate();
  return t;
}

KernelTemplate edge_detector_template(double orientation, double delta,
                                      int n_r, int n_theta) {
  if (n_theta < 8)
    throw std::invalid_argument(
        "edge detector template: need at least 8 angular sectors");
  KernelTemplate t;
  t.anchor = 0;
  t.delta = delta;
  t.n_r = n_r;
  t.n_theta = n_theta;
  t.weights.resize(t.bins());
  double weighted_sum = 0.0;
  double area_sum = 0.0;
  for (int ir = 0; ir < n_r; ++ir) {
    const double area = bin_area(delta, n_r, n_theta, ir);
    for (int it = 0; it < n_theta; ++it) {
      const double center = 2.0 * kPi * (it + 0.5) / n_theta;
      const double c = std::cos(center - orientation);
      const double sign = c > 1e-12 ? 1.0 : (c < -1e-12 ? -1.0 : 0.0);
      t.weights[ir * n_theta + it] = sign;
      weighted_sum += sign * area;
      area_sum += area;
    }
  }
  t.weights.array() -= weighted_sum / area_sum;
  t.validate();
  return t;
}

int polar_taps(double r, double phi, double delta, int n_r, int n_theta,
               std::vector<std::pair<int, double>>& taps) {
  if (r > delta * (1.0 + 1e-12)) return 0;
  const int before = static_cast<int>(taps.size());
  if (r <= 1e-12 * delta) {
    const double w = 1.0 / n_theta;
    for (int it = 0; it < n_theta; ++it) taps.emplace_back(it, w);
    return n_theta;
  }
  const double u = r * n_r / delta - 0.5;
  int i0, i1;
  double fr;
  if (u <= 0.0) {
    i0 = i1 = 0;
    fr = 0.0;
  } else if (u >= n_r - 1.0) {
    i0 = i1 = n_r - 1;
    fr = 0.0;
  } else {
    i0 = static_cast<int>(std::floor(u));
    i1 = i0 + 1;
    fr = u - i0;
  }
  const double v = phi * n_theta / (2.0 * kPi) - 0.5;
  const double vf = std::floor(v);
  const double fa = v - vf;
  int j0 = static_cast<int>(vf) % n_theta;
  if (j0 < 0) j0 += n_theta;
  const int j1 = (j0 + 1) % n_theta;
  const auto add = [&](int ir, int it, double w) {
    if (w != 0.0) taps.emplace_back(ir * n_theta + it, w);
  };
  if (n_theta == 1) {
    if (i0 == i1)
      add(i0, 0, 1.0);
    else {
      add(i0, 0, 1.0 - fr);
      add(i1, 0, fr);
    }
  } else if (i0 == i1) {
    add(i0, j0, 1.0 - fa);
    add(i0, j1, fa);
  } else {
    add(i0, j0, (1.0 - fr) * (1.0 - fa));
    add(i0, j1, (1.0 - fr) * fa);
    add(i1, j0, fr * (1.0 - fa));
    add(i1, j1, fr * fa);
  }
  return static_cast<int>(taps.size()) - before;
}

KernelBasis build_basis(const TriangleMesh& mesh, const FrameField& frames,
                        const GeodesicField& field, int x0, double delta,
                        int n_r, int n_theta,
                        const FastMarchingOptions& patch_options) {
  const int n = mesh.vertex_count();
  if (x0 < 0 || x0 >= n)
    throw std::invalid_argument("build_basis: anchor out of range");
  if (!(delta > 0.0) || n_r < 1 || n_theta < 1)
    throw std::invalid_argument("build_basis: bad grid parameters");
  if (frames.vertex_frames.size() != static_cast<size_t>(n))
    throw std::logic_error("build_basis: frames do not match mesh");
  if (field.dist.size() != n)
    throw std::logic_error("build_basis: field does not match mesh");

  std::vector<LocalTangentMap> maps(n);
  parallel_for(n, [&](int x) {
    maps[x] = resolve_angles(build_local_patch(mesh, x, delta, patch_options),
                             frames);
  });

  std::vector<int> empty;
  for (int x = 0; x < n; ++x)
    if (maps[x].vertices.size() <= 1) empty.push_back(x);
  if (!empty.empty()) throw EmptyNeighborhoodError(std::move(empty));

  KernelBasis basis;
  basis.n = n;
  basis.anchor = x0;
  basis.delta = delta;
  basis.n_r = n_r;
  basis.n_theta = n_theta;
  basis.mass = mass_matrix(mesh).diag;
  basis.offsets.resize(n + 1);
  basis.offsets[0] = 0;
  for (int x = 0; x < n; ++x)
    basis.offsets[x + 1] =
        basis.offsets[x] + static_cast<int>(maps[x].vertices.size());
  const int total = basis.offsets[n];
  basis.neighbors.reserve(total);
  basis.radius.reserve(total);
  basis.angle.reserve(total);
  basis.degenerate.reserve(total);
  for (int x = 0; x < n; ++x) {
    const auto& m = maps[x];
    basis.neighbors.insert(basis.neighbors.end(), m.vertices.begin(),
                           m.vertices.end());
    basis.radius.insert(basis.radius.end(), m.radius.begin(), m.radius.end());
    basis.angle.insert(basis.angle.end(), m.angle.begin(), m.angle.end());
    basis.degenerate.insert(basis.degenerate.end(), m.degenerate.begin(),
                            m.degenerate.end());
  }
  return basis;
}

TapTable make_tap_table(const KernelBasis& basis, double s, double theta) {
  if (!(std::abs(s) > 0.0))
    throw std::invalid_argument("tap table: scale must be nonzero");
  const double phase = theta + (s < 0.0 ? kPi : 0.0);
  const double mag = std::abs(s);
  TapTable table;
  const int ne = basis.entries();
  table.entry_offsets.resize(ne + 1);
  table.entry_offsets[0] = 0;
  table.tap_bin.reserve(4 * ne);
  table.tap_weight.reserve(4 * ne);
  std::vector<std::pair<int, double>> taps;
  long clipped = 0;
  for (int e = 0; e < ne; ++e) {
    taps.clear();
    const int added = polar_taps(mag * basis.radius[e], basis.angle[e] + phase,
                                 basis.delta, basis.n_r, basis.n_theta, taps);
    if (added == 0) ++clipped;
    for (const auto& [bin, w] : taps) {
      table.tap_bin.push_back(bin);
      table.tap_weight.push_back(w);
    }
    table.entry_offsets[e + 1] = static_cast<int>(table.tap_bin.size());
  }
  table.clipped_fraction = ne > 0 ? static_cast<double>(clipped) / ne : 0.0;
  return table;
}

KernelMatrix assemble(const KernelBasis& basis, const KernelTemplate& tmpl,
                      double s, double theta, bool normalize) {
  tmpl.validate();
  if (tmpl.n_r != basis.n_r || tmpl.n_theta != basis.n_theta)
    throw std::invalid_argument("assemble: template grid does not match basis");
  if (std::abs(tmpl.delta - basis.delta) >
      1e-9 * std::max(tmpl.delta, basis.delta))
    throw std::invalid_argument("assemble: template radius does not match basis");
  const TapTable table = make_tap_table(basis, s, theta);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(basis.entries());
  for (int x = 0; x < basis.n; ++x) {
    for (int e = basis.offsets[x]; e < basis.offsets[x + 1]; ++e) {
      double val = 0.0;
      for (int t = table.entry_offsets[e]; t < table.entry_offsets[e + 1]; ++t)
        val += table.tap_weight[t] * tmpl.weights[table.tap_bin[t]];
      trip.emplace_back(basis.neighbors[e], x, val);
    }
  }
  KernelMatrix out;
  out.scale = s;
  out.rotation = theta;
  out.clipped_fraction = table.clipped_fraction;
  out.K.resize(basis.n, basis.n);
  out.K.setFromTriplets(trip.begin(), trip.end());
  out.norm_constants = Eigen::VectorXd::Ones(basis.n);
  if (normalize) {
    Eigen::VectorXd volume = Eigen::VectorXd::Zero(basis.n);
    for (int x = 0; x < basis.n; ++x)
      for (Eigen::SparseMatrix<double>::InnerIterator it(out.K, x); it; ++it)
        volume[x] += std::abs(it.value()) * basis.mass[it.row()];
    const double ref = volume[basis.anchor];
    if (ref > 0.0) {
      for (int x = 0; x < basis.n; ++x) {
        if (volume[x] <= 0.0) continue;
        const double c = volume[x] / ref;
        out.norm_constants[x] = c;
        for (Eigen::SparseMatrix<double>::InnerIterator it(out.K, x); it; ++it)
          it.valueRef() /= c;
      }
    }
    out.normalized = true;
  }
  return out;
}

Eigen::SparseMatrix<double> bin_matrix(const KernelBasis& basis, int bin,
                                       double s, double theta) {
  if (bin < 0 || bin >= basis.bins())
    throw std::invalid_argument("bin_matrix: bin out of range");
  const TapTable table = make_tap_table(basis, s, theta);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(basis.entries());
  for (int x = 0; x < basis.n; ++x) {
    for (int e = basis.offsets[x]; e < basis.offsets[x + 1]; ++e) {
      double val = 0.0;
      for (int t = table.entry_offsets[e]; t < table.entry_offsets[e + 1]; ++t)
        if (table.tap_bin[t] == bin) val += table.tap_weight[t];
      trip.emplace_back(basis.neighbors[e], x, val);
    }
  }
  Eigen::SparseMatrix<double> B(basis.n, basis.n);
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

void write_matrix_market(const std::string& path,
                         const Eigen::SparseMatrix<double>& K) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << K.rows() << " " << K.cols() << " " << K.nonZeros() << "\n";
  char buf[64];
  for (int x = 0; x < K.outerSize(); ++x) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, x); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g\n",
                    static_cast<int>(it.row()) + 1,
                    static_cast<int>(it.col()) + 1, it.value());
      out << buf;
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ptc
