#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "oracles.hpp"

namespace oracle {

Eigen::VectorXd dijkstra(const ptc::TriangleMesh& mesh,
                         const std::vector<int>& sources) {
  const int n = mesh.vertex_count();
  Eigen::VectorXd dist =
      Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (int s : sources) {
    dist[s] = 0.0;
    heap.push({0.0, s});
  }
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (int w : mesh.vertex_neighbors[v]) {
      const double cand = d + (mesh.vertices[v] - mesh.vertices[w]).norm();
      if (cand < dist[w]) {
        dist[w] = cand;
        heap.push({cand, w});
      }
    }
  }
  return dist;
}

double sample_template(const ptc::KernelTemplate& tmpl, double s, double theta,
                       double du, double dv) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double r = std::hypot(du, dv) * std::abs(s);
  double phi = (std::hypot(du, dv) > 0.0 ? std::atan2(dv, du) : 0.0) + theta;
  if (s < 0.0) phi += std::numbers::pi;
  if (r > tmpl.delta * (1.0 + 1e-12)) return 0.0;

  const int n_r = tmpl.n_r, n_t = tmpl.n_theta;
  auto bin = [&](int ir, int it) { return tmpl.weights[ir * n_t + it]; };

  if (r <= 1e-12 * tmpl.delta) {
    double sum = 0.0;
    for (int it = 0; it < n_t; ++it) sum += bin(0, it);
    return sum / n_t;
  }

  const double dr = tmpl.delta / n_r;
  const double tr = r / dr - 0.5;  // ring-center units
  int ir0;
  double fr;
  if (tr <= 0.0) {
    ir0 = 0;
    fr = 0.0;
  } else if (tr >= n_r - 1) {
    ir0 = n_r - 1;
    fr = 0.0;
  } else {
    ir0 = static_cast<int>(std::floor(tr));
    fr = tr - ir0;
  }

  double value = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double wr = a == 0 ? 1.0 - fr : fr;
    if (wr == 0.0) continue;
    const int ir = std::min(ir0 + a, n_r - 1);
    if (n_t == 1) {
      value += wr * bin(ir, 0);
      continue;
    }
    const double dt = two_pi / n_t;
    double ta = phi / dt - 0.5;  // sector-center units
    ta -= std::floor(ta / n_t) * n_t;
    const int it0 = static_cast<int>(std::floor(ta)) % n_t;
    const double ft = ta - std::floor(ta);
    value += wr * ((1.0 - ft) * bin(ir, it0) + ft * bin(ir, (it0 + 1) % n_t));
  }
  return value;
}

Eigen::VectorXd dense_correlation(const ptc::TriangleMesh& mesh,
                                  const Eigen::VectorXd& mass,
                                  const ptc::KernelTemplate& tmpl, double s,
                                  double theta, const Eigen::VectorXd& f) {
  const int n = mesh.vertex_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int y = 0; y < n; ++y) {
      const double du = mesh.uv[y].x() - mesh.uv[x].x();
      const double dv = mesh.uv[y].y() - mesh.uv[x].y();
      if (du * du + dv * dv > tmpl.delta * tmpl.delta * (1.0 + 1e-9)) continue;
      acc += sample_template(tmpl, s, theta, du, dv) * mass[y] * f[y];
    }
    out[x] = acc;
  }
  return out;
}

double hinge_gradient_angle(const ptc::TriangleMesh& mesh,
                            const Eigen::Vector3d& grad_a,
                            const Eigen::Vector3d& grad_b, int face_a,
                            int face_b, const ptc::EdgeKey& edge) {
  const Eigen::Vector3d e =
      (mesh.vertices[edge.second] - mesh.vertices[edge.first]).normalized();
  const Eigen::Vector3d ta = mesh.face_normals[face_a].cross(e);
  const Eigen::Vector3d tb = mesh.face_normals[face_b].cross(e);
  // Rotating b flat preserves the edge component and carries the
  // in-plane transverse component over to a's transverse axis.
  const Eigen::Vector3d moved = grad_b.dot(e) * e + grad_b.dot(tb) * ta;
  const double c = std::clamp(
      moved.normalized().dot(grad_a.normalized()), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace oracle
