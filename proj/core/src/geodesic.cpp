#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

#include "ptc/geodesic.hpp"

namespace ptc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string unreachable_message(const std::vector<int>& vs) {
  std::string msg = "fast marching left " + std::to_string(vs.size()) +
                    " vertices unreached:";
  for (size_t i = 0; i < vs.size() && i < 8; ++i)
    msg += " " + std::to_string(vs[i]);
  if (vs.size() > 8) msg += " ...";
  return msg;
}

// Distance at xc given finalized values ta, tb at xa, xb. The linear
// wavefront model gives the larger root of a quadratic; the update is
// only usable when the characteristic reaching xc passes through the
// triangle, otherwise +inf is returned and the caller falls back to
// edge relaxation.
double triangle_update(const Vec3& xa, const Vec3& xb, const Vec3& xc,
                       double ta, double tb) {
  Eigen::Matrix<double, 3, 2> E;
  E.col(0) = xa - xc;
  E.col(1) = xb - xc;
  const Eigen::Matrix2d G = E.transpose() * E;
  const double det = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
  if (det <= 0.0) return kInf;
  Eigen::Matrix2d Q;
  Q << G(1, 1), -G(0, 1), -G(1, 0), G(0, 0);
  Q /= det;
  const Eigen::Vector2d t(ta, tb);
  const Eigen::Vector2d one(1.0, 1.0);
  const double a = one.dot(Q * one);
  const double b = one.dot(Q * t);
  const double c = t.dot(Q * t) - 1.0;
  const double disc = b * b - a * c;
  if (disc < 0.0 || a <= 0.0) return kInf;
  const double d = (b + std::sqrt(disc)) / a;
  if (d < std::max(ta, tb)) return kInf;
  // -grad must point into the wedge spanned by the edges to xa and xb.
  const Eigen::Vector2d lambda = Q * (d * one - t);
  const double tol = -1e-10 * (std::abs(lambda(0)) + std::abs(lambda(1)));
  if (lambda(0) < tol || lambda(1) < tol) return kInf;
  return d;
}

}  // namespace

UnreachableVerticesError::UnreachableVerticesError(std::vector<int> vertices)
    : std::runtime_error(unreachable_message(vertices)),
      vertices_(std::move(vertices)) {}

GeodesicField fast_marching(const TriangleMesh& mesh,
                            const std::vector<int>& sources,
                            const FastMarchingOptions& options) {
  const int n = mesh.vertex_count();
  if (sources.empty())
    throw std::invalid_argument("fast_marching: no sources");
  for (int s : sources)
    if (s < 0 || s >= n)
      throw std::invalid_argument("fast_marching: source index out of range");

  GeodesicField field;
  field.sources = sources;
  field.dist = Eigen::VectorXd::Constant(n, kInf);
  field.parent.assign(n, {-1, -1});
  std::vector<char> accepted(n, 0);

  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (int s : sources) {
    field.dist[s] = 0.0;
    heap.emplace(0.0, s);
  }

  if (options.exact_init && options.exact_init_rings > 0) {
    // Breadth-first rings around the sources; seed each ring vertex
    // with its chord to the nearest source when that chord is short
    // enough for the straight line to stand in for the geodesic.
    const double limit = options.exact_init_factor * mesh.mean_edge_length();
    std::vector<int> ring(n, -1);
    std::queue<int> bfs;
    for (int s : sources) {
      if (ring[s] < 0) {
        ring[s] = 0;
        bfs.push(s);
      }
    }
    while (!bfs.empty()) {
      const int v = bfs.front();
      bfs.pop();
      if (ring[v] >= options.exact_init_rings) continue;
      for (int w : mesh.vertex_neighbors[v]) {
        if (ring[w] >= 0) continue;
        ring[w] = ring[v] + 1;
        bfs.push(w);
        double chord = kInf;
        int best = -1;
        for (int s : sources) {
          const double c = (mesh.vertices[w] - mesh.vertices[s]).norm();
          if (c < chord) {
            chord = c;
            best = s;
          }
        }
        if (chord <= limit && chord < field.dist[w]) {
          field.dist[w] = chord;
          field.parent[w] = {best, -1};
          heap.emplace(chord, w);
        }
      }
    }
  }

  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (accepted[v] || d > field.dist[v]) continue;
    if (d > options.max_distance) break;
    accepted[v] = 1;
    field.accept_order.push_back(v);
    for (int f : mesh.vertex_faces[v]) {
      const auto& tri = mesh.faces[f];
      for (int k = 0; k < 3; ++k) {
        const int w = tri[k];
        if (w == v || accepted[w]) continue;
        // Third vertex of this face besides v and w.
        const int u = tri[0] + tri[1] + tri[2] - v - w;
        double cand = field.dist[v] + (mesh.vertices[w] - mesh.vertices[v]).norm();
        std::array<int, 2> prov = {v, -1};
        if (accepted[u]) {
          const double tu = triangle_update(mesh.vertices[v], mesh.vertices[u],
                                            mesh.vertices[w], field.dist[v],
                                            field.dist[u]);
          if (tu < cand) {
            cand = tu;
            prov = {v, u};
          }
        }
        if (cand < field.dist[w]) {
          field.dist[w] = cand;
          field.parent[w] = prov;
          heap.emplace(cand, w);
        }
      }
    }
  }

  const bool truncated = options.max_distance < kInf;
  std::vector<int> unreached;
  for (int v = 0; v < n; ++v) {
    if (!accepted[v]) {
      field.dist[v] = kInf;
      field.parent[v] = {-1, -1};
      if (!truncated) unreached.push_back(v);
    }
  }
  if (!unreached.empty() && options.require_full_coverage)
    throw UnreachableVerticesError(std::move(unreached));
  if (options.compute_gradients) compute_face_gradients(mesh, field);
  return field;
}

void compute_face_gradients(const TriangleMesh& mesh, GeodesicField& field) {
  const int nf = mesh.face_count();
  field.face_grad.assign(nf, Vec3::Zero());
  field.grad_singular.assign(nf, 0);
  std::unordered_set<int> source_set(field.sources.begin(),
                                     field.sources.end());

  std::vector<char> resolved(nf, 0);
  for (int f = 0; f < nf; ++f) {
    const auto& tri = mesh.faces[f];
    const bool usable = field.reached(tri[0]) && field.reached(tri[1]) &&
                        field.reached(tri[2]) && !source_set.count(tri[0]) &&
                        !source_set.count(tri[1]) && !source_set.count(tri[2]);
    if (!usable) continue;
    const Vec3& x0 = mesh.vertices[tri[0]];
    const Vec3& x1 = mesh.vertices[tri[1]];
    const Vec3& x2 = mesh.vertices[tri[2]];
    const Vec3& nrm = mesh.face_normals[f];
    const Vec3 g = (nrm.cross(x2 - x1) * field.dist[tri[0]] +
                    nrm.cross(x0 - x2) * field.dist[tri[1]] +
                    nrm.cross(x1 - x0) * field.dist[tri[2]]) /
                   (2.0 * mesh.face_areas[f]);
    if (g.norm() > 1e-8) {
      field.face_grad[f] = g.normalized();
      resolved[f] = 1;
    }
  }

  // Face adjacency across interior edges.
  std::vector<std::vector<int>> face_nbrs(nf);
  for (const auto& [key, pair] : mesh.edge_faces) {
    (void)key;
    if (pair[1] < 0) continue;
    face_nbrs[pair[0]].push_back(pair[1]);
    face_nbrs[pair[1]].push_back(pair[0]);
  }

  // Grow directions into the unresolved faces from their resolved
  // neighbors, one synchronous pass at a time.
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<std::pair<int, Vec3>> updates;
    for (int f = 0; f < nf; ++f) {
      if (resolved[f]) continue;
      Vec3 sum = Vec3::Zero();
      for (int g : face_nbrs[f])
        if (resolved[g]) sum += mesh.face_areas[g] * field.face_grad[g];
      const Vec3& nrm = mesh.face_normals[f];
      Vec3 proj = sum - nrm.dot(sum) * nrm;
      if (proj.norm() > 1e-12) updates.emplace_back(f, proj.normalized());
    }
    for (const auto& [f, dir] : updates) {
      field.face_grad[f] = dir;
      field.grad_singular[f] = 1;
      resolved[f] = 1;
      progress = true;
    }
  }

  // Anything still unresolved (no resolved neighbors anywhere) gets an
  // arbitrary in-plane direction so downstream frames stay orthonormal.
  for (int f = 0; f < nf; ++f) {
    if (resolved[f]) continue;
    const auto& tri = mesh.faces[f];
    field.face_grad[f] =
        (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]).normalized();
    field.grad_singular[f] = 1;
  }
}

int first_hop_from_source(const GeodesicField& field, int target) {
  int prev = target;
  int cur = field.parent[target][0];
  while (cur >= 0 && field.parent[cur][0] >= 0) {
    prev = cur;
    cur = field.parent[cur][0];
  }
  return prev;
}

double hinge_angle(const TriangleMesh& mesh, const GeodesicField& field,
                   int face_a, int face_b, const EdgeKey& edge) {
  const Vec3 e =
      (mesh.vertices[edge.second] - mesh.vertices[edge.first]).normalized();
  // Rotate face_b's direction flat into face_a's plane about the shared
  // edge: keep the component along the edge, carry the in-plane
  // transverse component over to face_a's transverse axis.
  const Vec3& vb = field.face_grad[face_b];
  const double alpha = vb.dot(e);
  const double beta = vb.dot(mesh.face_normals[face_b].cross(e));
  const Vec3 carried = alpha * e + beta * mesh.face_normals[face_a].cross(e);
  const double c = std::clamp(field.face_grad[face_a].dot(carried), -1.0, 1.0);
  return std::acos(c);
}

std::vector<int> detect_singularities(const TriangleMesh& mesh,
                                      const GeodesicField& field,
                                      double angle_threshold) {
  if (field.face_grad.size() != static_cast<size_t>(mesh.face_count()))
    throw std::logic_error("detect_singularities: face gradients missing");
  std::vector<char> flagged(mesh.face_count(), 0);
  std::unordered_set<int> source_set(field.sources.begin(),
                                     field.sources.end());
  for (int f = 0; f < mesh.face_count(); ++f)
    for (int v : mesh.faces[f])
      if (source_set.count(v)) flagged[f] = 1;
  for (const auto& [key, pair] : mesh.edge_faces) {
    if (pair[1] < 0) continue;
    if (hinge_angle(mesh, field, pair[0], pair[1], key) > angle_threshold) {
      flagged[pair[0]] = 1;
      flagged[pair[1]] = 1;
    }
  }
  std::vector<int> out;
  for (int f = 0; f < mesh.face_count(); ++f)
    if (flagged[f]) out.push_back(f);
  return out;
}

VectorFieldSet build_field_set(const TriangleMesh& mesh,
                               const std::vector<std::vector<int>>& source_groups,
                               int filters, FieldAssignment assignment,
                               const std::vector<int>& explicit_map,
                               const FastMarchingOptions& options) {
  if (source_groups.empty())
    throw std::invalid_argument("build_field_set: no source groups");
  if (filters < 1)
    throw std::invalid_argument("build_field_set: need at least one filter");
  VectorFieldSet set;
  set.fields.reserve(source_groups.size());
  for (const auto& group : source_groups)
    set.fields.push_back(fast_marching(mesh, group, options));
  const int nfields = static_cast<int>(set.fields.size());
  if (assignment == FieldAssignment::RoundRobin) {
    set.filter_to_field.resize(filters);
    for (int i = 0; i < filters; ++i) set.filter_to_field[i] = i % nfields;
  } else {
    if (static_cast<int>(explicit_map.size()) != filters)
      throw std::invalid_argument(
          "build_field_set: explicit assignment needs one entry per filter");
    for (int idx : explicit_map)
      if (idx < 0 || idx >= nfields)
        throw std::invalid_argument(
            "build_field_set: assignment references missing field " +
            std::to_string(idx));
    set.filter_to_field = explicit_map;
  }
  return set;
}

}  // namespace ptc
