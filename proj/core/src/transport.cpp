#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "ptc/transport.hpp"

namespace ptc {

namespace {

// Closest rotation to M in the Frobenius sense.
Eigen::Matrix3d polar_rotation(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = svd.matrixU();
  const Eigen::Matrix3d V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;
  return U * V.transpose();
}

double interior_angle(const Vec3& at, const Vec3& b, const Vec3& c) {
  const Vec3 u = (b - at).normalized();
  const Vec3 v = (c - at).normalized();
  return std::acos(std::clamp(u.dot(v), -1.0, 1.0));
}

}  // namespace

FrameField build_frames(const TriangleMesh& mesh, const GeodesicField& field) {
  if (field.face_grad.size() != static_cast<size_t>(mesh.face_count()))
    throw std::logic_error("build_frames: face gradients missing");
  FrameField out;
  out.face_frames.resize(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Vec3& b1 = field.face_grad[f];
    if (b1.norm() < 0.5)
      throw std::logic_error("build_frames: zero-length direction on face " +
                             std::to_string(f));
    const Vec3& n = mesh.face_normals[f];
    Eigen::Matrix3d F;
    F.col(0) = b1;
    F.col(1) = n.cross(b1);
    F.col(2) = n;
    out.face_frames[f] = F;
  }
  out.vertex_frames.resize(mesh.vertex_count());
  out.vertex_singular.assign(mesh.vertex_count(), 0);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    bool all_singular = true;
    for (int f : mesh.vertex_faces[v]) {
      const auto& tri = mesh.faces[f];
      int k = 0;
      while (tri[k] != v) ++k;
      const double w =
          interior_angle(mesh.vertices[v], mesh.vertices[tri[(k + 1) % 3]],
                         mesh.vertices[tri[(k + 2) % 3]]);
      M += w * out.face_frames[f];
      if (!field.grad_singular[f]) all_singular = false;
    }
    out.vertex_frames[v] = polar_rotation(M);
    out.vertex_singular[v] = all_singular ? 1 : 0;
  }
  return out;
}

TransitionSet::TransitionSet(const TriangleMesh& mesh,
                             const FrameField& frames)
    : mesh_(&mesh), frames_(&frames) {
  if (frames.face_frames.size() != static_cast<size_t>(mesh.face_count()))
    throw std::logic_error("TransitionSet: frames do not match mesh");
}

Eigen::Matrix3d TransitionSet::operator()(int to, int from) const {
  if (to == from) return Eigen::Matrix3d::Identity();
  bool adjacent = false;
  const auto& tri = mesh_->faces[from];
  for (int k = 0; k < 3 && !adjacent; ++k) {
    const auto it =
        mesh_->edge_faces.find(make_edge_key(tri[k], tri[(k + 1) % 3]));
    if (it != mesh_->edge_faces.end() &&
        (it->second[0] == to || it->second[1] == to))
      adjacent = true;
  }
  if (!adjacent)
    throw std::invalid_argument("transition: faces " + std::to_string(from) +
                                " and " + std::to_string(to) +
                                " do not share an edge");
  return frames_->face_frames[to] * frames_->face_frames[from].transpose();
}

Eigen::Matrix3d TransitionSet::along(const std::vector<int>& face_path) const {
  if (face_path.size() < 2)
    throw std::invalid_argument("transition path needs at least two faces");
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  for (size_t i = 0; i + 1 < face_path.size(); ++i)
    R = (*this)(face_path[i + 1], face_path[i]) * R;
  return R;
}

LocalPatch build_local_patch(const TriangleMesh& mesh, int center,
                             double radius,
                             const FastMarchingOptions& options) {
  if (center < 0 || center >= mesh.vertex_count())
    throw std::invalid_argument("build_local_patch: center out of range");
  FastMarchingOptions opts = options;
  opts.max_distance = radius;
  opts.require_full_coverage = false;
  opts.compute_gradients = false;
  const GeodesicField field = fast_marching(mesh, {center}, opts);

  LocalPatch patch;
  patch.center = center;
  patch.vertices = field.accept_order;
  std::sort(patch.vertices.begin(), patch.vertices.end());
  patch.radius.reserve(patch.vertices.size());
  patch.offset.reserve(patch.vertices.size());
  patch.hop_offset.reserve(patch.vertices.size());
  for (int v : patch.vertices) {
    patch.radius.push_back(field.dist[v]);
    patch.offset.push_back(mesh.vertices[v] - mesh.vertices[center]);
    const int hop = first_hop_from_source(field, v);
    patch.hop_offset.push_back(mesh.vertices[hop] - mesh.vertices[center]);
  }
  return patch;
}

LocalTangentMap resolve_angles(const LocalPatch& patch,
                               const FrameField& frames,
                               double degenerate_tol) {
  LocalTangentMap map;
  map.center = patch.center;
  map.vertices = patch.vertices;
  map.radius = patch.radius;
  map.angle.resize(patch.vertices.size(), 0.0);
  map.degenerate.assign(patch.vertices.size(), 0);
  const Eigen::Matrix3d& F = frames.vertex_frames[patch.center];
  for (size_t i = 0; i < patch.vertices.size(); ++i) {
    if (patch.vertices[i] == patch.center) continue;  // radius 0, angle 0
    Vec3 d = patch.offset[i];
    double u = F.col(0).dot(d);
    double w = F.col(1).dot(d);
    if (std::hypot(u, w) <= degenerate_tol * d.norm()) {
      map.degenerate[i] = 1;
      d = patch.hop_offset[i];
      u = F.col(0).dot(d);
      w = F.col(1).dot(d);
      if (std::hypot(u, w) <= degenerate_tol * d.norm()) {
        u = 1.0;  // no tangential information at all; pin the angle
        w = 0.0;
      }
    }
    map.angle[i] = std::atan2(w, u);
  }
  return map;
}

LogMapResult log_map(const TriangleMesh& mesh, const FrameField& frames,
                     int center, int target, double max_radius) {
  if (target == center) return {};
  const LocalPatch patch = build_local_patch(mesh, center, max_radius);
  const auto it =
      std::lower_bound(patch.vertices.begin(), patch.vertices.end(), target);
  if (it == patch.vertices.end() || *it != target)
    throw std::out_of_range("log_map: target outside the patch radius");
  const LocalTangentMap map = resolve_angles(patch, frames);
  const size_t i = static_cast<size_t>(it - patch.vertices.begin());
  LogMapResult res;
  res.coords = map.radius[i] * Vec2(std::cos(map.angle[i]),
                                    std::sin(map.angle[i]));
  res.degenerate = map.degenerate[i] != 0;
  return res;
}

}  // namespace ptc
