#pragma once

#include <vector>

#include "ptc/geodesic.hpp"
#include "ptc/mesh.hpp"

namespace ptc {

// Orthonormal frames adapted to a direction field: column 0 follows the
// field, column 2 is the normal, column 1 completes the right-handed
// triple. Transporting a tangent vector between two points means
// re-expressing its frame coefficients at the destination, so the
// transition from t to s is F_s * F_t^T.
struct FrameField {
  std::vector<Eigen::Matrix3d> face_frames;
  std::vector<Eigen::Matrix3d> vertex_frames;
  // Vertex whose incident faces were all direction-filled fallbacks.
  std::vector<char> vertex_singular;

  Eigen::Matrix3d transition(int to, int from) const {
    return vertex_frames[to] * vertex_frames[from].transpose();
  }
  Vec3 transport(int to, int from, const Vec3& v) const {
    return vertex_frames[to] * (vertex_frames[from].transpose() * v);
  }
  Vec2 tangent_coords(int v, const Vec3& vec) const {
    return {vertex_frames[v].col(0).dot(vec), vertex_frames[v].col(1).dot(vec)};
  }
  Vec3 from_tangent_coords(int v, const Vec2& c) const {
    return c.x() * vertex_frames[v].col(0) + c.y() * vertex_frames[v].col(1);
  }
};

// Face frames come straight from the field directions; vertex frames
// are the closest rotations to the interior-angle-weighted average of
// the incident face frames.
FrameField build_frames(const TriangleMesh& mesh, const GeodesicField& field);

// Transport of the tangent vector with coefficients `coords` (taken at
// the field's anchor) to vertex x: the coefficients carry over
// unchanged; the returned 3D vector realizes them in x's frame.
inline Vec2 transport_coords(const Vec2& coords) { return coords; }
inline Vec3 transport_vector(const FrameField& frames, const Vec2& coords,
                             int x) {
  return frames.from_tangent_coords(x, coords);
}

// Rotations between the frames of edge-adjacent faces: R carries the
// frame of `from` onto the frame of `to` (R * F_from = F_to), so
// composing R along a face path accumulates the holonomy of the walk.
class TransitionSet {
 public:
  TransitionSet(const TriangleMesh& mesh, const FrameField& frames);
  // Throws std::invalid_argument when the faces do not share an edge.
  Eigen::Matrix3d operator()(int to, int from) const;
  // Composition along consecutive edge-adjacent faces.
  Eigen::Matrix3d along(const std::vector<int>& face_path) const;

 private:
  const TriangleMesh* mesh_;
  const FrameField* frames_;
};

// Field-independent half of a local patch around a vertex: who is in
// geodesic range, how far, and the straight-line offsets used to read
// off tangent directions. The hop offset substitutes for the direct
// offset when the latter is normal to the surface.
struct LocalPatch {
  int center = -1;
  std::vector<int> vertices;  // ascending order, includes the center
  std::vector<double> radius;
  std::vector<Vec3> offset;      // position difference to the center
  std::vector<Vec3> hop_offset;  // first marching hop from the center
};

LocalPatch build_local_patch(const TriangleMesh& mesh, int center,
                             double radius,
                             const FastMarchingOptions& options = {});

// Polar coordinates of a patch in one frame field: radius is the local
// geodesic distance, angle is measured from the field direction.
struct LocalTangentMap {
  int center = -1;
  std::vector<int> vertices;
  std::vector<double> radius;
  std::vector<double> angle;
  std::vector<char> degenerate;  // direction had to use the hop fallback
};

LocalTangentMap resolve_angles(const LocalPatch& patch,
                               const FrameField& frames,
                               double degenerate_tol = 1e-6);

struct LogMapResult {
  Vec2 coords = Vec2::Zero();
  bool degenerate = false;
};

// Tangent-plane coordinates of `target` as seen from `center`:
// direction from the projected offset, length from the local geodesic
// distance. Throws std::out_of_range when `target` is farther than
// `max_radius`.
LogMapResult log_map(const TriangleMesh& mesh, const FrameField& frames,
                     int center, int target, double max_radius);

}  // namespace ptc
