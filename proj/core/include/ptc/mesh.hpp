#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ptc {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Error codes raised while building or loading a mesh. Each validation
/// failure maps to exactly one code so callers can distinguish them.
enum class MeshErrorCode {
  ParseFailure,
  IndexOutOfRange,
  DegenerateFace,
  NonManifoldEdge,
  InconsistentOrientation,
  ResolutionTooSmall,
  IoFailure,
};

class MeshError : public std::runtime_error {
public:
  MeshError(MeshErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  MeshErrorCode code() const { return code_; }

private:
  MeshErrorCode code_;
};

/// Undirected edge key (smaller vertex id first).
using EdgeKey = std::pair<int, int>;
inline EdgeKey make_edge_key(int a, int b) {
  return a < b ? EdgeKey{a, b} : EdgeKey{b, a};
}

/// Immutable triangle mesh embedded in R^3.
///
/// Construction validates the invariants below and precomputes adjacency,
/// face normals and areas. After `build()` returns, the mesh never changes
/// and is safe to share across threads.
///
/// Invariants enforced:
///  - every face index < vertex count,
///  - no degenerate faces (area > 1e-12 x mean face area),
///  - edge-manifold (an edge bounds at most two faces),
///  - consistent orientation (a shared edge is traversed in opposite
///    directions by its two faces).
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;  // counter-clockwise

  // Adjacency, filled by build().
  std::map<EdgeKey, std::array<int, 2>> edge_faces;  // second = -1 on boundary
  std::vector<std::vector<int>> vertex_faces;
  std::vector<std::vector<int>> vertex_neighbors;  // one-ring vertex ids, sorted
  std::vector<EdgeKey> boundary_edges;

  // Per-face geometry, filled by build().
  std::vector<Vec3> face_normals;  // unit
  std::vector<double> face_areas;

  // Present only for meshes produced by generate_surface(): per-vertex
  // parameters in [0,1]^2 and the generating grid resolution.
  std::vector<Vec2> uv;
  int grid_nu = 0;
  int grid_nv = 0;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
  bool has_boundary() const { return !boundary_edges.empty(); }

  double total_area() const;
  double mean_edge_length() const;

  /// Index of the vertex generated at grid position (iu, iv).
  /// Only valid for generated surfaces.
  int grid_vertex(int iu, int iv) const;

  /// Validates invariants and fills adjacency and per-face geometry.
  /// Throws MeshError on violation.
  static TriangleMesh build(std::vector<Vec3> vertices,
                            std::vector<std::array<int, 3>> faces);
};

/// Diagonal (lumped) mass matrix: each vertex carries one third of the area
/// of its incident faces. The weights sum to the total surface area.
struct MassMatrix {
  Eigen::VectorXd diag;

  double total() const { return diag.sum(); }
  int size() const { return static_cast<int>(diag.size()); }
};

MassMatrix mass_matrix(const TriangleMesh& mesh);

// ---------------------------------------------------------------------------
// Synthetic surfaces
// ---------------------------------------------------------------------------

/// A parametric graph surface z = f(u,v) over the unit square, triangulated
/// on a regular grid. `function` selects the height function:
///   "flat"  : f = 0                      (params unused)
///   "bumps" : sum of Gaussian bumps      (params: heights[], centers[],
///             sigmas[], all of equal length)
///   "sine"  : h * sin(pi*fu*u) * sin(pi*fv*v)   (params: height, freq_u,
///             freq_v); vanishes on the boundary for integer frequencies
struct SurfaceSpec {
  std::string function = "flat";
  int nu = 2;
  int nv = 2;
  std::vector<double> heights;
  std::vector<Vec2> centers;
  std::vector<double> sigmas;
  double height = 0.0;
  double freq_u = 1.0;
  double freq_v = 1.0;

  double evaluate(double u, double v) const;

  static SurfaceSpec from_json_file(const std::string& path);
  static SurfaceSpec from_json_text(const std::string& text);
};

/// Triangulates z = f(u,v) on an nu x nv grid. Each quad splits along the
/// (u,v) -> (u+1,v+1) diagonal. Stores (u,v) per vertex for image sampling.
/// Throws MeshError(ResolutionTooSmall) when nu or nv < 2.
TriangleMesh generate_surface(const SurfaceSpec& spec);

/// Icosahedron subdivided `subdivisions` times, vertices projected onto the
/// sphere of the given radius.
TriangleMesh make_icosphere(int subdivisions, double radius = 1.0);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

enum class MeshFormat { Off, Obj };

/// Reads an OFF or OBJ file (vertex/face records only, triangles required).
/// Throws MeshError with a code describing the first problem found.
TriangleMesh load_mesh(const std::string& path, MeshFormat format);
/// Format deduced from the file extension (.off / .obj).
TriangleMesh load_mesh(const std::string& path);

void save_mesh(const std::string& path, const TriangleMesh& mesh,
               MeshFormat format);

/// ASCII PLY with optional per-vertex scalar properties (name -> values).
void write_ply(const std::string& path, const TriangleMesh& mesh,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>&
                   vertex_scalars = {});

/// ASCII PLY containing only line segments, one per input pair. Used to dump
/// frame fields as glyphs.
void write_ply_segments(const std::string& path,
                        const std::vector<std::pair<Vec3, Vec3>>& segments);

}  // namespace ptc
