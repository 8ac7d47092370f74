#include "ptc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ptc {

double TriangleMesh::total_area() const {
  double a = 0.0;
  for (double fa : face_areas) a += fa;
  return a;
}

double TriangleMesh::mean_edge_length() const {
  double sum = 0.0;
  for (const auto& [key, fs] : edge_faces) {
    (void)fs;
    sum += (vertices[key.first] - vertices[key.second]).norm();
  }
  return edge_faces.empty() ? 0.0 : sum / static_cast<double>(edge_faces.size());
}

int TriangleMesh::grid_vertex(int iu, int iv) const {
  if (grid_nu <= 0 || grid_nv <= 0)
    throw std::logic_error("grid_vertex: mesh was not generated from a grid");
  if (iu < 0 || iu >= grid_nu || iv < 0 || iv >= grid_nv)
    throw std::out_of_range("grid_vertex: index outside grid");
  return iv * grid_nu + iu;
}

TriangleMesh TriangleMesh::build(std::vector<Vec3> vertices,
                                 std::vector<std::array<int, 3>> faces) {
  TriangleMesh m;
  m.vertices = std::move(vertices);
  m.faces = std::move(faces);
  const int nv = m.vertex_count();
  const int nf = m.face_count();

  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const int v = m.faces[f][k];
      if (v < 0 || v >= nv)
        throw MeshError(MeshErrorCode::IndexOutOfRange,
                        "face " + std::to_string(f) + " references vertex " +
                            std::to_string(v) + " (vertex count " +
                            std::to_string(nv) + ")");
    }
  }

  m.face_normals.resize(nf);
  m.face_areas.resize(nf);
  double mean_area = 0.0;
  for (int f = 0; f < nf; ++f) {
    const auto& t = m.faces[f];
    const Vec3 n = (m.vertices[t[1]] - m.vertices[t[0]])
                       .cross(m.vertices[t[2]] - m.vertices[t[0]]);
    const double a = 0.5 * n.norm();
    m.face_areas[f] = a;
    m.face_normals[f] = a > 0.0 ? Vec3(n / (2.0 * a)) : Vec3::Zero();
    mean_area += a;
  }
  mean_area /= std::max(1, nf);
  for (int f = 0; f < nf; ++f) {
    if (m.face_areas[f] <= 1e-12 * mean_area)
      throw MeshError(MeshErrorCode::DegenerateFace,
                      "face " + std::to_string(f) + " is degenerate (area " +
                          std::to_string(m.face_areas[f]) + ")");
  }

  // Edge -> faces map; detects non-manifold edges as they appear.
  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const EdgeKey key = make_edge_key(m.faces[f][k], m.faces[f][(k + 1) % 3]);
      auto [it, inserted] = m.edge_faces.try_emplace(key, std::array<int, 2>{f, -1});
      if (!inserted) {
        if (it->second[1] != -1)
          throw MeshError(MeshErrorCode::NonManifoldEdge,
                          "edge (" + std::to_string(key.first) + "," +
                              std::to_string(key.second) +
                              ") bounds more than two faces");
        it->second[1] = f;
      }
    }
  }

  // Orientation: an interior edge must be traversed in opposite directions
  // by its two faces.
  auto directed_in_face = [&](int f, int a, int b) {
    const auto& t = m.faces[f];
    for (int k = 0; k < 3; ++k)
      if (t[k] == a && t[(k + 1) % 3] == b) return true;
    return false;
  };
  for (const auto& [key, fs] : m.edge_faces) {
    if (fs[1] == -1) {
      m.boundary_edges.push_back(key);
      continue;
    }
    const bool d0 = directed_in_face(fs[0], key.first, key.second);
    const bool d1 = directed_in_face(fs[1], key.first, key.second);
    if (d0 == d1)
      throw MeshError(MeshErrorCode::InconsistentOrientation,
                      "faces " + std::to_string(fs[0]) + " and " +
                          std::to_string(fs[1]) + " traverse edge (" +
                          std::to_string(key.first) + "," +
                          std::to_string(key.second) +
                          ") in the same direction");
  }

  m.vertex_faces.assign(nv, {});
  for (int f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k) m.vertex_faces[m.faces[f][k]].push_back(f);

  m.vertex_neighbors.assign(nv, {});
  {
    std::vector<std::set<int>> nb(nv);
    for (const auto& [key, fs] : m.edge_faces) {
      (void)fs;
      nb[key.first].insert(key.second);
      nb[key.second].insert(key.first);
    }
    for (int v = 0; v < nv; ++v)
      m.vertex_neighbors[v].assign(nb[v].begin(), nb[v].end());
  }

  return m;
}

MassMatrix mass_matrix(const TriangleMesh& mesh) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const double third = mesh.face_areas[f] / 3.0;
    for (int k = 0; k < 3; ++k) diag[mesh.faces[f][k]] += third;
  }
  return MassMatrix{std::move(diag)};
}

}  // namespace ptc
