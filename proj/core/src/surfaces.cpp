#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ptc/mesh.hpp"

namespace ptc {

double SurfaceSpec::evaluate(double u, double v) const {
  if (function == "flat") return 0.0;
  if (function == "bumps") {
    double h = 0.0;
    for (size_t i = 0; i < heights.size(); ++i) {
      const double du = u - centers[i].x();
      const double dv = v - centers[i].y();
      const double s2 = sigmas[i] * sigmas[i];
      h += heights[i] * std::exp(-(du * du + dv * dv) / s2);
    }
    return h;
  }
  if (function == "sine") {
    constexpr double pi = std::numbers::pi;
    return height * std::sin(pi * freq_u * u) * std::sin(pi * freq_v * v);
  }
  throw std::invalid_argument("unknown surface function '" + function + "'");
}

SurfaceSpec SurfaceSpec::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MeshError(MeshErrorCode::ParseFailure,
                    std::string("surface config: ") + e.what());
  }
  SurfaceSpec spec;
  try {
    spec.function = j.value("function", spec.function);
    spec.nu = j.value("nu", spec.nu);
    spec.nv = j.value("nv", spec.nv);
    if (spec.nu < 2 || spec.nv < 2)
      throw MeshError(MeshErrorCode::ResolutionTooSmall,
                      "grid resolution must be at least 2x2");
    if (spec.function == "bumps") {
      for (const auto& b : j.at("bumps")) {
        spec.heights.push_back(b.at("height").get<double>());
        spec.centers.emplace_back(b.at("cu").get<double>(),
                                  b.at("cv").get<double>());
        spec.sigmas.push_back(b.at("sigma").get<double>());
      }
    } else if (spec.function == "sine") {
      spec.height = j.at("height").get<double>();
      spec.freq_u = j.value("freq_u", 1.0);
      spec.freq_v = j.value("freq_v", 1.0);
    } else if (spec.function != "flat") {
      throw std::invalid_argument("unknown surface function '" +
                                  spec.function + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw MeshError(MeshErrorCode::ParseFailure,
                    std::string("surface config: ") + e.what());
  }
  return spec;
}

SurfaceSpec SurfaceSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshErrorCode::IoFailure, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

TriangleMesh generate_surface(const SurfaceSpec& spec) {
  if (spec.nu < 2 || spec.nv < 2)
    throw MeshError(MeshErrorCode::ResolutionTooSmall,
                    "grid resolution must be at least 2x2");
  const int nu = spec.nu, nv = spec.nv;
  std::vector<Vec3> vertices;
  std::vector<Vec2> uv;
  vertices.reserve(static_cast<size_t>(nu) * nv);
  uv.reserve(static_cast<size_t>(nu) * nv);
  for (int iv = 0; iv < nv; ++iv) {
    for (int iu = 0; iu < nu; ++iu) {
      const double u = static_cast<double>(iu) / (nu - 1);
      const double v = static_cast<double>(iv) / (nv - 1);
      vertices.emplace_back(u, v, spec.evaluate(u, v));
      uv.emplace_back(u, v);
    }
  }
  std::vector<std::array<int, 3>> faces;
  faces.reserve(2 * static_cast<size_t>(nu - 1) * (nv - 1));
  auto vid = [nu](int iu, int iv) { return iv * nu + iu; };
  for (int iv = 0; iv + 1 < nv; ++iv) {
    for (int iu = 0; iu + 1 < nu; ++iu) {
      // Split each quad along the (iu,iv) -> (iu+1,iv+1) diagonal,
      // oriented counterclockwise as seen from +z over a flat sheet.
      const int a = vid(iu, iv), b = vid(iu + 1, iv);
      const int c = vid(iu + 1, iv + 1), d = vid(iu, iv + 1);
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  }
  TriangleMesh mesh = TriangleMesh::build(std::move(vertices), std::move(faces));
  mesh.uv = std::move(uv);
  mesh.grid_nu = nu;
  mesh.grid_nv = nv;
  return mesh;
}

TriangleMesh make_icosphere(int subdivisions, double radius) {
  if (subdivisions < 0 || radius <= 0.0)
    throw std::invalid_argument("make_icosphere: bad parameters");
  // Icosahedron with vertices on the unit sphere.
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1},
  };
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (int level = 0; level < subdivisions; ++level) {
    std::map<EdgeKey, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = make_edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int id = static_cast<int>(verts.size());
      verts.push_back((verts[a] + verts[b]).normalized());
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * faces.size());
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (auto& v : verts) v *= radius;
  return TriangleMesh::build(std::move(verts), std::move(faces));
}

}  // namespace ptc
