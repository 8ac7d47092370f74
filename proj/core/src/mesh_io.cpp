#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ptc/mesh.hpp"

namespace ptc {

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& msg) {
  throw MeshError(MeshErrorCode::ParseFailure,
                  path + ":" + std::to_string(line) + ": " + msg);
}

// Next line that is neither empty nor a '#' comment.
bool next_content_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    const auto pos = line.find_first_not_of(" \t\r\n");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

TriangleMesh load_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshErrorCode::IoFailure, "cannot open " + path);
  int lineno = 0;
  std::string line;
  if (!next_content_line(in, line, lineno)) parse_fail(path, lineno, "empty file");
  {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "OFF") parse_fail(path, lineno, "missing OFF header");
  }
  if (!next_content_line(in, line, lineno))
    parse_fail(path, lineno, "missing count line");
  long nv = 0, nf = 0, ne = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nf >> ne) || nv < 0 || nf < 0)
      parse_fail(path, lineno, "bad count line");
  }
  std::vector<Vec3> vertices;
  vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line, lineno))
      parse_fail(path, lineno, "unexpected end of vertex list");
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z))
      parse_fail(path, lineno, "bad vertex record");
    vertices.emplace_back(x, y, z);
  }
  std::vector<std::array<int, 3>> faces;
  faces.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    if (!next_content_line(in, line, lineno))
      parse_fail(path, lineno, "unexpected end of face list");
    std::istringstream ss(line);
    int cnt;
    if (!(ss >> cnt)) parse_fail(path, lineno, "bad face record");
    if (cnt != 3)
      parse_fail(path, lineno,
                 "only triangular faces are supported (got " +
                     std::to_string(cnt) + " vertices)");
    std::array<int, 3> t{};
    if (!(ss >> t[0] >> t[1] >> t[2]))
      parse_fail(path, lineno, "bad face record");
    faces.push_back(t);
  }
  return TriangleMesh::build(std::move(vertices), std::move(faces));
}

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshErrorCode::IoFailure, "cannot open " + path);
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int lineno = 0;
  auto parse_face_index = [&](const std::string& tok) {
    // "v", "v/vt", "v//vn", "v/vt/vn": the vertex index is the first field.
    long idx = 0;
    try {
      idx = std::stol(tok.substr(0, tok.find('/')));
    } catch (const std::exception&) {
      parse_fail(path, lineno, "bad face index '" + tok + "'");
    }
    if (idx < 0) idx = static_cast<long>(vertices.size()) + 1 + idx;  // relative
    return static_cast<int>(idx - 1);  // OBJ is 1-based
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) parse_fail(path, lineno, "bad vertex record");
      vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> ids;
      std::string tok;
      while (ss >> tok) ids.push_back(parse_face_index(tok));
      if (ids.size() != 3)
        parse_fail(path, lineno,
                   "only triangular faces are supported (got " +
                       std::to_string(ids.size()) + " vertices)");
      faces.push_back({ids[0], ids[1], ids[2]});
    }
    // All other records (vn, vt, usemtl, ...) are ignored.
  }
  return TriangleMesh::build(std::move(vertices), std::move(faces));
}

// Shortest decimal form that round-trips the double exactly.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

}  // namespace

TriangleMesh load_mesh(const std::string& path, MeshFormat format) {
  return format == MeshFormat::Off ? load_off(path) : load_obj(path);
}

TriangleMesh load_mesh(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  if (ext == "off") return load_mesh(path, MeshFormat::Off);
  if (ext == "obj") return load_mesh(path, MeshFormat::Obj);
  throw MeshError(MeshErrorCode::IoFailure,
                  "cannot deduce mesh format from '" + path + "'");
}

void save_mesh(const std::string& path, const TriangleMesh& mesh,
               MeshFormat format) {
  std::ofstream out(path);
  if (!out) throw MeshError(MeshErrorCode::IoFailure, "cannot write " + path);
  if (format == MeshFormat::Off) {
    out << "OFF\n"
        << mesh.vertex_count() << " " << mesh.face_count() << " 0\n";
    for (const auto& v : mesh.vertices)
      out << fmt_double(v.x()) << " " << fmt_double(v.y()) << " "
          << fmt_double(v.z()) << "\n";
    for (const auto& f : mesh.faces)
      out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  } else {
    for (const auto& v : mesh.vertices)
      out << "v " << fmt_double(v.x()) << " " << fmt_double(v.y()) << " "
          << fmt_double(v.z()) << "\n";
    for (const auto& f : mesh.faces)
      out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  }
  if (!out) throw MeshError(MeshErrorCode::IoFailure, "write failed: " + path);
}

void write_ply(const std::string& path, const TriangleMesh& mesh,
               const std::vector<std::pair<std::string, Eigen::VectorXd>>&
                   vertex_scalars) {
  for (const auto& [name, values] : vertex_scalars)
    if (values.size() != mesh.vertex_count())
      throw std::invalid_argument("write_ply: property '" + name +
                                  "' has wrong length");
  std::ofstream out(path);
  if (!out) throw MeshError(MeshErrorCode::IoFailure, "cannot write " + path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertex_count() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  for (const auto& [name, values] : vertex_scalars) {
    (void)values;
    out << "property double " << name << "\n";
  }
  out << "element face " << mesh.face_count() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    out << fmt_double(mesh.vertices[v].x()) << " "
        << fmt_double(mesh.vertices[v].y()) << " "
        << fmt_double(mesh.vertices[v].z());
    for (const auto& [name, values] : vertex_scalars) {
      (void)name;
      out << " " << fmt_double(values[v]);
    }
    out << "\n";
  }
  for (const auto& f : mesh.faces)
    out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  if (!out) throw MeshError(MeshErrorCode::IoFailure, "write failed: " + path);
}

void write_ply_segments(const std::string& path,
                        const std::vector<std::pair<Vec3, Vec3>>& segments) {
  std::ofstream out(path);
  if (!out) throw MeshError(MeshErrorCode::IoFailure, "cannot write " + path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << 2 * segments.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "element edge " << segments.size() << "\n";
  out << "property int vertex1\nproperty int vertex2\nend_header\n";
  for (const auto& [a, b] : segments) {
    out << fmt_double(a.x()) << " " << fmt_double(a.y()) << " "
        << fmt_double(a.z()) << "\n";
    out << fmt_double(b.x()) << " " << fmt_double(b.y()) << " "
        << fmt_double(b.z()) << "\n";
  }
  for (size_t i = 0; i < segments.size(); ++i)
    out << 2 * i << " " << 2 * i + 1 << "\n";
  if (!out) throw MeshError(MeshErrorCode::IoFailure, "write failed: " + path);
}

}  // namespace ptc
