#pragma once

#include <array>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptc/mesh.hpp"

namespace ptc {

// Thrown when fast marching is asked to cover the whole mesh but some
// vertices cannot be reached from the sources.
class UnreachableVerticesError : public std::runtime_error {
 public:
  explicit UnreachableVerticesError(std::vector<int> vertices);
  const std::vector<int>& vertices() const { return vertices_; }

 private:
  std::vector<int> vertices_;
};

struct FastMarchingOptions {
  // Truncation radius: vertices farther than this stay at +inf.
  double max_distance = std::numeric_limits<double>::infinity();
  // Seed vertices near the sources with exact straight-line distances.
  // First-ring fast-marching updates carry an O(1) relative error that
  // never decays, so without this the field is unusable close to the
  // source. A vertex is seeded when it lies within `exact_init_rings`
  // edge hops of a source and its chord length is at most
  // `exact_init_factor` mean edge lengths.
  bool exact_init = true;
  int exact_init_rings = 3;
  double exact_init_factor = 3.0;
  // Throw UnreachableVerticesError when an untruncated run leaves
  // vertices at +inf.
  bool require_full_coverage = true;
  // Fill face_grad/grad_singular after marching. Off for throwaway
  // local runs that only need distances.
  bool compute_gradients = true;
};

struct GeodesicField {
  Eigen::VectorXd dist;
  std::vector<int> sources;
  // Vertices in the order they were finalized; distances are
  // non-decreasing along this sequence.
  std::vector<int> accept_order;
  // Provenance of each vertex's final distance value: the one or two
  // vertices of the supporting edge ({v, -1} for a single-point update,
  // {-1, -1} for sources). Walking first entries leads back to a source.
  std::vector<std::array<int, 2>> parent;

  // Unit descent-to-ascent direction per face (points away from the
  // sources), empty until compute_face_gradients runs.
  std::vector<Vec3> face_grad;
  // Faces whose direction had to be filled in by neighbor averaging:
  // faces touching a source vertex, faces with vanishing gradient, and
  // faces with unreached vertices.
  std::vector<char> grad_singular;

  bool reached(int v) const {
    return dist[v] < std::numeric_limits<double>::infinity();
  }
  std::vector<int> singular_faces() const {
    std::vector<int> out;
    for (size_t f = 0; f < grad_singular.size(); ++f)
      if (grad_singular[f]) out.push_back(static_cast<int>(f));
    return out;
  }
};

GeodesicField fast_marching(const TriangleMesh& mesh,
                            const std::vector<int>& sources,
                            const FastMarchingOptions& options = {});

// Fills field.face_grad and field.grad_singular with unit per-face
// directions of steepest distance increase. Singular faces inherit the
// area-weighted average direction of their resolved edge neighbors,
// iterated until the set stops shrinking.
void compute_face_gradients(const TriangleMesh& mesh, GeodesicField& field);

// Walks the update provenance chain from `target` back to the source
// and returns the first vertex stepped to from the source. Returns
// `target` itself when it is a source or was seeded directly.
int first_hop_from_source(const GeodesicField& field, int target);

// Angle in radians between the directions of two edge-adjacent faces
// after rotating one flat into the other's plane about the shared edge.
double hinge_angle(const TriangleMesh& mesh, const GeodesicField& field,
                   int face_a, int face_b, const EdgeKey& edge);

// Faces whose direction disagrees with an edge-adjacent face by more
// than `angle_threshold` once hinge-aligned, plus every face touching a
// source vertex. Sorted ascending.
std::vector<int> detect_singularities(const TriangleMesh& mesh,
                                      const GeodesicField& field,
                                      double angle_threshold);

enum class FieldAssignment { RoundRobin, Explicit };

// A bundle of direction fields plus a fixed filter-to-field map.
struct VectorFieldSet {
  std::vector<GeodesicField> fields;
  std::vector<int> filter_to_field;

  const GeodesicField& field_for(int filter) const {
    return fields[filter_to_field.at(filter)];
  }
  int field_count() const { return static_cast<int>(fields.size()); }
  int filter_count() const { return static_cast<int>(filter_to_field.size()); }
};

// One distance field per source group, with gradients ready, and
// `filters` filters spread across them. Round-robin ignores
// `explicit_map`; Explicit requires one valid field index per filter.
VectorFieldSet build_field_set(const TriangleMesh& mesh,
                               const std::vector<std::vector<int>>& source_groups,
                               int filters,
                               FieldAssignment assignment = FieldAssignment::RoundRobin,
                               const std::vector<int>& explicit_map = {},
                               const FastMarchingOptions& options = {});

}  // namespace ptc
