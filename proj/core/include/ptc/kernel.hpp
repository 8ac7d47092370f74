#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "ptc/transport.hpp"

namespace ptc {

// Raised by build_basis when some vertices have no neighbor besides
// themselves within the kernel radius.
class EmptyNeighborhoodError : public std::runtime_error {
 public:
  explicit EmptyNeighborhoodError(std::vector<int> vertices);
  const std::vector<int>& vertices() const { return vertices_; }

 private:
  std::vector<int> vertices_;
};

// Learnable weights on a polar grid over the tangent disc of radius
// delta at the anchor vertex. Bin (ir, it) lives at index
// ir * n_theta + it; radial rings are uniform in radius, angular
// sectors uniform in angle starting at 0.
struct KernelTemplate {
  int anchor = 0;
  double delta = 0.0;
  int n_r = 1;
  int n_theta = 1;
  Eigen::VectorXd weights;

  int bins() const { return n_r * n_theta; }
  void validate() const;

  std::string to_json_text() const;
  static KernelTemplate from_json_text(const std::string& text);
  void save_json(const std::string& path) const;
  static KernelTemplate load_json(const std::string& path);
};

// Geometric area of radial ring `ir` divided evenly among its sectors.
double bin_area(double delta, int n_r, int n_theta, int ir);

// Isotropic positive template, weight exp(-r^2 / (2 sigma^2)) at each
// ring's center radius.
KernelTemplate make_gaussian_template(int anchor, double delta, int n_r,
                                      int n_theta, double sigma);

// Odd template for oriented edge responses: +1 on sectors whose center
// points within 90 degrees of `orientation`, -1 opposite, then shifted
// to zero mean under the bin areas.
KernelTemplate edge_detector_template(double orientation, double delta,
                                      int n_r, int n_theta);

// Bilinear interpolation taps of the lookup point (r, phi) on the polar
// grid: linear between adjacent ring centers (clamped at both ends) and
// between adjacent sector centers (wrapping). r = 0 has no angle and
// spreads evenly over the innermost ring. Appends (bin, weight) pairs
// to `taps` and returns how many were added; zero means the point fell
// outside the grid. Tap weights always sum to 1 when nonempty.
int polar_taps(double r, double phi, double delta, int n_r, int n_theta,
               std::vector<std::pair<int, double>>& taps);

// Neighborhoods and tangent-plane polar coordinates for kernels
// centered at every vertex. Entries for center x cover exactly
// {y : d(x, y) <= delta}; coordinates are taken in x's own aligned
// frame, which realizes the transport of an anchor template to x as a
// plain coordinate lookup. The pattern does not depend on template
// weights or on the anchor, so one basis serves a whole filter bank.
struct KernelBasis {
  int n = 0;
  int anchor = -1;
  double delta = 0.0;
  int n_r = 1;
  int n_theta = 1;
  Eigen::VectorXd mass;  // lumped vertex areas of the carrying mesh

  std::vector<int> offsets;  // size n + 1; entries of center x
  std::vector<int> neighbors;
  std::vector<double> radius;
  std::vector<double> angle;
  std::vector<char> degenerate;

  int bins() const { return n_r * n_theta; }
  int entries() const { return static_cast<int>(neighbors.size()); }
  int neighborhood_size(int x) const { return offsets[x + 1] - offsets[x]; }
};

KernelBasis build_basis(const TriangleMesh& mesh, const FrameField& frames,
                        const GeodesicField& field, int x0, double delta,
                        int n_r, int n_theta,
                        const FastMarchingOptions& patch_options = {});

// Interpolation taps of every basis entry under the lookup remap
// (r, phi) -> (|s| r, phi + theta [+ pi when s < 0]). Taps are stored
// flat, parallel to basis.neighbors.
struct TapTable {
  std::vector<int> entry_offsets;  // size entries + 1
  std::vector<int> tap_bin;
  std::vector<double> tap_weight;
  // Share of samples whose remapped radius left the grid.
  double clipped_fraction = 0.0;
};

TapTable make_tap_table(const KernelBasis& basis, double s = 1.0,
                        double theta = 0.0);

// Sparse kernel operator: column x holds the template transported to x,
// evaluated at x's neighbors. Convolution is K.transpose() * (M .* f).
struct KernelMatrix {
  Eigen::SparseMatrix<double> K;
  double scale = 1.0;
  double rotation = 0.0;
  bool normalized = false;
  // C_x per vertex: kernel mass relative to the basis anchor's kernel
  // mass; columns were divided by it when normalization was requested.
  Eigen::VectorXd norm_constants;
  double clipped_fraction = 0.0;
};

// K = sum_b w_b B_b with the (s, theta) lookup remap applied before
// binning. With normalize on, every column's mass-weighted absolute sum
// is brought to the anchor column's value.
KernelMatrix assemble(const KernelBasis& basis, const KernelTemplate& tmpl,
                      double s = 1.0, double theta = 0.0,
                      bool normalize = false);

// The basis matrix of one bin under the given remap: column x scatters
// that bin's tap weights over x's neighborhood. K is linear in the
// template weights with d K / d w_b = bin_matrix(b).
Eigen::SparseMatrix<double> bin_matrix(const KernelBasis& basis, int bin,
                                       double s = 1.0, double theta = 0.0);

void write_matrix_market(const std::string& path,
                         const Eigen::SparseMatrix<double>& K);

}  // namespace ptc
