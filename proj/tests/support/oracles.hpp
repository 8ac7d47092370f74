#pragma once

// Reference implementations the tests compare library output against.
// Everything here is written from first principles (graph search, direct
// summation, textbook formulas) rather than by calling into the library,
// so agreement is meaningful.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ptc/kernel.hpp"
#include "ptc/mesh.hpp"

namespace oracle {

// Shortest-path lengths over the edge graph. An upper bound for the
// geodesic distance: every edge path is a curve on the surface.
Eigen::VectorXd dijkstra(const ptc::TriangleMesh& mesh,
                         const std::vector<int>& sources);

// Template value at tangent offset (du, dv) under the (s, theta) lookup
// remap: polar coordinates, bilinear between ring centers (clamped) and
// sector centers (wrapped), zero outside the disc.
double sample_template(const ptc::KernelTemplate& tmpl, double s, double theta,
                       double du, double dv);

// Dense Euclidean cross-correlation on a generated grid surface:
// out(x) = sum_y k(uv_y - uv_x) mass_y f_y, brute force over all pairs.
Eigen::VectorXd dense_correlation(const ptc::TriangleMesh& mesh,
                                  const Eigen::VectorXd& mass,
                                  const ptc::KernelTemplate& tmpl, double s,
                                  double theta, const Eigen::VectorXd& f);

// Central finite difference of `value_at` at x.
inline double central_diff(const std::function<double(double)>& value_at,
                           double x, double h) {
  return (value_at(x + h) - value_at(x - h)) / (2.0 * h);
}

// Angle between the gradients of two edge-adjacent faces after rotating
// face b flat into face a's plane about the shared edge.
double hinge_gradient_angle(const ptc::TriangleMesh& mesh,
                            const Eigen::Vector3d& grad_a,
                            const Eigen::Vector3d& grad_b, int face_a,
                            int face_b, const ptc::EdgeKey& edge);

}  // namespace oracle
