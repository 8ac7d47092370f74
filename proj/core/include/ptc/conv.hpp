#pragma once

#include <string>
#include <vector>

#include "ptc/kernel.hpp"

namespace ptc {

// Vertex-major multichannel signal.
struct Signal {
  Eigen::MatrixXd values;  // n x q
  std::vector<std::string> channel_names;  // empty or one per channel

  int vertices() const { return static_cast<int>(values.rows()); }
  int channels() const { return static_cast<int>(values.cols()); }
  void validate() const;
};

// out = K^T (M .* f): the convolution of a single-channel signal with
// the kernels stored in K's columns.
Eigen::VectorXd ptc_apply(const KernelMatrix& K, const MassMatrix& M,
                          const Eigen::VectorXd& f);
Signal ptc_apply(const KernelMatrix& K, const MassMatrix& M, const Signal& f);

// p filters over q input channels sharing one basis per vector field.
// The weights are domain-independent; bases and tap tables are bound to
// a particular mesh and rebuilt when the bank moves to another one.
struct FilterBank {
  int q = 1;
  int p = 1;
  double delta = 0.0;
  int n_r = 1;
  int n_theta = 1;
  Eigen::MatrixXd weights;  // bins x (q*p); column weight_col(i, j)
  std::vector<int> filter_to_field;  // size p

  // Domain-bound state. bases/tables are indexed by field id.
  std::vector<KernelBasis> bases;
  std::vector<TapTable> tables;

  int bins() const { return n_r * n_theta; }
  int weight_col(int i, int j) const { return j * q + i; }
  bool bound() const { return !bases.empty(); }
  void validate() const;
  // Template view of filter (i, j), for assembling a reference kernel.
  KernelTemplate filter_template(int i, int j) const;
};

FilterBank make_filter_bank(int q, int p, double delta, int n_r, int n_theta,
                            std::vector<int> filter_to_field);

// Builds bases and tap tables on `mesh` for every field the bank's
// filters reference. Weights are left untouched: moving a trained bank
// to a new mesh is exactly one bind_bank call.
void bind_bank(FilterBank& bank, const TriangleMesh& mesh,
               const VectorFieldSet& fields, int anchor = 0,
               const FastMarchingOptions& patch_options = {});

// Gather-contract forward pass: Z = M .* F, per-center contraction of
// gathered neighborhood panels against the filter weights. Output is
// n x p. Numerically equal to assembling each K_ij and summing
// ptc_apply over input channels.
Eigen::MatrixXd ptc_forward_batched(const FilterBank& bank,
                                    const MassMatrix& M,
                                    const Eigen::MatrixXd& F);
std::vector<Eigen::MatrixXd> ptc_forward_batched(
    const FilterBank& bank, const MassMatrix& M,
    const std::vector<Eigen::MatrixXd>& batch);

struct PtcGradients {
  Eigen::MatrixXd weights;  // bins x (q*p), same layout as bank.weights
  Eigen::MatrixXd input;    // n x q
};

// Backward pass for upstream gradient G (n x p):
// d/dw_ij[b] = sum_x G(x, j) * Gamma_x(b, i) and
// dF_i = sum_j M .* (K_ij G_j), both through the same gathered panels.
PtcGradients ptc_backward(const FilterBank& bank, const MassMatrix& M,
                          const Eigen::MatrixXd& F, const Eigen::MatrixXd& G);

struct PtcBatchGradients {
  Eigen::MatrixXd weights;              // summed over the batch, item order
  std::vector<Eigen::MatrixXd> inputs;  // per item
};

PtcBatchGradients ptc_backward_batch(const FilterBank& bank,
                                     const MassMatrix& M,
                                     const std::vector<Eigen::MatrixXd>& batch,
                                     const std::vector<Eigen::MatrixXd>& upstream);

// CSV with a header row: vertex, then one column per channel.
void save_signal_csv(const std::string& path, const Signal& signal);
Signal load_signal_csv(const std::string& path);

// Little-endian binary block: magic "PTCS", u64 vertex count, u64
// channel count, then row-major doubles.
void save_signal_binary(const std::string& path, const Signal& signal);
Signal load_signal_binary(const std::string& path);

}  // namespace ptc
