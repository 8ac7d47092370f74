#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ptc/conv.hpp"

namespace ptc {

struct PtcLayer {
  FilterBank bank;
};
struct ReluLayer {};
// Mass-weighted mean over vertices: n x c -> 1 x c. Makes the head
// independent of the vertex count, so one trained net runs on any mesh.
struct GlobalPoolLayer {};
// Consumes the input flattened column-major (all vertices of channel 0,
// then channel 1, ...), so `in` is rows * cols of whatever precedes it:
// q * n straight off the mesh, p after a pool, p * n without one.
struct FcLayer {
  Eigen::MatrixXd W;  // out x in
  Eigen::VectorXd b;
};

using Layer = std::variant<PtcLayer, ReluLayer, GlobalPoolLayer, FcLayer>;

enum class LossKind { SoftmaxCrossEntropy, Triplet };

struct Network {
  std::vector<Layer> layers;
  LossKind loss = LossKind::SoftmaxCrossEntropy;
  double triplet_lambda = 1.0;
  double triplet_margin = 0.5;

  // Domain binding: the mass of the current mesh. Set by bind_network.
  MassMatrix mass;
  bool bound() const { return mass.size() > 0; }
};

// Rebuilds every PTC layer's bases and the mass matrix on `mesh`.
// Weights are never touched here; calling this is all it takes to move
// a trained network to another mesh.
void bind_network(Network& net, const TriangleMesh& mesh,
                  const VectorFieldSet& fields, int anchor = 0,
                  const FastMarchingOptions& patch_options = {});

// Fills FC and filter weights with uniform draws in ±1/sqrt(fan-in).
// The generator is platform-independent (raw 53-bit mantissa draws).
void init_network(Network& net, uint64_t seed);

struct ForwardState {
  std::vector<Eigen::MatrixXd> inputs;  // what each layer consumed
  Eigen::MatrixXd output;
};

ForwardState net_forward(const Network& net, const Eigen::MatrixXd& input);

struct LayerGradients {
  Eigen::MatrixXd a;  // PTC: bins x (q*p) weight grad; FC: dW
  Eigen::VectorXd b;  // FC: db
};

struct NetGradients {
  std::vector<LayerGradients> layers;
  Eigen::MatrixXd input;  // gradient w.r.t. the network input
};

NetGradients net_backward(const Network& net, const ForwardState& state,
                          const Eigen::MatrixXd& upstream);

struct LossResult {
  double value = 0.0;
  Eigen::VectorXd grad;
};

LossResult loss_softmax_ce(const Eigen::VectorXd& logits, int label);

struct TripletResult {
  double value = 0.0;
  Eigen::VectorXd g1, g2, g3;
};

// || f1 - f2 ||^2 + lambda * (mu - || f1 - f3 ||)^2 with gradients for
// all three feature vectors.
TripletResult loss_triplet(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                           const Eigen::VectorXd& f3, double lambda, double mu);

struct Dataset {
  std::vector<Eigen::MatrixXd> signals;  // each n x q
  std::vector<int> labels;

  int size() const { return static_cast<int>(signals.size()); }
};

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  int batch_size = 50;
  double learning_rate = 1e-3;
  int iterations = 5000;
  Optimizer optimizer = Optimizer::Sgd;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Fixes initialization (when the caller uses init_network with the
  // same value) and the batch sampling order.
  uint64_t seed = 1;
  int metrics_every = 100;
  // Evaluate on the first `eval_subset` items of the eval split during
  // training (0 = all); the final row always uses the full split.
  int eval_subset = 0;
  int field_set_id = 0;  // informational tag for the metrics log

  void validate() const;
};

struct MetricsRow {
  int iteration = 0;
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  std::vector<MetricsRow> metrics;
};

// Mini-batch gradient descent on softmax cross-entropy. Deterministic
// for a fixed config and initial network; aborts with a diagnostic if
// the loss turns NaN.
TrainResult train(Network& net, const Dataset& train_data,
                  const Dataset& eval_data, const TrainConfig& config);

// Round-robin training over several domains: nets[k] is the same
// network bound to domain k, train_data[k] its signals. Iteration t
// draws its batch from domain t % k, steps, and copies the updated
// parameters to every other binding, so all nets stay in lockstep.
// Metrics are evaluated on eval_data with nets[eval_domain].
TrainResult train_multi(std::vector<Network*> nets,
                        const std::vector<Dataset>& train_data,
                        const Dataset& eval_data, int eval_domain,
                        const TrainConfig& config);

// Fraction of argmax-correct predictions; `limit` > 0 restricts to the
// first `limit` items.
double evaluate(const Network& net, const Dataset& data, int limit = 0);

void save_metrics_csv(const std::string& path,
                      const std::vector<MetricsRow>& metrics);

// Binary checkpoint: magic "PTCN", version, loss head, layer list with
// shapes and weights. Banks come back unbound; call bind_network.
void save_checkpoint(const std::string& path, const Network& net);
Network load_checkpoint(const std::string& path);

}  // namespace ptc
