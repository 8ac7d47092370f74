#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "ptc/net.hpp"

namespace ptc {

namespace {

[[noreturn]] void shape_error(size_t layer, const std::string& what) {
  throw std::invalid_argument("shape mismatch at layer " +
                              std::to_string(layer) + ": " + what);
}

// Uniform in [-scale, scale) from raw 53-bit mantissa draws, so results
// do not depend on the standard library's distribution internals.
double uniform_symmetric(std::mt19937_64& rng, double scale) {
  const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
  return (2.0 * u - 1.0) * scale;
}

struct ParamView {
  double* data;
  long size;
};

// Every learnable tensor in layer order; gradient layout matches.
std::vector<ParamView> parameter_views(Network& net) {
  std::vector<ParamView> views;
  for (auto& layer : net.layers) {
    if (auto* ptc = std::get_if<PtcLayer>(&layer)) {
      views.push_back({ptc->bank.weights.data(), ptc->bank.weights.size()});
    } else if (auto* fc = std::get_if<FcLayer>(&layer)) {
      views.push_back({fc->W.data(), fc->W.size()});
      views.push_back({fc->b.data(), fc->b.size()});
    }
  }
  return views;
}

std::vector<ParamView> gradient_views(const Network& net, NetGradients& g) {
  std::vector<ParamView> views;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    if (std::holds_alternative<PtcLayer>(net.layers[l])) {
      views.push_back({g.layers[l].a.data(), g.layers[l].a.size()});
    } else if (std::holds_alternative<FcLayer>(net.layers[l])) {
      views.push_back({g.layers[l].a.data(), g.layers[l].a.size()});
      views.push_back({g.layers[l].b.data(), g.layers[l].b.size()});
    }
  }
  return views;
}

void accumulate(NetGradients& total, const NetGradients& item) {
  if (total.layers.empty()) {
    total = item;
    return;
  }
  for (size_t l = 0; l < item.layers.size(); ++l) {
    if (item.layers[l].a.size()) total.layers[l].a += item.layers[l].a;
    if (item.layers[l].b.size()) total.layers[l].b += item.layers[l].b;
  }
}

}  // namespace

void bind_network(Network& net, const TriangleMesh& mesh,
                  const VectorFieldSet& fields, int anchor,
                  const FastMarchingOptions& patch_options) {
  for (auto& layer : net.layers)
    if (auto* ptc = std::get_if<PtcLayer>(&layer))
      bind_bank(ptc->bank, mesh, fields, anchor, patch_options);
  net.mass = mass_matrix(mesh);
}

void init_network(Network& net, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& layer : net.layers) {
    if (auto* ptc = std::get_if<PtcLayer>(&layer)) {
      const double scale =
          1.0 / std::sqrt(static_cast<double>(ptc->bank.q) * ptc->bank.bins());
      for (long c = 0; c < ptc->bank.weights.cols(); ++c)
        for (long r = 0; r < ptc->bank.weights.rows(); ++r)
          ptc->bank.weights(r, c) = uniform_symmetric(rng, scale);
    } else if (auto* fc = std::get_if<FcLayer>(&layer)) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(fc->W.cols()));
      for (long r = 0; r < fc->W.rows(); ++r)
        for (long c = 0; c < fc->W.cols(); ++c)
          fc->W(r, c) = uniform_symmetric(rng, scale);
      fc->b.setZero();
    }
  }
}

ForwardState net_forward(const Network& net, const Eigen::MatrixXd& input) {
  ForwardState state;
  state.inputs.reserve(net.layers.size());
  Eigen::MatrixXd x = input;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    state.inputs.push_back(x);
    const auto& layer = net.layers[l];
    if (const auto* ptc = std::get_if<PtcLayer>(&layer)) {
      if (!net.bound()) shape_error(l, "network not bound to a mesh");
      if (x.cols() != ptc->bank.q)
        shape_error(l, "expected " + std::to_string(ptc->bank.q) +
                           " channels, got " + std::to_string(x.cols()));
      x = ptc_forward_batched(ptc->bank, net.mass, x);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      x = x.cwiseMax(0.0);
    } else if (std::holds_alternative<GlobalPoolLayer>(layer)) {
      if (!net.bound()) shape_error(l, "network not bound to a mesh");
      if (x.rows() != net.mass.size())
        shape_error(l, "pooling expects one row per vertex");
      Eigen::MatrixXd pooled(1, x.cols());
      pooled.row(0) = (net.mass.diag.transpose() * x) / net.mass.total();
      x = pooled;
    } else {
      const auto& fc = std::get<FcLayer>(layer);
      if (x.size() != fc.W.cols())
        shape_error(l, "fully connected expects " +
                           std::to_string(fc.W.cols()) + " inputs, got " +
                           std::to_string(x.rows()) + "x" +
                           std::to_string(x.cols()));
      const Eigen::Map<const Eigen::VectorXd> flat(x.data(), x.size());
      const Eigen::VectorXd out = fc.W * flat + fc.b;
      x = out.transpose();
    }
  }
  state.output = x;
  return state;
}

NetGradients net_backward(const Network& net, const ForwardState& state,
                          const Eigen::MatrixXd& upstream) {
  NetGradients grads;
  grads.layers.resize(net.layers.size());
  Eigen::MatrixXd g = upstream;
  for (size_t il = net.layers.size(); il-- > 0;) {
    const auto& layer = net.layers[il];
    const Eigen::MatrixXd& x = state.inputs[il];
    if (const auto* ptc = std::get_if<PtcLayer>(&layer)) {
      PtcGradients pg = ptc_backward(ptc->bank, net.mass, x, g);
      grads.layers[il].a = std::move(pg.weights);
      g = std::move(pg.input);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      g = ((x.array() > 0.0).cast<double>() * g.array()).matrix();
    } else if (std::holds_alternative<GlobalPoolLayer>(layer)) {
      Eigen::MatrixXd dx(x.rows(), x.cols());
      dx = (net.mass.diag / net.mass.total()) * g.row(0);
      g = std::move(dx);
    } else {
      const auto& fc = std::get<FcLayer>(layer);
      const Eigen::Map<const Eigen::VectorXd> flat(x.data(), x.size());
      grads.layers[il].a = g.row(0).transpose() * flat.transpose();
      grads.layers[il].b = g.row(0).transpose();
      const Eigen::VectorXd dflat = fc.W.transpose() * g.row(0).transpose();
      g = Eigen::Map<const Eigen::MatrixXd>(dflat.data(), x.rows(), x.cols());
    }
  }
  grads.input = std::move(g);
  return grads;
}

LossResult loss_softmax_ce(const Eigen::VectorXd& logits, int label) {
  if (label < 0 || label >= logits.size())
    throw std::invalid_argument("loss_softmax_ce: label out of range");
  const double m = logits.maxCoeff();
  const Eigen::VectorXd e = (logits.array() - m).exp();
  const double z = e.sum();
  LossResult res;
  res.value = std::log(z) - (logits[label] - m);
  res.grad = e / z;
  res.grad[label] -= 1.0;
  return res;
}

TripletResult loss_triplet(const Eigen::VectorXd& f1, const Eigen::VectorXd& f2,
                           const Eigen::VectorXd& f3, double lambda,
                           double mu) {
  if (f1.size() != f2.size() || f1.size() != f3.size())
    throw std::invalid_argument("loss_triplet: feature dimensions differ");
  const Eigen::VectorXd d12 = f1 - f2;
  const Eigen::VectorXd d13 = f1 - f3;
  const double r = d13.norm();
  TripletResult res;
  res.value = d12.squaredNorm() + lambda * (mu - r) * (mu - r);
  res.g1 = 2.0 * d12;
  res.g2 = -2.0 * d12;
  res.g3 = Eigen::VectorXd::Zero(f1.size());
  if (r > 1e-30) {
    const Eigen::VectorXd pull = (2.0 * lambda * (mu - r) / r) * d13;
    res.g1 -= pull;
    res.g3 = pull;
  }
  return res;
}

void TrainConfig::validate() const {
  if (batch_size < 1 || iterations < 0 || !(learning_rate > 0.0) ||
      metrics_every < 1)
    throw std::invalid_argument("train config: bad hyperparameters");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0 &&
        eps > 0.0))
    throw std::invalid_argument("train config: bad Adam parameters");
}

double evaluate(const Network& net, const Dataset& data, int limit) {
  if (data.size() == 0) return 0.0;
  const int count = limit > 0 ? std::min(limit, data.size()) : data.size();
  int correct = 0;
  for (int i = 0; i < count; ++i) {
    const ForwardState state = net_forward(net, data.signals[i]);
    int arg = 0;
    state.output.row(0).maxCoeff(&arg);
    if (arg == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / count;
}

namespace {

TrainResult run_training(const std::vector<Network*>& nets,
                         const std::vector<const Dataset*>& train_data,
                         const Dataset& eval_data, int eval_domain,
                         const TrainConfig& config) {
  config.validate();
  const int domains = static_cast<int>(nets.size());
  if (domains == 0 || train_data.size() != nets.size())
    throw std::invalid_argument("train: one dataset per bound network");
  if (eval_domain < 0 || eval_domain >= domains)
    throw std::invalid_argument("train: bad eval domain");
  std::vector<std::vector<ParamView>> params;
  for (int k = 0; k < domains; ++k) {
    if (train_data[k]->size() == 0)
      throw std::invalid_argument("train: empty dataset");
    if (nets[k]->loss != LossKind::SoftmaxCrossEntropy)
      throw std::invalid_argument("train: only the classification head trains");
    params.push_back(parameter_views(*nets[k]));
    if (params[k].size() != params[0].size())
      throw std::invalid_argument("train: networks disagree in structure");
    for (size_t t = 0; t < params[k].size(); ++t)
      if (params[k][t].size != params[0][t].size)
        throw std::invalid_argument("train: networks disagree in shape");
  }

  // Distinct stream from initialization so the two never interlock.
  std::mt19937_64 batch_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<Eigen::VectorXd> adam_m, adam_v;
  if (config.optimizer == Optimizer::Adam) {
    for (const auto& view : params[0]) {
      adam_m.emplace_back(Eigen::VectorXd::Zero(view.size));
      adam_v.emplace_back(Eigen::VectorXd::Zero(view.size));
    }
  }

  TrainResult result;
  for (int iter = 1; iter <= config.iterations; ++iter) {
    const int d = (iter - 1) % domains;
    Network& net = *nets[d];
    const Dataset& data = *train_data[d];
    NetGradients total;
    double batch_loss = 0.0;
    for (int b = 0; b < config.batch_size; ++b) {
      const int idx =
          static_cast<int>(batch_rng() % static_cast<uint64_t>(data.size()));
      const ForwardState state = net_forward(net, data.signals[idx]);
      const LossResult loss = loss_softmax_ce(state.output.row(0).transpose(),
                                              data.labels[idx]);
      batch_loss += loss.value;
      NetGradients g = net_backward(net, state, loss.grad.transpose());
      accumulate(total, g);
    }
    batch_loss /= config.batch_size;
    if (!std::isfinite(batch_loss))
      throw std::runtime_error("training diverged: loss is not finite at iteration " +
                               std::to_string(iter));

    auto grads = gradient_views(net, total);
    const double inv_batch = 1.0 / config.batch_size;
    for (size_t t = 0; t < params[d].size(); ++t) {
      Eigen::Map<Eigen::VectorXd> w(params[d][t].data, params[d][t].size);
      Eigen::Map<Eigen::VectorXd> g(grads[t].data, grads[t].size);
      g *= inv_batch;
      if (config.optimizer == Optimizer::Sgd) {
        w -= config.learning_rate * g;
      } else {
        adam_m[t] = config.beta1 * adam_m[t] + (1.0 - config.beta1) * g;
        adam_v[t] =
            config.beta2 * adam_v[t] + (1.0 - config.beta2) * g.cwiseProduct(g);
        const double bc1 = 1.0 - std::pow(config.beta1, iter);
        const double bc2 = 1.0 - std::pow(config.beta2, iter);
        w.array() -= config.learning_rate * (adam_m[t].array() / bc1) /
                     ((adam_v[t].array() / bc2).sqrt() + config.eps);
      }
      // Push the step to the other bindings so every net stays current.
      for (int k = 0; k < domains; ++k)
        if (k != d)
          std::copy(params[d][t].data, params[d][t].data + params[d][t].size,
                    params[k][t].data);
    }

    if (iter % config.metrics_every == 0 || iter == config.iterations) {
      MetricsRow row;
      row.iteration = iter;
      row.loss = batch_loss;
      const int limit = iter == config.iterations ? 0 : config.eval_subset;
      row.accuracy = evaluate(*nets[eval_domain], eval_data, limit);
      result.metrics.push_back(row);
    }
  }
  return result;
}

}  // namespace

TrainResult train(Network& net, const Dataset& train_data,
                  const Dataset& eval_data, const TrainConfig& config) {
  return run_training({&net}, {&train_data}, eval_data, 0, config);
}

TrainResult train_multi(std::vector<Network*> nets,
                        const std::vector<Dataset>& train_data,
                        const Dataset& eval_data, int eval_domain,
                        const TrainConfig& config) {
  std::vector<const Dataset*> views;
  views.reserve(train_data.size());
  for (const auto& d : train_data) views.push_back(&d);
  return run_training(nets, views, eval_data, eval_domain, config);
}

void save_metrics_csv(const std::string& path,
                      const std::vector<MetricsRow>& metrics) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration,loss,accuracy\n";
  char buf[80];
  for (const auto& row : metrics) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", row.iteration,
                  row.loss, row.accuracy);
    out << buf;
  }
}

namespace {

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  write_u64(out, m.rows());
  write_u64(out, m.cols());
  for (long c = 0; c < m.cols(); ++c)
    for (long r = 0; r < m.rows(); ++r) write_f64(out, m(r, c));
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  const uint64_t rows = read_u64(in), cols = read_u64(in);
  if (!in || rows > (1ull << 32) || cols > (1ull << 32))
    throw std::runtime_error("checkpoint: bad matrix header");
  Eigen::MatrixXd m(rows, cols);
  for (long c = 0; c < m.cols(); ++c)
    for (long r = 0; r < m.rows(); ++r) m(r, c) = read_f64(in);
  if (!in) throw std::runtime_error("checkpoint: truncated matrix");
  return m;
}

enum : uint32_t { kPtc = 1, kRelu = 2, kPool = 3, kFc = 4 };

}  // namespace

void save_checkpoint(const std::string& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write("PTCN", 4);
  write_u32(out, 1);  // version
  write_u32(out, net.loss == LossKind::SoftmaxCrossEntropy ? 0 : 1);
  write_f64(out, net.triplet_lambda);
  write_f64(out, net.triplet_margin);
  write_u64(out, net.layers.size());
  for (const auto& layer : net.layers) {
    if (const auto* ptc = std::get_if<PtcLayer>(&layer)) {
      write_u32(out, kPtc);
      write_u32(out, ptc->bank.q);
      write_u32(out, ptc->bank.p);
      write_u32(out, ptc->bank.n_r);
      write_u32(out, ptc->bank.n_theta);
      write_f64(out, ptc->bank.delta);
      for (int f : ptc->bank.filter_to_field) write_u32(out, f);
      write_matrix(out, ptc->bank.weights);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      write_u32(out, kRelu);
    } else if (std::holds_alternative<GlobalPoolLayer>(layer)) {
      write_u32(out, kPool);
    } else {
      const auto& fc = std::get<FcLayer>(layer);
      write_u32(out, kFc);
      write_matrix(out, fc.W);
      write_u64(out, fc.b.size());
      for (long i = 0; i < fc.b.size(); ++i) write_f64(out, fc.b[i]);
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PTCN", 4) != 0)
    throw std::runtime_error(path + ": not a checkpoint (bad magic)");
  if (read_u32(in) != 1)
    throw std::runtime_error(path + ": unsupported checkpoint version");
  Network net;
  net.loss = read_u32(in) == 0 ? LossKind::SoftmaxCrossEntropy
                               : LossKind::Triplet;
  net.triplet_lambda = read_f64(in);
  net.triplet_margin = read_f64(in);
  const uint64_t count = read_u64(in);
  if (!in || count > 1024)
    throw std::runtime_error(path + ": bad layer count");
  for (uint64_t l = 0; l < count; ++l) {
    const uint32_t kind = read_u32(in);
    if (kind == kPtc) {
      const uint32_t q = read_u32(in), p = read_u32(in);
      const uint32_t n_r = read_u32(in), n_theta = read_u32(in);
      const double delta = read_f64(in);
      std::vector<int> f2f(p);
      for (auto& f : f2f) f = static_cast<int>(read_u32(in));
      FilterBank bank = make_filter_bank(static_cast<int>(q),
                                         static_cast<int>(p), delta,
                                         static_cast<int>(n_r),
                                         static_cast<int>(n_theta), f2f);
      bank.weights = read_matrix(in);
      bank.validate();
      net.layers.push_back(PtcLayer{std::move(bank)});
    } else if (kind == kRelu) {
      net.layers.push_back(ReluLayer{});
    } else if (kind == kPool) {
      net.layers.push_back(GlobalPoolLayer{});
    } else if (kind == kFc) {
      FcLayer fc;
      fc.W = read_matrix(in);
      const uint64_t bs = read_u64(in);
      fc.b.resize(bs);
      for (uint64_t i = 0; i < bs; ++i) fc.b[i] = read_f64(in);
      net.layers.push_back(std::move(fc));
    } else {
      throw std::runtime_error(path + ": unknown layer kind");
    }
  }
  if (!in) throw std::runtime_error(path + ": truncated checkpoint");
  return net;
}

}  // namespace ptc
