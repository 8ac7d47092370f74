#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "parallel_for.hpp"
#include "ptc/conv.hpp"

namespace ptc {

namespace {

void check_bound(const FilterBank& bank) {
  if (!bank.bound())
    throw std::logic_error(
        "filter bank has no forward cache: bind_bank was never called");
}

void check_shapes(const FilterBank& bank, const MassMatrix& M,
                  const Eigen::MatrixXd& F) {
  const int n = bank.bases[bank.filter_to_field[0]].n;
  if (M.size() != n)
    throw std::invalid_argument("mass matrix does not match bound mesh");
  if (F.rows() != n || F.cols() != bank.q)
    throw std::invalid_argument(
        "signal shape " + std::to_string(F.rows()) + "x" +
        std::to_string(F.cols()) + " does not match bank (" +
        std::to_string(n) + "x" + std::to_string(bank.q) + ")");
}

// Gathered contraction panel for one center in one field's basis:
// Gamma(b, i) = sum over neighborhood entries and their taps of
// tap_weight * Z(neighbor, i).
void gather_panel(const KernelBasis& basis, const TapTable& table, int x,
                  const Eigen::MatrixXd& Z, Eigen::MatrixXd& gamma) {
  gamma.setZero();
  for (int e = basis.offsets[x]; e < basis.offsets[x + 1]; ++e) {
    const int y = basis.neighbors[e];
    for (int t = table.entry_offsets[e]; t < table.entry_offsets[e + 1]; ++t)
      gamma.row(table.tap_bin[t]) += table.tap_weight[t] * Z.row(y);
  }
}

}  // namespace

void Signal::validate() const {
  if (!values.allFinite())
    throw std::invalid_argument("signal contains non-finite values");
  if (!channel_names.empty() &&
      channel_names.size() != static_cast<size_t>(values.cols()))
    throw std::invalid_argument("signal channel names do not match channels");
}

Eigen::VectorXd ptc_apply(const KernelMatrix& K, const MassMatrix& M,
                          const Eigen::VectorXd& f) {
  if (K.K.rows() != f.size() || M.size() != f.size())
    throw std::invalid_argument("ptc_apply: dimension mismatch");
  return K.K.transpose() * M.diag.cwiseProduct(f);
}

Signal ptc_apply(const KernelMatrix& K, const MassMatrix& M, const Signal& f) {
  if (f.channels() != 1)
    throw std::invalid_argument("ptc_apply: expects a single-channel signal");
  Signal out;
  out.values = ptc_apply(K, M, Eigen::VectorXd(f.values.col(0)));
  out.channel_names = f.channel_names;
  return out;
}

void FilterBank::validate() const {
  if (q < 1 || p < 1)
    throw std::invalid_argument("filter bank: p and q must be >= 1");
  if (n_r < 1 || n_theta < 1 || !(delta > 0.0))
    throw std::invalid_argument("filter bank: bad kernel grid");
  if (weights.rows() != bins() || weights.cols() != q * p)
    throw std::invalid_argument("filter bank: weight shape mismatch");
  if (!weights.allFinite())
    throw std::invalid_argument("filter bank: weights must be finite");
  if (filter_to_field.size() != static_cast<size_t>(p))
    throw std::invalid_argument("filter bank: need one field per filter");
}

KernelTemplate FilterBank::filter_template(int i, int j) const {
  KernelTemplate t;
  t.anchor = bound() ? bases[filter_to_field[j]].anchor : 0;
  t.delta = delta;
  t.n_r = n_r;
  t.n_theta = n_theta;
  t.weights = weights.col(weight_col(i, j));
  return t;
}

FilterBank make_filter_bank(int q, int p, double delta, int n_r, int n_theta,
                            std::vector<int> filter_to_field) {
  FilterBank bank;
  bank.q = q;
  bank.p = p;
  bank.delta = delta;
  bank.n_r = n_r;
  bank.n_theta = n_theta;
  bank.weights = Eigen::MatrixXd::Zero(n_r * n_theta, q * p);
  bank.filter_to_field = std::move(filter_to_field);
  bank.validate();
  return bank;
}

void bind_bank(FilterBank& bank, const TriangleMesh& mesh,
               const VectorFieldSet& fields, int anchor,
               const FastMarchingOptions& patch_options) {
  bank.validate();
  const std::set<int> used(bank.filter_to_field.begin(),
                           bank.filter_to_field.end());
  for (int f : used)
    if (f < 0 || f >= fields.field_count())
      throw std::invalid_argument("bind_bank: filter references missing field " +
                                  std::to_string(f));
  bank.bases.assign(fields.field_count(), KernelBasis{});
  bank.tables.assign(fields.field_count(), TapTable{});
  for (int f : used) {
    const FrameField frames = build_frames(mesh, fields.fields[f]);
    bank.bases[f] = build_basis(mesh, frames, fields.fields[f], anchor,
                                bank.delta, bank.n_r, bank.n_theta,
                                patch_options);
    bank.tables[f] = make_tap_table(bank.bases[f]);
  }
}

Eigen::MatrixXd ptc_forward_batched(const FilterBank& bank,
                                    const MassMatrix& M,
                                    const Eigen::MatrixXd& F) {
  check_bound(bank);
  check_shapes(bank, M, F);
  const int n = static_cast<int>(F.rows());
  const Eigen::MatrixXd Z = M.diag.asDiagonal() * F;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, bank.p);

  // Filters grouped by field so each panel is gathered once per center.
  std::vector<std::vector<int>> by_field(bank.bases.size());
  for (int j = 0; j < bank.p; ++j)
    by_field[bank.filter_to_field[j]].push_back(j);

  Eigen::MatrixXd gamma(bank.bins(), bank.q);
  for (int x = 0; x < n; ++x) {
    for (size_t f = 0; f < by_field.size(); ++f) {
      if (by_field[f].empty()) continue;
      gather_panel(bank.bases[f], bank.tables[f], x, Z, gamma);
      for (int j : by_field[f])
        for (int i = 0; i < bank.q; ++i)
          out(x, j) += bank.weights.col(bank.weight_col(i, j)).dot(gamma.col(i));
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> ptc_forward_batched(
    const FilterBank& bank, const MassMatrix& M,
    const std::vector<Eigen::MatrixXd>& batch) {
  std::vector<Eigen::MatrixXd> out(batch.size());
  detail::parallel_for(static_cast<int>(batch.size()), [&](int b) {
    out[b] = ptc_forward_batched(bank, M, batch[b]);
  });
  return out;
}

PtcGradients ptc_backward(const FilterBank& bank, const MassMatrix& M,
                          const Eigen::MatrixXd& F, const Eigen::MatrixXd& G) {
  check_bound(bank);
  check_shapes(bank, M, F);
  const int n = static_cast<int>(F.rows());
  if (G.rows() != n || G.cols() != bank.p)
    throw std::invalid_argument("ptc_backward: upstream gradient shape");
  const Eigen::MatrixXd Z = M.diag.asDiagonal() * F;

  std::vector<std::vector<int>> by_field(bank.bases.size());
  for (int j = 0; j < bank.p; ++j)
    by_field[bank.filter_to_field[j]].push_back(j);

  PtcGradients grads;
  grads.weights = Eigen::MatrixXd::Zero(bank.bins(), bank.q * bank.p);
  Eigen::MatrixXd dZ = Eigen::MatrixXd::Zero(n, bank.q);
  Eigen::MatrixXd gamma(bank.bins(), bank.q);
  Eigen::MatrixXd spread(bank.bins(), bank.q);
  for (int x = 0; x < n; ++x) {
    for (size_t f = 0; f < by_field.size(); ++f) {
      if (by_field[f].empty()) continue;
      const KernelBasis& basis = bank.bases[f];
      const TapTable& table = bank.tables[f];
      gather_panel(basis, table, x, Z, gamma);
      // spread(b, i) = sum_j G(x, j) w_ij[b]: what each gathered sample
      // feeds back through, shared by all entries of this center.
      spread.setZero();
      for (int j : by_field[f]) {
        const double gxj = G(x, j);
        if (gxj == 0.0) continue;
        for (int i = 0; i < bank.q; ++i) {
          grads.weights.col(bank.weight_col(i, j)) += gxj * gamma.col(i);
          spread.col(i) += gxj * bank.weights.col(bank.weight_col(i, j));
        }
      }
      for (int e = basis.offsets[x]; e < basis.offsets[x + 1]; ++e) {
        const int y = basis.neighbors[e];
        for (int t = table.entry_offsets[e]; t < table.entry_offsets[e + 1];
             ++t)
          dZ.row(y) += table.tap_weight[t] * spread.row(table.tap_bin[t]);
      }
    }
  }
  grads.input = M.diag.asDiagonal() * dZ;
  return grads;
}

PtcBatchGradients ptc_backward_batch(
    const FilterBank& bank, const MassMatrix& M,
    const std::vector<Eigen::MatrixXd>& batch,
    const std::vector<Eigen::MatrixXd>& upstream) {
  if (batch.size() != upstream.size())
    throw std::invalid_argument("ptc_backward_batch: batch size mismatch");
  std::vector<PtcGradients> per_item(batch.size());
  detail::parallel_for(static_cast<int>(batch.size()), [&](int b) {
    per_item[b] = ptc_backward(bank, M, batch[b], upstream[b]);
  });
  PtcBatchGradients out;
  out.weights = Eigen::MatrixXd::Zero(bank.bins(), bank.q * bank.p);
  out.inputs.resize(batch.size());
  for (size_t b = 0; b < batch.size(); ++b) {  // fixed order: deterministic
    out.weights += per_item[b].weights;
    out.inputs[b] = std::move(per_item[b].input);
  }
  return out;
}

void save_signal_csv(const std::string& path, const Signal& signal) {
  signal.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "vertex";
  for (int c = 0; c < signal.channels(); ++c) {
    out << ",";
    if (!signal.channel_names.empty())
      out << signal.channel_names[c];
    else
      out << "c" << c;
  }
  out << "\n";
  char buf[40];
  for (int v = 0; v < signal.vertices(); ++v) {
    out << v;
    for (int c = 0; c < signal.channels(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", signal.values(v, c));
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Signal load_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty signal file");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string tok;
    bool first = true;
    while (std::getline(ss, tok, ',')) {
      if (first)
        first = false;  // "vertex" column
      else
        names.push_back(tok);
    }
  }
  const int q = static_cast<int>(names.size());
  if (q == 0) throw std::runtime_error(path + ": no channel columns");
  std::vector<std::pair<int, std::vector<double>>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    if (!std::getline(ss, tok, ','))
      throw std::runtime_error(path + ": bad row");
    std::pair<int, std::vector<double>> row;
    row.first = std::stoi(tok);
    while (std::getline(ss, tok, ',')) row.second.push_back(std::stod(tok));
    if (static_cast<int>(row.second.size()) != q)
      throw std::runtime_error(path + ": row has wrong channel count");
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  Signal signal;
  signal.channel_names = names;
  signal.values.resize(n, q);
  std::vector<char> seen(n, 0);
  for (const auto& [v, vals] : rows) {
    if (v < 0 || v >= n || seen[v])
      throw std::runtime_error(path + ": vertex ids must cover 0.." +
                               std::to_string(n - 1) + " exactly once");
    seen[v] = 1;
    for (int c = 0; c < q; ++c) signal.values(v, c) = vals[c];
  }
  return signal;
}

void save_signal_binary(const std::string& path, const Signal& signal) {
  signal.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const char magic[4] = {'P', 'T', 'C', 'S'};
  out.write(magic, 4);
  const uint64_t n = signal.vertices(), q = signal.channels();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&q), 8);
  for (int v = 0; v < signal.vertices(); ++v)
    for (int c = 0; c < signal.channels(); ++c) {
      const double d = signal.values(v, c);
      out.write(reinterpret_cast<const char*>(&d), 8);
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Signal load_signal_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "PTCS", 4) != 0)
    throw std::runtime_error(path + ": not a signal file (bad magic)");
  uint64_t n = 0, q = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&q), 8);
  if (!in || n == 0 || q == 0 || n > (1ull << 32) || q > (1ull << 20))
    throw std::runtime_error(path + ": bad signal header");
  Signal signal;
  signal.values.resize(static_cast<int>(n), static_cast<int>(q));
  for (uint64_t v = 0; v < n; ++v)
    for (uint64_t c = 0; c < q; ++c) {
      double d;
      in.read(reinterpret_cast<char*>(&d), 8);
      if (!in) throw std::runtime_error(path + ": truncated signal data");
      signal.values(static_cast<int>(v), static_cast<int>(c)) = d;
    }
  return signal;
}

}  // namespace ptc
