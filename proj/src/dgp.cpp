#include "scaling/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "scaling/errors.hpp"

namespace scaling {

Eigen::VectorXd GroundTruthNetwork::signed_masses() const {
  Eigen::VectorXd out(masses.size());
  for (Eigen::Index i = 0; i < masses.size(); ++i) out[i] = signs[i] * masses[i];
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> stick_breaking(double K, double tau, Rng& rng, double& residual,
                                   std::size_t max_atoms) {
  if (!(K > 0.0)) throw DomainError("stick_breaking: K must be positive");
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("stick_breaking: tau must lie in (0, 1)");
  std::vector<double> weights;
  residual = 1.0;
  while (residual >= tau) {
    if (weights.size() >= max_atoms) {
      throw TruncationError(fmt::format(
          "stick-breaking exceeded the cap of {} atoms with residual mass {:.3g} >= tau {:.3g}",
          max_atoms, residual, tau));
    }
    const double v = rng.beta_one(K);
    weights.push_back(v * residual);
    residual *= 1.0 - v;
  }
  return weights;
}

Eigen::VectorXd sample_unit_sphere(int d, Rng& rng) {
  Eigen::VectorXd v(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int j = 0; j < d; ++j) v[j] = rng.normal();
    norm = v.norm();
  }
  return v / norm;
}

GroundTruthNetwork sample_ground_truth(int d, int K, double tau, Rng& rng,
                                       std::size_t max_atoms) {
  if (d < 1) throw DomainError("sample_ground_truth: d must be >= 1");
  if (K < 1) throw DomainError("sample_ground_truth: K must be >= 1");
  GroundTruthNetwork net;
  net.d = d;
  net.K = K;
  double residual = 1.0;
  const std::vector<double> weights = stick_breaking(K, tau, rng, residual, max_atoms);
  const auto m = static_cast<Eigen::Index>(weights.size());
  net.atoms.resize(m, d);
  net.masses.resize(m);
  net.signs.resize(weights.size());
  double kept = 0.0;
  for (double w : weights) kept += w;
  for (Eigen::Index i = 0; i < m; ++i) {
    net.atoms.row(i) = sample_unit_sphere(d, rng).transpose();
    net.signs[i] = rng.coin() ? 1 : -1;
    net.masses[i] = weights[i] / kept;
  }
  net.truncation_residual = residual;
  return net;
}

double eval_ground_truth(const GroundTruthNetwork& net, std::span<const double> x) {
  if (static_cast<int>(x.size()) != net.d) {
    throw ShapeError(fmt::format("input has dimension {}, network expects {}", x.size(), net.d));
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), net.d);
  const Eigen::VectorXd pre = net.atoms * xv;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pre.size(); ++i) {
    if (pre[i] > 0.0) acc += net.signs[i] * net.masses[i] * pre[i];
  }
  return std::sqrt(net.K + 1.0) * acc;
}

Eigen::VectorXd eval_ground_truth(const GroundTruthNetwork& net, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != net.d) {
    throw ShapeError(
        fmt::format("inputs have dimension {}, network expects {}", inputs.cols(), net.d));
  }
  // Row blocks keep the hidden-activation buffer small for large batches.
  constexpr Eigen::Index kBlock = 4096;
  const Eigen::VectorXd weights = std::sqrt(net.K + 1.0) * net.signed_masses();
  Eigen::VectorXd out(inputs.rows());
  Eigen::MatrixXd hidden;
  for (Eigen::Index start = 0; start < inputs.rows(); start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, inputs.rows() - start);
    hidden.noalias() = inputs.middleRows(start, rows) * net.atoms.transpose();
    out.segment(start, rows).noalias() = hidden.cwiseMax(0.0) * weights;
  }
  return out;
}

Eigen::MatrixXd sample_inputs(int d, std::size_t count, Rng& rng) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(count), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  }
  return x;
}

DataBatch sample_batch(const GroundTruthNetwork& net, std::size_t count, Rng& rng) {
  if (count < 1) throw DomainError("sample_batch: count must be >= 1");
  DataBatch batch;
  batch.inputs = sample_inputs(net.d, count, rng);
  batch.logits = eval_ground_truth(net, batch.inputs);
  batch.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    batch.labels[i] = rng.uniform() < sigmoid(batch.logits[static_cast<Eigen::Index>(i)]) ? 1 : 0;
  }
  return batch;
}

void validate(const GroundTruthNetwork& net, double tau) {
  const auto m = net.masses.size();
  if (m < 1 || net.atoms.rows() != m || static_cast<Eigen::Index>(net.signs.size()) != m) {
    throw DomainError("ground truth: atoms, masses and signs must have equal nonzero length");
  }
  if (net.atoms.cols() != net.d) throw DomainError("ground truth: atom dimension != d");
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::abs(net.atoms.row(i).norm() - 1.0) > 1e-12) {
      throw DomainError(fmt::format("ground truth: atom {} is not unit norm", i));
    }
    if (!(net.masses[i] > 0.0)) throw DomainError(fmt::format("ground truth: mass {} <= 0", i));
    if (net.signs[i] != 1 && net.signs[i] != -1) {
      throw DomainError(fmt::format("ground truth: sign {} not in {{-1, +1}}", i));
    }
    total += net.masses[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError(fmt::format("ground truth: masses sum to {:.17g}", total));
  }
  if (!(net.truncation_residual >= 0.0 && net.truncation_residual < tau)) {
    throw DomainError("ground truth: truncation residual outside [0, tau)");
  }
}

nlohmann::json to_json(const GroundTruthNetwork& net) {
  nlohmann::json atoms = nlohmann::json::array();
  for (Eigen::Index i = 0; i < net.atoms.rows(); ++i) {
    std::vector<double> row(net.atoms.row(i).begin(), net.atoms.row(i).end());
    atoms.push_back(row);
  }
  nlohmann::json j;
  j["d"] = net.d;
  j["K"] = net.K;
  j["atoms"] = std::move(atoms);
  j["masses"] = std::vector<double>(net.masses.begin(), net.masses.end());
  j["signs"] = net.signs;
  j["truncation_residual"] = net.truncation_residual;
  j["seed"] = net.seed ? nlohmann::json(*net.seed) : nlohmann::json(nullptr);
  return j;
}

GroundTruthNetwork ground_truth_from_json(const nlohmann::json& j) {
  GroundTruthNetwork net;
  net.d = j.at("d").get<int>();
  net.K = j.at("K").get<int>();
  const auto& atoms = j.at("atoms");
  const auto masses = j.at("masses").get<std::vector<double>>();
  net.signs = j.at("signs").get<std::vector<int>>();
  net.atoms.resize(static_cast<Eigen::Index>(atoms.size()), net.d);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto row = atoms[i].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != net.d) throw ShapeError("atom row length != d");
    for (int k = 0; k < net.d; ++k) net.atoms(static_cast<Eigen::Index>(i), k) = row[k];
  }
  net.masses = Eigen::Map<const Eigen::VectorXd>(masses.data(),
                                                 static_cast<Eigen::Index>(masses.size()));
  net.truncation_residual = j.at("truncation_residual").get<double>();
  if (j.contains("seed") && !j["seed"].is_null()) net.seed = j["seed"].get<std::uint64_t>();
  return net;
}

std::string batch_to_csv(const DataBatch& batch) {
  std::string out;
  const auto d = batch.inputs.cols();
  for (Eigen::Index k = 0; k < d; ++k) out += fmt::format("x_{},", k + 1);
  out += "logit,label\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index k = 0; k < d; ++k) out += fmt::format("{:.17g},", batch.inputs(r, k));
    out += fmt::format("{:.17g},{}\n", batch.logits[r], batch.labels[i]);
  }
  return out;
}

}  // namespace scaling
