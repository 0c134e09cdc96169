#include "scaling/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "scaling/errors.hpp"

namespace scaling {

Eigen::VectorXd quantize_to_cover(const Eigen::VectorXd& w, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw DomainError("quantize_to_cover: epsilon must be > 0 (bypass quantization at 0)");
  }
  if (std::abs(w.norm() - 1.0) > 1e-9) throw DomainError("quantize_to_cover: w is not unit norm");
  const auto d = w.size();
  const double step = epsilon / std::sqrt(static_cast<double>(d));
  Eigen::VectorXd q(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    // Nearest grid point; exact halves go to the lower point.
    q[j] = step * std::ceil(w[j] / step - 0.5);
  }
  const double norm = q.norm();
  if (norm == 0.0) {
    // Only reachable when epsilon >= 2, where every unit vector is within
    // epsilon of w.
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e[0] = 1.0;
    return e;
  }
  return q / norm;
}

namespace {

Eigen::MatrixXd snap_rows(const ConstrainedNetwork& cnet, const GroundTruthNetwork& net,
                          double epsilon) {
  Eigen::MatrixXd rows(cnet.n, net.d);
  for (int i = 0; i < cnet.n; ++i) {
    const auto src = static_cast<Eigen::Index>(cnet.source_atom_indices[i]);
    if (epsilon > 0.0) {
      rows.row(i) = quantize_to_cover(net.atoms.row(src).transpose(), epsilon).transpose();
    } else {
      rows.row(i) = net.atoms.row(src);
    }
  }
  return rows;
}

}  // namespace

ConstrainedNetwork sample_constrained(const GroundTruthNetwork& net, int n, double epsilon,
                                      Rng& rng) {
  if (n < 1) throw DomainError("sample_constrained: n must be >= 1");
  if (!(epsilon >= 0.0)) throw DomainError("sample_constrained: epsilon must be >= 0");
  std::vector<double> cumulative(net.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    acc += net.masses[static_cast<Eigen::Index>(i)];
    cumulative[i] = acc;
  }
  ConstrainedNetwork cnet;
  cnet.n = n;
  cnet.d = net.d;
  cnet.K = net.K;
  cnet.epsilon = epsilon;
  cnet.out_signs.resize(n);
  cnet.source_atom_indices.resize(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const auto idx = static_cast<std::size_t>(it - cumulative.begin());
    cnet.source_atom_indices[i] = idx;
    cnet.out_signs[i] = net.signs[idx];
  }
  cnet.rows = snap_rows(cnet, net, epsilon);
  return cnet;
}

ConstrainedNetwork requantize(const ConstrainedNetwork& exact, const GroundTruthNetwork& net,
                              double epsilon) {
  if (!(epsilon >= 0.0)) throw DomainError("requantize: epsilon must be >= 0");
  ConstrainedNetwork out = exact;
  out.epsilon = epsilon;
  out.rows = snap_rows(exact, net, epsilon);
  return out;
}

double eval_constrained(const ConstrainedNetwork& cnet, std::span<const double> x) {
  if (static_cast<int>(x.size()) != cnet.d) {
    throw ShapeError(fmt::format("input has dimension {}, network expects {}", x.size(), cnet.d));
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), cnet.d);
  const Eigen::VectorXd pre = cnet.rows * xv;
  double acc = 0.0;
  for (int i = 0; i < cnet.n; ++i) {
    if (pre[i] > 0.0) acc += cnet.out_signs[i] * pre[i];
  }
  return std::sqrt(cnet.K + 1.0) / cnet.n * acc;
}

Eigen::VectorXd eval_constrained(const ConstrainedNetwork& cnet, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != cnet.d) {
    throw ShapeError(
        fmt::format("inputs have dimension {}, network expects {}", inputs.cols(), cnet.d));
  }
  Eigen::VectorXd signs(cnet.n);
  for (int i = 0; i < cnet.n; ++i) signs[i] = cnet.out_signs[i];
  const Eigen::MatrixXd hidden = (inputs * cnet.rows.transpose()).cwiseMax(0.0);
  return (std::sqrt(cnet.K + 1.0) / cnet.n) * (hidden * signs);
}

std::size_t distinct_sources(const ConstrainedNetwork& cnet) {
  return std::set<std::size_t>(cnet.source_atom_indices.begin(), cnet.source_atom_indices.end())
      .size();
}

nlohmann::json to_json(const ConstrainedNetwork& cnet) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < cnet.rows.rows(); ++i) {
    rows.push_back(std::vector<double>(cnet.rows.row(i).begin(), cnet.rows.row(i).end()));
  }
  return {{"n", cnet.n},
          {"d", cnet.d},
          {"K", cnet.K},
          {"epsilon", cnet.epsilon},
          {"rows", std::move(rows)},
          {"out_signs", cnet.out_signs},
          {"source_atom_indices", cnet.source_atom_indices}};
}

ConstrainedNetwork constrained_from_json(const nlohmann::json& j) {
  ConstrainedNetwork cnet;
  cnet.n = j.at("n").get<int>();
  cnet.d = j.at("d").get<int>();
  cnet.K = j.at("K").get<int>();
  cnet.epsilon = j.at("epsilon").get<double>();
  cnet.out_signs = j.at("out_signs").get<std::vector<int>>();
  cnet.source_atom_indices = j.at("source_atom_indices").get<std::vector<std::size_t>>();
  const auto& rows = j.at("rows");
  if (static_cast<int>(rows.size()) != cnet.n || static_cast<int>(cnet.out_signs.size()) != cnet.n ||
      static_cast<int>(cnet.source_atom_indices.size()) != cnet.n) {
    throw ShapeError("constrained network: list lengths must equal n");
  }
  cnet.rows.resize(cnet.n, cnet.d);
  for (int i = 0; i < cnet.n; ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (static_cast<int>(row.size()) != cnet.d) throw ShapeError("row length != d");
    for (int k = 0; k < cnet.d; ++k) cnet.rows(i, k) = row[k];
  }
  return cnet;
}

}  // namespace scaling
