#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "scaling/rng.hpp"

namespace scaling {

inline constexpr double kDefaultTruncationTolerance = 1e-6;
inline constexpr std::size_t kMaxAtoms = 10'000'000;

// Truncated draw of the infinite-width ground-truth network
//
//   F(x) = sqrt(K+1) * sum_w sign_w * mass_w * ReLU(w . x)
//
// where the masses come from a Dirichlet process of scale K with base
// distribution uniform on the unit sphere. Stick-breaking stops once the
// unassigned mass drops below the tolerance; the retained masses are then
// renormalized to sum to one.
struct GroundTruthNetwork {
  int d = 0;
  int K = 0;
  Eigen::MatrixXd atoms;  // one unit-norm atom per row
  Eigen::VectorXd masses;
  std::vector<int> signs;  // +1 / -1
  double truncation_residual = 0.0;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return static_cast<std::size_t>(masses.size()); }
  // sign_w * mass_w per atom.
  Eigen::VectorXd signed_masses() const;
};

// Inputs are stored one sample per row.
struct DataBatch {
  Eigen::MatrixXd inputs;
  std::vector<int> labels;  // 0 / 1
  Eigen::VectorXd logits;

  std::size_t size() const { return labels.size(); }
};

// Stick-breaking weights of a Dirichlet process with scale K, drawn until the
// remaining mass is below tau. Returned unnormalized; `residual` receives the
// leftover mass. Throws TruncationError past max_atoms.
std::vector<double> stick_breaking(double K, double tau, Rng& rng, double& residual,
                                   std::size_t max_atoms = kMaxAtoms);

// Uniform point on S^{d-1} (normalized Gaussian).
Eigen::VectorXd sample_unit_sphere(int d, Rng& rng);

GroundTruthNetwork sample_ground_truth(int d, int K, double tau, Rng& rng,
                                       std::size_t max_atoms = kMaxAtoms);

double eval_ground_truth(const GroundTruthNetwork& net, std::span<const double> x);
// Row-wise evaluation of a (count x d) input matrix.
Eigen::VectorXd eval_ground_truth(const GroundTruthNetwork& net, const Eigen::MatrixXd& inputs);

// count x d matrix of iid N(0, I_d) rows.
Eigen::MatrixXd sample_inputs(int d, std::size_t count, Rng& rng);

DataBatch sample_batch(const GroundTruthNetwork& net, std::size_t count, Rng& rng);

// Numerically stable logistic function.
double sigmoid(double x);

// Throws DomainError when an invariant listed on GroundTruthNetwork fails.
void validate(const GroundTruthNetwork& net, double tau = kDefaultTruncationTolerance);

nlohmann::json to_json(const GroundTruthNetwork& net);
GroundTruthNetwork ground_truth_from_json(const nlohmann::json& j);

// Columns x_1..x_d, logit, label.
std::string batch_to_csv(const DataBatch& batch);

}  // namespace scaling
