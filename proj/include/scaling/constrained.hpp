#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "scaling/dgp.hpp"
#include "scaling/rng.hpp"

namespace scaling {

// Width-n approximation of a ground-truth network:
//
//   F~(x) = sqrt(K+1)/n * sum_i out_sign_i * ReLU(row_i . x)
//
// Rows are atoms resampled iid from the ground-truth masses, optionally
// snapped to an epsilon-cover of the sphere. Output weights are kept as signs;
// the 1/n and sqrt(K+1) factors are applied at evaluation.
struct ConstrainedNetwork {
  int n = 0;
  int d = 0;
  int K = 0;
  double epsilon = 0.0;
  Eigen::MatrixXd rows;  // n x d
  std::vector<int> out_signs;
  std::vector<std::size_t> source_atom_indices;
};

// Nearest codeword of the implicit cover: coordinates rounded to a grid of
// step epsilon/sqrt(d) (ties toward -inf), then projected back onto the
// sphere. Guarantees ||w - q(w)|| <= epsilon. Throws DomainError when
// epsilon <= 0 or w is not unit norm within 1e-9.
Eigen::VectorXd quantize_to_cover(const Eigen::VectorXd& w, double epsilon);

ConstrainedNetwork sample_constrained(const GroundTruthNetwork& net, int n, double epsilon,
                                      Rng& rng);

// Same resampled atoms and signs, re-quantized at a different epsilon (0 keeps
// the exact atoms).
ConstrainedNetwork requantize(const ConstrainedNetwork& exact, const GroundTruthNetwork& net,
                              double epsilon);

double eval_constrained(const ConstrainedNetwork& cnet, std::span<const double> x);
Eigen::VectorXd eval_constrained(const ConstrainedNetwork& cnet, const Eigen::MatrixXd& inputs);

// Number of distinct entries in source_atom_indices.
std::size_t distinct_sources(const ConstrainedNetwork& cnet);

nlohmann::json to_json(const ConstrainedNetwork& cnet);
ConstrainedNetwork constrained_from_json(const nlohmann::json& j);

}  // namespace scaling
