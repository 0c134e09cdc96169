#include <doctest.h>

#include <cmath>
#include <vector>

#include "scaling/dgp.hpp"
#include "scaling/errors.hpp"
#include "scaling/stats.hpp"
#include "scaling/verify.hpp"

using namespace scaling;

namespace {

GroundTruthNetwork single_atom(const Eigen::VectorXd& atom, int K, int sign = 1) {
  GroundTruthNetwork net;
  net.d = static_cast<int>(atom.size());
  net.K = K;
  net.atoms = atom.transpose();
  net.masses = Eigen::VectorXd::Ones(1);
  net.signs = {sign};
  return net;
}

}  // namespace

TEST_CASE("one-dimensional ground truth has atoms on S^0") {
  Rng rng(7);
  const auto net = sample_ground_truth(1, 1, 1e-6, rng);
  for (Eigen::Index i = 0; i < net.atoms.rows(); ++i) {
    CHECK(std::abs(net.atoms(i, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(net.masses.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_NOTHROW(validate(net));
}

TEST_CASE("atom count tracks K ln(1/tau)") {
  const double expected = 100.0 * std::log(1e6);  // ~1381.6
  double total = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    total += static_cast<double>(sample_ground_truth(10, 100, 1e-6, rng).size());
  }
  const double mean = total / 100.0;
  CHECK(mean > 0.9 * expected);
  CHECK(mean < 1.1 * expected);
}

TEST_CASE("sampling is deterministic in the seed") {
  Rng a(123), b(123);
  const auto n1 = sample_ground_truth(5, 20, 1e-6, a);
  const auto n2 = sample_ground_truth(5, 20, 1e-6, b);
  CHECK(n1.atoms == n2.atoms);
  CHECK(n1.masses == n2.masses);
  CHECK(n1.signs == n2.signs);
  const auto b1 = sample_batch(n1, 50, a);
  const auto b2 = sample_batch(n2, 50, b);
  CHECK(b1.inputs == b2.inputs);
  CHECK(b1.labels == b2.labels);
}

TEST_CASE("network invariants hold across 1000 seeds") {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Rng rng(s, 99);
    const int d = 1 + static_cast<int>(s % 20);
    const int K = 1 + static_cast<int>((s * 7) % 50);
    const auto net = sample_ground_truth(d, K, 1e-6, rng);
    REQUIRE_NOTHROW(validate(net));
    REQUIRE(net.truncation_residual < 1e-6);
  }
}

TEST_CASE("truncation cap is reported") {
  Rng rng(1);
  try {
    sample_ground_truth(3, 100, 1e-6, rng, 5);
    FAIL("expected TruncationError");
  } catch (const TruncationError& e) {
    CHECK(std::string(e.what()).find("5 atoms") != std::string::npos);
  }
}

TEST_CASE("ground truth evaluation") {
  Rng rng(3);
  const auto net = sample_ground_truth(4, 10, 1e-6, rng);
  const std::vector<double> zero(4, 0.0);
  CHECK(eval_ground_truth(net, zero) == 0.0);

  Eigen::VectorXd a(3);
  a << 0.0, 0.6, 0.8;
  const auto one = single_atom(a, 1);
  CHECK(eval_ground_truth(one, std::vector<double>{0.0, 0.6, 0.8}) == doctest::Approx(std::sqrt(2.0)));

  CHECK_THROWS_AS(eval_ground_truth(net, std::vector<double>{1.0, 2.0}), ShapeError);

  // Batch and pointwise paths agree.
  const Eigen::MatrixXd x = sample_inputs(4, 10, rng);
  const Eigen::VectorXd f = eval_ground_truth(net, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd row = x.row(i).transpose();
    CHECK(f[i] == doctest::Approx(eval_ground_truth(net, std::span<const double>(row.data(), 4))));
  }
}

TEST_CASE("batches have aligned fields") {
  Rng rng(5);
  const auto net = sample_ground_truth(3, 4, 1e-6, rng);
  const auto batch = sample_batch(net, 5, rng);
  CHECK(batch.inputs.rows() == 5);
  CHECK(batch.logits.size() == 5);
  CHECK(batch.labels.size() == 5);
  CHECK_THROWS_AS(sample_batch(net, 0, rng), DomainError);

  const std::string csv = batch_to_csv(batch);
  CHECK(csv.rfind("x_1,x_2,x_3,logit,label\n", 0) == 0);
}

TEST_CASE("labels saturate for large logits") {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(2);
  a[0] = 1.0;
  const auto net = single_atom(a, 1'000'000);  // sqrt(K+1) ~ 1000
  Rng rng(11);
  const auto batch = sample_batch(net, 20'000, rng);
  int big = 0, ones = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.logits[static_cast<Eigen::Index>(i)] > 40.0) {
      ++big;
      ones += batch.labels[i];
    }
  }
  CHECK(big > 9000);
  CHECK(ones == big);
}

TEST_CASE("label frequency matches mean sigmoid (tower property)") {
  Rng rng(2024);
  const auto net = sample_ground_truth(10, 100, 1e-6, rng);
  const auto batch = sample_batch(net, 1'000'000, rng);
  std::vector<double> resid(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    resid[i] = batch.labels[i] - sigmoid(batch.logits[static_cast<Eigen::Index>(i)]);
  }
  const auto est = estimate_from_samples(resid, 0);
  CHECK(std::abs(est.mean) <= 3.0 * est.std_error);
}

TEST_CASE("moments of F at small scale") {
  NestedMc mc;
  mc.outer = 4000;
  mc.inner = 50;
  mc.seed = 17;
  const auto m = mc_ground_truth_moments(2, 2, mc);
  CHECK(std::abs(m.first.mean) <= 3.0 * m.first.std_error);
  CHECK(std::abs(m.second.mean - 0.5) <= 3.0 * m.second.std_error);
}

TEST_CASE("network JSON round trip") {
  Rng rng(8);
  auto net = sample_ground_truth(3, 5, 1e-6, rng);
  net.seed = 8;
  const auto back = ground_truth_from_json(nlohmann::json::parse(to_json(net).dump()));
  CHECK(back.atoms == net.atoms);
  CHECK(back.masses == net.masses);
  CHECK(back.signs == net.signs);
  CHECK(back.truncation_residual == net.truncation_residual);
  CHECK(back.seed == net.seed);
}
