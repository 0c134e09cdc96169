#include "scaling/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "scaling/dgp.hpp"
#include "scaling/errors.hpp"
#include "scaling/parallel.hpp"
#include "scaling/verify.hpp"

namespace scaling {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

std::vector<double> dirichlet_multinomial_prior(const HypothesisSpace& space, double scale) {
  const auto m = static_cast<int>(space.codebook.rows());
  const double alpha = scale / m;
  const double log_norm = std::lgamma(scale) - std::lgamma(scale + space.n);
  std::vector<double> prior(space.size());
  for (std::size_t h = 0; h < space.size(); ++h) {
    std::vector<int> count(static_cast<std::size_t>(m), 0);
    std::vector<int> sign(static_cast<std::size_t>(m), 0);
    bool consistent = true;
    for (int i = 0; i < space.n; ++i) {
      const auto r = static_cast<std::size_t>(space.slot_rows[h][i]);
      const int s = space.slot_signs[h][i];
      if (count[r] > 0 && sign[r] != s) consistent = false;
      ++count[r];
      sign[r] = s;
    }
    if (!consistent) continue;
    double lp = log_norm;
    int distinct = 0;
    for (int c : count) {
      if (c == 0) continue;
      ++distinct;
      lp += std::lgamma(alpha + c) - std::lgamma(alpha);
    }
    prior[h] = std::exp(lp - distinct * std::log(2.0));
  }
  double total = 0.0;
  for (double p : prior) total += p;
  for (double& p : prior) p /= total;
  return prior;
}

// Logits of every hypothesis at x, through the shared codebook projections.
void hypothesis_logits(const HypothesisSpace& space, const Eigen::VectorXd& x,
                       std::vector<double>& out) {
  const Eigen::VectorXd hidden = (space.codebook * x).cwiseMax(0.0);
  const double scale = std::sqrt(space.K + 1.0) / space.n;
  out.resize(space.size());
  for (std::size_t h = 0; h < space.size(); ++h) {
    double acc = 0.0;
    for (int i = 0; i < space.n; ++i) acc += space.slot_signs[h][i] * hidden[space.slot_rows[h][i]];
    out[h] = scale * acc;
  }
}

// Truth is either an external evaluator or a hypothesis of the space.
struct Truth {
  const Evaluator* evaluator = nullptr;
  std::optional<std::size_t> hypothesis;
};

TrajectoryResult trajectory(const HypothesisSpace& space, const Truth& truth, int T, Rng& rng,
                            const Evaluator* comparator, std::optional<std::size_t> tracked) {
  if (T < 1) throw DomainError("run_trajectory: T must be >= 1");
  const std::size_t H = space.size();
  std::vector<double> log_post(H);
  for (std::size_t h = 0; h < H; ++h) log_post[h] = space.prior[h] > 0.0 ? std::log(space.prior[h]) : kNegInf;
  std::vector<double> post = space.prior;
  std::vector<double> logits;

  TrajectoryResult result;
  result.per_step_reducible_nats.reserve(static_cast<std::size_t>(T));
  Eigen::VectorXd x(space.d);
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < space.d; ++j) x[j] = rng.normal();
    hypothesis_logits(space, x, logits);
    const double f = truth.hypothesis ? logits[*truth.hypothesis]
                                      : (*truth.evaluator)(std::span<const double>(x.data(), space.d));

    // Predictive mixture P~_t(Y = 1) and P~_t(Y = 0), in log space so that a
    // posterior concentrated on the truth gives exactly zero divergence.
    double max1 = kNegInf;
    double max0 = kNegInf;
    for (std::size_t h = 0; h < H; ++h) {
      if (log_post[h] == kNegInf) continue;
      max1 = std::max(max1, log_post[h] + log_sigmoid(logits[h]));
      max0 = std::max(max0, log_post[h] + log_sigmoid(-logits[h]));
    }
    double s1 = 0.0;
    double s0 = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
      if (log_post[h] == kNegInf) continue;
      s1 += std::exp(log_post[h] + log_sigmoid(logits[h]) - max1);
      s0 += std::exp(log_post[h] + log_sigmoid(-logits[h]) - max0);
    }
    const double log_q1 = max1 + std::log(s1);
    const double log_q0 = max0 + std::log(s0);
    const double p1 = sigmoid(f);
    const double p0 = sigmoid(-f);
    double kl = 0.0;
    if (p1 > 0.0) kl += p1 * (log_sigmoid(f) - log_q1);
    if (p0 > 0.0) kl += p0 * (log_sigmoid(-f) - log_q0);
    result.per_step_reducible_nats.push_back(std::max(kl, 0.0));
    if (comparator) {
      result.comparator_nats.push_back(
          kl_bernoulli_sigmoid(f, (*comparator)(std::span<const double>(x.data(), space.d))));
    }

    const bool y = rng.uniform() < p1;
    double max_lp = kNegInf;
    for (std::size_t h = 0; h < H; ++h) {
      if (log_post[h] == kNegInf) continue;
      log_post[h] += log_sigmoid(y ? logits[h] : -logits[h]);
      max_lp = std::max(max_lp, log_post[h]);
    }
    if (!std::isfinite(max_lp)) {
      throw NumericError(fmt::format("posterior underflow at step {}", t));
    }
    double z = 0.0;
    for (std::size_t h = 0; h < H; ++h) z += std::exp(log_post[h] - max_lp);
    const double log_z = max_lp + std::log(z);
    double total = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
      log_post[h] -= log_z;
      post[h] = std::exp(log_post[h]);
      total += post[h];
    }
    if (std::abs(total - 1.0) > 1e-10) {
      throw NumericError(fmt::format("posterior normalization error {:.3g} at step {}", total - 1.0, t));
    }
    if (tracked) result.truth_posterior.push_back(post[*tracked]);
  }
  result.cumulative_mean_nats = pairwise_sum(result.per_step_reducible_nats) / T;
  result.posterior_final = std::move(post);
  return result;
}

std::size_t sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace

HypothesisSpace build_tiny_space(int d, int K, const Eigen::MatrixXd& codebook, int n,
                                 const PriorSpec& prior) {
  if (d < 1 || K < 1 || n < 1) throw DomainError("build_tiny_space: d, K, n must be >= 1");
  if (codebook.rows() < 1 || codebook.cols() != d) {
    throw ShapeError("build_tiny_space: codebook must be a nonempty m x d matrix");
  }
  for (Eigen::Index r = 0; r < codebook.rows(); ++r) {
    if (std::abs(codebook.row(r).norm() - 1.0) > 1e-9) {
      throw DomainError(fmt::format("build_tiny_space: codebook row {} is not unit norm", r));
    }
  }
  const auto base = static_cast<std::size_t>(2 * codebook.rows());
  std::size_t size = 1;
  for (int i = 0; i < n; ++i) {
    if (size > kMaxHypotheses / base + 1) {
      size = kMaxHypotheses + 1;
      break;
    }
    size *= base;
  }
  if (size > kMaxHypotheses) {
    throw SizeError(fmt::format("hypothesis space (2*{})^{} exceeds the cap of {}", codebook.rows(),
                                n, kMaxHypotheses));
  }

  HypothesisSpace space;
  space.d = d;
  space.K = K;
  space.n = n;
  space.codebook = codebook;
  space.hypotheses.reserve(size);
  space.slot_rows.reserve(size);
  space.slot_signs.reserve(size);
  for (std::size_t h = 0; h < size; ++h) {
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::vector<int> signs(static_cast<std::size_t>(n));
    std::size_t rest = h;
    for (int i = n - 1; i >= 0; --i) {
      const std::size_t digit = rest % base;
      rest /= base;
      rows[i] = static_cast<int>(digit / 2);
      signs[i] = digit % 2 == 0 ? 1 : -1;
    }
    ConstrainedNetwork c;
    c.n = n;
    c.d = d;
    c.K = K;
    c.rows.resize(n, d);
    for (int i = 0; i < n; ++i) {
      c.rows.row(i) = codebook.row(rows[i]);
      c.source_atom_indices.push_back(static_cast<std::size_t>(rows[i]));
    }
    c.out_signs = signs;
    space.hypotheses.push_back(std::move(c));
    space.slot_rows.push_back(std::move(rows));
    space.slot_signs.push_back(std::move(signs));
  }

  if (std::holds_alternative<UniformPrior>(prior)) {
    space.prior.assign(size, 1.0 / static_cast<double>(size));
  } else if (const auto* dm = std::get_if<DirichletMultinomialPrior>(&prior)) {
    if (!(dm->K > 0.0)) throw DomainError("build_tiny_space: Dirichlet scale must be > 0");
    space.dp_scale = dm->K;
    space.prior = dirichlet_multinomial_prior(space, dm->K);
  } else {
    const auto& p = std::get<std::vector<double>>(prior);
    if (p.size() != size) {
      throw ShapeError(fmt::format("prior has {} entries, space has {}", p.size(), size));
    }
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) throw DomainError("build_tiny_space: prior entries must be >= 0");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("build_tiny_space: prior must sum to 1");
    space.prior = p;
  }
  return space;
}

HypothesisSpace restrict_to(const HypothesisSpace& space, std::size_t index) {
  if (index >= space.size()) throw DomainError("restrict_to: index out of range");
  HypothesisSpace out;
  out.d = space.d;
  out.K = space.K;
  out.n = space.n;
  out.codebook = space.codebook;
  out.hypotheses = {space.hypotheses[index]};
  out.slot_rows = {space.slot_rows[index]};
  out.slot_signs = {space.slot_signs[index]};
  out.prior = {1.0};
  out.truth_index = 0;
  return out;
}

std::size_t hypothesis_index(const HypothesisSpace& space, std::span<const int> rows,
                             std::span<const int> signs) {
  const auto base = static_cast<std::size_t>(2 * space.codebook.rows());
  std::size_t h = 0;
  for (int i = 0; i < space.n; ++i) h = h * base + static_cast<std::size_t>(2 * rows[i] + (signs[i] > 0 ? 0 : 1));
  return h;
}

double exact_entropy(const HypothesisSpace& space) {
  double h = 0.0;
  for (double p : space.prior) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

TrajectoryResult run_trajectory(const HypothesisSpace& space, const Evaluator& truth, int T,
                                Rng& rng, const Evaluator* comparator) {
  return trajectory(space, Truth{&truth, std::nullopt}, T, rng, comparator, space.truth_index);
}

const ReducibleLossReport& ReducibleLossReport::require() const {
  if (!pass) {
    throw LemmaViolation(fmt::format(
        "reducible loss {:.6g} (stderr {:.3g}, {} trajectories, T = {}) exceeds bound {:.6g} + 3 stderr",
        loss.mean, margin_stderr, loss.samples, T, bound));
  }
  return *this;
}

ReducibleLossReport estimate_reducible_loss(const HypothesisSpace& space, TruthMode mode, int T,
                                            std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1000) throw DomainError("estimate_reducible_loss: trials must be >= 1000");
  if (T < 1) throw DomainError("estimate_reducible_loss: T must be >= 1");
  if (mode == TruthMode::Singleton) {
    throw DomainError("estimate_reducible_loss: restrict the space for singleton runs");
  }
  const bool coupled = mode == TruthMode::Coupled;
  const bool uniform_prior =
      std::all_of(space.prior.begin(), space.prior.end(), [&](double p) { return p == space.prior[0]; });
  if (coupled && !space.dp_scale && !uniform_prior) {
    throw DomainError("coupled mode needs a uniform or Dirichlet-multinomial prior");
  }
  const int m = static_cast<int>(space.codebook.rows());
  const double dp_scale = space.dp_scale.value_or(static_cast<double>(space.K));

  std::vector<double> loss(trials);
  std::vector<double> mis(coupled ? trials : 0);
  std::vector<double> gap(coupled ? trials : 0);
  std::vector<std::vector<double>> traces(coupled ? 0 : trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = Rng::substream(seed, t);
    if (!coupled) {
      const std::size_t truth = space.truth_index ? *space.truth_index : sample_index(space.prior, rng.uniform());
      const TrajectoryResult r = trajectory(space, Truth{nullptr, truth}, T, rng, nullptr, truth);
      loss[t] = r.cumulative_mean_nats;
      traces[t] = r.truth_posterior;
      return;
    }
    // Truth: Dirichlet(dp_scale/m) weights over the codebook with one sign each.
    std::vector<double> weights(static_cast<std::size_t>(m));
    double total = 0.0;
    while (!(total > 0.0)) {
      total = 0.0;
      for (auto& w : weights) total += w = rng.gamma(dp_scale / m);
    }
    Eigen::VectorXd signed_weights(m);
    std::vector<int> signs(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      weights[j] /= total;
      signs[j] = rng.coin() ? 1 : -1;
      signed_weights[j] = signs[j] * weights[j];
    }
    const double root = std::sqrt(space.K + 1.0);
    const Evaluator truth = [&](std::span<const double> x) {
      const Eigen::Map<const Eigen::VectorXd> xv(x.data(), space.d);
      return root * (space.codebook * xv).cwiseMax(0.0).dot(signed_weights);
    };
    // Coupled width-n resample of the truth.
    std::vector<int> rows(static_cast<std::size_t>(space.n));
    std::vector<int> slot_signs(static_cast<std::size_t>(space.n));
    for (int i = 0; i < space.n; ++i) {
      rows[i] = static_cast<int>(sample_index(weights, rng.uniform()));
      slot_signs[i] = signs[rows[i]];
    }
    const auto& coupled_net = space.hypotheses[hypothesis_index(space, rows, slot_signs)];
    const Evaluator comparator = [&](std::span<const double> x) { return eval_constrained(coupled_net, x); };
    const TrajectoryResult r = trajectory(space, Truth{&truth, std::nullopt}, T, rng, &comparator, std::nullopt);
    loss[t] = r.cumulative_mean_nats;
    mis[t] = pairwise_sum(r.comparator_nats) / T;
    gap[t] = loss[t] - mis[t];
  });

  ReducibleLossReport report;
  report.mode = mode;
  report.T = T;
  report.loss = estimate_from_samples(loss, seed);
  report.entropy_nats = exact_entropy(space);
  if (coupled) {
    report.misspecification = estimate_from_samples(mis, seed);
    const McEstimate g = estimate_from_samples(gap, seed);
    report.bound = report.entropy_nats / T + report.misspecification->mean;
    report.margin_stderr = g.std_error;
    report.pass = g.mean <= report.entropy_nats / T + 3.0 * g.std_error;
  } else {
    report.bound = report.entropy_nats / T;
    report.margin_stderr = report.loss.std_error;
    report.pass = report.loss.mean <= report.bound + 3.0 * report.loss.std_error;
    report.truth_posterior_mean.resize(static_cast<std::size_t>(T));
    report.truth_posterior_stderr.resize(static_cast<std::size_t>(T));
    std::vector<double> column(trials);
    for (int s = 0; s < T; ++s) {
      for (std::size_t t = 0; t < trials; ++t) column[t] = traces[t][static_cast<std::size_t>(s)];
      const McEstimate e = estimate_from_samples(column, seed);
      report.truth_posterior_mean[s] = e.mean;
      report.truth_posterior_stderr[s] = e.std_error;
    }
  }
  return report;
}

namespace {

const char* mode_name(TruthMode mode) {
  switch (mode) {
    case TruthMode::WellSpecified:
      return "well_specified";
    case TruthMode::Coupled:
      return "coupled";
    case TruthMode::Singleton:
      return "singleton";
  }
  return "unknown";
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.name = j.value("name", std::string("scenario"));
  s.d = j.value("d", s.d);
  s.K = j.value("K", s.K);
  s.n = j.value("n", s.n);
  s.T = j.value("T", s.T);
  s.trials = j.value("trials", s.trials);
  s.seed = j.value("seed", s.seed);
  const std::string mode = j.value("mode", std::string("well_specified"));
  if (mode == "well_specified") {
    s.mode = TruthMode::WellSpecified;
  } else if (mode == "coupled") {
    s.mode = TruthMode::Coupled;
  } else if (mode == "singleton") {
    s.mode = TruthMode::Singleton;
  } else {
    throw DomainError(fmt::format("unknown scenario mode '{}'", mode));
  }
  if (j.contains("codebook")) {
    const auto rows = j["codebook"].get<std::vector<std::vector<double>>>();
    s.codebook.resize(static_cast<Eigen::Index>(rows.size()), s.d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (static_cast<int>(rows[r].size()) != s.d) throw ShapeError("codebook row length != d");
      for (int k = 0; k < s.d; ++k) s.codebook(static_cast<Eigen::Index>(r), k) = rows[r][k];
    }
  } else {
    const int m = j.value("codebook_size", 3);
    // Codebook atoms come from a stream of the scenario seed reserved for it.
    Rng rng = Rng::substream(s.seed, std::numeric_limits<std::uint64_t>::max());
    s.codebook.resize(m, s.d);
    for (int r = 0; r < m; ++r) s.codebook.row(r) = sample_unit_sphere(s.d, rng).transpose();
  }
  if (j.contains("prior")) {
    const auto& p = j["prior"];
    if (p.is_array()) {
      s.prior = p.get<std::vector<double>>();
    } else if (p == "uniform") {
      s.prior = UniformPrior{};
    } else if (p == "dirichlet_multinomial") {
      s.prior = DirichletMultinomialPrior{static_cast<double>(s.K)};
    } else {
      throw DomainError(fmt::format("unknown prior '{}'", p.dump()));
    }
  }
  return s;
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json codebook = nlohmann::json::array();
  for (Eigen::Index r = 0; r < s.codebook.rows(); ++r) {
    codebook.push_back(std::vector<double>(s.codebook.row(r).begin(), s.codebook.row(r).end()));
  }
  nlohmann::json prior;
  if (std::holds_alternative<UniformPrior>(s.prior)) {
    prior = "uniform";
  } else if (std::holds_alternative<DirichletMultinomialPrior>(s.prior)) {
    prior = "dirichlet_multinomial";
  } else {
    prior = std::get<std::vector<double>>(s.prior);
  }
  return {{"name", s.name}, {"d", s.d},         {"K", s.K},           {"n", s.n},
          {"T", s.T},       {"trials", s.trials}, {"mode", mode_name(s.mode)},
          {"seed", s.seed}, {"codebook", codebook}, {"prior", prior}};
}

nlohmann::json to_json(const ReducibleLossReport& r) {
  nlohmann::json j{{"mode", mode_name(r.mode)},
                   {"T", r.T},
                   {"estimate", r.loss.mean},
                   {"stderr", r.loss.std_error},
                   {"samples", r.loss.samples},
                   {"seed", r.loss.seed},
                   {"entropy_nats", r.entropy_nats},
                   {"bound", r.bound},
                   {"margin_stderr", r.margin_stderr},
                   {"pass", r.pass}};
  if (r.misspecification) {
    j["misspecification"] = {{"mean", r.misspecification->mean}, {"stderr", r.misspecification->std_error}};
  }
  return j;
}

ReducibleLossReport run_scenario(const Scenario& s) {
  HypothesisSpace space = build_tiny_space(s.d, s.K, s.codebook, s.n, s.prior);
  TruthMode mode = s.mode;
  if (mode == TruthMode::Singleton) {
    space = restrict_to(space, 0);
    mode = TruthMode::WellSpecified;
  }
  ReducibleLossReport r = estimate_reducible_loss(space, mode, s.T, s.trials, s.seed);
  r.mode = s.mode;
  return r;
}

}  // namespace scaling
