#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scaling/bounds.hpp"
#include "scaling/cli.hpp"
#include "scaling/dgp.hpp"
#include "scaling/errors.hpp"
#include "scaling/frontier.hpp"
#include "scaling/verify.hpp"

namespace py = pybind11;
using namespace scaling;

namespace {

py::dict report_dict(const BoundReport& r) {
  py::dict d;
  d["form"] = to_string(r.form);
  d["d"] = r.d;
  d["K"] = r.K;
  d["n"] = r.n;
  d["T"] = r.T;
  if (r.form == BoundForm::Theorem2) {
    d["epsilon"] = r.epsilon;
  } else {
    d["epsilon"] = py::none();
  }
  d["estimation_nats"] = r.estimation_nats;
  d["misspecification_nats"] = r.misspecification_nats;
  d["total_nats"] = r.total_nats;
  d["warnings"] = r.warnings;
  return d;
}

py::dict point_dict(const FrontierPoint& p) {
  py::dict d;
  d["C"] = p.C;
  d["d"] = p.d;
  d["K"] = p.K;
  d["n_star"] = p.n_star;
  d["T_star"] = p.T_star;
  d["param_count"] = p.param_count();
  d["bound_total_nats"] = p.bound_total_nats;
  d["unimodal"] = p.unimodal;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Scaling-law bounds, compute-optimal frontier and Dirichlet-process ground truth";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", error.ptr());
  py::register_exception<EstimationError>(m, "EstimationError", error.ptr());

  m.def("entropy_bound", &entropy_bound, py::arg("n"), py::arg("K"), py::arg("d"), py::arg("epsilon"));
  m.def("misspec_bound", &misspec_bound, py::arg("n"), py::arg("K"), py::arg("d"), py::arg("epsilon"));
  m.def("optimal_epsilon", &optimal_epsilon, py::arg("n"), py::arg("K"), py::arg("T"));
  m.def(
      "bound_theorem2",
      [](std::int64_t n, int K, int d, double T, double eps) { return report_dict(bound_theorem2(n, K, d, T, eps)); },
      py::arg("n"), py::arg("K"), py::arg("d"), py::arg("T"), py::arg("epsilon"));
  m.def(
      "bound_corollary",
      [](std::int64_t n, int K, int d, double T) { return report_dict(bound_corollary(n, K, d, T)); }, py::arg("n"),
      py::arg("K"), py::arg("d"), py::arg("T"));

  m.def("bound_at_budget", &bound_at_budget, py::arg("C"), py::arg("d"), py::arg("K"), py::arg("n"));
  m.def(
      "optimal_width", [](double C, int d, int K) { return point_dict(optimal_width(C, d, K)); }, py::arg("C"),
      py::arg("d"), py::arg("K"));
  m.def(
      "frontier_sweep",
      [](const std::vector<double>& budgets, int d, int K) {
        py::list out;
        for (const auto& p : frontier_sweep(budgets, d, K)) out.append(point_dict(p));
        return out;
      },
      py::arg("budgets"), py::arg("d"), py::arg("K"));
  m.def("loglog_slope", [](const std::vector<double>& x, const std::vector<double>& y) { return loglog_slope(x, y); },
        py::arg("x"), py::arg("y"));

  m.def("kl_bernoulli_sigmoid", &kl_bernoulli_sigmoid, py::arg("g"), py::arg("g_tilde"));

  m.def(
      "sample_ground_truth",
      [](int d, int K, std::uint64_t seed, double tau) {
        Rng rng(seed);
        const GroundTruthNetwork net = sample_ground_truth(d, K, tau, rng);
        py::dict out;
        out["atoms"] = net.atoms;
        out["masses"] = net.masses;
        out["signs"] = net.signs;
        out["truncation_residual"] = net.truncation_residual;
        return out;
      },
      py::arg("d"), py::arg("K"), py::arg("seed"), py::arg("tau") = kDefaultTruncationTolerance);
  m.def(
      "eval_ground_truth",
      [](int d, int K, std::uint64_t seed, const Eigen::MatrixXd& inputs, double tau) {
        Rng rng(seed);
        const GroundTruthNetwork net = sample_ground_truth(d, K, tau, rng);
        if (inputs.cols() != d) throw ShapeError("inputs must have d columns");
        return Eigen::VectorXd(eval_ground_truth(net, inputs));
      },
      py::arg("d"), py::arg("K"), py::arg("seed"), py::arg("inputs"), py::arg("tau") = kDefaultTruncationTolerance,
      "Evaluates F on each row of `inputs` for the network drawn from `seed`.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"scaling-frontier"};
        full.insert(full.end(), args.begin(), args.end());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(full, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process; returns (exit_code, stdout, stderr).");
}
