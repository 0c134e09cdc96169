#include "scaling/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "scaling/bounds.hpp"
#include "scaling/errors.hpp"
#include "scaling/frontier.hpp"
#include "scaling/posterior.hpp"
#include "scaling/svg.hpp"
#include "scaling/verify.hpp"

namespace scaling::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError(fmt::format("'{}' is not a number", s));
  }
  if (used != s.size()) throw DomainError(fmt::format("'{}' is not a number", s));
  return v;
}

// Output sink: one format goes to --out (or stdout); several formats use
// --out as a stem and append the extension.
struct Outputs {
  std::vector<std::string> formats;
  std::string path;
};

void emit(const Outputs& o, const std::map<std::string, std::string>& rendered, std::ostream& out) {
  if (o.formats.size() > 1 && o.path.empty()) {
    throw DomainError("several --format values need --out as a file stem");
  }
  for (const auto& f : o.formats) {
    const auto it = rendered.find(f);
    if (it == rendered.end()) throw DomainError(fmt::format("format '{}' not available here", f));
    if (o.path.empty()) {
      out << it->second;
      continue;
    }
    const std::string path = o.formats.size() > 1 ? o.path + "." + f : o.path;
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DomainError(fmt::format("cannot write '{}'", path));
    file << it->second;
  }
}

std::vector<std::string> parse_formats(const std::string& spec) {
  auto formats = split(spec, ',');
  for (const auto& f : formats) {
    if (f != "csv" && f != "json" && f != "svg") throw DomainError(fmt::format("unknown format '{}'", f));
  }
  if (formats.empty()) throw DomainError("empty --format");
  return formats;
}

}  // namespace

std::vector<double> parse_budgets(const std::string& spec) {
  std::vector<double> budgets;
  if (spec.find(':') != std::string::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw DomainError("budget range must be lo:hi:count");
    const double lo = parse_number(parts[0]);
    const double hi = parse_number(parts[1]);
    const auto count = static_cast<int>(parse_number(parts[2]));
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw DomainError("invalid budget range");
    for (int k = 0; k < count; ++k) {
      const double u = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
      budgets.push_back(std::pow(10.0, std::log10(lo) + u * (std::log10(hi) - std::log10(lo))));
    }
  } else {
    for (const auto& item : split(spec, ',')) budgets.push_back(parse_number(item));
  }
  if (budgets.empty()) throw DomainError("no budgets given");
  for (double c : budgets) {
    if (!(c > 0.0)) throw DomainError("budgets must be positive");
  }
  return budgets;
}

std::vector<std::int64_t> width_grid(const std::string& spec, double C, int d) {
  std::vector<std::int64_t> grid;
  if (spec.rfind("log:", 0) == 0) {
    const auto count = static_cast<int>(parse_number(spec.substr(4)));
    if (count < 1) throw DomainError("log grid needs at least one point");
    const double top = std::log(std::max(1.0, std::floor(C / d)));
    for (int k = 0; k < count; ++k) {
      const double u = count == 1 ? 0.0 : top * k / (count - 1);
      const auto n = std::max<std::int64_t>(1, std::llround(std::exp(u)));
      if (grid.empty() || n != grid.back()) grid.push_back(n);
    }
    return grid;
  }
  for (const auto& item : split(spec, ',')) {
    const double v = parse_number(item);
    if (!(v >= 1.0) || v != std::floor(v)) throw DomainError(fmt::format("width '{}' is not a positive integer", item));
    grid.push_back(static_cast<std::int64_t>(v));
  }
  if (grid.empty()) throw DomainError("empty width grid");
  return grid;
}

std::string curve_csv(const std::vector<double>& budgets, int d, int K, const std::string& n_grid) {
  std::string csv = "C,d,K,n,T,estimation,misspecification,total,status\n";
  for (double C : budgets) {
    for (std::int64_t n : width_grid(n_grid, C, d)) {
      if (static_cast<double>(n) * d > C) {
        csv += fmt::format("{:.17g},{},{},{},,,,,infeasible\n", C, d, K, n);
        continue;
      }
      const double T = C / (static_cast<double>(d) * static_cast<double>(n));
      const BoundReport r = bound_corollary(n, K, d, T);
      csv += fmt::format("{:.17g},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},ok\n", C, d, K, n, T,
                         r.estimation_nats, r.misspecification_nats, r.total_nats);
    }
  }
  return csv;
}

nlohmann::json verify_report(const VerifyConfig& config) {
  if (config.samples < 20'000) throw DomainError("verify: --samples must be >= 20000");
  const std::uint64_t seed = config.seed;
  nlohmann::json checks = nlohmann::json::array();

  std::uint64_t stream = 0;
  auto next_seed = [&] { return seed * 1000 + stream++; };

  for (const auto& regime : {PairRegime::uniform(-10.0, 10.0), PairRegime::gaussian(0.0, 5.0)}) {
    const auto r = mc_lemma_kl_vs_sq(regime, 5 * config.samples, next_seed(), config.kl_scale);
    auto j = to_json(r);
    j["name"] = "kl_pointwise";
    checks.push_back(j);
  }

  NestedMc mc;
  mc.inner = 100;
  mc.outer = config.samples / mc.inner;
  mc.kl_scale = config.kl_scale;

  struct Setting {
    int d, K, n;
    double epsilon;
  };
  for (const auto& s : {Setting{2, 2, 2, 0}, Setting{10, 100, 10, 0}, Setting{10, 100, 100, 0}}) {
    mc.seed = next_seed();
    checks.push_back(to_json(mc_sq_error_n0(s.d, s.K, s.n, mc)));
  }
  const Setting quant_grid[] = {{3, 2, 5, 0.2}, {10, 100, 10, 0.1}, {10, 100, 100, 0.05}};
  for (const auto& s : quant_grid) {
    mc.seed = next_seed();
    checks.push_back(to_json(mc_sq_error_quant(s.d, s.K, s.n, s.epsilon, mc)));
  }
  for (const auto& s : quant_grid) {
    mc.seed = next_seed();
    checks.push_back(to_json(mc_misspec_kl(s.d, s.K, s.n, s.epsilon, mc)));
  }
  const std::uint64_t trials = std::max<std::uint64_t>(1000, config.samples / 20);
  for (const auto& [K, n] : {std::pair{2, 10}, std::pair{100, 100}}) {
    checks.push_back(to_json(mc_distinct_atoms(K, n, trials, next_seed())));
  }
  for (const auto& [d, K] : {std::pair{2, 2}, std::pair{10, 100}, std::pair{50, 10}}) {
    mc.seed = next_seed();
    const MomentReport m = mc_ground_truth_moments(d, K, mc);
    checks.push_back({{"name", "dgp_moments"},
                      {"d", d},
                      {"K", K},
                      {"first", to_json(m.first)},
                      {"second", to_json(m.second)},
                      {"pass", m.pass}});
  }
  for (const char* mode : {"well_specified", "singleton", "coupled"}) {
    Scenario s = scenario_from_json({{"name", mode},
                                     {"d", 3},
                                     {"K", 3},
                                     {"n", 2},
                                     {"codebook_size", 3},
                                     {"T", 50},
                                     {"trials", trials},
                                     {"mode", mode},
                                     {"prior", std::string(mode) == "coupled" ? "dirichlet_multinomial" : "uniform"},
                                     {"seed", next_seed()}});
    auto j = to_json(run_scenario(s));
    j["name"] = fmt::format("reducible_loss_{}", mode);
    checks.push_back(j);
  }

  bool pass = true;
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& c : checks) {
    if (!c.at("pass").get<bool>()) {
      pass = false;
      failures.push_back(c.at("name"));
    }
  }
  return {{"seed", seed}, {"samples", config.samples}, {"checks", checks}, {"failures", failures}, {"pass", pass}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Information-theoretic scaling-law bounds and compute-optimal frontiers"};
  app.require_subcommand(1);

  int d = 10;
  int K = 100;
  std::string budgets_spec = "1e8,1e10,1e12";
  std::string n_grid = "log:64";
  std::int64_t n = 100;
  double T = 1e6;
  std::optional<double> epsilon;
  std::uint64_t seed = 42;
  std::uint64_t samples = 200'000;
  std::uint64_t trials = 10'000;
  int horizon = 50;
  std::string out_path;
  std::string format = "csv";
  std::string scenario_path;
  bool sabotage = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--d", d, "input dimension")->check(CLI::PositiveNumber);
    sub->add_option("--K", K, "Dirichlet process scale")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path, "output file (stem when several formats are requested)");
    sub->add_option("--format", format, "csv, json, svg (comma-separated for several)");
  };

  auto* bound = app.add_subcommand("bound", "evaluate the Theorem 2 (with --epsilon) or corollary bound");
  add_common(bound);
  bound->add_option("--n", n, "hidden width")->check(CLI::PositiveNumber);
  bound->add_option("--T", T, "token count")->check(CLI::PositiveNumber);
  bound->add_option("--epsilon", epsilon, "quantization radius");

  auto* curve = app.add_subcommand("curve", "bound vs width at fixed FLOP budgets");
  add_common(curve);
  curve->add_option("--budgets", budgets_spec, "list 1e8,1e10 or range lo:hi:count");
  curve->add_option("--n-grid", n_grid, "log:<count> or explicit list of widths");

  auto* frontier = app.add_subcommand("frontier", "compute-optimal widths over a budget sweep");
  add_common(frontier);
  frontier->add_option("--budgets", budgets_spec, "list 1e10,1e12 or range lo:hi:count");

  auto* verify = app.add_subcommand("verify", "Monte Carlo checks of every lemma and the exact-Bayes scenarios");
  add_common(verify);
  verify->add_option("--seed", seed, "master seed");
  verify->add_option("--samples", samples, "samples per nested Monte Carlo check (>= 20000)");
  verify->add_flag("--sabotage", sabotage, "inflate KL by 10x (negative control)")->group("");

  auto* posterior = app.add_subcommand("posterior", "exact-Bayes reducible-loss scenario");
  add_common(posterior);
  posterior->add_option("--scenario", scenario_path, "scenario JSON file");
  posterior->add_option("--T", horizon, "horizon (without --scenario)")->check(CLI::PositiveNumber);
  posterior->add_option("--seed", seed, "seed (without --scenario)");
  posterior->add_option("--samples", trials, "trajectories (without --scenario)");

  // The default format depends on the subcommand, so remember which one set it.
  for (auto* sub : {bound, curve, frontier, verify, posterior}) {
    const std::string def = sub == curve || sub == frontier ? "csv" : "json";
    sub->preparse_callback([&format, def](std::size_t) { format = def; });
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Outputs outputs{parse_formats(format), out_path};
    if (bound->parsed()) {
      const BoundReport r = epsilon ? bound_theorem2(n, K, d, T, *epsilon) : bound_corollary(n, K, d, T);
      for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      emit(outputs, {{"json", to_json(r).dump(2) + "\n"}, {"csv", csv_header() + "\n" + to_csv_row(r) + "\n"}}, out);
      return kExitOk;
    }
    if (curve->parsed()) {
      const auto budgets = parse_budgets(budgets_spec);
      const std::string csv = curve_csv(budgets, d, K, n_grid);
      const auto table = parse_csv(csv);
      for (const auto& row : table.rows) {
        if (row.back() != "ok") err << fmt::format("warning: width {} infeasible at C = {}\n", row[3], row[0]);
      }
      emit(outputs, {{"csv", csv}, {"svg", render_curve_svg(csv)}}, out);
      return kExitOk;
    }
    if (frontier->parsed()) {
      const auto budgets = parse_budgets(budgets_spec);
      if (budgets.size() < 3) throw EstimationError("frontier needs at least 3 budgets for the slope fit");
      const auto points = frontier_sweep(budgets, d, K);
      const double slope_t = slope_estimate(points, SlopeAxis::TStar);
      const double slope_c = slope_estimate(points, SlopeAxis::Budget);
      const std::string csv = frontier_csv(points);
      nlohmann::json j{{"d", d}, {"K", K}, {"slope_param_vs_T", slope_t}, {"slope_param_vs_C", slope_c}};
      j["points"] = nlohmann::json::array();
      for (const auto& p : points) {
        j["points"].push_back({{"C", p.C},
                               {"n_star", p.n_star},
                               {"T_star", p.T_star},
                               {"param_count", p.param_count()},
                               {"bound_total", p.bound_total_nats},
                               {"unimodal", p.unimodal}});
      }
      err << fmt::format("slope(param vs T*) = {:.6f}, slope(param vs C) = {:.6f}\n", slope_t, slope_c);
      emit(outputs, {{"csv", csv}, {"json", j.dump(2) + "\n"}, {"svg", render_frontier_svg(csv)}}, out);
      return kExitOk;
    }
    if (verify->parsed()) {
      const nlohmann::json report = verify_report({seed, samples, sabotage ? 10.0 : 1.0});
      emit(outputs, {{"json", report.dump(2) + "\n"}}, out);
      if (!report.at("pass").get<bool>()) {
        for (const auto& c : report.at("checks")) {
          if (!c.at("pass").get<bool>()) err << "FAILED: " << c.dump() << "\n";
        }
        return kExitVerificationFailed;
      }
      return kExitOk;
    }
    if (posterior->parsed()) {
      Scenario s;
      if (!scenario_path.empty()) {
        std::ifstream in(scenario_path);
        if (!in) throw DomainError(fmt::format("cannot read scenario '{}'", scenario_path));
        s = scenario_from_json(nlohmann::json::parse(in));
      } else {
        s = scenario_from_json({{"T", horizon}, {"seed", seed}, {"trials", trials}, {"codebook_size", 3}});
      }
      const ReducibleLossReport r = run_scenario(s);
      nlohmann::json j = to_json(r);
      j["scenario"] = to_json(s);
      emit(outputs, {{"json", j.dump(2) + "\n"}}, out);
      return r.pass ? kExitOk : kExitVerificationFailed;
    }
  } catch (const LemmaViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitVerificationFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace scaling::cli
