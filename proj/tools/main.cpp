#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdlab/config.hpp"
#include "pdlab/harness.hpp"
#include "pdlab/problem.hpp"
#include "pdlab/solvers.hpp"
#include "pdlab/stability.hpp"
#include "pdlab/verify.hpp"

namespace {

using nlohmann::json;
using namespace pdlab;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitAssumption = 4;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ProblemSpec load_problem(const Config& cfg) {
  if (cfg.has("problem", "builtin")) return builtin(cfg.get_string("problem", "builtin"));
  const int d = static_cast<int>(cfg.get_long("problem", "d"));
  const std::string f = cfg.get_string("problem", "f");
  std::vector<std::string> g, h;
  for (int i = 1; cfg.has("problem", "g" + std::to_string(i)); ++i)
    g.push_back(cfg.get_string("problem", "g" + std::to_string(i)));
  for (int j = 1; cfg.has("problem", "h" + std::to_string(j)); ++j)
    h.push_back(cfg.get_string("problem", "h" + std::to_string(j)));
  ProblemSpec p = problem_from_expressions(cfg.get_string("problem", "name", "inline"), d, f, g, h);
  if (p.m() + p.n() < 1) throw ConfigError("problem needs at least one constraint");
  return p;
}

Eigen::VectorXd vec_or_zero(const Config& cfg, const std::string& section,
                            const std::string& key, int size) {
  if (!cfg.has(section, key)) return Eigen::VectorXd::Zero(size);
  const std::vector<double> v = cfg.get_vector(section, key);
  if (static_cast<int>(v.size()) != size)
    throw ConfigError("key '" + key + "' needs " + std::to_string(size) + " entries");
  return Eigen::VectorXd::Map(v.data(), size);
}

HyperParams hyper_from(const Config& cfg, const std::string& section) {
  HyperParams hp;
  hp.eta_x = cfg.get_double(section, "eta_x", 0.1);
  hp.eta_dual = cfg.get_double(section, "eta_dual", 0.1);
  hp.c = cfg.get_double(section, "c", 1.0);
  hp.omega = cfg.get_double(section, "omega", 0.0);
  const std::string fs = cfg.get_string(section, "first_step", "plain");
  if (fs == "plain") hp.first_step = HyperParams::FirstStep::plain;
  else if (fs == "zero_diff") hp.first_step = HyperParams::FirstStep::zero_diff;
  else throw ConfigError("first_step must be plain or zero_diff");
  return hp;
}

json report_json(const StabilityReport& rep) {
  json j;
  j["eigenvalues"] = json::array();
  for (const auto& ev : rep.eigenvalues) j["eigenvalues"].push_back({ev.real(), ev.imag()});
  j["spectral_radius"] = rep.spectral_radius;
  j["condition_number"] = rep.condition_number;
  j["is_lssp"] = rep.is_lssp;
  j["marginal"] = rep.marginal;
  j["trivial_expected"] = rep.trivial_expected;
  j["trivial_found"] = rep.trivial_found;
  return j;
}

int cmd_solve(const Config& cfg, const std::string& out_dir) {
  const ProblemSpec p = load_problem(cfg);
  const Rule rule = rule_from_name(cfg.get_string("solver", "rule"));
  const HyperParams hp = hyper_from(cfg, "solver");
  const long steps = cfg.get_long("solver", "steps", 1000);
  const double stop_tol = cfg.get_double("solver", "stop_tol", 1e-9);

  PrimalDualState init;
  init.x = vec_or_zero(cfg, "solver", "x0", p.d);
  init.lambda = vec_or_zero(cfg, "solver", "lambda0", p.m());
  init.mu = vec_or_zero(cfg, "solver", "mu0", p.n());

  std::ofstream csv(std::filesystem::path(out_dir) / "solve.csv");
  if (!csv) throw ConfigError("cannot write to output directory: " + out_dir);
  csv << "t";
  for (int i = 1; i <= p.d; ++i) csv << ",x_" << i;
  for (int i = 1; i <= p.m(); ++i) csv << ",lambda_" << i;
  for (int j = 1; j <= p.n(); ++j) csv << ",mu_" << j;
  csv << ",f,norm_h_inf,max_g_plus,lagrangian,kkt_residual\n";
  if (steps == 0) return kExitOk;

  const Trajectory traj = run(p, rule, init, hp, steps, stop_tol);
  for (const StepRecord& s : traj.steps) {
    csv << s.t;
    for (int i = 0; i < p.d; ++i) csv << "," << fmt17(s.x(i));
    for (int i = 0; i < p.m(); ++i) csv << "," << fmt17(s.lambda(i));
    for (int j = 0; j < p.n(); ++j) csv << "," << fmt17(s.mu(j));
    csv << "," << fmt17(s.f) << "," << fmt17(s.norm_h_inf) << "," << fmt17(s.max_g_plus)
        << "," << fmt17(s.lagrangian) << "," << fmt17(s.kkt_residual) << "\n";
  }
  if (traj.status == RunStatus::diverged) {
    csv << "# diverged at t=" << traj.diverged_at << "\n";
    std::cerr << "error: divergence at t=" << traj.diverged_at << "\n";
    return kExitDiverged;
  }
  return kExitOk;
}

int cmd_stability(const Config& cfg, const std::string& out_dir) {
  const ProblemSpec p = load_problem(cfg);
  const HyperParams hp = hyper_from(cfg, "stability");

  Eigen::VectorXd x, lambda, mu;
  if (cfg.has("stability", "x")) {
    x = vec_or_zero(cfg, "stability", "x", p.d);
    lambda = vec_or_zero(cfg, "stability", "lambda", p.m());
    mu = vec_or_zero(cfg, "stability", "mu", p.n());
  } else {
    if (p.known_kkt.empty())
      throw ConfigError("no stationary point: give [stability] x/lambda/mu");
    x = p.known_kkt[0].x;
    lambda = p.known_kkt[0].lambda;
    mu = p.known_kkt[0].mu;
  }

  const std::filesystem::path out_path = std::filesystem::path(out_dir) / "stability.json";
  const KKTCertificate cert = kkt_certificate(p, x, lambda, mu);
  const AssumptionCheck assume = check_assumptions(cert);
  if (!assume.all()) {
    json j;
    j["error"] = "assumption violation";
    j["reason"] = !assume.strict_cs  ? "strict complementarity violated"
                  : !assume.licq     ? "active constraint Jacobian rank deficient"
                                     : "second-order sufficiency fails on the tangent space";
    j["strict_cs"] = assume.strict_cs;
    j["licq"] = assume.licq;
    j["sosc"] = assume.sosc;
    std::ofstream(out_path) << j.dump(2) << "\n";
    std::cerr << "error: " << j["reason"].get<std::string>() << "\n";
    return kExitAssumption;
  }

  const ActivePartition part = active_partition(p, cert);
  json j;
  j["J_AL"] = report_json(analyze_J_AL(part, hp));
  j["J_OG"] = report_json(analyze_J_OG(part, hp));
  if (hp.omega == hp.c) {
    const SpectralRelation rel = verify_spectral_relation(
        analyze_J_AL(part, hp), analyze_J_OG(part, hp), hp, part.inactive_count());
    j["thm35_gap"] = rel.gap;
  } else {
    j["thm35_gap"] = nullptr;
  }
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write to output directory: " + out_dir);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const Config& cfg, const std::string& out_dir) {
  const ProblemSpec p = load_problem(cfg);
  HyperParams hp;
  hp.eta_x = cfg.get_double("sweep", "eta_x", 0.1);
  hp.eta_dual = cfg.get_double("sweep", "eta_dual", 0.1);
  const std::vector<double> omegas = cfg.get_vector("sweep", "omegas");
  const long traj_steps = cfg.get_long("sweep", "traj_steps", 0);
  if (p.known_kkt.empty())
    throw ConfigError("sweep needs a catalog problem with a known stationary point");
  const KKTCertificate cert =
      kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);

  std::vector<SweepRow> rows;
  try {
    rows = omega_sweep(p, cert, hp, omegas, traj_steps);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssumption;
  }

  std::ofstream csv(std::filesystem::path(out_dir) / "sweep.csv");
  if (!csv) throw ConfigError("cannot write to output directory: " + out_dir);
  csv << "omega,rho,max_abs_imag,kappa,is_lssp";
  if (traj_steps > 0) csv << ",sign_changes";
  csv << "\n";
  for (const SweepRow& r : rows) {
    csv << fmt17(r.omega) << "," << fmt17(r.spectral_radius) << "," << fmt17(r.max_abs_imag)
        << "," << fmt17(r.condition_number) << "," << (r.is_lssp ? 1 : 0);
    if (traj_steps > 0) csv << "," << r.sign_changes;
    csv << "\n";
  }
  return kExitOk;
}

int cmd_verify(const std::string& out_dir, const std::string& suite, std::uint64_t seed,
               bool sabotage) {
  VerifyOptions opt;
  opt.suite_filter = suite;
  opt.seed = seed;
  opt.sabotage = sabotage;
  if (!suite.empty()) {
    const auto suites = known_suites();
    if (std::find(suites.begin(), suites.end(), suite) == suites.end()) {
      std::cerr << "error: unknown suite '" << suite << "'\n";
      return kExitConfigError;
    }
  }
  const std::vector<CheckResult> results = run_criteria(opt);

  json j;
  j["results"] = json::array();
  for (const CheckResult& r : results) {
    std::printf("%-20s %s  %s\n", r.suite.c_str(), r.passed ? "PASS" : "FAIL",
                r.detail.c_str());
    j["results"].push_back({{"suite", r.suite}, {"detail", r.detail}, {"passed", r.passed}});
  }
  const bool ok = all_passed(results);
  j["all_passed"] = ok;
  std::ofstream(std::filesystem::path(out_dir) / "verify.json") << j.dump(2) << "\n";
  std::printf("%zu checks, %s\n", results.size(), ok ? "all passed" : "FAILURES present");
  if (!ok) std::cerr << "error: verification failures\n";
  return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_check_derivatives(const Config* cfg) {
  double worst = 0.0;
  auto report_one = [&](const ProblemSpec& p, const Eigen::VectorXd& x, double step) {
    const DerivativeReport rep = check_derivatives(p, x, step);
    for (const auto& e : rep.entries)
      std::printf("%-12s %-4s grad %.3e  hess %.3e\n", p.name.c_str(), e.function.c_str(),
                  e.grad_rel_error, e.hess_rel_error);
    worst = std::max(worst, rep.max_rel_error());
  };
  if (cfg) {
    const ProblemSpec p = load_problem(*cfg);
    Eigen::VectorXd x = vec_or_zero(*cfg, "check", "x", p.d);
    report_one(p, x, cfg->get_double("check", "step", 1e-4));
  } else {
    for (const std::string& id : catalog_ids()) {
      const ProblemSpec p = builtin(id);
      Eigen::VectorXd x(p.d);
      for (int i = 0; i < p.d; ++i) x(i) = 0.1 * (i + 1);
      report_one(p, x, 1e-4);
    }
  }
  std::printf("worst relative error %.3e\n", worst);
  if (worst > 1e-6) {
    std::cerr << "error: derivative check exceeded 1e-6\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"primal-dual constrained-optimization laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", suite;
  std::uint64_t seed = 20240817;
  bool sabotage = false;
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for randomized suites");
  app.add_option("--suite", suite, "restrict verify to one suite");
  app.add_flag("--sabotage", sabotage)->group("");  // test hook, hidden

  auto* solve = app.add_subcommand("solve", "run one solver and write solve.csv");
  auto* stab = app.add_subcommand("stability", "spectral reports at a stationary point");
  auto* sweep = app.add_subcommand("sweep", "optimism sweep, writes sweep.csv");
  auto* verify = app.add_subcommand("verify", "run the property and acceptance suites");
  auto* checkd = app.add_subcommand("check-derivatives", "derivative cross-validation");

  CLI11_PARSE(app, argc, argv);

  try {
    std::optional<Config> cfg;
    if (!config_path.empty()) cfg = Config::parse_file(config_path);
    auto need_cfg = [&]() -> const Config& {
      if (!cfg) throw ConfigError("this command needs --config");
      return *cfg;
    };
    if (solve->parsed()) return cmd_solve(need_cfg(), out_dir);
    if (stab->parsed()) return cmd_stability(need_cfg(), out_dir);
    if (sweep->parsed()) return cmd_sweep(need_cfg(), out_dir);
    if (verify->parsed()) return cmd_verify(out_dir, suite, seed, sabotage);
    if (checkd->parsed()) return cmd_check_derivatives(cfg ? &*cfg : nullptr);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const expr::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const StrictComplementarityViolated& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssumption;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
