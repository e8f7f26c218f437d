#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PDLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return (rc >> 8) & 0xff;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("pdlab_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

double last_field(const std::string& csv_line) {
  const size_t pos = csv_line.rfind(',');
  REQUIRE(pos != std::string::npos);
  return std::stod(csv_line.substr(pos + 1));
}

}  // namespace

TEST_CASE("solve writes a trajectory that reaches the stationary point") {
  const fs::path dir = fresh_dir("solve_ok");
  write_file(dir / "cfg.ini",
             "[problem]\nbuiltin = INEQ-ACT\n"
             "[solver]\nrule = al_gda\neta_x = 0.1\neta_dual = 0.1\nc = 1\n"
             "x0 = 1.5\nsteps = 5000\nstop_tol = 1e-10\n");
  CHECK(run_cli("--config " + (dir / "cfg.ini").string() + " --out " + dir.string() +
                " solve") == 0);
  const std::vector<std::string> ls = lines_of(slurp(dir / "solve.csv"));
  REQUIRE(ls.size() > 2);
  CHECK(ls[0] == "t,x_1,lambda_1,f,norm_h_inf,max_g_plus,lagrangian,kkt_residual");
  CHECK(last_field(ls.back()) <= 1e-6);
}

TEST_CASE("solve reports divergence with a footer and exit code") {
  const fs::path dir = fresh_dir("solve_div");
  write_file(dir / "cfg.ini",
             "[problem]\nbuiltin = NC-EQ\n"
             "[solver]\nrule = lag_gda\nx0 = 0.9\nmu0 = 1.9\nsteps = 20000\n");
  CHECK(run_cli("--config " + (dir / "cfg.ini").string() + " --out " + dir.string() +
                " solve") == 3);
  const std::vector<std::string> ls = lines_of(slurp(dir / "solve.csv"));
  CHECK(ls.back().rfind("# diverged at t=", 0) == 0);
}

TEST_CASE("solve with a zero step budget emits only the header") {
  const fs::path dir = fresh_dir("solve_zero");
  write_file(dir / "cfg.ini",
             "[problem]\nbuiltin = QP-EQ\n[solver]\nrule = lag_gda\nsteps = 0\n");
  CHECK(run_cli("--config " + (dir / "cfg.ini").string() + " --out " + dir.string() +
                " solve") == 0);
  CHECK(lines_of(slurp(dir / "solve.csv")).size() == 1);
}

TEST_CASE("stability report certifies the spectral identity") {
  const fs::path dir = fresh_dir("stab_ok");
  write_file(dir / "cfg.ini",
             "[problem]\nbuiltin = INEQ-ACT\n"
             "[stability]\neta_x = 0.1\neta_dual = 0.1\nc = 1\nomega = 1\n");
  CHECK(run_cli("--config " + (dir / "cfg.ini").string() + " --out " + dir.string() +
                " stability") == 0);
  const json j = json::parse(slurp(dir / "stability.json"));
  CHECK(j["J_AL"]["spectral_radius"].get<double>() == doctest::Approx(0.9270156).epsilon(1e-6));
  CHECK(j["J_AL"]["is_lssp"].get<bool>());
  CHECK(j["J_OG"]["eigenvalues"].size() == 3);
  CHECK(j["thm35_gap"].get<double>() <= 1e-8);
}

TEST_CASE("stability rejects a degenerate point with a diagnostic") {
  const fs::path dir = fresh_dir("stab_bad");
  write_file(dir / "cfg.ini",
             "[problem]\nbuiltin = INEQ-ACT\n"
             "[stability]\nx = 1\nlambda = 0\n");
  CHECK(run_cli("--config " + (dir / "cfg.ini").string() + " --out " + dir.string() +
                " stability") == 4);
  const json j = json::parse(slurp(dir / "stability.json"));
  CHECK(j["error"] == "assumption violation");
  CHECK(!j["strict_cs"].get<bool>());
}

TEST_CASE("sweep tabulates one row per optimism weight") {
  const fs::path dir = fresh_dir("sweep");
  write_file(dir / "cfg.ini",
             "[problem]\nbuiltin = OSC-EQ\n"
             "[sweep]\nomegas = 0.5 1 2 4\ntraj_steps = 200\n");
  CHECK(run_cli("--config " + (dir / "cfg.ini").string() + " --out " + dir.string() +
                " sweep") == 0);
  const std::vector<std::string> ls = lines_of(slurp(dir / "sweep.csv"));
  REQUIRE(ls.size() == 5);
  CHECK(ls[0] == "omega,rho,max_abs_imag,kappa,is_lssp,sign_changes");

  write_file(dir / "one.ini", "[problem]\nbuiltin = OSC-EQ\n[sweep]\nomegas = 2\n");
  CHECK(run_cli("--config " + (dir / "one.ini").string() + " --out " + dir.string() +
                " sweep") == 0);
  const std::vector<std::string> one = lines_of(slurp(dir / "sweep.csv"));
  REQUIRE(one.size() == 2);
  CHECK(one[0] == "omega,rho,max_abs_imag,kappa,is_lssp");
}

TEST_CASE("verify exits clean on a passing suite") {
  const fs::path dir = fresh_dir("verify_ok");
  CHECK(run_cli("--out " + dir.string() + " --suite threshold verify") == 0);
  const json j = json::parse(slurp(dir / "verify.json"));
  CHECK(j["all_passed"].get<bool>());
  CHECK(j["results"].size() >= 1);
}

TEST_CASE("verify catches an injected spectral perturbation") {
  const fs::path dir = fresh_dir("verify_sab");
  CHECK(run_cli("--out " + dir.string() + " --suite thm35 --sabotage verify") == 1);
  const json j = json::parse(slurp(dir / "verify.json"));
  CHECK(!j["all_passed"].get<bool>());
}

TEST_CASE("verify rejects an unknown suite name") {
  const fs::path dir = fresh_dir("verify_unknown");
  CHECK(run_cli("--out " + dir.string() + " --suite no_such_suite verify") == 2);
}

TEST_CASE("configuration errors exit with the dedicated code") {
  const fs::path dir = fresh_dir("cfg_bad");
  CHECK(run_cli("--config " + (dir / "missing.ini").string() + " solve") == 2);
  write_file(dir / "noprob.ini", "[solver]\nrule = lag_gda\n");
  CHECK(run_cli("--config " + (dir / "noprob.ini").string() + " --out " + dir.string() +
                " solve") == 2);
  write_file(dir / "badexpr.ini",
             "[problem]\nd = 1\nf = x1 +\nh1 = x1 - 1\n[solver]\nrule = lag_gda\n");
  CHECK(run_cli("--config " + (dir / "badexpr.ini").string() + " --out " + dir.string() +
                " solve") == 2);
}

TEST_CASE("verify output is byte-stable across runs with one seed") {
  const fs::path a = fresh_dir("stable_a");
  const fs::path b = fresh_dir("stable_b");
  CHECK(run_cli("--out " + a.string() + " --suite charpoly --seed 7 verify") == 0);
  CHECK(run_cli("--out " + b.string() + " --suite charpoly --seed 7 verify") == 0);
  CHECK(slurp(a / "verify.json") == slurp(b / "verify.json"));
}
