#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pdlab/harness.hpp"

using namespace pdlab;

namespace {

Eigen::VectorXd v1(double a) { return Eigen::VectorXd::Constant(1, a); }
const Eigen::VectorXd empty = Eigen::VectorXd(0);

HyperParams hp(double eta_x, double eta_dual, double c = 1.0, double omega = 0.0) {
  HyperParams h;
  h.eta_x = eta_x;
  h.eta_dual = eta_dual;
  h.c = c;
  h.omega = omega;
  return h;
}

KKTCertificate cert_of(const ProblemSpec& p) {
  return kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);
}

}  // namespace

TEST_CASE("the two update rules shadow each other under the dual shift") {
  {
    const EquivalenceResult r =
        run_equivalence_equality(builtin("NC-EQ"), v1(0.0), v1(0.0), hp(0.1, 0.1, 3.0, 3.0), 500);
    CHECK(r.max_primal_gap <= 1e-9);
    CHECK(r.max_dual_gap <= 1e-9);
    CHECK(r.steps == 500);
  }
  {
    Eigen::VectorXd x0(2);
    x0 << 0.7, -0.3;
    const EquivalenceResult r = run_equivalence_equality(builtin("QP-EQ"), x0, v1(0.5),
                                                         hp(0.05, 0.05, 2.0, 2.0), 800);
    CHECK(r.max_primal_gap <= 1e-9);
    CHECK(r.max_dual_gap <= 1e-9);
  }
  CHECK_THROWS_AS(
      run_equivalence_equality(builtin("NC-EQ"), v1(0.0), v1(0.0), hp(0.1, 0.1, 3.0, 2.0), 10),
      std::invalid_argument);
  CHECK_THROWS_AS(
      run_equivalence_equality(builtin("INEQ-ACT"), v1(0.0), empty, hp(0.1, 0.1, 1.0, 1.0), 10),
      std::invalid_argument);
}

TEST_CASE("penalty plus optimism compounds into a single larger penalty") {
  {
    const EquivalenceResult r =
        run_compounding_check(builtin("NC-EQ"), v1(0.0), v1(0.0), 1.0, 2.0, 0.1, 0.1, 1000);
    CHECK(r.max_primal_gap <= 1e-9);
    CHECK(r.max_dual_gap <= 1e-9);
  }
  {
    Eigen::VectorXd x0(2);
    x0 << 0.2, 0.9;
    const EquivalenceResult r =
        run_compounding_check(builtin("QP-EQ"), x0, v1(-0.4), 0.5, 1.5, 0.1, 0.1, 1000);
    CHECK(r.max_primal_gap <= 1e-9);
  }
  {
    // omega = 0 degenerates to the plain augmented rule, bit for bit
    const ProblemSpec p = builtin("NC-EQ");
    PrimalDualState a = initial_state(p, v1(0.0));
    PrimalDualState b = a;
    for (int t = 0; t < 200; ++t) {
      step_al_gda(p, a, hp(0.1, 0.1, 3.0));
      step_al_optimistic(p, b, hp(0.1, 0.1, 3.0, 0.0));
      CHECK(a.x == b.x);
      CHECK(a.mu == b.mu);
    }
    // the three-way comparison agrees to rounding even at zero optimism
    const EquivalenceResult r =
        run_compounding_check(p, v1(0.0), v1(0.0), 3.0, 0.0, 0.1, 0.1, 200);
    CHECK(r.max_primal_gap <= 1e-12);
  }
}

TEST_CASE("oscillation metrics separate the damped rule from the plain one") {
  const ProblemSpec p = builtin("OSC-EQ");
  const Trajectory plain =
      run(p, Rule::lag_gda, initial_state(p, v1(0.0)), hp(0.1, 0.1), 2000, 1e-12);
  const Trajectory damped =
      run(p, Rule::al_gda, initial_state(p, v1(0.0)), hp(0.1, 0.1, 2.0), 2000, 1e-12);
  const OscillationMetrics mp = oscillation_metrics(plain);
  const OscillationMetrics md = oscillation_metrics(damped);
  CHECK(mp.total_sign_changes() >= 10);
  CHECK(md.total_sign_changes() <= 2);
  CHECK(mp.total_sign_changes() > md.total_sign_changes());

  // starting at the solution: nothing to count
  const ProblemSpec q = builtin("QP-EQ");
  PrimalDualState s;
  s.x = q.known_kkt[0].x;
  s.lambda = q.known_kkt[0].lambda;
  s.mu = q.known_kkt[0].mu;
  const OscillationMetrics mz =
      oscillation_metrics(run(q, Rule::lag_gda, s, hp(0.1, 0.1), 100, 1e-9));
  CHECK(mz.total_sign_changes() == 0);
  CHECK(mz.overshoots == 0);
}

TEST_CASE("optimism sweep") {
  const ProblemSpec p = builtin("OSC-EQ");
  const std::vector<double> omegas = {0.5, 1.0, 2.0, 4.0, 8.0};
  const std::vector<SweepRow> rows = omega_sweep(p, cert_of(p), hp(0.1, 0.1), omegas, 400);
  REQUIRE(rows.size() == omegas.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].omega == omegas[i]);
    CHECK(rows[i].sign_changes >= 0);
  }
  // enough optimism pulls the spectrum onto the real axis
  CHECK(rows[3].max_abs_imag <= 1e-12);
  CHECK(rows[4].max_abs_imag <= 1e-12);
  // conditioning of the operator grows with the optimism weight
  CHECK(rows[4].condition_number > rows[0].condition_number);

  CHECK_THROWS_AS(omega_sweep(p, cert_of(p), hp(0.1, 0.1), {2.0, 1.0}, 0),
                  std::invalid_argument);
}

TEST_CASE("stabilizable optimism weights form an up-set") {
  const std::vector<double> etas = {0.1, 0.05, 0.025, 0.0125};
  {
    const ProblemSpec p = builtin("NC-EQ");
    const std::vector<InclusionVerdict> v =
        monotonic_inclusion_check(p, cert_of(p), {1.0, 2.5, 5.0, 10.0}, etas);
    REQUIRE(v.size() == 4);
    CHECK(!v[0].stabilizable);
    CHECK(v[1].stabilizable);
    CHECK(v[2].stabilizable);
    CHECK(v[3].stabilizable);
    CHECK(v[1].eta_found > 0.0);
  }
  {
    const ProblemSpec p = builtin("INEQ-ACT");
    for (const InclusionVerdict& iv :
         monotonic_inclusion_check(p, cert_of(p), {0.5, 1.0, 2.0}, etas))
      CHECK(iv.stabilizable);
  }
  CHECK_THROWS_AS(monotonic_inclusion_check(builtin("NC-EQ"), cert_of(builtin("NC-EQ")),
                                            {1.0}, {}),
                  std::invalid_argument);
}

TEST_CASE("negative optimism destabilizes and small magnitudes stay safe") {
  const ProblemSpec p = builtin("OSC-EQ");
  const StabilityReport bad = negative_optimism_check(p, cert_of(p), hp(0.1, 0.1), -2.0);
  CHECK(bad.spectral_radius > 1.0);
  const StabilityReport ok = negative_optimism_check(p, cert_of(p), hp(0.1, 0.1), -0.5);
  CHECK(ok.spectral_radius < 1.0);
  CHECK_THROWS_AS(negative_optimism_check(p, cert_of(p), hp(0.1, 0.1), 0.5),
                  std::invalid_argument);
}

TEST_CASE("empirical linear rate matches the spectral radius") {
  const ProblemSpec p = builtin("INEQ-ACT");
  PrimalDualState init;
  init.x = v1(1.001);
  init.lambda = v1(1.0);
  init.mu = empty;
  const Trajectory t = run(p, Rule::al_gda, init, hp(0.1, 0.1, 1.0), 4000, 0.0);
  const double rate = estimate_linear_rate(t, v1(1.0), v1(1.0), empty);
  CHECK(rate == doctest::Approx(0.9270156).epsilon(0.05));
}

TEST_CASE("rate estimation refuses trajectories without a convergent tail") {
  const ProblemSpec p = builtin("NC-EQ");
  PrimalDualState init;
  init.x = v1(0.9);
  init.lambda = empty;
  init.mu = v1(1.9);
  const Trajectory t = run(p, Rule::lag_gda, init, hp(0.1, 0.1), 300, 1e-12);
  CHECK_THROWS_AS(estimate_linear_rate(t, v1(1.0), empty, v1(2.0)), NoConvergentTail);
}
