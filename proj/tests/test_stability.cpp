#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "pdlab/stability.hpp"

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

}  // namespace

TEST_CASE("certificates at documented points") {
  {
    const KKTCertificate c = kkt_certificate(builtin("INEQ-ACT"), v1(1.0), v1(1.0), empty);
    CHECK(c.stationarity <= 1e-12);
    CHECK(c.feas_g <= 1e-12);
    CHECK(c.complementarity <= 1e-12);
    REQUIRE(c.active.size() == 1);
    CHECK(c.active[0] == 0);
    CHECK(c.strict_margin == doctest::Approx(1.0));
    CHECK(c.licq_min_singular == doctest::Approx(1.0));
  }
  {
    const ProblemSpec p = builtin("INEQ-INACT");
    const KKTCertificate c =
        kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);
    CHECK(c.active.empty());
    CHECK(c.strict_margin == doctest::Approx(1.0));
    CHECK(check_assumptions(c).all());
  }
  {
    // zero multiplier on an active constraint: the degenerate case
    const KKTCertificate c = kkt_certificate(builtin("INEQ-ACT"), v1(1.0), v1(0.0), empty);
    CHECK(c.strict_margin == doctest::Approx(0.0));
    CHECK(!check_assumptions(c).strict_cs);
    CHECK_THROWS_AS(active_partition(builtin("INEQ-ACT"), c), StrictComplementarityViolated);
  }
}

TEST_CASE("active partition blocks") {
  {
    const ProblemSpec p = builtin("INEQ-ACT");
    const ActivePartition part =
        active_partition(p, kkt_certificate(p, v1(1.0), v1(1.0), empty));
    CHECK(part.d == 1);
    CHECK(part.active_count() == 1);
    CHECK(part.inactive_count() == 0);
    CHECK(part.A_mat(0, 0) == doctest::Approx(1.0));
    CHECK(part.B_mat(0, 0) == doctest::Approx(1.0));
  }
  {
    const ProblemSpec p = builtin("MIXED-2");
    const KKTCertificate c =
        kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);
    const ActivePartition part = active_partition(p, c);
    CHECK(part.d == 2);
    REQUIRE(part.inactive.size() == 1);
    CHECK(part.inactive[0] == 1);
    CHECK(part.B_mat.rows() == part.active_count() + part.n_eq);
  }
}

TEST_CASE("linearized operators match the hand calculation") {
  const ProblemSpec p = builtin("INEQ-ACT");
  const ActivePartition part = active_partition(p, kkt_certificate(p, v1(1.0), v1(1.0), empty));
  {
    const Eigen::MatrixXd jal = assemble_J_AL(part, hp(0.1, 0.1, 1.0));
    REQUIRE(jal.rows() == 2);
    CHECK(jal(0, 0) == doctest::Approx(0.8));
    CHECK(jal(0, 1) == doctest::Approx(-0.1));
    CHECK(jal(1, 0) == doctest::Approx(0.08));
    CHECK(jal(1, 1) == doctest::Approx(0.99));
  }
  {
    const Eigen::MatrixXd jog = assemble_J_OG(part, hp(0.1, 0.1, 1.0, 1.0));
    REQUIRE(jog.rows() == 3);
    Eigen::MatrixXd want(3, 3);
    want << 0.79, 0.1, -0.1, 1.0, 0.0, 0.0, 1.1, -1.0, 1.0;
    CHECK((jog - want).cwiseAbs().maxCoeff() <= 1e-14);
  }
  CHECK_THROWS_AS(assemble_J_AL(part, hp(0.1, 2.0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(assemble_J_AL(part, hp(0.1, 0.1, -1.0)), std::invalid_argument);
  CHECK_THROWS_AS(assemble_J_OG(part, hp(-0.1, 0.1, 1.0, 1.0)), std::invalid_argument);
}

TEST_CASE("eigen analysis basics") {
  {
    const StabilityReport r = eigen_analysis(Eigen::MatrixXd::Identity(3, 3));
    CHECK(r.spectral_radius == doctest::Approx(1.0));
    CHECK(r.condition_number == doctest::Approx(1.0));
    CHECK(r.marginal);
    CHECK(!r.is_lssp);
  }
  {
    // oscillatory primal-dual linearization: a complex pair
    Eigen::MatrixXd m(2, 2);
    m << 0.89, -0.1, 0.1, 1.0;
    const StabilityReport r = eigen_analysis(m);
    double max_imag = 0.0;
    for (const auto& e : r.eigenvalues) max_imag = std::max(max_imag, std::abs(e.imag()));
    CHECK(max_imag == doctest::Approx(0.0835164).epsilon(1e-4));
  }
}

TEST_CASE("pinned spectral radii") {
  const ProblemSpec p = builtin("INEQ-ACT");
  const ActivePartition part = active_partition(p, kkt_certificate(p, v1(1.0), v1(1.0), empty));
  const StabilityReport al = analyze_J_AL(part, hp(0.1, 0.1, 1.0));
  CHECK(al.spectral_radius == doctest::Approx(0.9270156).epsilon(1e-6));
  CHECK(al.is_lssp);
  CHECK(al.trivial_expected == 0);
  const StabilityReport og = analyze_J_OG(part, hp(0.1, 0.1, 1.0, 1.0));
  CHECK(og.spectral_radius == doctest::Approx(0.9270156).epsilon(1e-6));
  CHECK(og.trivial_expected == 1);  // one structural zero from the lagged primal copy
  CHECK(og.trivial_found == og.trivial_expected);
}

TEST_CASE("closed-form characteristic polynomials vanish on the spectrum") {
  for (const char* id : {"INEQ-ACT", "QP-EQ", "NC-EQ"}) {
    const ProblemSpec p = builtin(id);
    const KKTCertificate cert =
        kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);
    const ActivePartition part = active_partition(p, cert);
    const HyperParams h = hp(0.05, 0.1, 3.0, 3.0);
    for (const auto& e : analyze_J_AL(part, h).eigenvalues)
      CHECK(std::abs(char_poly_AL(e, part, h)) <= 1e-10);
    for (const auto& e : analyze_J_OG(part, h).eigenvalues)
      CHECK(std::abs(char_poly_OG(e, part, h)) <= 1e-10);
  }
  {
    const ProblemSpec p = builtin("INEQ-INACT");
    const KKTCertificate cert =
        kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);
    const ActivePartition part = active_partition(p, cert);
    const HyperParams h = hp(0.1, 0.1, 1.0, 1.0);
    CHECK(std::abs(char_poly_AL({1.0 - h.eta_dual / h.c, 0.0}, part, h)) <= 1e-12);
  }
  {
    const ProblemSpec p = builtin("INEQ-ACT");
    const ActivePartition part =
        active_partition(p, kkt_certificate(p, v1(1.0), v1(1.0), empty));
    const HyperParams h = hp(0.1, 0.1, 1.0, 1.0);
    CHECK(std::real(char_poly_AL({0.0, 0.0}, part, h)) == doctest::Approx(0.8));
    CHECK(std::abs(char_poly_OG({0.0, 0.0}, part, h)) <= 1e-14);
  }
}

TEST_CASE("spectral radius identity between the two operators") {
  {
    const ProblemSpec p = builtin("INEQ-ACT");
    const ActivePartition part =
        active_partition(p, kkt_certificate(p, v1(1.0), v1(1.0), empty));
    const HyperParams h = hp(0.1, 0.1, 1.0, 1.0);
    const SpectralRelation rel = verify_spectral_relation(
        analyze_J_AL(part, h), analyze_J_OG(part, h), h, part.inactive_count());
    CHECK(rel.gap <= 1e-8);
  }
  {
    // inactive constraint present: the structural value 1 - eta_dual/c wins
    const ProblemSpec p = builtin("INEQ-INACT");
    const KKTCertificate cert =
        kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);
    const ActivePartition part = active_partition(p, cert);
    const HyperParams h = hp(0.15, 0.1, 1.0, 1.0);
    const StabilityReport al = analyze_J_AL(part, h);
    CHECK(al.spectral_radius == doctest::Approx(0.9));
    const SpectralRelation rel =
        verify_spectral_relation(al, analyze_J_OG(part, h), h, part.inactive_count());
    CHECK(rel.rhs == doctest::Approx(0.9));
    CHECK(rel.gap <= 1e-8);
  }
  {
    const ProblemSpec p = builtin("INEQ-ACT");
    const ActivePartition part =
        active_partition(p, kkt_certificate(p, v1(1.0), v1(1.0), empty));
    const HyperParams mismatched = hp(0.1, 0.1, 1.0, 2.0);
    CHECK_THROWS_AS(verify_spectral_relation(analyze_J_AL(part, hp(0.1, 0.1, 1.0)),
                                             analyze_J_OG(part, mismatched), mismatched,
                                             part.inactive_count()),
                    std::invalid_argument);
  }
}

TEST_CASE("convexification threshold") {
  {
    const ProblemSpec p = builtin("NC-EQ");
    const KKTCertificate cert =
        kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);
    const ActivePartition part = active_partition(p, cert);
    CHECK(convexification_threshold(part, 10.0) == doctest::Approx(2.0).epsilon(1e-6));
  }
  {
    const ProblemSpec p = builtin("QP-EQ");
    const KKTCertificate cert =
        kkt_certificate(p, p.known_kkt[0].x, p.known_kkt[0].lambda, p.known_kkt[0].mu);
    CHECK(convexification_threshold(active_partition(p, cert), 10.0) == 0.0);
  }
  {
    // negative curvature with no constraint direction to penalize
    ActivePartition part;
    part.d = 1;
    part.n_eq = 0;
    part.m_total = 0;
    part.A_mat = Eigen::MatrixXd::Constant(1, 1, -1.0);
    part.B_mat = Eigen::MatrixXd::Zero(0, 1);
    CHECK(convexification_threshold(part, 100.0) ==
          std::numeric_limits<double>::infinity());
  }
}
