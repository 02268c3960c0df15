#include <catch_amalgamated.hpp>

#include <nlslab/linops.hpp>

#include <random>

using namespace nlslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GroundState cubic(double omega = 1.0) { return solve_ground_state(Nonlinearity::pure_power(3.0), omega, 1); }

}  // namespace

TEST_CASE("Poschl-Teller spectrum of the cubic operators") {
  const GroundState gs = cubic();
  const auto lp = lowest_eigenpairs(assemble(OperatorKind::L_plus, gs, 2000, 20.0), 3);
  REQUIRE_THAT(lp.values[0], WithinAbs(-3.0, 1e-4));
  REQUIRE_THAT(lp.values[1], WithinAbs(0.0, 1e-4));
  REQUIRE(lp.values[2] > 0.5);

  const auto op = assemble(OperatorKind::L_minus, gs, 2000, 20.0);
  const auto lm = lowest_eigenpairs(op, 2);
  REQUIRE_THAT(lm.values[0], WithinAbs(0.0, 1e-6));
  const Eigen::VectorXd q = constraint(op, "Q");
  const Eigen::VectorXd v = lm.vectors.col(0);
  const double corr = std::abs(q.dot(v)) / (q.norm() * v.norm());
  REQUIRE(corr > 1.0 - 1e-8);
}

TEST_CASE("coercivity of L_plus under orthogonality constraints") {
  const GroundState gs = solve_ground_state(Nonlinearity::pure_power(5.0), 1.0, 1);
  SECTION("full constraint set is coercive") {
    const auto op = assemble(OperatorKind::L_plus, gs, 1000, 20.0);
    const auto rep = constrained_min_eig(op, constraints(op, {"Q", "dQ", "xdQ"}));
    REQUIRE(rep.coercive());
    REQUIRE(rep.mu_plus >= 0.01);
    REQUIRE(rep.min_eig_unconstrained < 0.0);
    REQUIRE(std::is_sorted(rep.rayleigh_head.begin(), rep.rayleigh_head.end()));

    std::mt19937 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd c(rep.complement.cols());
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = n(rng);
      const Eigen::VectorXd w = rep.complement * c;
      const double ray = w.dot(op.form() * w) / w.dot(op.h1_gram() * w);
      REQUIRE(ray >= rep.mu_plus * (1.0 - 1e-10));
    }
  }
  SECTION("one constraint leaves a zero mode that converges") {
    std::vector<double> m;
    for (int M : {500, 1000, 2000}) {
      const auto op = assemble(OperatorKind::L_plus, gs, M, 20.0);
      m.push_back(constrained_min_eig(op, constraints(op, {"Q"})).min_eig_constrained);
    }
    for (double v : m) REQUIRE(std::abs(v) < 5e-3);
    REQUIRE(std::abs(m[1]) < std::abs(m[0]));
    REQUIRE(std::abs(m[2]) < std::abs(m[1]));
  }
  SECTION("adding constraints never lowers the minimum") {
    const auto op = assemble(OperatorKind::L_plus, gs, 600, 20.0);
    const double none = constrained_min_eig(op, {}).min_eig_constrained;
    const double one = constrained_min_eig(op, constraints(op, {"Q"})).min_eig_constrained;
    const double two = constrained_min_eig(op, constraints(op, {"Q", "dQ"})).min_eig_constrained;
    const double three = constrained_min_eig(op, constraints(op, {"Q", "dQ", "xdQ"})).min_eig_constrained;
    REQUIRE(none <= one);
    REQUIRE(one <= two + 1e-9);  // both minima are the same near-zero mode up to roundoff
    REQUIRE(two <= three);
  }
  SECTION("degenerate constraints are rejected") {
    const auto op = assemble(OperatorKind::L_plus, gs, 400, 20.0);
    const Eigen::VectorXd q = constraint(op, "Q");
    REQUIRE_THROWS_AS(constrained_min_eig(op, {q, 2.0 * q}), ConfigError);
  }
}

TEST_CASE("spectra scale with omega") {
  const GroundState g1 = cubic(1.0), g4 = cubic(4.0);
  const auto s1 = lowest_eigenpairs(assemble(OperatorKind::L_plus, g1, 800, 20.0), 4).values;
  const auto s4 = lowest_eigenpairs(assemble(OperatorKind::L_plus, g4, 800, 10.0), 4).values;
  for (std::size_t i = 0; i < s1.size(); ++i) REQUIRE_THAT(s4[i], WithinAbs(4.0 * s1[i], 1e-6));
}

TEST_CASE("resolution guard") {
  const GroundState gs = cubic(4.0);
  REQUIRE_THROWS_AS(assemble(OperatorKind::L_plus, gs, 100, 20.0), ConfigError);
  REQUIRE_NOTHROW(assemble(OperatorKind::L_plus, gs, 1000, 20.0));
}

TEST_CASE("critical identities") {
  SECTION("quintic line") {
    const auto rep = verify_critical_identities(solve_ground_state(Nonlinearity::pure_power(5.0), 1.0, 1));
    REQUIRE(rep.identity_residual < 1e-6);
    REQUIRE(rep.nonzero_value > 0.0);
    REQUIRE(rep.relative_agreement < 1e-8);
  }
  SECTION("cubic plane") {
    const auto rep = verify_critical_identities(solve_ground_state(Nonlinearity::pure_power(3.0), 1.0, 2));
    REQUIRE(rep.identity_residual < 1e-6);
    REQUIRE(rep.relative_agreement < 1e-8);
  }
  SECTION("non-critical powers are rejected") {
    REQUIRE_THROWS_AS(verify_critical_identities(cubic()), ConfigError);
  }
}

TEST_CASE("radial sectors in the plane") {
  const GroundState gs = solve_ground_state(Nonlinearity::pure_power(3.0), 1.0, 2);
  const auto lp0 = lowest_eigenpairs(assemble_radial(OperatorKind::L_plus, gs, 400, 20.0, 0), 2);
  REQUIRE(lp0.values[0] < 0.0);
  // zero modes of the second-order finite-volume scheme converge at rate h²
  for (auto [kind, ell] : {std::pair{OperatorKind::L_plus, 1}, std::pair{OperatorKind::L_minus, 0}}) {
    const double coarse = lowest_eigenpairs(assemble_radial(kind, gs, 500, 20.0, ell), 1).values[0];
    const double fine = lowest_eigenpairs(assemble_radial(kind, gs, 1000, 20.0, ell), 1).values[0];
    REQUIRE(std::abs(fine) < 1e-3);
    REQUIRE_THAT(coarse / fine, WithinAbs(4.0, 0.2));
  }
  const auto sc = sector_coercivity(OperatorKind::L_minus, gs, {"Q"}, 400, 20.0, 2);
  REQUIRE(sc.mu > 0.0);
}

TEST_CASE("supercritical instability") {
  const GroundState gs = solve_ground_state(Nonlinearity::pure_power(7.0), 1.0, 1);
  const auto pair = instability_eigenpair(gs, 1200, 20.0);
  REQUIRE(pair.e0 > 0.0);
  REQUIRE(pair.residual < 1e-6);
  double norm = 0.0, tail = 0.0;
  const double h = pair.x[1] - pair.x[0];
  for (std::size_t i = 0; i < pair.x.size(); ++i) {
    norm += h * std::norm(pair.Y[i]);
    if (std::abs(pair.x[i]) > 15.0) tail = std::max(tail, std::abs(pair.Y[i]));
  }
  REQUIRE_THAT(norm, WithinAbs(1.0, 1e-12));
  REQUIRE(tail < 1e-5);
  REQUIRE_THROWS_AS(instability_eigenpair(cubic()), ConfigError);
}
