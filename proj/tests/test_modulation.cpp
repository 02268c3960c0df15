#include <catch_amalgamated.hpp>

#include <nlslab/modulation.hpp>

#include <random>

using namespace nlslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

MultiSolitonConfig single(double v, double p = 3.0, int dim = 1) {
  MultiSolitonConfig cfg;
  cfg.nl = Nonlinearity::pure_power(p);
  cfg.dim = dim;
  cfg.solitons = {{1.0, {v, 0}, {0, 0}, 0}};
  return cfg;
}

MultiSolitonConfig colliding() {
  MultiSolitonConfig cfg;
  cfg.solitons = {{1.0, {-4.0, 0}, {8.0, 0}, 0}, {1.0, {4.0, 0}, {-8.0, 0}, 0}};
  return cfg;
}

Field random_field(const Grid& g, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double c = n(rng) * 3.0, w = 0.5 + std::abs(n(rng));
  const cplx amp(n(rng), n(rng));
  const double k = n(rng);
  Field f = Field::sample(g, [&](const Vec& x) { return amp * std::exp(-std::pow((x[0] - c) / w, 2)) * std::polar(1.0, k * x[0]); });
  return cplx(1.0 / l2_norm(f)) * f;
}

}  // namespace

TEST_CASE("single-soliton modulation matrix") {
  const Grid g = Grid::line(1024, 30.0);
  SECTION("resting") {
    const MultiSoliton ms(single(0.0));
    const auto sys = assemble_modulation_matrix(ms, g, 0.4, false);
    const auto& m = sys.matrix();
    REQUIRE(m.rows() == 2);
    REQUIRE_THAT(m(0, 0), WithinRel(4.0, 1e-12));
    REQUIRE_THAT(m(1, 1), WithinRel(4.0 / 3.0, 1e-12));
    REQUIRE(std::abs(m(0, 1)) < 1e-14);
  }
  SECTION("boosted") {
    const MultiSoliton ms(single(4.0));
    const auto sys = assemble_modulation_matrix(ms, g, 0.4, false);
    const auto& m = sys.matrix();
    REQUIRE_THAT(m(0, 1), WithinRel(8.0, 1e-12));
    REQUIRE_THAT(m(1, 1), WithinRel(4.0 / 3.0 + 16.0, 1e-12));
    REQUIRE((m - m.transpose()).norm() < 1e-12);
  }
  SECTION("critical third direction") {
    const MultiSoliton ms(single(0.0, 5.0));
    const auto sys = assemble_modulation_matrix(ms, g, 0.0, true);
    const auto& m = sys.matrix();
    REQUIRE(m.rows() == 3);
    REQUIRE(std::abs(m(0, 2)) < 1e-14);
    REQUIRE(std::abs(m(1, 2)) < 1e-12);
    const Field Q = ms.ground_state(0).sample(g);
    const Field xdQ = Field::sample(g, [&](const Vec& x) { return x[0] * ms.ground_state(0).gradient_at(x)[0]; });
    const double w = std::pow(l2_norm(xdQ), 2) - 0.25 * std::pow(l2_norm(Q), 2);
    REQUIRE(w > 0.0);
    REQUIRE_THAT(m(2, 2), WithinRel(w, 1e-10));
  }
}

TEST_CASE("modulation oracles") {
  const Grid g = Grid::line(1024, 30.0);
  const MultiSoliton ms(single(0.0));
  const double t = 0.7, eps = 1e-3;
  const Field R = ms.component(0, g, t);
  REQUIRE(solve_modulation(Field(g), ms, t, false).a[0] == 0.0);

  const auto s1 = solve_modulation(cplx(0, eps) * R, ms, t, false);
  REQUIRE_THAT(s1.a[0], WithinAbs(-eps, 1e-12));
  REQUIRE_THAT(s1.b[0][0], WithinAbs(0.0, 1e-12));
  const auto s2 = solve_modulation(eps * ms.gradient(0, g, t, 0), ms, t, false);
  REQUIRE_THAT(s2.a[0], WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(s2.b[0][0], WithinAbs(-eps, 1e-12));
  REQUIRE_THAT(s1.det, WithinRel(16.0 / 3.0, 1e-10));

  const MultiSoliton crit(single(0.0, 5.0));
  const auto s3 = solve_modulation(Field(g), crit, t, true);
  REQUIRE(s3.c.has_value());
  REQUIRE((*s3.c)[0] == 0.0);
}

TEST_CASE("orthogonality, linearity and the coefficient bound") {
  const Grid g = Grid::line(1024, 40.0);
  const MultiSoliton ms(colliding());
  const double t = 5.0;
  const ModulationSystem sys(ms, g, t, false);
  REQUIRE(sys.warning().empty());
  REQUIRE((sys.matrix() - sys.matrix().transpose()).norm() < 1e-12 * sys.matrix().norm());
  std::mt19937 rng(5);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Field z = random_field(g, rng);
    const auto st = solve_modulation(z, sys);
    for (double r : st.residuals) REQUIRE(std::abs(r) < 1e-10 * l2_norm(z));
    double m = 0.0;
    for (std::size_t k = 0; k < 2; ++k) m = std::max({m, std::abs(st.a[k]), std::abs(st.b[k][0])});
    worst = std::max(worst, m);
    const auto scaled = solve_modulation(cplx(1e-3) * z, sys);
    REQUIRE_THAT(scaled.a[0], WithinAbs(1e-3 * st.a[0], 1e-14));
  }
  REQUIRE(worst < 2.0);  // |a|, |b| ≤ C‖z‖ with one constant

  const Field z1 = random_field(g, rng), z2 = random_field(g, rng);
  const auto s1 = solve_modulation(z1, sys), s2 = solve_modulation(z2, sys);
  const auto s12 = solve_modulation(cplx(2.0) * z1 + cplx(-0.5) * z2, sys);
  for (std::size_t r = 0; r < s12.coefficients.size(); ++r)
    REQUIRE_THAT(s12.coefficients[r], WithinAbs(2.0 * s1.coefficients[r] - 0.5 * s2.coefficients[r], 1e-10));

  SECTION("critical orthogonality") {
    MultiSolitonConfig cfg = colliding();
    cfg.nl = Nonlinearity::pure_power(5.0);
    const MultiSoliton mc(cfg);
    const ModulationSystem cs(mc, g, t, true);
    const Field z = random_field(g, rng);
    const auto st = solve_modulation(z, cs);
    REQUIRE(st.residuals.size() == 6);
    for (double r : st.residuals) REQUIRE(std::abs(r) < 1e-10);
    const Field zt = modulated_error(z, cs, st);
    REQUIRE(std::abs(inner_product_imag(zt, mc.component(0, g, t))) < 1e-10);
  }
}

TEST_CASE("overlapping solitons") {
  const Grid g = Grid::line(512, 30.0);
  MultiSolitonConfig cfg;
  cfg.solitons = {{1.0, {-1e-6, 0}, {0, 0}, 0}, {1.0, {1e-6, 0}, {0, 0}, 0}};
  const MultiSoliton ms(cfg);
  const ModulationSystem sys(ms, g, 0.0, false);
  REQUIRE_FALSE(sys.warning().empty());
  REQUIRE_THROWS_AS(solve_modulation(Field(g), sys), NumericError);
}

TEST_CASE("determinant approaches its decoupled limit") {
  SECTION("single soliton is exact") {
    const Grid g = Grid::line(1024, 30.0);
    const MultiSoliton ms(single(0.0));
    const auto rep = verify_det_limit(ms, g, {1.0, 2.0, 3.0});
    REQUIRE_THAT(rep.limit, WithinRel(16.0 / 3.0, 1e-12));
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(std::abs(rep.det[i] - rep.limit) < 1e-8);
      REQUIRE(rep.interaction_gap[i] == 0.0);
    }
  }
  SECTION("two solitons separating") {
    const Grid g = Grid::line(2048, 80.0);
    const MultiSoliton ms(colliding());
    const auto rep = verify_det_limit(ms, g, {4.0, 6.0, 8.0});
    REQUIRE(rep.shrinking);
    REQUIRE(rep.log_fit.slope < 0.0);
    for (double s : rep.self_gap) REQUIRE(std::abs(s) < 1e-10 * rep.limit);
  }
  SECTION("2D translation Gram matrix is positive definite") {
    const Grid g = Grid::plane(128, 128, 16.0, 16.0);
    const MultiSoliton ms(single(0.0, 3.0, 2));
    const auto sys = assemble_modulation_matrix(ms, g, 0.0, false);
    const Eigen::MatrixXd d = sys.matrix().block(1, 1, 2, 2);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
    REQUIRE(es.eigenvalues()(0) > 0.0);
    REQUIRE_THAT(d(0, 0), WithinRel(d(1, 1), 1e-8));
    const auto rep = verify_det_limit(ms, g, {0.0});
    REQUIRE_THAT(rep.det[0], WithinRel(rep.limit, 1e-7));
  }
}

TEST_CASE("finite-difference coefficient rates") {
  std::vector<ModulationState> states(3);
  for (int n = 0; n < 3; ++n) {
    states[static_cast<std::size_t>(n)].time = n * 0.5;
    states[static_cast<std::size_t>(n)].a = {2.0 * n};
    states[static_cast<std::size_t>(n)].b = {Vec{-1.0 * n, 0.0}};
  }
  const auto r = modulation_rates(states);
  REQUIRE(r.size() == 1);
  REQUIRE_THAT(r[0].a_dot[0], WithinAbs(4.0, 1e-14));
  REQUIRE_THAT(r[0].b_dot[0][0], WithinAbs(-2.0, 1e-14));
}
