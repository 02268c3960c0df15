#include <catch_amalgamated.hpp>

#include <nlslab/functionals.hpp>
#include <nlslab/propagator.hpp>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <numbers>
#include <random>

using namespace nlslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const GroundState& cubic() {
  static const GroundState gs = solve_ground_state(Nonlinearity::pure_power(3.0), 1.0, 1);
  return gs;
}

MultiSolitonConfig pair(double v, double x0 = 0.0) {
  MultiSolitonConfig cfg;
  cfg.solitons = {{1.0, {-v, 0}, {-x0, 0}, 0}, {1.0, {v, 0}, {x0, 0}, 0.3}};
  return cfg;
}

MultiSolitonConfig single(double v = 0.0) {
  MultiSolitonConfig cfg;
  cfg.solitons = {{1.0, {v, 0}, {0, 0}, 0}};
  return cfg;
}

}  // namespace

TEST_CASE("G functional basic values") {
  const Grid g = Grid::line(1024, 30.0);
  const auto nl = Nonlinearity::pure_power(3.0);
  REQUIRE(eval_G(Field(g), nl, 2).value == 0.0);

  SECTION("static ground state against sech integrals") {
    // Q = √2 sech: Q″ = Q − Q³, and ∫(Q″)² − ∫Q²(Q′)² reduces to ∫ sech^{2m} moments.
    auto q = [](double x) { return std::sqrt(2.0) / std::cosh(x); };
    auto q1 = [](double x) { return -std::sqrt(2.0) * std::tanh(x) / std::cosh(x); };
    boost::math::quadrature::exp_sinh<double> half_line;
    const double a = 2.0 * half_line.integrate([&](double x) { return std::pow(q(x) - std::pow(q(x), 3), 2); });
    const double b = 2.0 * half_line.integrate([&](double x) { return std::pow(q(x) * q1(x), 2); });
    REQUIRE_THAT(a - b, WithinRel(0.8, 1e-12));

    const Field Q = cubic().sample(g);
    const auto rep = eval_G(Q, nl, 2);
    REQUIRE_THAT(rep.value, WithinRel(a - b, 1e-10));
    REQUIRE_THAT(rep.part("derivative"), WithinRel(a, 1e-10));
    REQUIRE_THAT(rep.part("correction"), WithinRel(b, 1e-10));
  }
  SECTION("linear flow drops the correction") {
    const Field R = evaluate_soliton({1.0, {2.0, 0}, {0, 0}, 0}, cubic(), g, 0.0);
    const auto rep = eval_G(R, Nonlinearity::none(), 3);
    REQUIRE(rep.part("correction") == 0.0);
    REQUIRE_THAT(rep.value, WithinRel(std::pow(l2_norm(spectral_derivative(R, {3, 0})), 2), 1e-14));
  }
  SECTION("order limits") {
    REQUIRE_THROWS_AS(eval_G(Field(g), nl, 1), ConfigError);
    REQUIRE_THROWS_AS(eval_G(Field(g), nl, 5), ConfigError);
    REQUIRE_THROWS_AS(eval_G(Field(Grid::plane(32, 32, 8, 8)), nl, 4), ConfigError);
  }
}

TEST_CASE("G is constant along an exact soliton") {
  const Grid g = Grid::line(1024, 40.0);
  const SolitonParams p{1.0, {3.0, 0}, {-6.0, 0}, 0.2};
  const auto nl = Nonlinearity::pure_power(3.0);
  for (int s : {2, 3, 4}) {
    const double g0 = eval_G(evaluate_soliton(p, cubic(), g, 0.5), nl, s).value;
    const double g1 = eval_G(evaluate_soliton(p, cubic(), g, 2.25), nl, s).value;
    REQUIRE(std::abs(g1 - g0) < 1e-7 * std::abs(g0));
  }
  const Grid g2 = Grid::plane(128, 128, 16.0, 16.0);
  const auto gs2 = solve_ground_state(nl, 1.0, 2);
  const SolitonParams p2{1.0, {1.0, 0.5}, {-2.0, 0}, 0};
  const double a = eval_G(evaluate_soliton(p2, gs2, g2, 0.0), nl, 3).value;
  const double b = eval_G(evaluate_soliton(p2, gs2, g2, 1.0), nl, 3).value;
  REQUIRE(std::abs(a - b) < 1e-7 * std::abs(a));
}

TEST_CASE("G drift along a propagated single soliton is integrator noise") {
  const Grid g = Grid::line(1024, 40.0);
  const auto nl = Nonlinearity::pure_power(3.0);
  auto drift = [&](double dt) {
    PropagationPlan plan;
    plan.dt = dt;
    plan.t_end = 5.0;
    plan.snapshot_stride = static_cast<int>(std::lround(0.25 / dt));
    const auto traj = propagate(evaluate_soliton({1.0, {0.0, 0}, {-5.0, 0}, 0}, cubic(), g, 0.0), plan, nl);
    const auto rep = eval_G_drift(traj.snapshots, nl, 2);
    REQUIRE(rep.reference_time == 5.0);
    return rep.max_abs_drift;
  };
  const double coarse = drift(5e-4), fine = drift(2.5e-4);
  REQUIRE(fine < 1e-6);
  REQUIRE_THAT(coarse / fine, WithinRel(4.0, 0.2));  // the splitting error, second order in dt
}

TEST_CASE("drift fits report degenerate inputs") {
  const MultiSoliton ms(pair(1.0));  // centres at ∓t: overlapping near t = 0
  std::vector<double> t, gval;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.25 * i);
    gval.push_back(1.0 + std::exp(-3.0 * t.back()));
  }
  DriftFitOptions opt;
  opt.solitons = &ms;
  const auto rep = fit_drift(t, gval, opt);
  REQUIRE(rep.overlap_in_window);
  REQUIRE_FALSE(rep.reliable);

  opt.t_min = 3.0;
  const auto clean = fit_drift(t, gval, opt);
  REQUIRE(clean.reliable);
  REQUIRE(clean.log_fit.slope < 0.0);

  const auto few = fit_drift({1.0, 2.0, 3.0}, {1.0, 1.1, 1.2});
  REQUIRE(few.status == "insufficient data");
  REQUIRE_FALSE(few.reliable);
}

TEST_CASE("smooth step profile") {
  const double A0 = 1.5;
  REQUIRE(cutoff_profile(-A0 - 1e-9, A0).value == 1.0);
  REQUIRE(cutoff_profile(-7.0, A0).value == 1.0);
  REQUIRE(cutoff_profile(A0 + 1e-9, A0).value == 0.0);
  REQUIRE_THAT(cutoff_profile(0.0, A0).value, WithinAbs(0.5, 1e-14));
  double prev = 1.0;
  for (double y = -A0; y <= A0; y += 0.01) {
    const auto j = cutoff_profile(y, A0);
    REQUIRE(j.value <= prev + 1e-15);
    REQUIRE(j.d1 <= 0.0);
    prev = j.value;
  }
  // Analytic derivatives against differences of the tabulated profile and of each other.
  for (double y : {-1.2, -0.4, 0.3, 1.1}) {
    const double h = 1e-4;
    const auto j = cutoff_profile(y, A0);
    REQUIRE_THAT((cutoff_profile(y + h, A0).value - cutoff_profile(y - h, A0).value) / (2 * h), WithinAbs(j.d1, 1e-8));
    REQUIRE_THAT((cutoff_profile(y + h, A0).d1 - cutoff_profile(y - h, A0).d1) / (2 * h), WithinAbs(j.d2, 1e-7));
    REQUIRE_THAT((cutoff_profile(y + h, A0).d2 - cutoff_profile(y - h, A0).d2) / (2 * h), WithinAbs(j.d3, 1e-6));
  }
}

TEST_CASE("cutoff family") {
  MultiSolitonConfig cfg;
  cfg.solitons = {{1.0, {4.0, 0}, {2.0, 0}, 0}, {1.0, {-4.0, 0}, {-6.0, 0}, 0}, {0.5, {0.5, 0}, {1.0, 0}, 0}};
  const CutoffFamily cf(cfg, 1.0);
  REQUIRE(cf.ordering() == std::vector<std::size_t>{1, 2, 0});
  REQUIRE_THAT(cf.sigma()[0], WithinAbs(-1.75, 1e-15));
  REQUIRE_THAT(cf.sigma()[1], WithinAbs(2.25, 1e-15));
  REQUIRE_THAT(cf.xi()[0], WithinAbs(-2.5, 1e-15));
  REQUIRE_THAT(cf.xi()[1], WithinAbs(1.5, 1e-15));
  REQUIRE(cf.gamma() > 0.0);

  REQUIRE_THROWS_AS(CutoffFamily(cfg, 1.75), ConfigError);
  REQUIRE_THROWS_AS(CutoffFamily(cfg, 0.0), ConfigError);
  REQUIRE_THROWS_AS(cf.psi(1, 0.0, 0.0), ConfigError);

  const Grid g = Grid::line(2048, 120.0);
  REQUIRE_THROWS_AS(eval_cutoffs(cf, g, -1.0), ConfigError);
  for (double t : {0.5, 3.0, 10.0, 25.0}) {
    const auto c = eval_cutoffs(cf, g, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(c.phi[0][i] + c.phi[1][i] + c.phi[2][i] - 1.0));
    REQUIRE(worst < 1e-12);
  }
  // Each φ_k is one near its own soliton at large t.
  const double t = 20.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const Vec c = cfg.solitons[k].center(t);
    REQUIRE(cf.phi(k, t, c[0]).value == 1.0);
  }

  SECTION("derivatives scale like 1/t") {
    auto sup = [&](double tt) {
      const auto c = eval_cutoffs(cf, g, tt);
      double m = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(c.dx[2][i]));
      return m;
    };
    REQUIRE_THAT(sup(10.0) / sup(20.0), WithinRel(2.0, 0.05));
  }
  SECTION("analytic derivatives match differences") {
    const double x = 2.3 * 10.0 + 1.4, tt = 10.0, h = 1e-4;
    const auto j = cf.phi(0, tt, x);
    REQUIRE_THAT((cf.phi(0, tt, x + h).value - cf.phi(0, tt, x - h).value) / (2 * h), WithinAbs(j.dx, 1e-8));
    REQUIRE_THAT((cf.phi(0, tt + h, x).value - cf.phi(0, tt - h, x).value) / (2 * h), WithinAbs(j.dt, 1e-8));
  }
}

TEST_CASE("localization bounds hold with one constant each") {
  const MultiSolitonConfig cfg = pair(2.0, 3.0);
  const MultiSoliton ms(cfg);
  const CutoffFamily cf(cfg, 0.5);
  const double gamma = cf.gamma();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ut(10.0, 40.0), ux(-1.0, 1.0);
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  for (int n = 0; n < 50; ++n) {
    const double t = ut(rng);
    const double x = ux(rng) * 3.0 * t;
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& p = ms.params(k);
      const auto& gs = ms.ground_state(k);
      const double y = x - p.center(t)[0];
      const double r = gs.at({y, 0}), dr = std::hypot(gs.derivative(std::abs(y)), 0.5 * p.v[0] * r);
      const double rt = (p.omega + 0.25 * p.speed_squared()) * r + std::abs(p.v[0]) * dr;
      const double shape = std::exp(-gamma * t - std::sqrt(p.omega) / 4.0 * std::abs(x - p.v[0] * t));
      for (std::size_t j = 0; j < 2; ++j) {
        const auto phi = cf.phi(j, t, x);
        if (j != k) c1 = std::max(c1, (r + dr) * std::abs(phi.value) / shape);
        else c2 = std::max(c2, (r + dr + rt) * std::abs(phi.value - 1.0) / shape);
        c4 = std::max(c4, (r + dr) * std::abs(phi.dx) / shape);
        c3 = std::max(c3, t * (std::abs(phi.dx) + std::abs(phi.dxxx) + std::abs(phi.dt)));
      }
    }
  }
  for (double c : {c1, c2, c3, c4}) {
    REQUIRE(std::isfinite(c));
    REQUIRE(c < 50.0);
  }
}

TEST_CASE("Weinstein functional H") {
  const Grid g = Grid::line(1024, 30.0);
  const MultiSoliton ms(single());
  const CutoffFamily cf(ms.config(), 1.0);
  // At t = 2π the resting soliton R equals Q.
  const double t = 2.0 * std::numbers::pi;
  const Field Q = ms.component(0, g, t);
  REQUIRE(eval_weinstein_H(Field(g), ms, cf, t).value == 0.0);
  REQUIRE(std::abs(eval_weinstein_H(cplx(0, 1) * Q, ms, cf, t).value) < 1e-10);
  const Field dQ = ms.gradient(0, g, t, 0);
  REQUIRE(std::abs(eval_weinstein_H(dQ, ms, cf, t).value) < 1e-10);
  // On Q itself H = ⟨L₊Q, Q⟩ = −2∫Q⁴ = −32/3.
  const auto rep = eval_weinstein_H(Q, ms, cf, t);
  REQUIRE_THAT(rep.value, WithinRel(-32.0 / 3.0, 1e-10));
  REQUIRE_THAT(rep.part("gradient") + rep.part("potential") + rep.part("mass") + rep.part("momentum"),
               WithinRel(rep.value, 1e-14));
  REQUIRE_THAT(rep.part("soliton.1"), WithinRel(rep.value, 1e-14));
}

TEST_CASE("H and H-tilde agree to third order") {
  const Grid g = Grid::line(1024, 30.0);
  const MultiSoliton ms(single(1.0));
  const CutoffFamily cf(ms.config(), 1.0);
  const double t = 1.0;
  const Field phi = ms.sum(g, t);
  REQUIRE(eval_weinstein_Htilde(Field(g), phi, ms, cf, t).value == 0.0);
  const Field bump = Field::sample(g, [](const Vec& x) { return std::exp(-std::pow(x[0] - 1.5, 2)) * cplx(1.0, 0.5); });
  const auto big = compare_H_Htilde(1e-2 * bump, phi, ms, cf, t);
  const auto small = compare_H_Htilde(1e-3 * bump, phi, ms, cf, t);
  REQUIRE(big.gap > 0.0);
  const double ratio = big.gap / small.gap;
  REQUIRE(ratio > 1000.0 / 3.0);
  REQUIRE(ratio < 3000.0);
  REQUIRE_THAT(big.z_h1_cubed / small.z_h1_cubed, WithinRel(1000.0, 1e-10));

  const auto rep = eval_weinstein_Htilde(1e-2 * bump, phi, ms, cf, t);
  REQUIRE(std::isfinite(rep.value));
  const double sum = rep.part("gradient") + rep.part("potential") + rep.part("mass") + rep.part("momentum");
  REQUIRE(std::abs(sum - rep.value) < 1e-12 * std::abs(rep.value));

  SECTION("two solitons, quintic") {
    MultiSolitonConfig cfg = pair(3.0, 6.0);
    cfg.nl = Nonlinearity::pure_power(5.0);
    const MultiSoliton m2(cfg);
    const CutoffFamily c2(cfg, 1.0);
    const Field p2 = m2.sum(g, 2.0);
    const auto a = compare_H_Htilde(1e-2 * bump, p2, m2, c2, 2.0);
    const auto b = compare_H_Htilde(1e-3 * bump, p2, m2, c2, 2.0);
    REQUIRE(a.gap / b.gap > 1e2);
  }
}

TEST_CASE("Main term") {
  const Grid g = Grid::line(2048, 120.0);
  const MultiSolitonConfig cfg = pair(4.0);
  const CutoffFamily cf(cfg, 1.0);
  REQUIRE(eval_main_term(Field(g), cf, cfg, 10.0) == 0.0);

  const Field centred = Field::sample(g, [](const Vec& x) { return std::exp(-x[0] * x[0]) * std::polar(1.0, 0.7 * x[0]); });
  const double m10 = eval_main_term(centred, cf, cfg, 10.0);
  const double m20 = eval_main_term(centred, cf, cfg, 20.0);
  REQUIRE(std::abs(m10) > 1e-6);
  REQUIRE_THAT(std::abs(m10 / m20), WithinRel(2.0, 0.25));

  const Field away = Field::sample(g, [](const Vec& x) { return std::exp(-std::pow(x[0] - 25.0, 2)); });
  REQUIRE(std::abs(eval_main_term(away, cf, cfg, 10.0)) < 1e-12);
}
