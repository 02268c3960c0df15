#include <catch_amalgamated.hpp>

#include <nlslab/soliton.hpp>

#include <numbers>

using namespace nlslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double sup_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

const GroundState& cubic() {
  static const GroundState gs = solve_ground_state(Nonlinearity::pure_power(3.0), 1.0, 1);
  return gs;
}

}  // namespace

TEST_CASE("static soliton samples the ground state") {
  const Grid g = Grid::line(512, 30.0);
  const Field r = evaluate_soliton({1.0, {0, 0}, {0, 0}, 0.0}, cubic(), g, 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    REQUIRE(r[i].imag() == 0.0);
    REQUIRE(r[i].real() == cubic().value(g.point(i)[0]));
  }
  const Field rt = evaluate_soliton({1.0, {0, 0}, {0, 0}, 0.0}, cubic(), g, std::numbers::pi / 2);
  for (std::size_t i = 0; i < r.size(); ++i) REQUIRE(std::abs(rt[i] - cplx(0, 1) * r[i]) < 1e-15);
}

TEST_CASE("moving soliton modulus and momentum") {
  const Grid g = Grid::line(2048, 40.0);
  const SolitonParams p{1.0, {4.0, 0}, {-3.0, 0}, 0.4};
  const Field r = evaluate_soliton(p, cubic(), g, 1.5);
  for (std::size_t i = 0; i < r.size(); i += 17) REQUIRE_THAT(std::abs(r[i]), WithinAbs(cubic().value(g.point(i)[0] - 3.0), 1e-15));

  const Field r0 = evaluate_soliton(p, cubic(), g, 0.0);
  const double momentum = inner_product_imag(spectral_derivative(r0, {1, 0}), r0);
  REQUIRE_THAT(momentum, WithinRel(8.0, 1e-10));
}

TEST_CASE("boundary proximity is flagged") {
  const Grid g = Grid::line(256, 20.0);
  bool flag = false;
  evaluate_soliton({1.0, {2.0, 0}, {0, 0}, 0}, cubic(), g, 1.0, &flag);
  REQUIRE_FALSE(flag);
  evaluate_soliton({1.0, {2.0, 0}, {0, 0}, 0}, cubic(), g, 8.0, &flag);
  REQUIRE(flag);
}

TEST_CASE("degenerate or mismatched parameters are rejected") {
  const Grid g = Grid::line(64, 20.0);
  REQUIRE_THROWS_AS(evaluate_soliton({0.0, {0, 0}, {0, 0}, 0}, cubic(), g, 0.0), ConfigError);
  REQUIRE_THROWS_AS(evaluate_soliton({2.0, {0, 0}, {0, 0}, 0}, cubic(), g, 0.0), ConfigError);

  MultiSolitonConfig cfg;
  cfg.solitons = {{1.0, {1.0, 0}, {0, 0}, 0}, {1.0, {1.0, 0}, {5, 0}, 0}};
  REQUIRE_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("solitons 1 and 2"));
}

TEST_CASE("two expressions for the soliton time derivative agree") {
  const Grid g = Grid::line(1024, 40.0);
  SECTION("resting soliton") {
    const SolitonParams p{1.0, {0, 0}, {0, 0}, 0.3};
    const auto d = soliton_time_derivative(p, cubic(), g, 0.7);
    const Field r = evaluate_soliton(p, cubic(), g, 0.7);
    REQUIRE(sup_diff(d.transport, cplx(0, 1) * r) < 1e-15);
    REQUIRE(sup_diff(d.flow, cplx(0, 1) * r) < 1e-10);
  }
  SECTION("boosted soliton") {
    const SolitonParams p{1.0, {4.0, 0}, {-5.0, 0}, 0.0};
    const auto d = soliton_time_derivative(p, cubic(), g, 1.0);
    const Field r = evaluate_soliton(p, cubic(), g, 1.0);
    REQUIRE(l2_norm(d.transport - d.flow) / l2_norm(r) < 1e-8);
  }
  SECTION("2D soliton") {
    const auto gs2 = solve_ground_state(Nonlinearity::pure_power(3.0), 1.0, 2);
    const Grid g2 = Grid::plane(384, 384, 24.0, 24.0);
    const SolitonParams p{1.0, {1.0, -0.5}, {-2.0, 1.0}, 0.0};
    const auto d = soliton_time_derivative(p, gs2, g2, 0.5);
    const Field r = evaluate_soliton(p, gs2, g2, 0.5);
    REQUIRE(l2_norm(d.transport - d.flow) / l2_norm(r) < 1e-7);
  }
}

TEST_CASE("NLS residual of a finite-difference time derivative") {
  const Grid g = Grid::line(1024, 40.0);
  const SolitonParams p{1.0, {2.0, 0}, {-4.0, 0}, 0.0};
  const double t = 0.8, h = 1e-4;
  // Fourth-order centred difference in time.
  Field dt = evaluate_soliton(p, cubic(), g, t - 2 * h) - evaluate_soliton(p, cubic(), g, t + 2 * h);
  dt += 8.0 * (evaluate_soliton(p, cubic(), g, t + h) - evaluate_soliton(p, cubic(), g, t - h));
  dt *= cplx(1.0 / (12 * h));
  const auto d = soliton_time_derivative(p, cubic(), g, t);
  REQUIRE(l2_norm(dt - d.flow) < 1e-7);
}

TEST_CASE("symmetry transforms") {
  const Grid g = Grid::line(1024, 30.0);
  const SolitonParams rest{1.0, {0, 0}, {0, 0}, 0.0};
  Field u = evaluate_soliton(rest, cubic(), g, 0.5);

  SECTION("identity") {
    REQUIRE(sup_diff(apply_invariance(u, 0.0, {0, 0}, {0, 0}, 0.0), u) < 1e-14);
    REQUIRE(sup_diff(apply_scaling(u, 1.0, 3.0), u) < 1e-14);
  }
  SECTION("boost to v = 2") {
    const Field boosted = apply_invariance(u, 0.0, {1.0, 0}, {2.0, 0}, 0.2);
    const Field direct = evaluate_soliton({1.0, {2.0, 0}, {1.0, 0}, 0.2}, cubic(), g, 0.5);
    REQUIRE(boosted.time == 0.5);
    REQUIRE(sup_diff(boosted, direct) < 1e-9);
  }
  SECTION("time shift") {
    const Field shifted = apply_invariance(u, 0.25, {0, 0}, {0, 0}, 0.0);
    REQUIRE(shifted.time == 0.75);
    REQUIRE(sup_diff(shifted, u) < 1e-13);  // the resting soliton only rotates in time
  }
  SECTION("scaling to omega = 1/4") {
    const Field scaled = apply_scaling(u, 4.0, 3.0);
    const auto quarter = rescale_ground_state(cubic(), 0.25);
    const Field direct = evaluate_soliton({0.25, {0, 0}, {0, 0}, 0.0}, quarter, g, 2.0);
    REQUIRE(scaled.time == 2.0);
    REQUIRE(sup_diff(scaled, direct) < 1e-9);
    REQUIRE_THROWS_AS(apply_scaling(u, 0.0, 3.0), ConfigError);
  }
}

TEST_CASE("cross terms of separating solitons decay exponentially") {
  // ∫ sech(x) sech(x + c) dx = 2c / sinh(c): the decay rate in t is sqrt(ω)|Δv|.
  const Grid g = Grid::line(2048, 40.0);
  const SolitonParams a{1.0, {-4.0, 0}, {0, 0}, 0}, b{1.0, {4.0, 0}, {0, 0}, 0};
  std::vector<double> ts{1.0, 1.5, 2.0}, logs;
  for (double t : ts) {
    const Field ra = evaluate_soliton(a, cubic(), g, t), rb = evaluate_soliton(b, cubic(), g, t);
    double acc = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) acc += std::abs(ra[i] * rb[i]);
    acc *= g.cell_volume();
    const double c = 8.0 * t;
    REQUIRE_THAT(acc, WithinRel(2.0 * 2.0 * c / std::sinh(c), 1e-8));
    logs.push_back(std::log(acc));
  }
  const double slope = (logs[2] - logs[0]) / (ts[2] - ts[0]);
  REQUIRE_THAT(-slope, WithinRel(8.0, 0.2));
}

TEST_CASE("multi-soliton sums its components") {
  MultiSolitonConfig cfg;
  cfg.solitons = {{1.0, {-4.0, 0}, {8.0, 0}, 0}, {0.5, {4.0, 0}, {-8.0, 0}, 1.0}};
  const MultiSoliton ms(cfg);
  const Grid g = Grid::line(512, 40.0);
  const Field s = ms.sum(g, 0.3);
  const Field expect = ms.component(0, g, 0.3) + ms.component(1, g, 0.3);
  REQUIRE(sup_diff(s, expect) == 0.0);
  REQUIRE(&ms.ground_state(0) != &ms.ground_state(1));
  REQUIRE_THAT(ms.min_separation(1.0), WithinAbs(8.0, 1e-14));
}
