#include <catch_amalgamated.hpp>

#include <nlslab/nonlinearity.hpp>

#include <random>

using namespace nlslab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("pure power values") {
  const auto nl = Nonlinearity::pure_power(3.0);
  REQUIRE(nl.f(4.0) == 4.0);
  REQUIRE(nl.f_prime(4.0) == 1.0);
  REQUIRE_THAT(nl.F(4.0), WithinRel(8.0, 1e-15));
  REQUIRE(nl.F(0.0) == 0.0);
  REQUIRE_THROWS_AS(nl.f(-1.0), ConfigError);
  REQUIRE_THROWS_AS(Nonlinearity::pure_power(1.0), ConfigError);
}

TEST_CASE("cubic-quintic values") {
  const auto nl = Nonlinearity::cubic_quintic();
  REQUIRE(nl.f(1.0) == 0.0);
  REQUIRE(nl.f_prime(1.0) == -1.0);
  REQUIRE_THAT(nl.F(1.0), WithinRel(1.0 / 6.0, 1e-15));
}

TEST_CASE("criticality classification") {
  REQUIRE(Nonlinearity::pure_power(3.0).criticality(1) == Criticality::subcritical);
  REQUIRE(Nonlinearity::pure_power(5.0).criticality(1) == Criticality::critical);
  REQUIRE(Nonlinearity::pure_power(7.0).criticality(1) == Criticality::supercritical);
  REQUIRE(Nonlinearity::pure_power(3.0).criticality(2) == Criticality::critical);

  const auto crit = Nonlinearity::pure_power(5.0);
  REQUIRE(1.0 * 2.0 * crit.f_prime(2.0) == 2.0 * crit.f(2.0));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (const auto& [p, d] : {std::pair{5.0, 1}, std::pair{3.0, 2}, std::pair{3.0, 1}, std::pair{7.0, 1}}) {
    const auto nl = Nonlinearity::pure_power(p);
    const bool critical = nl.criticality(d) == Criticality::critical;
    for (int i = 0; i < 10; ++i) {
      const double r = u(rng);
      const bool identity = std::abs(d * r * nl.f_prime(r) - 2.0 * nl.f(r)) < 1e-12 * nl.f(r);
      REQUIRE(identity == critical);
    }
  }
}

TEST_CASE("g and its partials") {
  const auto nl = Nonlinearity::pure_power(3.0);
  REQUIRE(nl.g(0.0) == cplx(0.0));
  REQUIRE(nl.g({1.0, 1.0}) == cplx(2.0, 2.0));
  const auto jet = nl.g_partials(2.0, 1);
  REQUIRE(jet.gx == cplx(12.0));
  REQUIRE(jet.gy == cplx(0.0, 4.0));
  REQUIRE(jet.gx + cplx(0, 1) * jet.gy == cplx(8.0));

  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-2.1, 2.1);
  for (double p : {3.0, 5.0, 4.0}) {
    const auto n = Nonlinearity::pure_power(p);
    for (int i = 0; i < 20; ++i) {
      const cplx z(u(rng), u(rng));
      const auto j = n.g_partials(z, 2);
      const cplx identity = 2.0 * z * z * n.f_prime(std::norm(z));
      REQUIRE(std::abs(j.gx + cplx(0, 1) * j.gy - identity) < 1e-12 * (1 + std::abs(identity)));

      double err[2];
      for (int k = 0; k < 2; ++k) {
        const double h = k == 0 ? 1e-3 : 5e-4;
        const cplx fdx = (n.g(z + h) - n.g(z - h)) / (2 * h);
        err[k] = std::abs(j.gx - fdx);
      }
      REQUIRE(err[1] < 0.3 * err[0] + 1e-9);  // O(h^2): halving h cuts the error by ~4

      const double h = 1e-4;
      const cplx im(0, 1);
      REQUIRE(std::abs(j.gy - (n.g(z + im * h) - n.g(z - im * h)) / (2 * h)) < 1e-6 * (1 + std::abs(j.gy)));
      REQUIRE(std::abs(j.gxx - (n.g_partials(z + h, 1).gx - n.g_partials(z - h, 1).gx) / (2 * h)) < 1e-5 * (1 + std::abs(j.gxx)));
      REQUIRE(std::abs(j.gxy - (n.g_partials(z + im * h, 1).gx - n.g_partials(z - im * h, 1).gx) / (2 * h)) < 1e-5 * (1 + std::abs(j.gxy)));
      REQUIRE(std::abs(j.gyy - (n.g_partials(z + im * h, 1).gy - n.g_partials(z - im * h, 1).gy) / (2 * h)) < 1e-5 * (1 + std::abs(j.gyy)));
    }
  }
}

TEST_CASE("primitive differentiates back to f") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.9);
  for (const auto& nl : {Nonlinearity::pure_power(3.0), Nonlinearity::pure_power(4.5), Nonlinearity::cubic_quintic()}) {
    for (int i = 0; i < 10; ++i) {
      const double r = u(rng), h = 1e-5;
      REQUIRE_THAT((nl.F(r + h) - nl.F(r - h)) / (2 * h), WithinAbs(nl.f(r), 1e-9));
      REQUIRE_THAT((nl.f(r + h) - nl.f(r - h)) / (2 * h), WithinAbs(nl.f_prime(r), 1e-8));
    }
  }
}

TEST_CASE("nonsmooth origin convention") {
  const auto half = Nonlinearity::pure_power(2.0);  // f = r^{1/2}
  REQUIRE(half.nonsmooth_origin());
  REQUIRE(half.f_prime(0.0) == 0.0);
  REQUIRE(!Nonlinearity::pure_power(3.0).nonsmooth_origin());
  REQUIRE(Nonlinearity::pure_power(3.0).f_prime(0.0) == 1.0);
  REQUIRE(Nonlinearity::pure_power(5.0).f_second(0.0) == 2.0);
}

TEST_CASE("cancellation-free increments") {
  for (const auto& nl : {Nonlinearity::pure_power(3.0), Nonlinearity::pure_power(5.0), Nonlinearity::pure_power(4.2),
                         Nonlinearity::cubic_quintic()}) {
    const double a = 0.6;
    for (double d : {1e-2, -3e-3, 1e-6}) {
      // Long-double reference.
      auto fl = [&](long double r) -> long double {
        if (nl.kind() == Nonlinearity::Kind::cubic_quintic) return r - r * r;
        return std::pow(r, static_cast<long double>(nl.exponent()));
      };
      auto Fl = [&](long double r) -> long double {
        if (nl.kind() == Nonlinearity::Kind::cubic_quintic) return r * r / 2 - r * r * r / 3;
        const long double p = nl.p();
        return 2 * std::pow(r, (p + 1) / 2) / (p + 1);
      };
      const long double inc = fl(a + static_cast<long double>(d)) - fl(a);
      REQUIRE_THAT(nl.f_increment(a, d), WithinRel(static_cast<double>(inc), 1e-12));
      const long double rem = Fl(a + static_cast<long double>(d)) - Fl(a) - d * fl(a);
      if (std::abs(d) >= 1e-3) REQUIRE_THAT(nl.F_remainder(a, d), WithinRel(static_cast<double>(rem), 1e-10));
    }
    // Tiny increments, where direct differences lose every digit.
    REQUIRE_THAT(nl.f_increment(a, 1e-20), WithinRel(1e-20 * nl.f_prime(a), 1e-10));
    REQUIRE_THAT(nl.F_remainder(a, 1e-20), WithinRel(0.5e-40 * nl.f_prime(a), 1e-10));
  }
  const auto nl = Nonlinearity::pure_power(3.0);
  const cplx base(0.7, -0.2), delta(1e-25, 3e-25);
  const cplx expect = 2.0 * std::norm(base) * delta + base * base * std::conj(delta);
  REQUIRE(std::abs(nl.g_increment(base, delta) - expect) < 1e-12 * std::abs(expect));
}
