#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "errors.hpp"
#include "fft.hpp"

namespace nlslab {

enum class Criticality { subcritical, critical, supercritical };

inline std::string to_string(Criticality c) {
  switch (c) {
    case Criticality::subcritical: return "subcritical";
    case Criticality::critical: return "critical";
    default: return "supercritical";
  }
}

// Value and Cartesian partials of g(z) = z f(|z|^2) in z = x + iy.
struct GJet {
  cplx g{};
  cplx gx{}, gy{};
  cplx gxx{}, gxy{}, gyy{};
};

// The local nonlinearity f of i u_t + Δu + f(|u|^2) u = 0 (written as
// u_t = i(Δu + f(|u|^2)u)), its derivatives and its primitive F.
class Nonlinearity {
 public:
  enum class Kind { pure_power, cubic_quintic, none };

  static Nonlinearity pure_power(double p) {
    detail::require(p > 1.0 && std::isfinite(p), "nonlinearity.p must satisfy p > 1, got " + std::to_string(p));
    return Nonlinearity(Kind::pure_power, p);
  }
  static Nonlinearity cubic_quintic() { return Nonlinearity(Kind::cubic_quintic, 0.0); }
  // f = 0: linear Schrödinger flow.
  static Nonlinearity none() { return Nonlinearity(Kind::none, 0.0); }

  Kind kind() const { return kind_; }
  double p() const { return p_; }
  bool is_pure_power() const { return kind_ == Kind::pure_power; }
  std::string name() const {
    switch (kind_) {
      case Kind::pure_power: return "pure_power(p=" + std::to_string(p_) + ")";
      case Kind::cubic_quintic: return "cubic_quintic";
      default: return "none";
    }
  }

  // True when f is not C^2 at the origin; f' and f'' at r = 0 then follow
  // the zero convention.
  bool nonsmooth_origin() const {
    if (kind_ != Kind::pure_power) return false;
    const double q = exponent();
    return q != std::floor(q);
  }

  // Pure powers on R^d: compared against the mass-critical p = 1 + 4/d.
  // The cubic-quintic model is subcritical near the origin in d = 1, 2.
  Criticality criticality(int d) const {
    if (kind_ != Kind::pure_power) return Criticality::subcritical;
    const double pc = 1.0 + 4.0 / d;
    if (std::abs(p_ - pc) < 1e-12) return Criticality::critical;
    return p_ < pc ? Criticality::subcritical : Criticality::supercritical;
  }

  // H^1-subcritical admissibility on R^d.
  bool admissible(int d) const {
    if (kind_ != Kind::pure_power || d <= 2) return true;
    return p_ < 1.0 + 4.0 / (d - 2);
  }

  double f(double r) const {
    check(r);
    switch (kind_) {
      case Kind::pure_power: return std::pow(r, exponent());
      case Kind::cubic_quintic: return r - r * r;
      default: return 0.0;
    }
  }

  double f_prime(double r) const {
    check(r);
    switch (kind_) {
      case Kind::pure_power: {
        const double q = exponent();
        if (r == 0.0) return q == 1.0 ? 1.0 : 0.0;
        return q * std::pow(r, q - 1.0);
      }
      case Kind::cubic_quintic: return 1.0 - 2.0 * r;
      default: return 0.0;
    }
  }

  double f_second(double r) const {
    check(r);
    switch (kind_) {
      case Kind::pure_power: {
        const double q = exponent();
        if (q == 1.0) return 0.0;
        if (r == 0.0) return q == 2.0 ? 2.0 : 0.0;
        return q * (q - 1.0) * std::pow(r, q - 2.0);
      }
      case Kind::cubic_quintic: return -2.0;
      default: return 0.0;
    }
  }

  double F(double r) const {
    check(r);
    switch (kind_) {
      case Kind::pure_power: return 2.0 * std::pow(r, (p_ + 1.0) / 2.0) / (p_ + 1.0);
      case Kind::cubic_quintic: return r * r / 2.0 - r * r * r / 3.0;
      default: return 0.0;
    }
  }

  cplx g(cplx z) const { return z * f(std::norm(z)); }

  GJet g_partials(cplx z, int order) const {
    detail::require(order == 1 || order == 2, "g_partials: order must be 1 or 2");
    const double x = z.real(), y = z.imag();
    const double r = std::norm(z);
    const double f0 = f(r), f1 = f_prime(r);
    const cplx i(0.0, 1.0);
    GJet jet;
    jet.g = z * f0;
    jet.gx = f0 + 2.0 * x * z * f1;
    jet.gy = i * f0 + 2.0 * y * z * f1;
    if (order == 2) {
      const double f2 = f_second(r);
      jet.gxx = 4.0 * x * f1 + 2.0 * z * f1 + 4.0 * x * x * z * f2;
      jet.gxy = 2.0 * y * f1 + 2.0 * i * x * f1 + 4.0 * x * y * z * f2;
      jet.gyy = 4.0 * i * y * f1 + 2.0 * z * f1 + 4.0 * y * y * z * f2;
    }
    return jet;
  }

  // f(a + delta) - f(a) without cancellation when |delta| << a.
  double f_increment(double a, double delta) const {
    switch (kind_) {
      case Kind::pure_power: {
        const double q = exponent();
        if (q == 1.0) return delta;
        if (a > 0.0 && std::abs(delta) <= 0.5 * a) return std::pow(a, q) * std::expm1(q * std::log1p(delta / a));
        return f(std::max(a + delta, 0.0)) - f(a);
      }
      case Kind::cubic_quintic: return delta - delta * (2.0 * a + delta);
      default: return 0.0;
    }
  }

  // F(a + delta) - F(a) - delta f(a), the second-order Taylor remainder.
  double F_remainder(double a, double delta) const {
    switch (kind_) {
      case Kind::pure_power: {
        // F(r) = r^{m} / m' with m = q + 1; expand (1 + x)^m in x = delta / a.
        const double m = exponent() + 1.0;
        if (a > 0.0 && std::abs(delta) <= 0.25 * a) {
          const double x = delta / a;
          double term = 1.0, sum = 0.0;
          for (int j = 1; j < 200; ++j) {
            term *= (m - (j - 1)) / j * x;
            if (j >= 2) {
              sum += term;
              if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
            }
          }
          return std::pow(a, m) / m * sum;
        }
        const double b = std::max(a + delta, 0.0);
        return F(b) - F(a) - delta * f(a);
      }
      case Kind::cubic_quintic: return delta * delta / 2.0 - a * delta * delta - delta * delta * delta / 3.0;
      default: return 0.0;
    }
  }

  // g(base + delta) - g(base), accurate when |delta| << |base|.
  cplx g_increment(cplx base, cplx delta) const {
    const double a = std::norm(base);
    const double inc = 2.0 * (std::conj(base) * delta).real() + std::norm(delta);
    return f(std::norm(base + delta)) * delta + f_increment(a, inc) * base;
  }

  // q = (p - 1)/2, so that f(r) = r^q.
  double exponent() const { return (p_ - 1.0) / 2.0; }

 private:
  Nonlinearity(Kind k, double p) : kind_(k), p_(p) {}

  static void check(double r) {
    if (!(r >= 0.0)) throw ConfigError("nonlinearity evaluated at negative or NaN argument");
  }

  Kind kind_ = Kind::pure_power;
  double p_ = 3.0;
};

}  // namespace nlslab
