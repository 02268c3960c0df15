#pragma once

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "nonlinearity.hpp"

namespace nlslab {

struct ShootingMeta {
  bool closed_form = false;
  double residual = 0.0;           // ||ΔQ + f(Q²)Q − ωQ|| / ||Q|| on the evaluation grid
  double shooting_parameter = 0.0;  // Q(0)
  int bisection_steps = 0;
  double match_radius = 0.0;       // start of the exponential tail
  std::vector<std::pair<double, double>> bracket_history;
};

namespace detail {

struct SechProfile {
  double p, omega;
  double amplitude() const { return std::pow((p + 1.0) * omega / 2.0, 1.0 / (p - 1.0)); }
  double beta() const { return (p - 1.0) * std::sqrt(omega) / 2.0; }
  double value(double r) const {
    const double b = beta() * std::abs(r);
    // sech(b)^(2/(p-1)) through logs to stay finite deep in the tail.
    const double log_sech = -b - std::log1p(std::exp(-2.0 * b)) + std::numbers::ln2;
    return amplitude() * std::exp(2.0 / (p - 1.0) * log_sech);
  }
  double derivative(double r) const {
    const double sign = r < 0 ? -1.0 : 1.0;
    return -sign * std::sqrt(omega) * value(r) * std::tanh(beta() * std::abs(r));
  }
};

struct TabulatedProfile {
  int dim;
  double omega;
  double match_radius;
  double tail_amplitude;
  boost::math::interpolators::cardinal_cubic_b_spline<double> spline;

  double tail_shape(double r) const {
    const double k = std::sqrt(omega);
    return dim == 1 ? std::exp(-k * r) : boost::math::cyl_bessel_k(0, k * r);
  }
  double tail_shape_prime(double r) const {
    const double k = std::sqrt(omega);
    return dim == 1 ? -k * std::exp(-k * r) : -k * boost::math::cyl_bessel_k(1, k * r);
  }
  double value(double r) const {
    r = std::abs(r);
    return r <= match_radius ? spline(r) : tail_amplitude * tail_shape(r);
  }
  double derivative(double r) const {
    const double sign = r < 0 ? -1.0 : 1.0;
    r = std::abs(r);
    return sign * (r <= match_radius ? spline.prime(r) : tail_amplitude * tail_shape_prime(r));
  }
};

using Profile = std::variant<SechProfile, TabulatedProfile>;

}  // namespace detail

// Positive radial solution of ΔQ + f(Q²)Q = ωQ, stored as a radial profile
// Q(r) = amplitude * P(length_scale * r).
class GroundState {
 public:
  GroundState(Nonlinearity nl, double omega, int dim, std::shared_ptr<const detail::Profile> profile,
              double amplitude = 1.0, double length_scale = 1.0)
      : nl_(nl), omega_(omega), dim_(dim), profile_(std::move(profile)), amp_(amplitude), len_(length_scale) {}

  double omega() const { return omega_; }
  int dim() const { return dim_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const ShootingMeta& meta() const { return meta_; }
  ShootingMeta& meta() { return meta_; }

  double value(double r) const {
    return amp_ * std::visit([&](const auto& p) { return p.value(len_ * r); }, *profile_);
  }
  double derivative(double r) const {
    return amp_ * len_ * std::visit([&](const auto& p) { return p.derivative(len_ * r); }, *profile_);
  }
  // Q'' from the profile equation itself.
  double second_derivative(double r) const {
    const double q = value(r);
    const double rhs = omega_ * q - nl_.f(q * q) * q;
    if (dim_ == 1) return rhs;
    if (std::abs(r) < 1e-8) return rhs / dim_;
    return rhs - derivative(r) / r;
  }

  double at(const Vec& y) const { return value(radius(y)); }
  // ∇Q(y) = Q'(|y|) y / |y|.
  Vec gradient_at(const Vec& y) const {
    if (dim_ == 1) return {derivative(y[0]), 0.0};
    const double r = radius(y);
    if (r < 1e-14) return {0.0, 0.0};
    const double dq = derivative(r) / r;
    return {dq * y[0], dq * y[1]};
  }
  double radius(const Vec& y) const { return dim_ == 1 ? std::abs(y[0]) : std::hypot(y[0], y[1]); }

  double mass() const {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto integrand = [&](double r) {
      const double q = value(r);
      return dim_ == 1 ? 2.0 * q * q : 2.0 * std::numbers::pi * r * q * q;
    };
    return integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
  }

  Field sample(const Grid& g, const Vec& center = {0.0, 0.0}) const {
    return Field::sample(g, [&](const Vec& x) { return at({x[0] - center[0], x[1] - center[1]}); }, 0.0, "Q");
  }

  // Smallest C with Q(r) <= C exp(-(√ω/2) r) for r in [5/√ω, r_max].
  double tail_constant(double r_max) const {
    const double k = std::sqrt(omega_);
    double c = 0.0;
    for (double r = 5.0 / k; r <= r_max; r += 0.01 / k) c = std::max(c, value(r) * std::exp(0.5 * k * r));
    return c;
  }

  bool is_closed_form() const { return std::holds_alternative<detail::SechProfile>(*profile_); }
  double amplitude_factor() const { return amp_; }
  double length_factor() const { return len_; }
  std::shared_ptr<const detail::Profile> profile() const { return profile_; }

 private:
  Nonlinearity nl_;
  double omega_;
  int dim_;
  std::shared_ptr<const detail::Profile> profile_;
  double amp_, len_;
  ShootingMeta meta_;
};

// Evaluation grid used to certify the profile equation.
inline Grid residual_grid(double omega, int dim) {
  const double l = 40.0 / std::sqrt(omega);
  return dim == 1 ? Grid::line(2048, l) : Grid::plane(384, 384, 0.6 * l, 0.6 * l);
}

inline double profile_residual(const GroundState& gs) {
  const Grid g = residual_grid(gs.omega(), gs.dim());
  const Field q = gs.sample(g);
  const Field lap = laplacian(q);
  const Nonlinearity& nl = gs.nonlinearity();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = q[i].real();
    const double r = lap[i].real() + nl.f(qi * qi) * qi - gs.omega() * qi;
    num += r * r;
    den += qi * qi;
  }
  return std::sqrt(num / den);
}

inline void check_existence_window(const Nonlinearity& nl, double omega, int dim) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw ConfigError("ground state: omega must be positive, got " + std::to_string(omega));
  if (nl.kind() == Nonlinearity::Kind::cubic_quintic && !(omega < 3.0 / 16.0))
    throw ConfigError("ground state: cubic-quintic requires omega in (0, 3/16), got " + std::to_string(omega));
  if (nl.kind() == Nonlinearity::Kind::none) throw ConfigError("ground state: no ground state without a nonlinearity");
  if (!nl.admissible(dim)) throw ConfigError("ground state: nonlinearity is not H1-subcritical in this dimension");
  if (dim != 1 && dim != 2) throw ConfigError("ground state: dimension must be 1 or 2");
}

namespace detail {

enum class ShotOutcome { overshoot, undershoot, decayed };

struct RadialSystem {
  const Nonlinearity* nl;
  double omega;
  int dim;
  void operator()(const std::array<double, 2>& y, std::array<double, 2>& dy, double r) const {
    dy[0] = y[1];
    dy[1] = omega * y[0] - nl->f(y[0] * y[0]) * y[0] - (dim == 1 ? 0.0 : (dim - 1) * y[1] / r);
  }
};

struct Shot {
  ShotOutcome outcome = ShotOutcome::decayed;
  std::vector<double> samples;  // Q on the table nodes reached before the outcome
  std::vector<double> slopes;
};

// Integrates from Q(0) = q0, samples Q on r_j = j*h, and stops at the first
// sign of overshoot (Q < 0) or undershoot (Q' > 0).
inline Shot shoot(const Nonlinearity& nl, double omega, int dim, double q0, double h, double r_max, bool record) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  RadialSystem system{&nl, omega, dim};
  const double r0 = dim == 1 ? 0.0 : 1e-6;
  const double curvature = (nl.f(q0 * q0) * q0 - omega * q0) / dim;
  State y{q0 - 0.5 * curvature * r0 * r0, -curvature * r0};
  auto stepper = odeint::make_dense_output(1e-14, 1e-13, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(y, r0, std::min(h, 1e-3));
  Shot shot;
  if (record) {
    shot.samples.push_back(q0);
    shot.slopes.push_back(0.0);
  }
  std::size_t next = 1;
  while (stepper.current_time() < r_max) {
    stepper.do_step(system);
    const State& cur = stepper.current_state();
    while (next * h <= stepper.current_time()) {
      if (record) {
        State s;
        stepper.calc_state(next * h, s);
        shot.samples.push_back(s[0]);
        shot.slopes.push_back(s[1]);
      }
      ++next;
    }
    if (cur[0] < 0.0) {
      shot.outcome = ShotOutcome::overshoot;
      return shot;
    }
    if (cur[1] > 0.0 && stepper.current_time() > r0) {
      shot.outcome = ShotOutcome::undershoot;
      return shot;
    }
  }
  return shot;
}

}  // namespace detail

struct ShootingOptions {
  double relative_bracket = 1e-12;
  double agreement = 1e-7;   // bracketing shots must agree to this relative level inside the table
  double table_spacing = 2.5e-4;  // in units of 1/√ω
  bool force_shooting = false;
};

inline GroundState solve_by_shooting(const Nonlinearity& nl, double omega, int dim, const ShootingOptions& opt) {
  using detail::ShotOutcome;
  const double k = std::sqrt(omega);
  const double r_max = 60.0 / k;
  const double h = opt.table_spacing / k;
  const double coarse_h = 0.05 / k;

  // Bracket Q(0): at the lower end f(Q(0)²) = ω (the profile cannot bend down).
  double lo, hi;
  if (nl.kind() == Nonlinearity::Kind::cubic_quintic) {
    const double disc = std::sqrt(1.0 - 4.0 * omega);
    lo = std::sqrt((1.0 - disc) / 2.0) * (1.0 + 1e-9);
    hi = std::sqrt((1.0 + disc) / 2.0) * (1.0 - 1e-15);
  } else {
    lo = std::pow(omega, 1.0 / (2.0 * nl.exponent())) * (1.0 + 1e-9);
    hi = 2.0 * lo;
    int guard = 0;
    while (detail::shoot(nl, omega, dim, hi, coarse_h, r_max, false).outcome != ShotOutcome::overshoot) {
      hi *= 2.0;
      if (++guard > 60) throw NumericError("ground state: no overshooting initial value found");
    }
  }
  ShootingMeta meta;
  meta.bracket_history.emplace_back(lo, hi);
  while ((hi - lo) > opt.relative_bracket * hi) {
    const double mid = 0.5 * (lo + hi);
    const auto outcome = detail::shoot(nl, omega, dim, mid, coarse_h, r_max, false).outcome;
    if (outcome == ShotOutcome::overshoot)
      hi = mid;
    else
      lo = mid;
    meta.bracket_history.emplace_back(lo, hi);
    if (++meta.bisection_steps > 200) {
      std::ostringstream os;
      os << "ground state: bisection did not converge; last bracket [" << lo << ", " << hi << "]";
      throw NumericError(os.str());
    }
  }
  const auto shot_lo = detail::shoot(nl, omega, dim, lo, h, r_max, true);
  const auto shot_hi = detail::shoot(nl, omega, dim, hi, h, r_max, true);
  const std::size_t n = std::min(shot_lo.samples.size(), shot_hi.samples.size());
  std::vector<double> table;
  table.reserve(n);
  double slope_end = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = shot_lo.samples[j], b = shot_hi.samples[j];
    const double mid = 0.5 * (a + b);
    if (j > 0 && (mid <= 0.0 || std::abs(a - b) > opt.agreement * mid)) break;
    table.push_back(mid);
    slope_end = 0.5 * (shot_lo.slopes[j] + shot_hi.slopes[j]);
  }
  if (table.size() < 16) throw NumericError("ground state: shooting table too short to interpolate");
  const double r_match = (table.size() - 1) * h;

  detail::TabulatedProfile tab{dim, omega, r_match, 0.0,
                               boost::math::interpolators::cardinal_cubic_b_spline<double>(
                                   table.data(), table.size(), 0.0, h, 0.0, slope_end)};
  tab.tail_amplitude = table.back() / tab.tail_shape(r_match);
  meta.closed_form = false;
  meta.shooting_parameter = 0.5 * (lo + hi);
  meta.match_radius = r_match;

  GroundState gs(nl, omega, dim, std::make_shared<const detail::Profile>(std::move(tab)));
  gs.meta() = std::move(meta);
  gs.meta().residual = profile_residual(gs);
  return gs;
}

inline GroundState solve_ground_state(const Nonlinearity& nl, double omega, int dim, const ShootingOptions& opt = {}) {
  check_existence_window(nl, omega, dim);
  if (dim == 1 && nl.is_pure_power() && !opt.force_shooting) {
    GroundState gs(nl, omega, dim, std::make_shared<const detail::Profile>(detail::SechProfile{nl.p(), omega}));
    gs.meta().closed_form = true;
    gs.meta().shooting_parameter = gs.value(0.0);
    gs.meta().match_radius = std::numeric_limits<double>::infinity();
    gs.meta().residual = profile_residual(gs);
    return gs;
  }
  return solve_by_shooting(nl, omega, dim, opt);
}

// Q_ω(x) = (ω/ω_b)^{1/(p-1)} Q_{ω_b}(sqrt(ω/ω_b) x) for pure powers.
inline GroundState rescale_ground_state(const GroundState& base, double omega) {
  const Nonlinearity& nl = base.nonlinearity();
  if (!nl.is_pure_power()) throw ConfigError("rescale_ground_state: scaling law needs a pure power nonlinearity");
  check_existence_window(nl, omega, base.dim());
  const double lambda = omega / base.omega();
  GroundState gs(nl, omega, base.dim(), base.profile(),
                 base.amplitude_factor() * std::pow(lambda, 1.0 / (nl.p() - 1.0)),
                 base.length_factor() * std::sqrt(lambda));
  gs.meta() = base.meta();
  gs.meta().shooting_parameter = gs.value(0.0);
  gs.meta().match_radius = base.meta().match_radius / std::sqrt(lambda);
  gs.meta().residual = profile_residual(gs);
  return gs;
}

enum class MassSlope { negative, zero, positive, indeterminate };

inline std::string to_string(MassSlope s) {
  switch (s) {
    case MassSlope::negative: return "negative";
    case MassSlope::zero: return "zero";
    case MassSlope::positive: return "positive";
    default: return "indeterminate";
  }
}

// Sign of d/dω ∫Q_ω².
inline MassSlope mass_derivative_sign(const Nonlinearity& nl, double omega, int dim) {
  check_existence_window(nl, omega, dim);
  if (nl.is_pure_power()) {
    const double e = 2.0 / (nl.p() - 1.0) - dim / 2.0;
    if (std::abs(e) < 1e-12) return MassSlope::zero;
    return e > 0 ? MassSlope::positive : MassSlope::negative;
  }
  double step = 1e-3 * omega;
  if (nl.kind() == Nonlinearity::Kind::cubic_quintic) step = std::min(step, 0.5 * (3.0 / 16.0 - omega));
  const double m_plus = solve_ground_state(nl, omega + step, dim).mass();
  const double m_minus = solve_ground_state(nl, omega - step, dim).mass();
  const double delta = m_plus - m_minus;
  const double noise = 1e-8 * std::max(std::abs(m_plus), std::abs(m_minus));
  if (std::abs(delta) <= noise) return MassSlope::indeterminate;
  return delta > 0 ? MassSlope::positive : MassSlope::negative;
}

}  // namespace nlslab
