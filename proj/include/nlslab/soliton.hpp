#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "groundstate.hpp"
#include "nonlinearity.hpp"

namespace nlslab {

struct SolitonParams {
  double omega = 1.0;
  Vec v{0.0, 0.0};
  Vec x0{0.0, 0.0};
  double gamma = 0.0;

  Vec center(double t) const { return {x0[0] + v[0] * t, x0[1] + v[1] * t}; }
  double speed_squared() const { return v[0] * v[0] + v[1] * v[1]; }
  // Phase ½v·x + (ω − |v|²/4)t + γ.
  double phase(const Vec& x, double t) const {
    return 0.5 * (v[0] * x[0] + v[1] * x[1]) + (omega - 0.25 * speed_squared()) * t + gamma;
  }
};

struct MultiSolitonConfig {
  Nonlinearity nl = Nonlinearity::pure_power(3.0);
  int dim = 1;
  std::vector<SolitonParams> solitons;

  std::size_t size() const { return solitons.size(); }

  // Every violation, one message each.
  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (dim != 1 && dim != 2) out.push_back("dim must be 1 or 2");
    if (solitons.empty()) out.push_back("at least one soliton is required");
    for (std::size_t k = 0; k < solitons.size(); ++k) {
      const auto& s = solitons[k];
      const std::string tag = "soliton." + std::to_string(k + 1);
      if (!(s.omega > 0.0)) out.push_back(tag + ".omega must be > 0");
      if (nl.kind() == Nonlinearity::Kind::cubic_quintic && !(s.omega < 3.0 / 16.0))
        out.push_back(tag + ".omega must lie in (0, 3/16) for cubic_quintic");
      if (dim == 1 && (s.v[1] != 0.0 || s.x0[1] != 0.0)) out.push_back(tag + ": second components must vanish in 1D");
      for (std::size_t j = 0; j < k; ++j)
        if (solitons[j].v == s.v)
          out.push_back("solitons " + std::to_string(j + 1) + " and " + std::to_string(k + 1) +
                        " share the velocity; velocities must be pairwise distinct");
    }
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid soliton configuration:";
    for (const auto& s : v) msg += "\n  " + s;
    throw ConfigError(msg);
  }
};

inline void check_soliton(const SolitonParams& p, const GroundState& gs) {
  if (!(p.omega > 0.0)) throw ConfigError("soliton: omega must be positive (zero amplitude is degenerate)");
  if (std::abs(gs.omega() - p.omega) > 1e-14 * p.omega)
    throw ConfigError("soliton: ground state frequency does not match soliton omega");
}

inline bool soliton_near_boundary(const SolitonParams& p, const Grid& g, double t) {
  const Vec c = p.center(t);
  const double margin = 5.0 / std::sqrt(p.omega);
  for (int a = 0; a < g.dim(); ++a)
    if (g.half_length(a) - std::abs(c[static_cast<std::size_t>(a)]) < margin) return true;
  return false;
}

namespace detail {

inline Vec offset(const Vec& x, const Vec& c) { return {x[0] - c[0], x[1] - c[1]}; }

}  // namespace detail

// R(t, x) = Q(x − x0 − vt) e^{iθ}
inline Field evaluate_soliton(const SolitonParams& p, const GroundState& gs, const Grid& g, double t,
                              bool* near_boundary = nullptr) {
  check_soliton(p, gs);
  if (near_boundary) *near_boundary = soliton_near_boundary(p, g, t);
  const Vec c = p.center(t);
  return Field::sample(
      g, [&](const Vec& x) { return gs.at(detail::offset(x, c)) * std::polar(1.0, p.phase(x, t)); }, t, "R");
}

// ∂_{x_axis} R, analytically: (∂Q + (i v/2) Q) e^{iθ}.
inline Field soliton_gradient(const SolitonParams& p, const GroundState& gs, const Grid& g, double t, int axis) {
  check_soliton(p, gs);
  const Vec c = p.center(t);
  const auto a = static_cast<std::size_t>(axis);
  return Field::sample(
      g,
      [&](const Vec& x) {
        const Vec y = detail::offset(x, c);
        const cplx dq = gs.gradient_at(y)[a] + cplx(0.0, 0.5 * p.v[a]) * gs.at(y);
        return dq * std::polar(1.0, p.phase(x, t));
      },
      t, "dR");
}

struct TimeDerivativePair {
  Field transport;  // −v·∇R + i(ω + |v|²/4)R
  Field flow;      // i(ΔR + f(|R|²)R)
};

inline TimeDerivativePair soliton_time_derivative(const SolitonParams& p, const GroundState& gs, const Grid& g,
                                                  double t) {
  const Field r = evaluate_soliton(p, gs, g, t);
  Field transport(g, t, "dtR");
  const cplx rot(0.0, p.omega + 0.25 * p.speed_squared());
  for (std::size_t i = 0; i < r.size(); ++i) transport[i] = rot * r[i];
  for (int a = 0; a < g.dim(); ++a) {
    const Field d = soliton_gradient(p, gs, g, t, a);
    for (std::size_t i = 0; i < r.size(); ++i) transport[i] -= p.v[static_cast<std::size_t>(a)] * d[i];
  }
  Field flow = laplacian(r);
  const Nonlinearity& nl = gs.nonlinearity();
  for (std::size_t i = 0; i < r.size(); ++i) flow[i] = cplx(0.0, 1.0) * (flow[i] + nl.g(r[i]));
  flow.label = "dtR";
  return {std::move(transport), std::move(flow)};
}

// A multi-soliton configuration together with its ground states.
class MultiSoliton {
 public:
  explicit MultiSoliton(MultiSolitonConfig config, const ShootingOptions& opt = {}) : config_(std::move(config)) {
    config_.validate();
    std::map<double, std::shared_ptr<const GroundState>> cache;
    for (const auto& s : config_.solitons) {
      auto& slot = cache[s.omega];
      if (!slot) slot = std::make_shared<const GroundState>(solve_ground_state(config_.nl, s.omega, config_.dim, opt));
      ground_states_.push_back(slot);
    }
  }

  const MultiSolitonConfig& config() const { return config_; }
  const Nonlinearity& nonlinearity() const { return config_.nl; }
  int dim() const { return config_.dim; }
  std::size_t size() const { return config_.solitons.size(); }
  const SolitonParams& params(std::size_t k) const { return config_.solitons[k]; }
  const GroundState& ground_state(std::size_t k) const { return *ground_states_[k]; }

  Field component(std::size_t k, const Grid& g, double t) const {
    return evaluate_soliton(params(k), ground_state(k), g, t);
  }
  Field sum(const Grid& g, double t) const {
    Field out(g, t, "R");
    for (std::size_t k = 0; k < size(); ++k) out += component(k, g, t);
    return out;
  }
  Field gradient(std::size_t k, const Grid& g, double t, int axis) const {
    return soliton_gradient(params(k), ground_state(k), g, t, axis);
  }

  bool any_near_boundary(const Grid& g, double t) const {
    for (const auto& s : config_.solitons)
      if (soliton_near_boundary(s, g, t)) return true;
    return false;
  }

  // Smallest pairwise centre distance at time t.
  double min_separation(double t) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = 0; b < a; ++b) {
        const Vec ca = params(a).center(t), cb = params(b).center(t);
        m = std::min(m, std::hypot(ca[0] - cb[0], ca[1] - cb[1]));
      }
    return m;
  }
  double min_omega() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : config_.solitons) m = std::min(m, s.omega);
    return m;
  }

 private:
  MultiSolitonConfig config_;
  std::vector<std::shared_ptr<const GroundState>> ground_states_;
};

// Galilean/phase/translation symmetry: the field u(τ) becomes
// u(t − t0, x − x0 − vt) e^{i(½v·x − |v|²t/4 + γ)} at t = τ + t0.
inline Field apply_invariance(const Field& field, double t0, const Vec& x0, const Vec& v, double gamma) {
  const double t = field.time + t0;
  Field out = spectral_translate(field, {x0[0] + v[0] * t, x0[1] + v[1] * t});
  const Grid& g = field.grid;
  const double v2 = v[0] * v[0] + v[1] * v[1];
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec x = g.point(i);
    out[i] *= std::polar(1.0, 0.5 * (v[0] * x[0] + v[1] * x[1]) - 0.25 * v2 * t + gamma);
  }
  out.time = t;
  return out;
}

// Scaling symmetry of pure powers: λ^{−1/(p−1)} u(t/λ, x/√λ) at t = λτ.
inline Field apply_scaling(const Field& field, double lambda, double p) {
  if (!(lambda > 0.0)) throw ConfigError("apply_scaling: lambda must be positive");
  if (!(p > 1.0)) throw ConfigError("apply_scaling: needs a pure power exponent p > 1");
  Field out = spectral_stretch(field, std::sqrt(lambda));
  out *= cplx(std::pow(lambda, -1.0 / (p - 1.0)));
  out.time = lambda * field.time;
  return out;
}

}  // namespace nlslab
