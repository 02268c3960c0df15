#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "grid.hpp"
#include "nonlinearity.hpp"

namespace nlslab {

inline bool default_dealias(const Nonlinearity& nl) {
  if (nl.kind() == Nonlinearity::Kind::cubic_quintic) return true;
  return nl.is_pure_power() && nl.p() >= 5.0;
}

struct PropagationPlan {
  double dt = 1e-3;
  double t_start = 0.0;
  double t_end = 1.0;
  int snapshot_stride = 100;
  std::optional<bool> dealias;
  double mass_drift_ceiling = 1e-8;    // relative
  double energy_drift_ceiling = 1e-4;  // relative
  std::size_t memory_budget = std::size_t{2} << 30;

  int steps() const {
    const double n = std::abs((t_end - t_start) / dt);
    return std::max(1, static_cast<int>(std::ceil(n - 1e-9)));
  }
  double effective_dt() const { return (t_end - t_start) / steps(); }

  void validate(const Grid& g) const {
    if (!(dt != 0.0) || !std::isfinite(dt)) throw ConfigError("plan.dt must be finite and non-zero");
    if (t_end == t_start) throw ConfigError("plan: t_end equals t_start");
    if ((dt > 0) != (t_end > t_start)) throw ConfigError("plan: sign of dt must match the direction t_start -> t_end");
    if (snapshot_stride < 1) throw ConfigError("plan.snapshot_stride must be >= 1");
    double h = g.spacing(0);
    if (g.dim() == 2) h = std::min(h, g.spacing(1));
    if (std::abs(dt) > 0.5 * h * h) {
      std::ostringstream os;
      os << "plan.dt: |dt| = " << std::abs(dt) << " exceeds the resolution guard 0.5 h^2 = " << 0.5 * h * h;
      throw ConfigError(os.str());
    }
  }
};

// ---------------------------------------------------------------------------
// Conserved quantities

inline double mass(const Field& u) { return std::pow(l2_norm(u), 2); }

inline double energy(const Field& u, const Nonlinearity& nl) {
  double kinetic = 0.0;
  for (int a = 0; a < u.grid.dim(); ++a) kinetic += std::pow(l2_norm(gradient_component(u, a)), 2);
  std::vector<double> pot(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) pot[i] = nl.F(std::norm(u[i]));
  return 0.5 * kinetic - 0.5 * integrate(u.grid, pot);
}

inline Vec momentum(const Field& u) {
  Vec p{0.0, 0.0};
  for (int a = 0; a < u.grid.dim(); ++a)
    p[static_cast<std::size_t>(a)] = inner_product_imag(gradient_component(u, a), u);
  return p;
}

// Largest |u| on the outer 10% of the box.
inline double boundary_tail(const Field& u) {
  const Grid& g = u.grid;
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec x = g.point(i);
    bool edge = std::abs(x[0]) >= 0.9 * g.half_length(0);
    if (g.dim() == 2) edge = edge || std::abs(x[1]) >= 0.9 * g.half_length(1);
    if (edge) m = std::max(m, std::abs(u[i]));
  }
  return m;
}

struct ConservedLedger {
  std::vector<double> time, mass, energy, boundary_tail;
  std::vector<Vec> momentum;

  void record(const Field& u, const Nonlinearity& nl) {
    time.push_back(u.time);
    mass.push_back(nlslab::mass(u));
    energy.push_back(nlslab::energy(u, nl));
    momentum.push_back(nlslab::momentum(u));
    boundary_tail.push_back(nlslab::boundary_tail(u));
  }
  double max_mass_drift() const {
    double m = 0.0;
    for (double v : mass) m = std::max(m, std::abs(v - mass.front()) / std::abs(mass.front()));
    return m;
  }
  double max_energy_drift() const {
    double m = 0.0;
    const double scale = std::max(std::abs(energy.front()), 1e-300);
    for (double v : energy) m = std::max(m, std::abs(v - energy.front()) / scale);
    return m;
  }
};

// ---------------------------------------------------------------------------
// Strang splitting

class StrangStepper {
 public:
  StrangStepper(const Grid& g, Nonlinearity nl, double dt, bool dealias)
      : grid_(g), nl_(nl), dt_(dt), multiplier_(g.size()) {
    detail::for_each_mode(g, [&](std::size_t flat, int j0, int j1) {
      double k2 = std::pow(g.wavenumber(0, j0), 2);
      if (g.dim() == 2) k2 += std::pow(g.wavenumber(1, j1), 2);
      bool keep = true;
      if (dealias) {
        keep = std::abs(g.mode(0, j0)) <= g.n(0) / 3;
        if (g.dim() == 2) keep = keep && std::abs(g.mode(1, j1)) <= g.n(1) / 3;
      }
      multiplier_[flat] = keep ? std::polar(1.0, -k2 * dt) : cplx(0.0);
    });
  }

  double dt() const { return dt_; }

  void step(std::vector<cplx>& u) const {
    nonlinear_half(u);
    fft_forward(grid_, u);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= multiplier_[i];
    fft_backward(grid_, u);
    nonlinear_half(u);
  }

 private:
  // |u| is invariant under u' = i f(|u|^2) u, so the substep is exact.
  void nonlinear_half(std::vector<cplx>& u) const {
    const double half = 0.5 * dt_;
    for (auto& z : u) z *= std::polar(1.0, half * nl_.f(std::norm(z)));
  }

  Grid grid_;
  Nonlinearity nl_;
  double dt_;
  std::vector<cplx> multiplier_;
};

inline void check_finite(const std::vector<cplx>& u, double t) {
  if (!all_finite(u)) {
    std::ostringstream os;
    os << "propagation blew up: non-finite values at t = " << t;
    throw NumericError(os.str());
  }
}

inline Field step_strang(const Field& field, double dt, const Nonlinearity& nl, std::optional<bool> dealias = {}) {
  check_finite(field.values, field.time);
  const StrangStepper stepper(field.grid, nl, dt, dealias.value_or(default_dealias(nl)));
  Field out = field;
  stepper.step(out.values);
  out.time = field.time + dt;
  check_finite(out.values, out.time);
  return out;
}

struct Trajectory {
  std::vector<Field> snapshots;
  ConservedLedger ledger;
  bool drift_flagged = false;
  int steps = 0;
  double dt_effective = 0.0;
};

inline Trajectory propagate(const Field& field, const PropagationPlan& plan, const Nonlinearity& nl) {
  plan.validate(field.grid);
  if (!all_finite(field.values)) throw NumericError("propagate: initial field is not finite");
  const int n = plan.steps();
  const double dt = plan.effective_dt();
  const std::size_t count = static_cast<std::size_t>(n / plan.snapshot_stride + 2);
  if (count * field.size() * sizeof(cplx) > plan.memory_budget)
    throw ConfigError("propagate: snapshots exceed the memory budget; raise snapshot_stride");

  Trajectory traj;
  traj.steps = n;
  traj.dt_effective = dt;
  const StrangStepper stepper(field.grid, nl, dt, plan.dealias.value_or(default_dealias(nl)));
  Field u = field;
  u.time = plan.t_start;
  traj.snapshots.push_back(u);
  traj.ledger.record(u, nl);
  for (int j = 1; j <= n; ++j) {
    stepper.step(u.values);
    u.time = plan.t_start + j * dt;
    check_finite(u.values, u.time);
    if (j % plan.snapshot_stride == 0 || j == n) {
      traj.snapshots.push_back(u);
      traj.ledger.record(u, nl);
    }
  }
  traj.drift_flagged = traj.ledger.max_mass_drift() > plan.mass_drift_ceiling ||
                       traj.ledger.max_energy_drift() > plan.energy_drift_ceiling;
  return traj;
}

}  // namespace nlslab
