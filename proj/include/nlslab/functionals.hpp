#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "fit.hpp"
#include "grid.hpp"
#include "nonlinearity.hpp"
#include "soliton.hpp"

namespace nlslab {

struct FunctionalReport {
  double value = 0.0;
  double time = 0.0;
  std::vector<std::pair<std::string, double>> parts;

  double part(std::string_view name) const {
    for (const auto& [k, v] : parts)
      if (k == name) return v;
    throw ConfigError("functional report has no part named '" + std::string(name) + "'");
  }
};

namespace detail {

inline std::vector<double> pointwise(const Field& u, auto&& fn) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = fn(i);
  return out;
}

inline std::vector<Field> gradient(const Field& u) {
  std::vector<Field> out;
  for (int a = 0; a < u.grid.dim(); ++a) out.push_back(gradient_component(u, a));
  return out;
}

}  // namespace detail

// G_s(u) = Σ_{|α|=s} (s α) ∫|∂^α u|² − Σ_{|β|=s−1} (s−1 β) ∫ Re(u² (∂^β ū)²) f′(|u|²).
inline FunctionalReport eval_G(const Field& u, const Nonlinearity& nl, int s) {
  const int d = u.grid.dim();
  const int s_max = d == 1 ? 4 : 3;
  if (s < 2 || s > s_max)
    throw ConfigError("eval_G: order s = " + std::to_string(s) + " outside the supported range [2, " +
                      std::to_string(s_max) + "] for d = " + std::to_string(d));
  double derivative = 0.0;
  for (const auto& alpha : multi_indices(d, s)) derivative += multinomial(alpha) * std::pow(l2_norm(spectral_derivative(u, alpha)), 2);

  const auto fp = detail::pointwise(u, [&](std::size_t i) { return nl.f_prime(std::norm(u[i])); });
  double correction = 0.0;
  for (const auto& beta : multi_indices(d, s - 1)) {
    const Field db = spectral_derivative(u, beta);
    const auto integrand = detail::pointwise(u, [&](std::size_t i) {
      const cplx c = std::conj(db[i]);
      return (u[i] * u[i] * c * c).real() * fp[i];
    });
    correction += multinomial(beta) * integrate(u.grid, integrand);
  }
  return {derivative - correction, u.time, {{"derivative", derivative}, {"correction", correction}}};
}

struct DriftFitOptions {
  const MultiSoliton* solitons = nullptr;  // enables the separation screen
  double min_separation = 0.0;             // 0 selects 3/√ω_min
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  double noise_floor = 1e-13;  // relative to |G(S)|; smaller drifts are roundoff
  int min_points = 5;
};

struct DriftReport {
  std::vector<double> time, value, drift;  // drift = G(t) − G(S)
  double reference_time = 0.0;
  double reference_value = 0.0;
  LinearFit log_fit;  // ln|drift| against t on the usable points
  double decay_rate = std::numeric_limits<double>::quiet_NaN();
  double max_abs_drift = 0.0;
  std::size_t usable_points = 0;
  bool overlap_in_window = false;
  bool reliable = false;
  std::string status;
};

// Fits the envelope of |G(t) − G(S)| where S is the latest sample time.
inline DriftReport fit_drift(std::vector<double> time, std::vector<double> value, const DriftFitOptions& opt = {}) {
  detail::require(time.size() == value.size() && !time.empty(), "fit_drift: empty or mismatched series");
  DriftReport rep;
  const auto ref = static_cast<std::size_t>(std::max_element(time.begin(), time.end()) - time.begin());
  rep.reference_time = time[ref];
  rep.reference_value = value[ref];
  double sep = opt.min_separation;
  if (opt.solitons && sep <= 0.0) sep = 3.0 / std::sqrt(opt.solitons->min_omega());

  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < time.size(); ++i) {
    const double dr = value[i] - rep.reference_value;
    rep.drift.push_back(dr);
    rep.max_abs_drift = std::max(rep.max_abs_drift, std::abs(dr));
    if (i == ref || time[i] < opt.t_min || time[i] > opt.t_max) continue;
    if (opt.solitons && opt.solitons->size() > 1 && opt.solitons->min_separation(time[i]) < sep) {
      rep.overlap_in_window = true;
      continue;
    }
    if (std::abs(dr) <= opt.noise_floor * std::max(std::abs(rep.reference_value), 1e-300)) continue;
    fx.push_back(time[i]);
    fy.push_back(std::log(std::abs(dr)));
  }
  rep.time = std::move(time);
  rep.value = std::move(value);
  rep.usable_points = fx.size();
  if (fx.size() < static_cast<std::size_t>(opt.min_points)) {
    rep.status = "insufficient data";
    return rep;
  }
  rep.log_fit = fit_line(fx, fy);
  rep.decay_rate = -rep.log_fit.slope;
  rep.reliable = rep.log_fit.valid() && !rep.overlap_in_window;
  rep.status = rep.overlap_in_window ? "unreliable: solitons overlap inside the fit window" : "ok";
  return rep;
}

inline DriftReport eval_G_drift(const std::vector<Field>& trajectory, const Nonlinearity& nl, int s,
                                const DriftFitOptions& opt = {}) {
  std::vector<double> t, g;
  for (const auto& u : trajectory) {
    t.push_back(u.time);
    g.push_back(eval_G(u, nl, s).value);
  }
  return fit_drift(std::move(t), std::move(g), opt);
}

// ---------------------------------------------------------------------------
// Cutoffs

// ψ and its first three derivatives at one point.
struct StepJet {
  double value = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

namespace detail {

// Unit-width smooth step Ψ(u) = ∫_u^1 b / ∫_{-1}^1 b with the bump b(s) = e^{−1/(1−s²)}.
class UnitStep {
 public:
  static const UnitStep& instance() {
    static const UnitStep s;
    return s;
  }

  StepJet operator()(double u) const {
    if (u <= -1.0) return {1.0, 0.0, 0.0, 0.0};
    if (u >= 1.0) return {0.0, 0.0, 0.0, 0.0};
    const double w = 1.0 - u * u;
    const double b = bump(u);
    StepJet j;
    j.value = std::clamp(spline_(u), 0.0, 1.0);
    j.d1 = -b / norm_;
    j.d2 = 2.0 * u / (w * w) * b / norm_;
    j.d3 = -(6.0 * u * u * u * u - 2.0) / (w * w * w * w) * b / norm_;
    return j;
  }

  static constexpr int intervals = 10000;

 private:
  static double bump(double s) {
    const double w = 1.0 - s * s;
    return w > 0.0 ? std::exp(-1.0 / w) : 0.0;
  }

  UnitStep() : spline_(build()) {}

  boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>> build() {
    const double h = 2.0 / intervals;
    std::vector<double> cumulative(intervals + 1, 0.0);
    for (int i = intervals - 1; i >= 0; --i) {
      const double a = -1.0 + i * h;
      cumulative[static_cast<std::size_t>(i)] =
          cumulative[static_cast<std::size_t>(i) + 1] +
          boost::math::quadrature::gauss<double, 10>::integrate(bump, a, a + h);
    }
    norm_ = cumulative.front();
    std::vector<double> y(intervals + 1), dy(intervals + 1);
    for (int i = 0; i <= intervals; ++i) {
      const auto k = static_cast<std::size_t>(i);
      y[k] = cumulative[k] / norm_;
      dy[k] = -bump(-1.0 + i * h) / norm_;
    }
    y.front() = 1.0;
    y.back() = 0.0;
    return {std::move(y), std::move(dy), -1.0, h};
  }

  double norm_ = 1.0;
  boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>> spline_;
};

}  // namespace detail

// ψ(y) for half-width A0: 1 left of −A0, 0 right of A0, non-increasing.
inline StepJet cutoff_profile(double y, double A0) {
  const StepJet u = detail::UnitStep::instance()(y / A0);
  return {u.value, u.d1 / A0, u.d2 / (A0 * A0), u.d3 / (A0 * A0 * A0)};
}

// φ_k and the derivatives ∂_{x1}φ_k, ∂³_{x1}φ_k, ∂_tφ_k at one point.
struct CutoffJet {
  double value = 0.0, dx = 0.0, dxxx = 0.0, dt = 0.0;
};

class CutoffFamily {
 public:
  CutoffFamily(const MultiSolitonConfig& cfg, double A0) : A0_(A0) {
    const std::size_t K = cfg.size();
    detail::require(K >= 1, "cutoffs: at least one soliton is required");
    ordering_.resize(K);
    std::iota(ordering_.begin(), ordering_.end(), std::size_t{0});
    std::stable_sort(ordering_.begin(), ordering_.end(),
                     [&](std::size_t a, std::size_t b) { return cfg.solitons[a].v[0] < cfg.solitons[b].v[0]; });
    for (const auto& s : cfg.solitons) omega_.push_back(s.omega);
    const double limit = max_half_width(cfg);
    if (!(A0 > 0.0) || !(A0 < limit))
      throw ConfigError("analysis.A0 = " + std::to_string(A0) + " must lie in (0, " + std::to_string(limit) +
                        "): the cutoff half-width must stay below half the smallest gap between first velocity components");
    for (std::size_t r = 0; r + 1 < K; ++r) {
      const auto& a = cfg.solitons[ordering_[r]];
      const auto& b = cfg.solitons[ordering_[r + 1]];
      sigma_.push_back(0.5 * (a.v[0] + b.v[0]));
      xi_.push_back(0.5 * (a.x0[0] + b.x0[0]));
    }
    gamma_ = 0.0;
    if (K > 1) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t r = 1; r < K; ++r) {
        const double gap = cfg.solitons[ordering_[r]].v[0] - cfg.solitons[ordering_[r - 1]].v[0];
        for (double w : omega_) m = std::min(m, std::sqrt(w) / 4.0 * (gap / 2.0 - A0));
      }
      gamma_ = 0.5 * m;
    }
  }

  // Supremum of admissible A0: half the smallest gap of sorted v_{k,1}.
  static double max_half_width(const MultiSolitonConfig& cfg) {
    std::vector<double> v;
    for (const auto& s : cfg.solitons) v.push_back(s.v[0]);
    std::sort(v.begin(), v.end());
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) m = std::min(m, 0.5 * (v[i] - v[i - 1]));
    return m;
  }

  std::size_t size() const { return ordering_.size(); }
  double A0() const { return A0_; }
  const std::vector<double>& sigma() const { return sigma_; }
  const std::vector<double>& xi() const { return xi_; }
  // ordering()[r] is the original index of the soliton with the r-th smallest v_{k,1}.
  const std::vector<std::size_t>& ordering() const { return ordering_; }
  // A decay rate admissible in the localization bounds: half the largest legal value.
  double gamma() const { return gamma_; }

  // ψ_r(t, x1) for r = 0..K, with ψ_0 ≡ 0 and ψ_K ≡ 1.
  CutoffJet psi(std::size_t r, double t, double x1) const {
    check_time(t);
    if (r == 0) return {};
    if (r >= size()) return {1.0, 0.0, 0.0, 0.0};
    const double sg = sigma_[r - 1];
    const double y = (x1 - xi_[r - 1] - sg * t) / t;
    const StepJet j = cutoff_profile(y, A0_);
    return {j.value, j.d1 / t, j.d3 / (t * t * t), -j.d1 * (y + sg) / t};
  }

  // φ_k for the soliton with original index k.
  CutoffJet phi(std::size_t k, double t, double x1) const {
    const auto r = static_cast<std::size_t>(std::find(ordering_.begin(), ordering_.end(), k) - ordering_.begin());
    detail::require(r < size(), "cutoffs: soliton index out of range");
    const CutoffJet hi = psi(r + 1, t, x1), lo = psi(r, t, x1);
    return {hi.value - lo.value, hi.dx - lo.dx, hi.dxxx - lo.dxxx, hi.dt - lo.dt};
  }

 private:
  static void check_time(double t) {
    if (!(t > 0.0)) throw ConfigError("cutoffs are defined for t > 0 only (they are rescaled by 1/t)");
  }

  double A0_;
  std::vector<double> sigma_, xi_, omega_;
  std::vector<std::size_t> ordering_;
  double gamma_ = 0.0;
};

struct CutoffFields {
  std::vector<Field> phi, dx, dxxx, dt;  // indexed by original soliton order
};

inline CutoffFields eval_cutoffs(const CutoffFamily& cf, const Grid& g, double t) {
  if (!(t > 0.0)) throw ConfigError("eval_cutoffs: t must be positive");
  const std::size_t K = cf.size();
  CutoffFields out;
  for (std::size_t k = 0; k < K; ++k) {
    out.phi.emplace_back(g, t, "phi");
    out.dx.emplace_back(g, t, "dx_phi");
    out.dxxx.emplace_back(g, t, "dxxx_phi");
    out.dt.emplace_back(g, t, "dt_phi");
  }
  std::vector<CutoffJet> psi(K + 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x1 = g.point(i)[0];
    for (std::size_t r = 0; r <= K; ++r) psi[r] = cf.psi(r, t, x1);
    for (std::size_t r = 0; r < K; ++r) {
      const std::size_t k = cf.ordering()[r];
      out.phi[k][i] = psi[r + 1].value - psi[r].value;
      out.dx[k][i] = psi[r + 1].dx - psi[r].dx;
      out.dxxx[k][i] = psi[r + 1].dxxx - psi[r].dxxx;
      out.dt[k][i] = psi[r + 1].dt - psi[r].dt;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Localized Weinstein energies

namespace detail {

// Σ_k ∫ {|∇z|² − P_k + (ω_k + |v_k|²/4)|z|² − v_k·Im(∇z z̄)} φ_k with a supplied potential density P_k.
template <class Potential>
FunctionalReport localized_energy(const Field& z, const MultiSoliton& ms, const CutoffFamily& cf, double t,
                                  Potential&& potential) {
  detail::require(cf.size() == ms.size(), "energy: cutoff family and configuration differ in soliton count");
  const Grid& g = z.grid;
  const auto grad = detail::gradient(z);
  const auto cut = eval_cutoffs(cf, g, t);
  FunctionalReport rep;
  rep.time = t;
  double tg = 0.0, tp = 0.0, tm = 0.0, tq = 0.0;
  std::vector<std::pair<std::string, double>> per;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const auto& p = ms.params(k);
    const auto pot = potential(k);
    std::vector<double> dg(g.size()), dp(g.size()), dm(g.size()), dq(g.size());
    const double rot = p.omega + 0.25 * p.speed_squared();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double phi = cut.phi[k][i].real();
      double grad2 = 0.0, mom = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        const cplx da = grad[static_cast<std::size_t>(a)][i];
        grad2 += std::norm(da);
        mom += p.v[static_cast<std::size_t>(a)] * (da * std::conj(z[i])).imag();
      }
      dg[i] = grad2 * phi;
      dp[i] = -pot[i] * phi;
      dm[i] = rot * std::norm(z[i]) * phi;
      dq[i] = -mom * phi;
    }
    const double ig = integrate(g, dg), ip = integrate(g, dp), im = integrate(g, dm), iq = integrate(g, dq);
    tg += ig;
    tp += ip;
    tm += im;
    tq += iq;
    per.emplace_back("soliton." + std::to_string(k + 1), ig + ip + im + iq);
  }
  rep.value = tg + tp + tm + tq;
  rep.parts = {{"gradient", tg}, {"potential", tp}, {"mass", tm}, {"momentum", tq}};
  rep.parts.insert(rep.parts.end(), per.begin(), per.end());
  return rep;
}

}  // namespace detail

// H(t) with the quadratic potential f(|R_k|²)|z|² + 2 Re(R̄_k z)² f′(|R_k|²).
inline FunctionalReport eval_weinstein_H(const Field& ztilde, const MultiSoliton& ms, const CutoffFamily& cf,
                                         double t) {
  const Nonlinearity& nl = ms.nonlinearity();
  return detail::localized_energy(ztilde, ms, cf, t, [&](std::size_t k) {
    const Field r = ms.component(k, ztilde.grid, t);
    return detail::pointwise(ztilde, [&](std::size_t i) {
      const double a = std::norm(r[i]);
      const double re = (std::conj(r[i]) * ztilde[i]).real();
      return nl.f(a) * std::norm(ztilde[i]) + 2.0 * re * re * nl.f_prime(a);
    });
  });
}

// H̃(t) with the full remainder F(|z + φ|²) − F(|φ|²) − 2 Re(z φ̄) f(|φ|²) about a reference field φ.
inline FunctionalReport eval_weinstein_Htilde(const Field& ztilde, const Field& varphi, const MultiSoliton& ms,
                                              const CutoffFamily& cf, double t) {
  ztilde.check_same(varphi);
  const Nonlinearity& nl = ms.nonlinearity();
  const auto pot = detail::pointwise(ztilde, [&](std::size_t i) {
    const double a = std::norm(varphi[i]);
    const double z2 = std::norm(ztilde[i]);
    const double delta = 2.0 * (ztilde[i] * std::conj(varphi[i])).real() + z2;
    return nl.F_remainder(a, delta) + z2 * nl.f(a);
  });
  return detail::localized_energy(ztilde, ms, cf, t, [&](std::size_t) { return pot; });
}

struct EnergyGap {
  double H = 0.0, Htilde = 0.0, gap = 0.0;
  double z_h1 = 0.0, z_h1_cubed = 0.0;
};

inline EnergyGap compare_H_Htilde(const Field& ztilde, const Field& varphi, const MultiSoliton& ms,
                                  const CutoffFamily& cf, double t) {
  EnergyGap out;
  out.H = eval_weinstein_H(ztilde, ms, cf, t).value;
  out.Htilde = eval_weinstein_Htilde(ztilde, varphi, ms, cf, t).value;
  out.gap = std::abs(out.H - out.Htilde);
  out.z_h1 = sobolev_norm(ztilde, 1);
  out.z_h1_cubed = std::pow(out.z_h1, 3);
  return out;
}

// Main(t) =  Σ_k (ω_k + |v_k|²/4) (∫|z|² ∂_tφ_k + 2∫Im(∂_{x1}z z̄) ∂_{x1}φ_k)
//          − Σ_k v_{k,1} (2∫|∇z|² ∂_{x1}φ_k − ½∫|z|² ∂³_{x1}φ_k)
//          − Σ_k v_k · ∫Im(∇z z̄) ∂_tφ_k
inline double eval_main_term(const Field& ztilde, const CutoffFamily& cf, const MultiSolitonConfig& cfg, double t) {
  detail::require(cf.size() == cfg.size(), "Main: cutoff family and configuration differ in soliton count");
  const Grid& g = ztilde.grid;
  const auto grad = detail::gradient(ztilde);
  const auto cut = eval_cutoffs(cf, g, t);
  double total = 0.0;
  for (std::size_t k = 0; k < cfg.size(); ++k) {
    const auto& p = cfg.solitons[k];
    const double rot = p.omega + 0.25 * p.speed_squared();
    std::vector<double> dens(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const cplx z = ztilde[i];
      const double z2 = std::norm(z);
      const double dtp = cut.dt[k][i].real(), dxp = cut.dx[k][i].real(), dxxxp = cut.dxxx[k][i].real();
      double grad2 = 0.0, mom_t = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        const cplx da = grad[static_cast<std::size_t>(a)][i];
        grad2 += std::norm(da);
        mom_t += p.v[static_cast<std::size_t>(a)] * (da * std::conj(z)).imag();
      }
      const double im1 = (grad[0][i] * std::conj(z)).imag();
      dens[i] = rot * (z2 * dtp + 2.0 * im1 * dxp) - p.v[0] * (2.0 * grad2 * dxp - 0.5 * z2 * dxxxp) - mom_t * dtp;
    }
    total += integrate(g, dens);
  }
  return total;
}

}  // namespace nlslab
