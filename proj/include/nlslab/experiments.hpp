#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fit.hpp"
#include "functionals.hpp"
#include "grid.hpp"
#include "modulation.hpp"
#include "perturbation.hpp"
#include "propagator.hpp"
#include "soliton.hpp"

namespace nlslab {

// ---------------------------------------------------------------------------
// Rate schedule

struct ThetaRow {
  int s = 0;
  double theta_s = 0.0;       // recursive floor
  double interpolated = 0.0;  // 2θ/(s+1)
};

// θ₀ = 2θ, θ₁ = θ, θ_s = min(θ_{s−1}/2, 2θ/(d+1)) for s ≥ 2.
inline std::vector<ThetaRow> predict_theta_schedule(double theta, int d, int s_max) {
  detail::require(theta > 0.0, "predict_theta_schedule: theta must be > 0");
  detail::require(d == 1 || d == 2, "predict_theta_schedule: d must be 1 or 2");
  detail::require(s_max >= 0, "predict_theta_schedule: s_max must be >= 0");
  std::vector<ThetaRow> out;
  double prev = 0.0;
  for (int s = 0; s <= s_max; ++s) {
    double ts = 2.0 * theta;
    if (s == 1) ts = theta;
    if (s >= 2) ts = std::min(prev / 2.0, 2.0 * theta / (d + 1));
    out.push_back({s, ts, 2.0 * theta / (s + 1)});
    prev = ts;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Construction ladder

struct ConstructionSetup {
  MultiSolitonConfig solitons;
  Grid grid = Grid::line(2048, 80.0);
  double dt = 1e-3;
  std::vector<double> S_ladder{8.0, 10.0, 12.0};
  double T1 = 2.0;
  int s_max = 3;
  double sample_interval = 0.1;
  std::optional<bool> dealias;
  int threads = 1;
  // Keep u(t) snapshots of the designated run for t ≤ this time.
  double keep_fields_until = -std::numeric_limits<double>::infinity();

  std::vector<std::string> violations() const {
    std::vector<std::string> out = solitons.violations();
    const auto& nl = solitons.nl;
    if (nl.is_pure_power() && nl.criticality(solitons.dim) == Criticality::supercritical)
      out.push_back("construction covers stable or critical nonlinearities only; " + nl.name() +
                    " is L2-supercritical in d = " + std::to_string(solitons.dim));
    if (grid.dim() != solitons.dim) out.push_back("grid dimension differs from the soliton configuration");
    if (S_ladder.size() < 3) out.push_back("plan.ladder needs at least 3 entries");
    for (std::size_t n = 1; n < S_ladder.size(); ++n)
      if (!(S_ladder[n] > S_ladder[n - 1])) out.push_back("plan.ladder must be strictly increasing");
    if (!(T1 > 0.0)) out.push_back("analysis.T1 must be > 0");
    if (!S_ladder.empty() && !(S_ladder.front() > T1)) out.push_back("plan.ladder entries must exceed analysis.T1");
    if (s_max < 0 || s_max > kMaxDerivativeOrder) out.push_back("analysis.s_max must lie in [0, 6]");
    if (!(sample_interval > 0.0)) out.push_back("plan.sample_interval must be > 0");
    if (threads < 1) out.push_back("threads must be >= 1");
    double h = grid.spacing(0);
    if (grid.dim() == 2) h = std::min(h, grid.spacing(1));
    if (!(dt > 0.0) || dt > 0.5 * h * h)
      out.push_back("plan.dt = " + std::to_string(dt) + " must lie in (0, 0.5 h^2 = " + std::to_string(0.5 * h * h) + "]");
    return out;
  }

  void validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid construction setup:";
    for (const auto& s : v) msg += "\n  " + s;
    throw ConfigError(msg);
  }

  // Every ladder time sits on the dt lattice anchored at T1.
  bool aligned() const {
    for (double s : S_ladder) {
      const double m = (s - T1) / dt;
      if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, m)) return false;
    }
    return true;
  }
};

struct LadderRun {
  double S = 0.0;
  std::vector<double> times;                 // ascending
  std::vector<std::vector<double>> hs_norm;  // [s][i] = ‖u_n(t_i) − R(t_i)‖_{H^s}
  std::vector<LinearFit> fits;               // ln‖·‖_{H^s} against t on the fit window
  std::vector<double> rates;                 // ρ_s = −slope
  bool failed = false;
  std::string failure;
  Field final_state;                         // u_n(T1), or the last reached state on failure
};

struct ConstructionReport {
  ConstructionSetup setup;
  std::vector<LadderRun> runs;  // sorted by S
  double theta_fit = std::numeric_limits<double>::quiet_NaN();
  std::vector<ThetaRow> schedule;
  std::vector<std::vector<double>> cauchy_gaps;  // [s][j] = ‖u_{j+1}(T1) − u_j(T1)‖_{H^s}
  std::string gap_method;
  bool gaps_decreasing = false;
  bool convergence_suspect = false;
  double rate_drift = std::numeric_limits<double>::quiet_NaN();  // (max − min)/mean of ρ₁
  std::vector<Field> designated_snapshots;                         // u(t), ascending in t
  std::vector<std::string> warnings;

  const LadderRun& designated() const { return runs.back(); }
  double final_gap(int s = 1) const {
    const auto& g = cauchy_gaps.at(static_cast<std::size_t>(s));
    return g.empty() ? std::numeric_limits<double>::quiet_NaN() : g.back();
  }
};

namespace detail {

struct MemberTrace {
  double S = 0.0;
  std::vector<double> times;  // descending while recording
  std::vector<std::vector<double>> v_norm;
  std::vector<std::vector<double>> w_norm;
  std::vector<double> w_times;
  std::vector<Field> u_fields;  // R + v
  std::vector<Field> w_fields;
  Field v_final, w_final;
  bool has_w = false;
  bool failed = false;
  std::string failure;
};

struct TraceRequest {
  double S = 0.0;
  double T1 = 0.0;
  double dt = 0.0;
  int stride = 1;
  int s_max = 1;
  std::optional<double> w_start;
  double keep_until = -std::numeric_limits<double>::infinity();
  bool dealias = false;
};

inline int lattice_steps(double span, double dt) { return std::max(1, static_cast<int>(std::lround(span / dt))); }

// Backward solve of v = u − R from v(S) = 0 to T1, optionally carrying the
// difference layer w = v_other − v started at w_start with w = −v.
inline MemberTrace trace_member(const MultiSoliton& ms, const Grid& g, const TraceRequest& rq) {
  MemberTrace tr;
  tr.S = rq.S;
  const int n = lattice_steps(rq.S - rq.T1, rq.dt);
  const double h = (rq.S - rq.T1) / n;
  const int m_w = rq.w_start ? static_cast<int>(std::lround((*rq.w_start - rq.T1) / h)) : -1;
  tr.v_norm.assign(static_cast<std::size_t>(rq.s_max + 1), {});
  tr.w_norm.assign(static_cast<std::size_t>(rq.s_max + 1), {});
  PerturbationFlow flow(ms, g, -h, rq.dealias);
  std::vector<cplx> v(g.size(), cplx{}), w;
  int m = n;
  try {
    for (; m >= 0; --m) {
      const double t = rq.T1 + m * h;
      if (m == m_w) {
        w.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = -v[i];
        tr.has_w = true;
      }
      if (m % rq.stride == 0 || m == 0) {
        const Field vf(g, v, t);
        tr.times.push_back(t);
        for (int s = 0; s <= rq.s_max; ++s) tr.v_norm[static_cast<std::size_t>(s)].push_back(sobolev_norm(vf, s));
        if (tr.has_w) {
          const Field wf(g, w, t);
          tr.w_times.push_back(t);
          for (int s = 0; s <= rq.s_max; ++s) tr.w_norm[static_cast<std::size_t>(s)].push_back(sobolev_norm(wf, s));
          if (t <= rq.keep_until + 1e-9) tr.w_fields.push_back(wf);
        }
        if (t <= rq.keep_until + 1e-9) tr.u_fields.push_back(vf + ms.sum(g, t));
      }
      if (m > 0) flow.step(t, v, tr.has_w ? &w : nullptr);
    }
  } catch (const NumericError& e) {
    tr.failed = true;
    tr.failure = e.what();
    m = std::max(m - 1, 0);
  }
  const double t_last = rq.T1 + std::max(m, 0) * h;
  tr.v_final = Field(g, v, tr.failed ? t_last : rq.T1);
  if (tr.has_w) tr.w_final = Field(g, w, tr.v_final.time);
  std::reverse(tr.u_fields.begin(), tr.u_fields.end());
  std::reverse(tr.w_fields.begin(), tr.w_fields.end());
  return tr;
}

template <class Job>
auto run_parallel(std::size_t count, int threads, Job&& job) {
  using Result = decltype(job(std::size_t{0}));
  std::vector<Result> out(count);
  const std::size_t batch = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t start = 0; start < count; start += batch) {
    std::vector<std::future<Result>> pending;
    const std::size_t stop = std::min(count, start + batch);
    if (batch == 1) {
      out[start] = job(start);
      continue;
    }
    for (std::size_t i = start; i < stop; ++i) pending.push_back(std::async(std::launch::async, job, i));
    for (std::size_t i = start; i < stop; ++i) out[i] = pending[i - start].get();
  }
  return out;
}

inline bool separated(const MultiSoliton& ms, double t) {
  return ms.size() < 2 || ms.min_separation(t) >= 3.0 / std::sqrt(ms.min_omega());
}

}  // namespace detail

inline ConstructionReport run_construction(const ConstructionSetup& setup) {
  setup.validate();
  const MultiSoliton ms(setup.solitons);
  const Grid& g = setup.grid;
  const bool dealias = setup.dealias.value_or(default_dealias(setup.solitons.nl));
  const bool aligned = setup.aligned();
  const int stride = std::max(1, static_cast<int>(std::lround(setup.sample_interval / setup.dt)));
  const std::size_t n_runs = setup.S_ladder.size();

  auto traces = detail::run_parallel(n_runs, setup.threads, [&](std::size_t j) {
    detail::TraceRequest rq;
    rq.S = setup.S_ladder[j];
    rq.T1 = setup.T1;
    rq.dt = setup.dt;
    rq.stride = stride;
    rq.s_max = setup.s_max;
    rq.dealias = dealias;
    if (aligned && j > 0) rq.w_start = setup.S_ladder[j - 1];
    if (j + 1 == n_runs) rq.keep_until = setup.keep_fields_until;
    return detail::trace_member(ms, g, rq);
  });

  ConstructionReport rep;
  rep.setup = setup;
  const std::size_t ns = static_cast<std::size_t>(setup.s_max + 1);
  for (auto& tr : traces) {
    LadderRun run;
    run.S = tr.S;
    run.failed = tr.failed;
    run.failure = tr.failure;
    run.times.assign(tr.times.rbegin(), tr.times.rend());
    for (auto& series : tr.v_norm) run.hs_norm.emplace_back(series.rbegin(), series.rend());
    run.final_state = tr.v_final + ms.sum(g, tr.v_final.time);
    const double t_hi = run.S - 0.1 * (run.S - setup.T1);
    for (std::size_t s = 0; s < ns; ++s) {
      std::vector<double> x, y;
      for (std::size_t i = 0; i < run.times.size(); ++i) {
        const double t = run.times[i], val = run.hs_norm[s][i];
        if (t < setup.T1 || t > t_hi || !detail::separated(ms, t) || !(val > 0.0) || !std::isfinite(val)) continue;
        x.push_back(t);
        y.push_back(std::log(val));
      }
      const LinearFit fit = x.size() >= 3 ? fit_line(x, y) : LinearFit{};
      run.fits.push_back(fit);
      run.rates.push_back(fit.valid() ? -fit.slope : std::numeric_limits<double>::quiet_NaN());
    }
    if (run.failed) rep.warnings.push_back("run S = " + std::to_string(run.S) + " failed: " + run.failure);
    rep.runs.push_back(std::move(run));
  }

  rep.cauchy_gaps.assign(ns, {});
  rep.gap_method = aligned ? "coupled difference" : "direct subtraction";
  for (std::size_t j = 0; j + 1 < n_runs; ++j) {
    const auto& hi = traces[j + 1];
    const Field diff = aligned && hi.has_w ? hi.w_final : traces[j].v_final - hi.v_final;
    for (std::size_t s = 0; s < ns; ++s) rep.cauchy_gaps[s].push_back(sobolev_norm(diff, static_cast<int>(s)));
  }
  const std::size_t s_gap = std::min<std::size_t>(1, ns - 1);
  const auto& gaps = rep.cauchy_gaps[s_gap];
  rep.gaps_decreasing = true;
  for (std::size_t j = 1; j < gaps.size(); ++j) rep.gaps_decreasing = rep.gaps_decreasing && gaps[j] < gaps[j - 1];
  rep.convergence_suspect = !rep.gaps_decreasing;
  if (rep.convergence_suspect) rep.warnings.push_back("Cauchy gaps at T1 do not decrease along the ladder (convergence suspect)");

  if (ns > 1) {
    std::vector<double> rho;
    for (const auto& r : rep.runs)
      if (std::isfinite(r.rates[1])) rho.push_back(r.rates[1]);
    if (!rho.empty()) {
      const auto [lo, hi] = std::minmax_element(rho.begin(), rho.end());
      double mean = 0.0;
      for (double r : rho) mean += r / static_cast<double>(rho.size());
      rep.rate_drift = (*hi - *lo) / std::abs(mean);
    }
    const double rho1 = rep.designated().rates[1];
    if (std::isfinite(rho1) && rho1 > 0.0) {
      rep.theta_fit = 0.5 * rho1;
      rep.schedule = predict_theta_schedule(rep.theta_fit, setup.solitons.dim, setup.s_max);
    } else {
      rep.warnings.push_back("no positive H1 decay rate on the separated window; theta not fitted");
    }
  }
  rep.designated_snapshots = std::move(traces.back().u_fields);
  return rep;
}

// ---------------------------------------------------------------------------
// Uniqueness diagnostic

struct UniquenessOptions {
  double t_max = 6.0;
  double A0 = 1.0;
};

struct UniquenessSample {
  double t = 0.0;
  double z_h1 = 0.0;
  double ztilde_h1 = 0.0;
  double H = 0.0, Htilde = 0.0, main = 0.0;
  std::vector<double> re_ztilde_R;  // Re∫ z̃ R̄_k
  bool modulated = false;
  std::string note;
};

struct CoercivityFit {
  double c_fit = std::numeric_limits<double>::quiet_NaN();    // regression intercept
  double C_fit = std::numeric_limits<double>::quiet_NaN();    // regression weight of Σ(Re∫z̃R̄_k)², ≥ 0
  double c_bound = std::numeric_limits<double>::quiet_NaN();  // largest c holding at every sample with C_fit
  std::size_t points = 0;
  bool positive() const { return c_bound > 0.0; }
};

struct DecayBound {
  double constant = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  std::size_t points = 0;
};

struct UniquenessReport {
  ConstructionReport A, B;
  std::string z_method;
  std::vector<UniquenessSample> samples;
  std::vector<ModulationState> modulation;
  double max_z_h1 = 0.0;
  CoercivityFit coercivity;
  std::vector<DecayBound> derre;        // per soliton
  double coefficient_constant = 0.0;    // |a′|, |b′| ≤ C‖z‖_{H¹}
  double main_constant = 0.0;           // |Main| ≤ C‖z̃‖²_{H¹}/t
  LinearFit class_fit;                  // ln‖u − R‖_{H¹} against ln t
  double class_exponent = std::numeric_limits<double>::quiet_NaN();
  Field reference, candidate;           // φ(T1) and u(T1)
  std::vector<std::string> warnings;

  // Final H¹ Cauchy gap of the ladder reaching the larger S.
  double larger_ladder_gap() const {
    const auto& big = A.setup.S_ladder.back() >= B.setup.S_ladder.back() ? A : B;
    return big.final_gap(1);
  }
};

namespace detail {

inline CoercivityFit fit_coercivity(const std::vector<UniquenessSample>& samples) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    const double n = s.ztilde_h1 * s.ztilde_h1;
    if (!s.modulated || !(n > 0.0) || !std::isfinite(s.H)) continue;
    double r = 0.0;
    for (double q : s.re_ztilde_R) r += q * q;
    x.push_back(r / n);
    y.push_back(s.H / n);
  }
  CoercivityFit out;
  out.points = x.size();
  if (x.empty()) return out;
  // H/‖z̃‖² ≈ c − C·Σ(Re∫z̃R̄_k)²/‖z̃‖²
  const LinearFit f = x.size() >= 3 ? fit_line(x, y) : LinearFit{};
  out.C_fit = f.valid() ? std::max(0.0, -f.slope) : 0.0;
  out.c_fit = f.valid() ? f.intercept : y.front();
  out.c_bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) out.c_bound = std::min(out.c_bound, y[i] + out.C_fit * x[i]);
  return out;
}

// |d/dt Re∫z̃R̄_k| ≤ C(e^{−γ̂t}‖z‖ + ‖z‖²): γ̂ from a log-linear fit of the ratio to ‖z‖, then C
// raised until the bound holds everywhere.
inline DecayBound fit_derre(const std::vector<UniquenessSample>& s, std::size_t k) {
  DecayBound out;
  std::vector<double> tt, rate, zz;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (!s[i - 1].modulated || !s[i + 1].modulated || !(s[i].z_h1 > 0.0)) continue;
    const double d = (s[i + 1].re_ztilde_R[k] - s[i - 1].re_ztilde_R[k]) / (s[i + 1].t - s[i - 1].t);
    tt.push_back(s[i].t);
    rate.push_back(std::abs(d));
    zz.push_back(s[i].z_h1);
  }
  out.points = tt.size();
  if (tt.size() < 3) return out;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < tt.size(); ++i)
    if (rate[i] > 0.0) {
      x.push_back(tt[i]);
      y.push_back(std::log(rate[i] / zz[i]));
    }
  const LinearFit f = x.size() >= 3 ? fit_line(x, y) : LinearFit{};
  out.rate = f.valid() ? std::max(0.0, -f.slope) : 0.0;
  out.constant = 0.0;
  for (std::size_t i = 0; i < tt.size(); ++i) {
    const double bound = std::exp(-out.rate * tt[i]) * zz[i] + zz[i] * zz[i];
    out.constant = std::max(out.constant, rate[i] / bound);
  }
  return out;
}

}  // namespace detail

inline UniquenessReport run_uniqueness(ConstructionSetup a, ConstructionSetup b, const UniquenessOptions& opt = {}) {
  if (!(a.grid == b.grid)) throw ConfigError("uniq: the two pipelines use different grids");
  if (a.T1 != b.T1) throw ConfigError("uniq: the two pipelines use different T1");
  const auto same_solitons = [&] {
    const auto &x = a.solitons, &y = b.solitons;
    if (x.dim != y.dim || x.nl.name() != y.nl.name() || x.size() != y.size()) return false;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const auto &p = x.solitons[k], &q = y.solitons[k];
      if (p.omega != q.omega || p.v != q.v || p.x0 != q.x0 || p.gamma != q.gamma) return false;
    }
    return true;
  }();
  if (!same_solitons) throw ConfigError("uniq: the two pipelines target different multi-solitons");
  detail::require(opt.t_max > a.T1, "uniq: window end must exceed T1");
  a.keep_fields_until = b.keep_fields_until = opt.t_max;
  a.s_max = std::max(a.s_max, 1);
  b.s_max = std::max(b.s_max, 1);

  UniquenessReport rep;
  rep.A = run_construction(a);
  rep.B = run_construction(b);
  const MultiSoliton ms(a.solitons);
  const Grid& g = a.grid;
  const bool critical = a.solitons.nl.is_pure_power() && a.solitons.nl.criticality(a.solitons.dim) == Criticality::critical;
  const CutoffFamily cf(a.solitons, opt.A0);
  rep.reference = rep.A.designated().final_state;
  rep.candidate = rep.B.designated().final_state;

  const double Sa = a.S_ladder.back(), Sb = b.S_ladder.back();
  const auto& phi = rep.A.designated_snapshots;
  std::vector<Field> z;
  const bool same_lattice = a.dt == b.dt && a.sample_interval == b.sample_interval && a.dealias == b.dealias;
  if (same_lattice && Sa == Sb) {
    rep.z_method = "identical pipelines";
    for (const auto& u : phi) z.emplace_back(g, u.time, "z");
  } else {
    ConstructionSetup joint = Sa > Sb ? a : b;
    joint.S_ladder = {std::min(Sa, Sb), std::max(Sa, Sb)};
    if (same_lattice && joint.aligned()) {
      rep.z_method = "coupled difference";
      detail::TraceRequest rq;
      rq.S = std::max(Sa, Sb);
      rq.T1 = a.T1;
      rq.dt = a.dt;
      rq.stride = std::max(1, static_cast<int>(std::lround(a.sample_interval / a.dt)));
      rq.s_max = 1;
      rq.w_start = std::min(Sa, Sb);
      rq.keep_until = opt.t_max;
      rq.dealias = a.dealias.value_or(default_dealias(a.solitons.nl));
      auto tr = detail::trace_member(ms, g, rq);
      if (tr.failed) throw NumericError("uniq: coupled difference run failed: " + tr.failure);
      // w = v_small − v_big; z = u_B − u_A
      const cplx sign = Sb > Sa ? cplx(-1.0) : cplx(1.0);
      for (auto& w : tr.w_fields) z.push_back(sign * w);
    } else {
      rep.z_method = "direct subtraction";
      const auto& cand = rep.B.designated_snapshots;
      for (const auto& u : phi) {
        const auto it = std::find_if(cand.begin(), cand.end(), [&](const Field& c) { return std::abs(c.time - u.time) < 1e-9; });
        if (it == cand.end()) continue;
        Field d = *it - u;
        d.time = u.time;
        z.push_back(std::move(d));
      }
      if (z.empty()) throw ConfigError("uniq: the two pipelines share no sample times");
    }
  }

  for (const auto& zt : z) {
    const double t = zt.time;
    const auto ph = std::find_if(phi.begin(), phi.end(), [&](const Field& f) { return std::abs(f.time - t) < 1e-9; });
    if (ph == phi.end() || t > opt.t_max + 1e-9) continue;
    UniquenessSample s;
    s.t = t;
    s.z_h1 = sobolev_norm(zt, 1);
    rep.max_z_h1 = std::max(rep.max_z_h1, s.z_h1);
    try {
      const ModulationSystem sys(ms, g, t, critical);
      const auto st = solve_modulation(zt, sys);
      const Field ztl = modulated_error(zt, sys, st);
      s.ztilde_h1 = sobolev_norm(ztl, 1);
      s.H = eval_weinstein_H(ztl, ms, cf, t).value;
      s.Htilde = eval_weinstein_Htilde(ztl, *ph, ms, cf, t).value;
      s.main = eval_main_term(ztl, cf, a.solitons, t);
      for (std::size_t k = 0; k < ms.size(); ++k) s.re_ztilde_R.push_back(inner_product_real(ztl, ms.component(k, g, t)));
      s.modulated = true;
      if (!sys.warning().empty()) s.note = sys.warning();
      rep.modulation.push_back(st);
    } catch (const NumericError& e) {
      s.note = e.what();
      s.re_ztilde_R.assign(ms.size(), std::numeric_limits<double>::quiet_NaN());
    }
    rep.samples.push_back(std::move(s));
  }

  rep.coercivity = detail::fit_coercivity(rep.samples);
  for (std::size_t k = 0; k < ms.size(); ++k) rep.derre.push_back(detail::fit_derre(rep.samples, k));

  const auto rates = modulation_rates(rep.modulation);
  for (const auto& r : rates) {
    const auto it = std::find_if(rep.samples.begin(), rep.samples.end(), [&](const UniquenessSample& s) { return std::abs(s.t - r.time) < 1e-9; });
    if (it == rep.samples.end() || !(it->z_h1 > 0.0)) continue;
    double m = 0.0;
    for (std::size_t k = 0; k < r.a_dot.size(); ++k) {
      m = std::max(m, std::abs(r.a_dot[k]));
      for (int i = 0; i < a.solitons.dim; ++i) m = std::max(m, std::abs(r.b_dot[k][static_cast<std::size_t>(i)]));
    }
    rep.coefficient_constant = std::max(rep.coefficient_constant, m / it->z_h1);
  }
  for (const auto& s : rep.samples)
    if (s.modulated && s.ztilde_h1 > 0.0)
      rep.main_constant = std::max(rep.main_constant, std::abs(s.main) * s.t / (s.ztilde_h1 * s.ztilde_h1));

  const auto& cand = rep.B.designated();
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < cand.times.size(); ++i) {
    const double t = cand.times[i], v = cand.hs_norm[1][i];
    if (t < a.T1 || t > 0.9 * cand.S + 0.1 * a.T1 || !detail::separated(ms, t) || !(v > 0.0)) continue;
    lx.push_back(std::log(t));
    ly.push_back(std::log(v));
  }
  if (lx.size() >= 3) {
    rep.class_fit = fit_line(lx, ly);
    rep.class_exponent = -rep.class_fit.slope;
  }
  for (const auto& w : rep.A.warnings) rep.warnings.push_back("A: " + w);
  for (const auto& w : rep.B.warnings) rep.warnings.push_back("B: " + w);
  return rep;
}

}  // namespace nlslab
