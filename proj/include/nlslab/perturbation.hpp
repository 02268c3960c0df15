#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "grid.hpp"
#include "nonlinearity.hpp"
#include "propagator.hpp"
#include "soliton.hpp"

namespace nlslab {

// R(t) and the interaction forcing g(R) − Σ g(R_k) on a grid at one time.
struct SolitonFrame {
  double t = 0.0;
  std::vector<cplx> sum;
  std::vector<cplx> forcing;
};

// Evaluates multi-soliton frames quickly: the Galilean factor e^{iv·x/2} is
// time independent and tabulated once per soliton.
class FrameBuilder {
 public:
  FrameBuilder(const MultiSoliton& ms, const Grid& g) : ms_(&ms), grid_(g) {
    spatial_.resize(ms.size());
    for (std::size_t k = 0; k < ms.size(); ++k) {
      const Vec v = ms.params(k).v;
      spatial_[k].resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec x = g.point(i);
        spatial_[k][i] = std::polar(1.0, 0.5 * (v[0] * x[0] + v[1] * x[1]));
      }
    }
  }

  SolitonFrame build(double t) const {
    const std::size_t n = grid_.size(), K = ms_->size();
    const Nonlinearity& nl = ms_->nonlinearity();
    std::vector<std::vector<cplx>> comp(K, std::vector<cplx>(n));
    for (std::size_t k = 0; k < K; ++k) {
      const auto& p = ms_->params(k);
      const auto& gs = ms_->ground_state(k);
      const Vec c = p.center(t);
      const cplx temporal = std::polar(1.0, (p.omega - 0.25 * p.speed_squared()) * t + p.gamma);
      for (std::size_t i = 0; i < n; ++i) {
        const Vec x = grid_.point(i);
        comp[k][i] = gs.at({x[0] - c[0], x[1] - c[1]}) * temporal * spatial_[k][i];
      }
    }
    SolitonFrame fr;
    fr.t = t;
    fr.sum.assign(n, cplx{});
    fr.forcing.assign(n, cplx{});
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t dom = 0;
      double best = -1.0;
      cplx s{};
      for (std::size_t k = 0; k < K; ++k) {
        s += comp[k][i];
        if (std::norm(comp[k][i]) > best) {
          best = std::norm(comp[k][i]);
          dom = k;
        }
      }
      fr.sum[i] = s;
      if (K == 1) continue;
      // g(R) − g(R_j) around the dominant soliton j, minus the others.
      cplx f = nl.g_increment(comp[dom][i], s - comp[dom][i]);
      for (std::size_t k = 0; k < K; ++k)
        if (k != dom) f -= nl.g(comp[k][i]);
      fr.forcing[i] = f;
    }
    return fr;
  }

  const Grid& grid() const { return grid_; }

 private:
  const MultiSoliton* ms_;
  Grid grid_;
  std::vector<std::vector<cplx>> spatial_;
};

// Integrates v = u − R(t), where u solves NLS and R is the exact multi-soliton
// sum, through v' = iΔv + i[g(R + v) − Σ g(R_k)].  An optional second layer
// w = ũ − u (for a second solution ũ) obeys w' = iΔw + i[g(R + v + w) − g(R + v)].
// Both layers are advanced by Strang splitting: exact linear multiplier and a
// pointwise RK4 nonlinear substep with R(t) evaluated analytically.  All
// errors are then relative to the size of v and w.
class PerturbationFlow {
 public:
  PerturbationFlow(const MultiSoliton& ms, const Grid& g, double dt, bool dealias)
      : frames_(ms, g), nl_(ms.nonlinearity()), dt_(dt), multiplier_(g.size()) {
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
  const FrameBuilder& frames() const { return frames_; }

  // Advance from t to t + dt.
  void step(double t, std::vector<cplx>& v, std::vector<cplx>* w) {
    const SolitonFrame& f0 = frame_at(t);
    const SolitonFrame f1 = frames_.build(t + 0.25 * dt_);
    const SolitonFrame f2 = frames_.build(t + 0.5 * dt_);
    nonlinear(f0, f1, f2, 0.5 * dt_, v, w);
    linear(v);
    if (w) linear(*w);
    const SolitonFrame f3 = frames_.build(t + 0.75 * dt_);
    SolitonFrame f4 = frames_.build(t + dt_);
    nonlinear(f2, f3, f4, 0.5 * dt_, v, w);
    cached_ = std::move(f4);
    has_cache_ = true;
    check_finite(v, t + dt_);
    if (w) check_finite(*w, t + dt_);
  }

 private:
  const SolitonFrame& frame_at(double t) {
    if (!has_cache_ || std::abs(cached_.t - t) > 1e-12 * std::max(1.0, std::abs(t))) {
      cached_ = frames_.build(t);
      has_cache_ = true;
    }
    return cached_;
  }

  void linear(std::vector<cplx>& u) const {
    const Grid& g = frames_.grid();
    fft_forward(g, u);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] *= multiplier_[i];
    fft_backward(g, u);
  }

  // Right-hand sides of the pointwise ODEs.
  cplx rhs_v(const SolitonFrame& f, std::size_t i, cplx v) const {
    return cplx(0.0, 1.0) * (nl_.g_increment(f.sum[i], v) + f.forcing[i]);
  }
  cplx rhs_w(const SolitonFrame& f, std::size_t i, cplx v, cplx w) const {
    return cplx(0.0, 1.0) * nl_.g_increment(f.sum[i] + v, w);
  }

  void nonlinear(const SolitonFrame& a, const SolitonFrame& m, const SolitonFrame& b, double h,
                 std::vector<cplx>& v, std::vector<cplx>* w) const {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const cplx v0 = v[i];
      const cplx k1 = rhs_v(a, i, v0);
      const cplx k2 = rhs_v(m, i, v0 + 0.5 * h * k1);
      const cplx k3 = rhs_v(m, i, v0 + 0.5 * h * k2);
      const cplx k4 = rhs_v(b, i, v0 + h * k3);
      v[i] = v0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (w) {
        const cplx w0 = (*w)[i];
        const cplx l1 = rhs_w(a, i, v0, w0);
        const cplx l2 = rhs_w(m, i, v0 + 0.5 * h * k1, w0 + 0.5 * h * l1);
        const cplx l3 = rhs_w(m, i, v0 + 0.5 * h * k2, w0 + 0.5 * h * l2);
        const cplx l4 = rhs_w(b, i, v0 + h * k3, w0 + h * l3);
        (*w)[i] = w0 + h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
      }
    }
  }

  FrameBuilder frames_;
  Nonlinearity nl_;
  double dt_;
  std::vector<cplx> multiplier_;
  SolitonFrame cached_;
  bool has_cache_ = false;
};

}  // namespace nlslab
