#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "errors.hpp"
#include "fit.hpp"
#include "grid.hpp"
#include "soliton.hpp"

namespace nlslab {

struct ModulationState {
  double time = 0.0;
  std::vector<double> a;
  std::vector<Vec> b;
  std::optional<std::vector<double>> c;
  std::vector<double> residuals;  // Re⟨z̃, D_r⟩ after the solve
  double det = 0.0;
  double cond = 0.0;
  std::vector<double> coefficients;  // [a, b_{·,1}, .., b_{·,d}, (c)]
};

// The symmetry directions D_r at one time and their Gram matrix M_rc = Re⟨D_c, D_r⟩.
// Unknowns are ordered [a_1..a_K, b_{1,1}..b_{K,1}, .., b_{1,d}..b_{K,d}, (c_1..c_K)] and
// the directions are iR_k, ∂_{x_i}R_k and, when critical, (d/2)R_k + y_k·∇R_k − (i/2)(v_k·y_k)R_k.
class ModulationSystem {
 public:
  ModulationSystem(const MultiSoliton& ms, const Grid& g, double t, bool critical)
      : grid_(g), time_(t), K_(ms.size()), d_(g.dim()), critical_(critical) {
    detail::require(ms.dim() == g.dim(), "modulation: grid dimension differs from the configuration");
    owner_.resize(unknowns());
    directions_.resize(unknowns());
    for (std::size_t k = 0; k < K_; ++k) {
      const Field r = ms.component(k, g, t);
      directions_[index_a(k)] = cplx(0.0, 1.0) * r;
      owner_[index_a(k)] = k;
      std::vector<Field> grad;
      for (int i = 0; i < d_; ++i) {
        grad.push_back(ms.gradient(k, g, t, i));
        directions_[index_b(k, i)] = grad.back();
        owner_[index_b(k, i)] = k;
      }
      if (critical_) {
        const auto& p = ms.params(k);
        const Vec c = p.center(t);
        Field lam(g, t, "Lambda");
        for (std::size_t n = 0; n < g.size(); ++n) {
          const Vec x = g.point(n);
          const Vec y{x[0] - c[0], x[1] - c[1]};
          cplx val = 0.5 * d_ * r[n] - cplx(0.0, 0.5 * (p.v[0] * y[0] + p.v[1] * y[1])) * r[n];
          for (int i = 0; i < d_; ++i) val += y[static_cast<std::size_t>(i)] * grad[static_cast<std::size_t>(i)][n];
          lam[n] = val;
        }
        directions_[index_c(k)] = std::move(lam);
        owner_[index_c(k)] = k;
      }
    }
    const auto n = static_cast<Eigen::Index>(unknowns());
    matrix_.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) {
        const double v = inner_product_real(directions_[static_cast<std::size_t>(c)], directions_[static_cast<std::size_t>(r)]);
        matrix_(r, c) = v;
        matrix_(c, r) = v;
      }
    const double sep = 3.0 / std::sqrt(ms.min_omega());
    if (K_ > 1 && ms.min_separation(t) < sep)
      warning_ = "solitons closer than 3/sqrt(min omega) at t = " + std::to_string(t) + "; the system may be ill conditioned";
  }

  std::size_t size() const { return K_; }
  int dim() const { return d_; }
  bool critical() const { return critical_; }
  double time() const { return time_; }
  std::size_t unknowns() const { return K_ * static_cast<std::size_t>(d_ + 1 + (critical_ ? 1 : 0)); }
  std::size_t index_a(std::size_t k) const { return k; }
  std::size_t index_b(std::size_t k, int axis) const { return K_ * static_cast<std::size_t>(1 + axis) + k; }
  std::size_t index_c(std::size_t k) const { return K_ * static_cast<std::size_t>(d_ + 1) + k; }
  // Soliton to which unknown r belongs.
  std::size_t owner(std::size_t r) const { return owner_[r]; }

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const std::vector<Field>& directions() const { return directions_; }
  const std::string& warning() const { return warning_; }

  // y_r = −Re⟨z, D_r⟩
  Eigen::VectorXd rhs(const Field& z) const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(unknowns()));
    for (std::size_t r = 0; r < unknowns(); ++r) y(static_cast<Eigen::Index>(r)) = -inner_product_real(z, directions_[r]);
    return y;
  }

  // z̃ = z + Σ_r x_r D_r
  Field apply(const Field& z, const Eigen::VectorXd& x) const {
    Field out = z;
    for (std::size_t r = 0; r < unknowns(); ++r) {
      const double c = x(static_cast<Eigen::Index>(r));
      for (std::size_t n = 0; n < out.size(); ++n) out[n] += c * directions_[r][n];
    }
    return out;
  }

  // Split M = S + E into same-soliton and cross-soliton entries.
  Eigen::MatrixXd same_soliton_part() const {
    Eigen::MatrixXd s = matrix_;
    for (Eigen::Index r = 0; r < s.rows(); ++r)
      for (Eigen::Index c = 0; c < s.cols(); ++c)
        if (owner_[static_cast<std::size_t>(r)] != owner_[static_cast<std::size_t>(c)]) s(r, c) = 0.0;
    return s;
  }

 private:
  Grid grid_;
  double time_;
  std::size_t K_;
  int d_;
  bool critical_;
  std::vector<std::size_t> owner_;
  std::vector<Field> directions_;
  Eigen::MatrixXd matrix_;
  std::string warning_;
};

inline ModulationSystem assemble_modulation_matrix(const MultiSoliton& ms, const Grid& g, double t, bool critical) {
  return ModulationSystem(ms, g, t, critical);
}

namespace detail {

inline double condition_number(const Eigen::MatrixXd& m) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline ModulationState solve_modulation(const Field& z, const ModulationSystem& sys) {
  const Eigen::MatrixXd& m = sys.matrix();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  const double det = lu.determinant();
  double scale = 1.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) scale *= std::abs(m(i, i));
  if (!(std::abs(det) >= 1e-10 * scale))
    throw NumericError("modulation system is singular at t = " + std::to_string(sys.time()) +
                       " (|det| below 1e-10 of the diagonal product); solitons are insufficiently separated");
  const Eigen::VectorXd x = lu.solve(sys.rhs(z));

  ModulationState st;
  st.time = sys.time();
  st.det = det;
  st.cond = detail::condition_number(m);
  st.coefficients.assign(x.data(), x.data() + x.size());
  const std::size_t K = sys.size();
  for (std::size_t k = 0; k < K; ++k) {
    st.a.push_back(x(static_cast<Eigen::Index>(sys.index_a(k))));
    Vec b{0.0, 0.0};
    for (int i = 0; i < sys.dim(); ++i) b[static_cast<std::size_t>(i)] = x(static_cast<Eigen::Index>(sys.index_b(k, i)));
    st.b.push_back(b);
  }
  if (sys.critical()) {
    std::vector<double> c;
    for (std::size_t k = 0; k < K; ++k) c.push_back(x(static_cast<Eigen::Index>(sys.index_c(k))));
    st.c = std::move(c);
  }
  const Eigen::VectorXd res = -sys.rhs(sys.apply(z, x));
  st.residuals.assign(res.data(), res.data() + res.size());
  return st;
}

inline ModulationState solve_modulation(const Field& z, const MultiSoliton& ms, double t, bool critical) {
  return solve_modulation(z, ModulationSystem(ms, z.grid, t, critical));
}

inline Field modulated_error(const Field& z, const ModulationSystem& sys, const ModulationState& st) {
  return sys.apply(z, Eigen::Map<const Eigen::VectorXd>(st.coefficients.data(), static_cast<Eigen::Index>(st.coefficients.size())));
}

// Centred differences of the coefficients across a series of states.
struct ModulationRate {
  double time = 0.0;
  std::vector<double> a_dot;
  std::vector<Vec> b_dot;
};

inline std::vector<ModulationRate> modulation_rates(const std::vector<ModulationState>& states) {
  std::vector<ModulationRate> out;
  for (std::size_t n = 1; n + 1 < states.size(); ++n) {
    const auto& lo = states[n - 1];
    const auto& hi = states[n + 1];
    const double h = hi.time - lo.time;
    ModulationRate r;
    r.time = states[n].time;
    for (std::size_t k = 0; k < lo.a.size(); ++k) {
      r.a_dot.push_back((hi.a[k] - lo.a[k]) / h);
      r.b_dot.push_back({(hi.b[k][0] - lo.b[k][0]) / h, (hi.b[k][1] - lo.b[k][1]) / h});
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Determinant limit

// Per-soliton factor ∫Q² det[∫∂_iQ ∂_jQ] from one-dimensional radial quadrature.
inline double soliton_det_factor(const GroundState& gs) {
  boost::math::quadrature::exp_sinh<double> half_line;
  const double r2 = [&] {
    if (gs.dim() == 1) return 2.0 * half_line.integrate([&](double r) { return std::pow(gs.derivative(r), 2); });
    return std::numbers::pi * half_line.integrate([&](double r) { return r * std::pow(gs.derivative(r), 2); });
  }();
  return gs.mass() * std::pow(r2, gs.dim());
}

struct DetLimitReport {
  std::vector<double> time, det, interaction_gap, self_gap, relative_gap;
  double limit = 0.0;
  LinearFit log_fit;  // ln|interaction_gap| against t
  bool shrinking = false;
};

namespace detail {

// det(I + X) − 1 without cancellation when X is small; tr X vanishes for cross-soliton X.
inline double det_identity_plus_minus_one(const Eigen::MatrixXd& x) {
  if (x.norm() < 0.25) {
    double logdet = 0.0;
    Eigen::MatrixXd power = x;
    for (int m = 1; m <= 200; ++m) {
      const double term = power.trace() / m;
      logdet += (m % 2 == 1 ? term : -term);
      if (m > 2 && std::abs(term) <= 1e-18 * std::abs(logdet)) break;
      if (power.norm() == 0.0) break;
      power = power * x;
    }
    return std::expm1(logdet);
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(x.rows(), x.cols());
  return Eigen::FullPivLU<Eigen::MatrixXd>(id + x).determinant() - 1.0;
}

}  // namespace detail

inline DetLimitReport verify_det_limit(const MultiSoliton& ms, const Grid& g, const std::vector<double>& t_samples) {
  DetLimitReport rep;
  rep.limit = 1.0;
  for (std::size_t k = 0; k < ms.size(); ++k) rep.limit *= soliton_det_factor(ms.ground_state(k));
  std::vector<double> ft, fy;
  for (double t : t_samples) {
    const ModulationSystem sys(ms, g, t, false);
    const Eigen::MatrixXd s = sys.same_soliton_part();
    const Eigen::MatrixXd e = sys.matrix() - s;
    const double det_s = Eigen::FullPivLU<Eigen::MatrixXd>(s).determinant();
    const Eigen::MatrixXd x = Eigen::FullPivLU<Eigen::MatrixXd>(s).solve(e);
    const double inter = det_s * detail::det_identity_plus_minus_one(x);
    rep.time.push_back(t);
    rep.det.push_back(Eigen::FullPivLU<Eigen::MatrixXd>(sys.matrix()).determinant());
    rep.interaction_gap.push_back(inter);
    rep.self_gap.push_back(det_s - rep.limit);
    rep.relative_gap.push_back(std::abs(inter + det_s - rep.limit) / std::abs(rep.limit));
    if (inter != 0.0) {
      ft.push_back(t);
      fy.push_back(std::log(std::abs(inter)));
    }
  }
  rep.log_fit = fit_line(ft, fy);
  rep.shrinking = rep.time.size() >= 2;
  for (std::size_t i = 1; i < rep.time.size(); ++i)
    if (!(std::abs(rep.interaction_gap[i]) < std::abs(rep.interaction_gap[i - 1]))) rep.shrinking = false;
  return rep;
}

}  // namespace nlslab
