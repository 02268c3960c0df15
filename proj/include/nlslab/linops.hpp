#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "grid.hpp"
#include "groundstate.hpp"
#include "nonlinearity.hpp"

namespace nlslab {

enum class OperatorKind { L_plus, L_minus, iL_full };

inline std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::L_plus: return "L_plus";
    case OperatorKind::L_minus: return "L_minus";
    case OperatorKind::iL_full: return "iL_full";
  }
  return "?";
}

// Discrete operator data. The quadratic form of the operator is wᵀ A w, the
// discrete H¹ form is wᵀ G w and the L² form is wᵀ diag(weights) w.
struct Discretization {
  int dim = 1;
  int ell = 0;                 // angular sector for dim = 2
  double extent = 0.0;         // X for [−X, X] or R for [0, R]
  double h = 0.0;
  std::vector<double> nodes;   // x_j or r_j
  std::vector<double> weights; // L² quadrature weights
};

class LinearizedOperator {
 public:
  LinearizedOperator(OperatorKind kind, GroundState gs, Discretization disc, Eigen::MatrixXd form, Eigen::MatrixXd gram)
      : kind_(kind), gs_(std::move(gs)), disc_(std::move(disc)), form_(std::move(form)), gram_(std::move(gram)) {}

  OperatorKind kind() const { return kind_; }
  double omega() const { return gs_.omega(); }
  const GroundState& ground_state() const { return gs_; }
  const Discretization& discretization() const { return disc_; }
  int size() const { return static_cast<int>(disc_.nodes.size()); }

  // Quadratic form matrix A (for iL_full the non-symmetric 2M×2M generator J acting on values).
  const Eigen::MatrixXd& form() const { return form_; }
  const Eigen::MatrixXd& h1_gram() const { return gram_; }
  Eigen::VectorXd weights() const { return Eigen::Map<const Eigen::VectorXd>(disc_.weights.data(), size()); }

  // Matrix of the operator acting on nodal values: W⁻¹A.
  Eigen::MatrixXd action() const {
    if (kind_ == OperatorKind::iL_full) return form_;
    return weights().cwiseInverse().asDiagonal() * form_;
  }

 private:
  OperatorKind kind_;
  GroundState gs_;
  Discretization disc_;
  Eigen::MatrixXd form_;
  Eigen::MatrixXd gram_;
};

namespace detail {

inline void check_resolution(double h, double omega) {
  const double limit = (2.0 / std::sqrt(omega)) / 12.0;
  if (h > limit) {
    std::ostringstream os;
    os << "linearized operator under-resolved: spacing h = " << h << " exceeds " << limit
       << " (12 points per decay length 2/sqrt(omega) = " << 2.0 / std::sqrt(omega) << ")";
    throw ConfigError(os.str());
  }
}

// Potential V with L = −Δ + ω − V.
inline double potential(OperatorKind kind, const Nonlinearity& nl, double q) {
  const double r = q * q;
  if (kind == OperatorKind::L_minus) return nl.f(r);
  return nl.f(r) + 2.0 * r * nl.f_prime(r);
}

// Fourth-order Dirichlet second-difference matrix on M interior nodes.
inline Eigen::MatrixXd second_difference(int M, double h) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(M, M);
  const double c[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  for (int i = 0; i < M; ++i)
    for (int o = -2; o <= 2; ++o) {
      const int j = i + o;
      if (j >= 0 && j < M) d(i, j) = c[o + 2] / (12.0 * h * h);
    }
  return d;
}

inline Eigen::MatrixXd self_adjoint(OperatorKind kind, const GroundState& gs, const Discretization& disc,
                                    const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass) {
  const int M = static_cast<int>(disc.nodes.size());
  Eigen::MatrixXd a = stiffness;
  for (int j = 0; j < M; ++j) {
    const double r = disc.nodes[static_cast<std::size_t>(j)];
    const double v = potential(kind, gs.nonlinearity(), gs.value(std::abs(r)));
    a(j, j) += mass(j, j) * (gs.omega() - v);
  }
  return a;
}

}  // namespace detail

// L± on [−X, X] with M interior Dirichlet nodes x_j = −X + (j+1)h, h = 2X/(M+1).
inline LinearizedOperator assemble(OperatorKind kind, const GroundState& gs, int M, double X) {
  detail::require(gs.dim() == 1, "assemble: use assemble_radial for d = 2");
  detail::require(M >= 8 && X > 0.0, "assemble: need M >= 8 nodes and X > 0");
  Discretization disc;
  disc.dim = 1;
  disc.extent = X;
  disc.h = 2.0 * X / (M + 1);
  detail::check_resolution(disc.h, gs.omega());
  for (int j = 0; j < M; ++j) disc.nodes.push_back(-X + (j + 1) * disc.h);
  disc.weights.assign(static_cast<std::size_t>(M), disc.h);

  const Eigen::MatrixXd stiffness = -disc.h * detail::second_difference(M, disc.h);
  const Eigen::MatrixXd mass = disc.h * Eigen::MatrixXd::Identity(M, M);
  const Eigen::MatrixXd gram = stiffness + mass;
  if (kind != OperatorKind::iL_full) {
    Eigen::MatrixXd a = detail::self_adjoint(kind, gs, disc, stiffness, mass);
    return {kind, gs, std::move(disc), std::move(a), gram};
  }
  const Eigen::MatrixXd lp = detail::self_adjoint(OperatorKind::L_plus, gs, disc, stiffness, mass) / disc.h;
  const Eigen::MatrixXd lm = detail::self_adjoint(OperatorKind::L_minus, gs, disc, stiffness, mass) / disc.h;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  j.topRightCorner(M, M) = lm;
  j.bottomLeftCorner(M, M) = -lp;
  return {kind, gs, std::move(disc), std::move(j), gram};
}

// d = 2, angular sector w(r)e^{iℓφ}: finite volumes on cells r_j = (j + ½)h of [0, R],
// Dirichlet at R, with the r-weighted L² form and −(1/r)(r w′)′ + (ℓ²/r²)w.
inline LinearizedOperator assemble_radial(OperatorKind kind, const GroundState& gs, int M, double R, int ell) {
  detail::require(gs.dim() == 2, "assemble_radial: needs a 2D ground state");
  detail::require(kind != OperatorKind::iL_full, "assemble_radial: iL_full is provided in 1D only");
  detail::require(M >= 8 && R > 0.0 && ell >= 0, "assemble_radial: need M >= 8, R > 0, ell >= 0");
  Discretization disc;
  disc.dim = 2;
  disc.ell = ell;
  disc.extent = R;
  disc.h = R / M;
  detail::check_resolution(disc.h, gs.omega());
  for (int j = 0; j < M; ++j) {
    disc.nodes.push_back((j + 0.5) * disc.h);
    disc.weights.push_back(disc.nodes.back() * disc.h);
  }
  const double h = disc.h;
  Eigen::MatrixXd stiffness = Eigen::MatrixXd::Zero(M, M);
  for (int j = 0; j < M; ++j) {
    const double face = (j + 1) * h;  // r_{j+1/2}
    const double c = face / h;
    stiffness(j, j) += c;
    if (j + 1 < M) {
      stiffness(j + 1, j + 1) += c;
      stiffness(j, j + 1) -= c;
      stiffness(j + 1, j) -= c;
    }
    const double r = disc.nodes[static_cast<std::size_t>(j)];
    stiffness(j, j) += disc.weights[static_cast<std::size_t>(j)] * ell * ell / (r * r);
  }
  const Eigen::MatrixXd mass = Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(disc.weights.data(), M)).asDiagonal();
  const Eigen::MatrixXd gram = stiffness + mass;
  Eigen::MatrixXd a = detail::self_adjoint(kind, gs, disc, stiffness, mass);
  return {kind, gs, std::move(disc), std::move(a), gram};
}

// ---------------------------------------------------------------------------
// Constraints

// "Q", "dQ" (∂_{x1}Q, radial profile Q′ in sector ℓ = 1) or "xdQ" (x·∇Q = rQ′).
inline Eigen::VectorXd constraint(const LinearizedOperator& op, const std::string& name) {
  const auto& disc = op.discretization();
  const auto& gs = op.ground_state();
  Eigen::VectorXd c(op.size());
  for (int j = 0; j < op.size(); ++j) {
    const double x = disc.nodes[static_cast<std::size_t>(j)];
    const double dq = disc.dim == 1 ? gs.gradient_at({x, 0.0})[0] : gs.derivative(x);
    if (name == "Q") c(j) = gs.value(std::abs(x));
    else if (name == "dQ") c(j) = dq;
    else if (name == "xdQ") c(j) = x * dq;
    else throw ConfigError("unknown constraint '" + name + "' (expected Q, dQ or xdQ)");
  }
  return c;
}

inline std::vector<Eigen::VectorXd> constraints(const LinearizedOperator& op, const std::vector<std::string>& names) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& n : names) out.push_back(constraint(op, n));
  return out;
}

struct CoercivityReport {
  std::vector<Eigen::VectorXd> constraint_set;
  double min_eig_constrained = 0.0;    // min ⟨Lw,w⟩/‖w‖²_{H¹} over the constrained subspace
  double min_eig_unconstrained = 0.0;  // same over all w
  double mu_plus = 0.0;                // coercivity constant (positive when coercive)
  std::vector<double> spectrum_head;   // lowest L² eigenvalues of the operator
  std::vector<double> rayleigh_head;   // lowest constrained H¹ Rayleigh values
  Eigen::MatrixXd complement;          // orthonormal basis of the constrained subspace (columns)
  bool coercive() const { return mu_plus > 0.0; }
};

namespace detail {

inline Eigen::VectorXd lowest(const Eigen::VectorXd& v, int n) {
  return v.head(std::min<Eigen::Index>(n, v.size()));
}

}  // namespace detail

inline CoercivityReport constrained_min_eig(const LinearizedOperator& op, const std::vector<Eigen::VectorXd>& cons,
                                            int head = 5) {
  detail::require(op.kind() != OperatorKind::iL_full, "constrained_min_eig: needs L_plus or L_minus");
  const int M = op.size();
  const Eigen::VectorXd w = op.weights();
  const int m = static_cast<int>(cons.size());
  CoercivityReport rep;
  rep.constraint_set = cons;

  Eigen::MatrixXd basis;
  if (m > 0) {
    Eigen::MatrixXd c(M, m);
    for (int k = 0; k < m; ++k) {
      detail::require(cons[static_cast<std::size_t>(k)].size() == M, "constraint length differs from the operator size");
      c.col(k) = w.cwiseProduct(cons[static_cast<std::size_t>(k)]);
      c.col(k) /= c.col(k).norm();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram(c.transpose() * c);
    if (!(gram.eigenvalues()(0) > 1e-10))
      throw ConfigError("constraint set is degenerate: Gram matrix minimum eigenvalue " +
                        std::to_string(gram.eigenvalues()(0)) + " <= 1e-10");
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    const Eigen::MatrixXd q = qr.householderQ();
    basis = q.rightCols(M - m);
  } else {
    basis = Eigen::MatrixXd::Identity(M, M);
  }

  const Eigen::MatrixXd& a = op.form();
  const Eigen::MatrixXd& g = op.h1_gram();
  {
    const Eigen::MatrixXd pa = basis.transpose() * a * basis;
    const Eigen::MatrixXd pg = basis.transpose() * g * basis;
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(pa, pg, Eigen::EigenvaluesOnly);
    rep.min_eig_constrained = es.eigenvalues()(0);
    const Eigen::VectorXd h = detail::lowest(es.eigenvalues(), head);
    rep.rayleigh_head.assign(h.data(), h.data() + h.size());
  }
  {
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, g, Eigen::EigenvaluesOnly);
    rep.min_eig_unconstrained = es.eigenvalues()(0);
  }
  {
    const Eigen::VectorXd s = w.cwiseSqrt().cwiseInverse();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.asDiagonal() * a * s.asDiagonal(), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd h = detail::lowest(es.eigenvalues(), head);
    rep.spectrum_head.assign(h.data(), h.data() + h.size());
  }
  rep.mu_plus = rep.min_eig_constrained;
  rep.complement = std::move(basis);
  return rep;
}

struct EigenPair {
  std::vector<double> values;
  Eigen::MatrixXd vectors;  // columns, L²-normalized in the discrete weights
};

// Lowest n eigenpairs of a self-adjoint L± in L².
inline EigenPair lowest_eigenpairs(const LinearizedOperator& op, int n) {
  detail::require(op.kind() != OperatorKind::iL_full, "lowest_eigenpairs: needs L_plus or L_minus");
  const Eigen::VectorXd s = op.weights().cwiseSqrt().cwiseInverse();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.asDiagonal() * op.form() * s.asDiagonal());
  EigenPair out;
  const int k = std::min(n, op.size());
  for (int i = 0; i < k; ++i) out.values.push_back(es.eigenvalues()(i));
  out.vectors = s.asDiagonal() * es.eigenvectors().leftCols(k);
  return out;
}

// d = 2: every sector ℓ = 0..ell_max (ℓ ≥ 1 counted for both cos and sin), with Q and
// x·∇Q constraining ℓ = 0 and ∂_{x_i}Q constraining ℓ = 1.
struct SectorCoercivity {
  std::vector<int> ell;
  std::vector<double> min_eig;
  double mu = 0.0;
};

inline SectorCoercivity sector_coercivity(OperatorKind kind, const GroundState& gs, const std::vector<std::string>& names,
                                          int M, double R, int ell_max = 3) {
  SectorCoercivity out;
  out.mu = std::numeric_limits<double>::infinity();
  for (int ell = 0; ell <= ell_max; ++ell) {
    const auto op = assemble_radial(kind, gs, M, R, ell);
    std::vector<Eigen::VectorXd> cons;
    for (const auto& n : names) {
      if ((n == "Q" || n == "xdQ") && ell == 0) cons.push_back(constraint(op, n));
      if (n == "dQ" && ell == 1) cons.push_back(constraint(op, n));
    }
    const double m = constrained_min_eig(op, cons, 1).min_eig_constrained;
    out.ell.push_back(ell);
    out.min_eig.push_back(m);
    out.mu = std::min(out.mu, m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Critical identities

struct CriticalIdentityReport {
  double identity_residual = 0.0;   // ‖L₊Λ + 2Q‖/‖Q‖ with Λ = (d/2)Q + x·∇Q
  double nonzero_value = 0.0;       // ∫(x·∇Q)² − (d²/4)∫Q²
  double lambda_norm_squared = 0.0; // ‖Λ‖²
  double relative_agreement = 0.0;
};

inline CriticalIdentityReport verify_critical_identities(const GroundState& gs) {
  const Nonlinearity& nl = gs.nonlinearity();
  const int d = gs.dim();
  if (!nl.is_pure_power() || nl.criticality(d) != Criticality::critical)
    throw ConfigError("verify_critical_identities: needs the critical power p = 1 + 4/d, got " + nl.name() +
                      " in d = " + std::to_string(d));
  const Grid g = residual_grid(gs.omega(), d);
  const Field q = gs.sample(g);
  const Field xdq = Field::sample(g, [&](const Vec& x) {
    const Vec gr = gs.gradient_at(x);
    return x[0] * gr[0] + (d == 2 ? x[1] * gr[1] : 0.0);
  });
  const Field lam = cplx(0.5 * d) * q + xdq;
  Field l = laplacian(lam);
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double v = detail::potential(OperatorKind::L_plus, nl, q[i].real());
    l[i] = -l[i] + (gs.omega() - v) * lam[i] + 2.0 * q[i];
  }
  CriticalIdentityReport rep;
  rep.identity_residual = l2_norm(l) / l2_norm(q);
  rep.nonzero_value = std::pow(l2_norm(xdq), 2) - 0.25 * d * d * std::pow(l2_norm(q), 2);
  rep.lambda_norm_squared = std::pow(l2_norm(lam), 2);
  rep.relative_agreement = std::abs(rep.nonzero_value - rep.lambda_norm_squared) / std::abs(rep.lambda_norm_squared);
  return rep;
}

// ---------------------------------------------------------------------------
// Instability

struct InstabilityPair {
  double e0 = 0.0;
  std::vector<double> x;
  std::vector<cplx> Y;  // Y₁ + iY₂ with ‖Y‖_{L²} = 1
  double residual = 0.0;
};

inline InstabilityPair instability_eigenpair(const GroundState& gs, int M = 2000, double X = 20.0) {
  const Nonlinearity& nl = gs.nonlinearity();
  if (gs.dim() != 1 || !nl.is_pure_power() || nl.criticality(1) != Criticality::supercritical)
    throw ConfigError("instability_eigenpair: needs an L2-supercritical pure power in d = 1 (p > 5), got " + nl.name());
  const auto lp_op = assemble(OperatorKind::L_plus, gs, M, X);
  const auto lm_op = assemble(OperatorKind::L_minus, gs, M, X);
  const Eigen::MatrixXd lp = lp_op.action(), lm = lm_op.action();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(lm);
  const Eigen::VectorXd root = em.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd sqrt_lm = em.eigenvectors() * root.asDiagonal() * em.eigenvectors().transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sqrt_lm * lp * sqrt_lm);
  const double s0 = es.eigenvalues()(0);
  if (!(s0 < -1e-10)) throw NumericError("instability_eigenpair: no real positive eigenvalue found (discretization failure)");

  InstabilityPair out;
  out.e0 = std::sqrt(-s0);
  const Eigen::VectorXd w1 = sqrt_lm * es.eigenvectors().col(0);
  const Eigen::VectorXd w2 = -lp * w1 / out.e0;
  Eigen::VectorXd y(2 * M);
  y << w1, w2;
  const Eigen::MatrixXd j = assemble(OperatorKind::iL_full, gs, M, X).form();
  out.residual = (j * y - out.e0 * y).norm() / (out.e0 * y.norm());

  const double h = lp_op.discretization().h;
  double scale = 1.0 / std::sqrt(h * y.squaredNorm());
  double peak = 0.0;
  for (int i = 0; i < M; ++i) peak = std::max(peak, std::hypot(w1(i), w2(i)));
  for (int i = 0; i < M; ++i) {
    if (std::hypot(w1(i), w2(i)) > 1e-12 * peak) {
      const double first = std::abs(w1(i)) > 1e-12 * peak ? w1(i) : w2(i);
      if (first < 0.0) scale = -scale;
      break;
    }
  }
  out.x = lp_op.discretization().nodes;
  for (int i = 0; i < M; ++i) out.Y.emplace_back(scale * w1(i), scale * w2(i));
  return out;
}

}  // namespace nlslab
