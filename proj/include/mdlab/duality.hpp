#pragma once
//
// Subspaces of the doubled space built from a real factor K of H with
// H_R = K (+) iK, the operator A that straightens them, generic-position
// diagnostics and the modular data of the global thermal subspace.
//
// Orthogonal complements are taken inside K (+) K unless stated otherwise.
//

#include "mdlab/quasifree.hpp"

#include <string>
#include <utility>

namespace mdlab {

/// Place realified single-copy frames into the realified doubled space.
inline Matrix embed_doubled(const Matrix& first, const Matrix& second) {
  if (first.rows() != second.rows() || first.cols() != second.cols())
    throw Error("embed_doubled: shape mismatch");
  const Index n = first.rows() / 2;
  Matrix out(4 * n, first.cols());
  out.middleRows(0, n) = first.topRows(n);
  out.middleRows(n, n) = second.topRows(n);
  out.middleRows(2 * n, n) = first.bottomRows(n);
  out.middleRows(3 * n, n) = second.bottomRows(n);
  return out;
}

class DualityContext {
 public:
  explicit DualityContext(ThermalDoubling thermal, Tolerances tol = {}) : th_(std::move(thermal)), tol_(tol) {
    const RealSubspace& k = th_.ground().factor_subspace();
    const Index n = th_.n_modes();
    const RealifiedSpace space(n);
    // K orthogonal to iK and together spanning everything.
    const Matrix ik = space.complex_structure() * k.frame();
    if (k.rank() != n || (k.frame().transpose() * ik).cwiseAbs().maxCoeff() > tol_.eq)
      throw Error("DualityContext: factor subspace is not a real form (K + iK != H or K not orthogonal to iK)");
    invariance_defect_ = std::max(operator_leak(th_.ground().damping(th_.beta()), k),
                                  operator_leak(th_.ground().conjugation(), k));
    if (invariance_defect_ > tol_.eq) throw Error("DualityContext: damping or conjugation does not preserve K");
    const Matrix zero = Matrix::Zero(2 * n, n);
    Matrix kk(4 * n, 2 * n);
    kk << embed_doubled(k.frame(), zero), embed_doubled(zero, k.frame());
    kk_ = RealSubspace::from_orthonormal(kk, tol_.rank);
  }

  const ThermalDoubling& thermal() const { return th_; }
  const RealSubspace& factor() const { return th_.ground().factor_subspace(); }
  const RealSubspace& doubled_factor() const { return kk_; }
  const Tolerances& tolerances() const { return tol_; }
  Index n_modes() const { return th_.n_modes(); }
  Matrix doubled_complex_structure() const { return complex_structure(2 * n_modes()); }
  double invariance_defect() const { return invariance_defect_; }

  void require_in_factor(const RealSubspace& s, const char* what) const {
    if (s.ambient_dim() != factor().ambient_dim()) throw Error(std::string(what) + ": wrong ambient dimension");
    if (containment_defect(s, factor()) > tol_.eq) throw Error(std::string(what) + ": subspace is not contained in K");
  }

  RealSubspace perp_in_factor(const RealSubspace& s) const { return orthocomplement(s, factor(), tol_.eq); }

 private:
  static double operator_leak(const Matrix& op, const RealSubspace& k) {
    Matrix img = op * k.frame();
    img -= k.frame() * (k.frame().transpose() * img);
    return img.cwiseAbs().maxCoeff();
  }

  ThermalDoubling th_;
  Tolerances tol_;
  RealSubspace kk_;
  double invariance_defect_ = 0.0;
};

namespace detail {

inline RealSubspace map_factor(const DualityContext& ctx, const RealSubspace& k1, const Matrix& map, const char* what) {
  ctx.require_in_factor(k1, what);
  if (k1.is_zero()) return RealSubspace::zero(4 * ctx.n_modes(), ctx.tolerances().rank);
  return orthonormalize(Matrix(map * k1.frame()), ctx.tolerances().rank);
}

inline Vector zeros(const DualityContext& ctx) { return Vector::Zero(ctx.n_modes()); }

}  // namespace detail

// U(K1) = { conj(s u) (+) c u }
inline RealSubspace build_U(const DualityContext& ctx, const RealSubspace& k1) {
  const auto& th = ctx.thermal();
  return detail::map_factor(ctx, k1, th.doubled_map(detail::zeros(ctx), th.cosh_weights(), th.sinh_weights(), detail::zeros(ctx)),
                            "build_U");
}

// V(K2) = { -conj(s u) (+) c u }
inline RealSubspace build_V(const DualityContext& ctx, const RealSubspace& k2) {
  const auto& th = ctx.thermal();
  return detail::map_factor(ctx, k2, th.doubled_map(detail::zeros(ctx), th.cosh_weights(), -th.sinh_weights(), detail::zeros(ctx)),
                            "build_V");
}

// U~ = { c v (+) conj(s v) : v in K }
inline RealSubspace build_Utilde(const DualityContext& ctx) {
  const auto& th = ctx.thermal();
  return detail::map_factor(ctx, ctx.factor(),
                            th.doubled_map(th.cosh_weights(), detail::zeros(ctx), detail::zeros(ctx), th.sinh_weights()),
                            "build_Utilde");
}

// V~ = { c v (+) -conj(s v) : v in K }
inline RealSubspace build_Vtilde(const DualityContext& ctx) {
  const auto& th = ctx.thermal();
  return detail::map_factor(ctx, ctx.factor(),
                            th.doubled_map(th.cosh_weights(), detail::zeros(ctx), detail::zeros(ctx), -th.sinh_weights()),
                            "build_Vtilde");
}

struct OperatorA {
  RealLinearOperator a;
  RealLinearOperator a_inverse;
  double norm = 0.0;
  double bound = 0.0;            // 2 / sqrt(1 - e^{-beta m})
  double inverse_residual = 0.0; // max |A A^{-1} - I|
};

inline double operator_A_bound(double beta, double min_energy) {
  return 2.0 / std::sqrt(-std::expm1(-beta * min_energy));
}

// A = [[c, -conj s], [-conj s, c]], A^{-1} = [[c, conj s], [conj s, c]].
inline OperatorA operator_A(const DualityContext& ctx) {
  const auto& th = ctx.thermal();
  const Index n = ctx.n_modes();
  CMatrix lin = CMatrix::Zero(2 * n, 2 * n), anti = CMatrix::Zero(2 * n, 2 * n);
  const CMatrix c = th.cosh_weights().cast<Complex>().asDiagonal();
  const CMatrix s = th.sinh_weights().cast<Complex>().asDiagonal();
  lin.topLeftCorner(n, n) = c;
  lin.bottomRightCorner(n, n) = c;
  anti.topRightCorner(n, n) = -s;
  anti.bottomLeftCorner(n, n) = -s;
  OperatorA out;
  out.a = RealLinearOperator(realify_operator(lin, anti));
  out.a_inverse = RealLinearOperator(realify_operator(lin, -anti));
  out.norm = out.a.spectral_norm();
  out.bound = operator_A_bound(th.beta(), th.ground().min_energy());
  const Index d = 4 * n;
  out.inverse_residual = (out.a.matrix() * out.a_inverse.matrix() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  return out;
}

struct ComplementReport {
  Index lhs_rank = 0;
  Index rhs_rank = 0;
  double max_angle = 0.0;
  bool pass = false;
};

inline ComplementReport to_complement_report(const SubspaceComparison& c) {
  return {c.lhs_rank, c.rhs_rank, c.max_angle, c.pass};
}

// U(K1)^perp = V(K1^perp) (+) V~
inline ComplementReport orthocomplement_U(const DualityContext& ctx, const RealSubspace& k1) {
  const RealSubspace lhs = orthocomplement(build_U(ctx, k1), ctx.doubled_factor(), ctx.tolerances().eq);
  const RealSubspace rhs = sum_closure(build_V(ctx, ctx.perp_in_factor(k1)), build_Vtilde(ctx));
  return to_complement_report(compare_subspaces(lhs, rhs, ctx.tolerances().eq));
}

// V(K2)^perp = U(K2^perp) (+) U~
inline ComplementReport orthocomplement_V(const DualityContext& ctx, const RealSubspace& k2) {
  const RealSubspace lhs = orthocomplement(build_V(ctx, k2), ctx.doubled_factor(), ctx.tolerances().eq);
  const RealSubspace rhs = sum_closure(build_U(ctx, ctx.perp_in_factor(k2)), build_Utilde(ctx));
  return to_complement_report(compare_subspaces(lhs, rhs, ctx.tolerances().eq));
}

struct GenericPositionReport {
  Index dim_u_and_v = 0;
  Index dim_u_and_vperp = 0;
  Index dim_uperp_and_v = 0;
  Index dim_uperp_and_vperp = 0;
  Index dim_k1_and_k2perp = 0;
  Index dim_k1perp_and_k2 = 0;
  Index expected_uperp_and_vperp = 0;  // dim K (+) K - dim K1 - dim K2
  bool u_and_v_trivial = false;
  bool criterion_u_vperp = false;      // U ^ V^perp = 0  iff  K1 ^ K2^perp = 0
  bool criterion_uperp_v = false;      // U^perp ^ V = 0  iff  K1^perp ^ K2 = 0
  bool pass = false;
};

inline GenericPositionReport generic_position_report(const DualityContext& ctx, const RealSubspace& k1,
                                                     const RealSubspace& k2) {
  const double tol = ctx.tolerances().intersect;
  const RealSubspace u = build_U(ctx, k1), v = build_V(ctx, k2);
  const RealSubspace up = orthocomplement(u, ctx.doubled_factor(), ctx.tolerances().eq);
  const RealSubspace vp = orthocomplement(v, ctx.doubled_factor(), ctx.tolerances().eq);
  GenericPositionReport r;
  r.dim_u_and_v = intersect(u, v, tol).rank();
  r.dim_u_and_vperp = intersect(u, vp, tol).rank();
  r.dim_uperp_and_v = intersect(up, v, tol).rank();
  r.dim_uperp_and_vperp = intersect(up, vp, tol).rank();
  r.dim_k1_and_k2perp = intersect(k1, ctx.perp_in_factor(k2), tol).rank();
  r.dim_k1perp_and_k2 = intersect(ctx.perp_in_factor(k1), k2, tol).rank();
  r.expected_uperp_and_vperp = ctx.doubled_factor().rank() - k1.rank() - k2.rank();
  r.u_and_v_trivial = r.dim_u_and_v == 0;
  r.criterion_u_vperp = (r.dim_u_and_vperp == 0) == (r.dim_k1_and_k2perp == 0);
  r.criterion_uperp_v = (r.dim_uperp_and_v == 0) == (r.dim_k1perp_and_k2 == 0);
  r.pass = r.u_and_v_trivial && r.criterion_u_vperp && r.criterion_uperp_v;
  return r;
}

struct CounterexampleReport {
  double witness_distance = 0.0;  // distance of w from K1
  double residual = 0.0;          // distance of psi from U(K1) + V(K2)
  Index sum_rank = 0;
  bool pass = false;
};

/// psi = conj(s w) (+) c w lies outside U(K1) + V(K2) whenever w is not in K1.
inline CounterexampleReport nongeneric_counterexample(const DualityContext& ctx, const RealSubspace& k1,
                                                      const RealSubspace& k2, const Vector& w) {
  ctx.require_in_factor(k1, "nongeneric_counterexample");
  ctx.require_in_factor(k2, "nongeneric_counterexample");
  if (w.size() != 2 * ctx.n_modes()) throw Error("nongeneric_counterexample: witness has the wrong dimension");
  if (ctx.factor().distance(w) > ctx.tolerances().eq * std::max(1.0, w.norm()))
    throw Error("nongeneric_counterexample: witness is not in K");
  CounterexampleReport r;
  r.witness_distance = k1.distance(w);
  if (!(r.witness_distance > ctx.tolerances().eq * std::max(1.0, w.norm())))
    throw Error("nongeneric_counterexample: witness lies in K1");
  const Vector psi = ctx.thermal().k_beta_matrix() * w;
  const RealSubspace uv = sum_closure(build_U(ctx, k1), build_V(ctx, k2));
  r.sum_rank = uv.rank();
  r.residual = uv.distance(psi);
  r.pass = r.residual > ctx.tolerances().eq;
  return r;
}

struct GenericReduction {
  RealSubspace uv;
  RealSubspace u;
  RealSubspace v;
  RealSubspace u_perp;   // inside UV
  RealSubspace v_perp;   // inside UV
  Index dim_u_and_v = 0;
  Index dim_u_and_vperp = 0;
  Index dim_uperp_and_v = 0;
  Index dim_uperp_and_vperp = 0;
  bool hypothesis = false;  // K1 ^ K2^perp = 0 and K1^perp ^ K2 = 0
  bool generic = false;     // all four intersections trivial
  bool pass = false;        // generic exactly when the hypothesis holds
};

inline GenericReduction reduce_to_generic_position(const DualityContext& ctx, const RealSubspace& k1,
                                                   const RealSubspace& k2) {
  const double tol = ctx.tolerances().intersect;
  GenericReduction r;
  const RealSubspace u0 = build_U(ctx, k1), v0 = build_V(ctx, k2);
  r.uv = sum_closure(u0, v0);
  r.u = intersect(u0, r.uv, tol);
  r.v = intersect(v0, r.uv, tol);
  r.u_perp = orthocomplement(r.u, r.uv, ctx.tolerances().eq);
  r.v_perp = orthocomplement(r.v, r.uv, ctx.tolerances().eq);
  r.dim_u_and_v = intersect(r.u, r.v, tol).rank();
  r.dim_u_and_vperp = intersect(r.u, r.v_perp, tol).rank();
  r.dim_uperp_and_v = intersect(r.u_perp, r.v, tol).rank();
  r.dim_uperp_and_vperp = intersect(r.u_perp, r.v_perp, tol).rank();
  r.hypothesis = intersect(k1, ctx.perp_in_factor(k2), tol).is_zero() &&
                 intersect(ctx.perp_in_factor(k1), k2, tol).is_zero();
  r.generic = r.dim_u_and_v == 0 && r.dim_u_and_vperp == 0 && r.dim_uperp_and_v == 0 && r.dim_uperp_and_vperp == 0;
  r.pass = r.generic == r.hypothesis;
  return r;
}

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

class SubspaceLabel {
 public:
  enum class Kind { Zero, Whole, Named };

  static SubspaceLabel zero() { return SubspaceLabel(Kind::Zero, "", false); }
  static SubspaceLabel whole() { return SubspaceLabel(Kind::Whole, "", false); }
  static SubspaceLabel named(std::string name) { return SubspaceLabel(Kind::Named, std::move(name), false); }

  SubspaceLabel perp() const {
    switch (kind_) {
      case Kind::Zero: return whole();
      case Kind::Whole: return zero();
      default: return SubspaceLabel(Kind::Named, name_, !complemented_);
    }
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  bool complemented() const { return complemented_; }

  std::string str() const {
    switch (kind_) {
      case Kind::Zero: return "{0}";
      case Kind::Whole: return "K";
      default: return complemented_ ? name_ + "^perp" : name_;
    }
  }

  friend bool operator==(const SubspaceLabel&, const SubspaceLabel&) = default;

 private:
  SubspaceLabel(Kind k, std::string n, bool c) : kind_(k), name_(std::move(n)), complemented_(c) {}

  Kind kind_;
  std::string name_;
  bool complemented_;
};

/// Commutant of the algebra labelled by (K1, K2) is labelled by (K2^perp, K1^perp).
inline std::pair<SubspaceLabel, SubspaceLabel> commutant_labels(const SubspaceLabel& k1, const SubspaceLabel& k2) {
  return {k2.perp(), k1.perp()};
}

// ---------------------------------------------------------------------------
// Symplectic complement and modular data
// ---------------------------------------------------------------------------

struct SymplecticComplement {
  RealSubspace complement;
  double sigma_residual = 0.0;  // max |sigma(x, y)| over frame pairs
};

/// i (S^perp) in the full doubled space: every vector symplectically orthogonal to S.
inline SymplecticComplement symplectic_complement(const DualityContext& ctx, const RealSubspace& s) {
  const Matrix beta = ctx.doubled_complex_structure();
  if (s.ambient_dim() != beta.rows()) throw Error("symplectic_complement: wrong ambient dimension");
  SymplecticComplement out;
  out.complement = apply_operator(beta, orthocomplement(s));
  if (!s.is_zero() && !out.complement.is_zero())
    out.sigma_residual = (2.0 * (beta * s.frame()).transpose() * out.complement.frame()).cwiseAbs().maxCoeff();
  return out;
}

struct ModularData {
  Matrix j;
  Matrix delta_sqrt;
  Matrix tomita_s;
  double condition = 0.0;               // of the adapted basis [H, iH]
  bool ill_conditioned = false;         // condition above 1e8
  Index separating_dim = 0;             // dim(H ^ iH)
  Index span_rank = 0;                  // rank(H + iH)
  double delta_rel_error = 0.0;         // vs diag(e^{beta h/2}, e^{-beta h/2})
  double j_rel_error = 0.0;             // vs antidiag(conj, conj)
  double j_involution = 0.0;            // max |j^2 - I|
  double j_antilinear = 0.0;            // max |j i + i j|
  double delta_linear = 0.0;            // max |delta i - i delta|
  double generator_residual = 0.0;      // s(h + ik) = h - ik on frames
  double j_image_angle = 0.0;           // j H vs U~ (+) i V~
  bool pass = false;
};

inline Matrix predicted_delta_sqrt(const ThermalDoubling& th) {
  const Index n = th.n_modes();
  CVector d(2 * n);
  for (Index k = 0; k < n; ++k) {
    const double half = 0.5 * th.beta() * th.ground().dispersion()[k];
    d[k] = std::exp(half);
    d[n + k] = std::exp(-half);
  }
  return realify_linear(d.asDiagonal().toDenseMatrix());
}

inline Matrix predicted_modular_conjugation(const ThermalDoubling& th) {
  const Index n = th.n_modes();
  CMatrix anti = CMatrix::Zero(2 * n, 2 * n);
  anti.topRightCorner(n, n).setIdentity();
  anti.bottomLeftCorner(n, n).setIdentity();
  return realify_antilinear(anti);
}

inline RealSubspace global_thermal_subspace(const DualityContext& ctx) {
  return sum_closure(build_U(ctx, ctx.factor()),
                     apply_operator(ctx.doubled_complex_structure(), build_V(ctx, ctx.factor())));
}

/// Tomita operator of H = U(K) + iV(K), polar-decomposed through an SVD.
inline ModularData modular_data(const DualityContext& ctx) {
  const Tolerances& tol = ctx.tolerances();
  const Matrix beta = ctx.doubled_complex_structure();
  const Index d = beta.rows();
  const RealSubspace h = global_thermal_subspace(ctx);
  ModularData m;
  const RealSubspace ih = apply_operator(beta, h);
  m.separating_dim = intersect(h, ih, tol.intersect).rank();
  m.span_rank = sum_closure(h, ih).rank();
  Matrix basis(d, 2 * h.rank());
  basis << h.frame(), beta * h.frame();
  m.condition = RealLinearOperator(basis).condition_number();
  if (m.separating_dim != 0 || m.span_rank != d || !(m.condition < 1e12))
    throw Error("modular_data: thermal subspace is not standard (separating dim " + std::to_string(m.separating_dim) +
                ", span rank " + std::to_string(m.span_rank) + " of " + std::to_string(d) + ", condition " +
                std::to_string(m.condition) + ")");
  m.ill_conditioned = m.condition > 1e8;

  Vector signs(d);
  signs.head(h.rank()).setOnes();
  signs.tail(d - h.rank()).setConstant(-1.0);
  const auto lu = basis.partialPivLu();
  m.tomita_s = basis * signs.asDiagonal() * lu.inverse();

  Eigen::JacobiSVD<Matrix> svd(m.tomita_s, Eigen::ComputeFullU | Eigen::ComputeFullV);
  m.delta_sqrt = svd.matrixV() * svd.singularValues().asDiagonal() * svd.matrixV().transpose();
  m.j = svd.matrixU() * svd.matrixV().transpose();

  const Matrix eye = Matrix::Identity(d, d);
  const Matrix pd = predicted_delta_sqrt(ctx.thermal());
  const Matrix pj = predicted_modular_conjugation(ctx.thermal());
  m.delta_rel_error = (m.delta_sqrt - pd).norm() / pd.norm();
  m.j_rel_error = (m.j - pj).norm() / pj.norm();
  m.j_involution = (m.j * m.j - eye).cwiseAbs().maxCoeff();
  m.j_antilinear = (m.j * beta + beta * m.j).cwiseAbs().maxCoeff();
  m.delta_linear = (m.delta_sqrt * beta - beta * m.delta_sqrt).cwiseAbs().maxCoeff();
  m.generator_residual = std::max((m.tomita_s * h.frame() - h.frame()).cwiseAbs().maxCoeff(),
                                  (m.tomita_s * beta * h.frame() + beta * h.frame()).cwiseAbs().maxCoeff());

  const RealSubspace rhs = sum_closure(build_Utilde(ctx), apply_operator(beta, build_Vtilde(ctx)));
  const auto cmp = compare_subspaces(apply_operator(m.j, h), rhs, tol.eq);
  m.j_image_angle = cmp.max_angle;

  m.pass = m.delta_rel_error < tol.eq && m.j_rel_error < tol.eq && m.j_involution < tol.eq && m.j_antilinear < tol.eq &&
           m.delta_linear < tol.eq && m.generator_residual < tol.eq && cmp.pass;
  return m;
}

}  // namespace mdlab
