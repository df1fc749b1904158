#pragma once
//
// Symbolic Weyl algebra over a realified one-particle space.
//
// A word is phase * W(label); labels are realified one-particle vectors, and
// the symplectic form is sigma(f, g) = 2 Im<f, g>. Words stay reduced: every
// product collapses to a single label and phase.
//

#include "mdlab/minkowski.hpp"

#include <functional>

namespace mdlab {

struct WeylWord {
  Complex phase{1.0, 0.0};
  Vector label;

  static WeylWord identity(Index real_dim) { return {Complex(1.0, 0.0), Vector::Zero(real_dim)}; }
  static WeylWord generator(Vector label) { return {Complex(1.0, 0.0), std::move(label)}; }
};

inline void require_same_label_space(const WeylWord& a, const WeylWord& b) {
  if (a.label.size() != b.label.size()) throw Error("Weyl words live in different label spaces");
}

/// W(f) W(g) = e^{-i sigma(f, g)/2} W(f + g)
inline WeylWord weyl_multiply(const WeylWord& a, const WeylWord& b) {
  require_same_label_space(a, b);
  const RealifiedSpace sp(a.label.size() / 2);
  const double sigma = sp.symplectic(a.label, b.label);
  return {a.phase * b.phase * std::polar(1.0, -0.5 * sigma), a.label + b.label};
}

/// (c W(f))* = conj(c) W(-f)
inline WeylWord weyl_star(const WeylWord& w) { return {std::conj(w.phase), -w.label}; }

/// Time shift on the one-particle image: K(T_t f) = e^{i w t} K f per mode.
inline WeylWord free_dynamics(const WeylWord& w, double t, const GroundStructure& g) {
  if (w.label.size() != 2 * g.n_modes()) throw Error("free_dynamics: label does not match the ground structure");
  const CVector u = complexify(w.label);
  return {w.phase, realify((g.evolution_phases(-t).array() * u.array()).matrix())};
}

/// phase * exp(-|u|^2 / 2) with u the ground one-particle image.
inline Complex evaluate_quasifree(const WeylWord& w, const GroundStructure& g) {
  if (w.label.size() != 2 * g.n_modes()) throw Error("evaluate_quasifree: word has no one-particle image in this structure");
  return w.phase * std::exp(-0.5 * w.label.squaredNorm());
}

/// Thermal state: the one-particle image is K^beta u.
inline Complex evaluate_quasifree(const WeylWord& w, const ThermalDoubling& th) {
  if (w.label.size() != 2 * th.n_modes()) throw Error("evaluate_quasifree: word has no one-particle image in this structure");
  return w.phase * std::exp(-0.5 * k_beta(th, complexify(w.label)).squaredNorm());
}

/// Generator W(K f) for a test function on the model grid, in whitened coordinates.
inline WeylWord weyl_generator(const FieldModel& m, const TestFunction& f) {
  return WeylWord::generator(realify(m.whiten(k_infty(m, f))));
}

// ---------------------------------------------------------------------------
// Segal form: phase * U(v1) V(v2) with v1, v2 in K, U(v) = W(v), V(v) = W(iv)
// ---------------------------------------------------------------------------

struct SegalWord {
  Complex phase{1.0, 0.0};
  Vector v1;
  Vector v2;
};

struct SegalSplit {
  Vector v1;
  Vector v2;
  double residual = 0.0;  // |v - v1 - i v2|
};

inline SegalSplit split_real_form(const Vector& v, const RealSubspace& k) {
  if (v.size() != k.ambient_dim()) throw Error("split_real_form: dimension mismatch");
  const RealifiedSpace sp(v.size() / 2);
  SegalSplit s;
  s.v1 = k.project(v);
  s.v2 = k.project(-sp.apply_complex_structure(v));
  s.residual = (v - s.v1 - sp.apply_complex_structure(s.v2)).norm();
  return s;
}

/// W(v) = U(v1) V(v2) e^{i <v1, v2>}
inline SegalWord to_segal(const WeylWord& w, const RealSubspace& k) {
  const SegalSplit s = split_real_form(w.label, k);
  return {w.phase * std::polar(1.0, s.v1.dot(s.v2)), s.v1, s.v2};
}

inline WeylWord to_weyl(const SegalWord& s) {
  const RealifiedSpace sp(s.v1.size() / 2);
  return {s.phase * std::polar(1.0, -s.v1.dot(s.v2)), s.v1 + sp.apply_complex_structure(s.v2)};
}

/// U(a1)V(a2) U(b1)V(b2) = U(a1 + b1) V(a2 + b2) e^{2i <a2, b1>}
inline SegalWord segal_multiply(const SegalWord& a, const SegalWord& b) {
  return {a.phase * b.phase * std::polar(1.0, 2.0 * a.v2.dot(b.v1)), a.v1 + b.v1, a.v2 + b.v2};
}

/// Label-level von Neumann algebras: R_S(H1) or R_F(K1, K2) = R_S(U(K1) + iV(K2)).
struct AlgebraLabel {
  enum class Kind { Segal, Field };
  Kind kind = Kind::Field;
  std::string subspace;  // for Segal
  SubspaceLabel k1 = SubspaceLabel::whole();
  SubspaceLabel k2 = SubspaceLabel::zero();

  static AlgebraLabel field(SubspaceLabel a, SubspaceLabel b) { return {Kind::Field, "", std::move(a), std::move(b)}; }
  static AlgebraLabel segal(std::string h) { return {Kind::Segal, std::move(h), SubspaceLabel::whole(), SubspaceLabel::zero()}; }

  AlgebraLabel commutant() const {
    if (kind == Kind::Segal) return segal(subspace + "'");
    const auto c = commutant_labels(k1, k2);
    return field(c.first, c.second);
  }

  AlgebraLabel as_segal() const {
    if (kind == Kind::Segal) return *this;
    return segal("U(" + k1.str() + ") + iV(" + k2.str() + ")");
  }

  std::string str() const {
    return kind == Kind::Segal ? "R_S(" + subspace + ")" : "R_F(" + k1.str() + ", " + k2.str() + ")";
  }
};

// ---------------------------------------------------------------------------
// Thermal KMS condition for Weyl two-point functions
// ---------------------------------------------------------------------------

struct WeylKmsReport {
  double abs_deviation = 0.0;       // max_t |F(t + i beta) - G(t)|
  double rel_deviation = 0.0;       // divided by max_t |G(t)|
  double closed_form_residual = 0.0;  // closed form vs literal word evaluation at real t
  bool pass = false;
};

// F(t) = w(W(f) a_t W(g)) = N exp(-<K f, e^{it h~} K g>), G(t) = w(a_t W(g) W(f)) = N exp(-<e^{it h~} K g, K f>).
inline WeylKmsReport kms_boundary_check(const Vector& f, const Vector& g, const ThermalDoubling& th,
                                        const std::vector<double>& t_grid, double tol = 1e-8) {
  if (f.size() != 2 * th.n_modes() || g.size() != 2 * th.n_modes())
    throw Error("kms_boundary_check: labels do not match the thermal structure");
  const CVector x = k_beta(th, complexify(f)), y = k_beta(th, complexify(g));
  const Vector gen = th.doubled_generator();
  const double norm_exp = -0.5 * (x.squaredNorm() + y.squaredNorm());
  const WeylWord wf = WeylWord::generator(f), wg = WeylWord::generator(g);
  WeylKmsReport r;
  double max_g = 0.0;
  for (double t : t_grid) {
    Complex cross = 0.0, cross_cont = 0.0, cross_rev = 0.0;
    for (Index k = 0; k < gen.size(); ++k) {
      const Complex fwd = std::polar(1.0, t * gen[k]);
      cross += std::conj(x[k]) * fwd * y[k];
      cross_cont += std::conj(x[k]) * fwd * std::exp(-th.beta() * gen[k]) * y[k];
      cross_rev += std::conj(y[k]) * std::conj(fwd) * x[k];
    }
    const Complex f_real = std::exp(norm_exp - cross);
    const Complex f_cont = std::exp(norm_exp - cross_cont);
    const Complex g_val = std::exp(norm_exp - cross_rev);
    const WeylWord wgt = free_dynamics(wg, t, th.ground());
    const Complex f_lit = evaluate_quasifree(weyl_multiply(wf, wgt), th);
    const Complex g_lit = evaluate_quasifree(weyl_multiply(wgt, wf), th);
    r.closed_form_residual = std::max({r.closed_form_residual, std::abs(f_real - f_lit), std::abs(g_val - g_lit)});
    r.abs_deviation = std::max(r.abs_deviation, std::abs(f_cont - g_val));
    max_g = std::max(max_g, std::abs(g_val));
  }
  r.rel_deviation = max_g > 0.0 ? r.abs_deviation / max_g : r.abs_deviation;
  r.pass = r.rel_deviation < tol && r.closed_form_residual < tol;
  return r;
}

}  // namespace mdlab
