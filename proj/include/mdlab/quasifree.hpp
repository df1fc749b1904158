#pragma once
//
// Ground one-particle structures and their thermal doubling.
//
// Everything lives in the momentum basis: h is multiplication by the
// dispersion, the conjugation is entrywise complex conjugation. The doubled
// space H (+) H is stored as C^{2n} (first copy, second copy) and realified
// as (Re first, Re second, Im first, Im second).
//

#include "mdlab/subspace.hpp"

#include <cmath>
#include <vector>

namespace mdlab {

class GroundStructure {
 public:
  // K defaults to the real vectors of the momentum basis.
  explicit GroundStructure(Vector dispersion, std::optional<RealSubspace> factor = std::nullopt)
      : omega_(std::move(dispersion)) {
    if (omega_.size() == 0) throw Error("GroundStructure: empty dispersion");
    for (Index k = 0; k < omega_.size(); ++k)
      if (!(omega_[k] > 0.0) || !std::isfinite(omega_[k]))
        throw Error("GroundStructure: dispersion must be strictly positive and finite");
    const Index n = omega_.size();
    if (factor) {
      if (factor->ambient_dim() != 2 * n) throw Error("GroundStructure: factor subspace has the wrong ambient dimension");
      factor_ = *factor;
    } else {
      Matrix f = Matrix::Zero(2 * n, n);
      f.topRows(n) = Matrix::Identity(n, n);
      factor_ = RealSubspace::from_orthonormal(f);
    }
  }

  Index n_modes() const { return omega_.size(); }
  const Vector& dispersion() const { return omega_; }
  double min_energy() const { return omega_.minCoeff(); }
  const RealSubspace& factor_subspace() const { return factor_; }
  RealifiedSpace space() const { return RealifiedSpace(n_modes()); }

  CVector conjugate(const CVector& u) const { return u.conjugate(); }

  /// Realified conjugation diag(I, -I).
  Matrix conjugation() const {
    const Index n = n_modes();
    Vector d(2 * n);
    d.head(n).setOnes();
    d.tail(n).setConstant(-1.0);
    return d.asDiagonal();
  }

  /// e^{-ith} as a complex diagonal.
  CVector evolution_phases(double t) const {
    CVector p(n_modes());
    for (Index k = 0; k < n_modes(); ++k) p[k] = std::polar(1.0, -omega_[k] * t);
    return p;
  }

  Matrix evolution(double t) const { return realify_linear(evolution_phases(t).asDiagonal().toDenseMatrix()); }

  Matrix damping(double beta) const {
    return realify_linear(CVector((-beta * omega_).array().exp().cast<Complex>()).asDiagonal().toDenseMatrix());
  }

 private:
  Vector omega_;
  RealSubspace factor_;
};

class ThermalDoubling {
 public:
  ThermalDoubling(GroundStructure ground, double beta) : ground_(std::move(ground)), beta_(beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw Error("build_thermal: beta must be positive and finite");
    const Index n = ground_.n_modes();
    s_.resize(n);
    c_.resize(n);
    for (Index k = 0; k < n; ++k) {
      const double x = beta * ground_.dispersion()[k];
      s_[k] = 1.0 / std::sqrt(std::expm1(x));
      c_[k] = 1.0 / std::sqrt(-std::expm1(-x));
    }
  }

  const GroundStructure& ground() const { return ground_; }
  double beta() const { return beta_; }
  Index n_modes() const { return ground_.n_modes(); }
  const Vector& sinh_weights() const { return s_; }
  const Vector& cosh_weights() const { return c_; }

  /// Doubled generator: (-omega) on the first copy, omega on the second.
  Vector doubled_generator() const {
    const Index n = n_modes();
    Vector g(2 * n);
    g.head(n) = -ground_.dispersion();
    g.tail(n) = ground_.dispersion();
    return g;
  }

  RealifiedSpace doubled_space() const { return RealifiedSpace(2 * n_modes()); }

  /// Realified matrix (4n x 2n) of u -> conj(s u) (+) c u.
  Matrix k_beta_matrix() const { return doubled_map(Vector::Zero(n_modes()), c_, s_, Vector::Zero(n_modes())); }

  /// Realified matrix (4n x 2n) of u -> L1 u + M1 conj(u) (+) L2 u + M2 conj(u)
  /// with all four blocks diagonal and real.
  Matrix doubled_map(const Vector& l1, const Vector& l2, const Vector& m1, const Vector& m2) const {
    const Index n = n_modes();
    CMatrix lin = CMatrix::Zero(2 * n, n), anti = CMatrix::Zero(2 * n, n);
    lin.topRows(n) = l1.cast<Complex>().asDiagonal();
    lin.bottomRows(n) = l2.cast<Complex>().asDiagonal();
    anti.topRows(n) = m1.cast<Complex>().asDiagonal();
    anti.bottomRows(n) = m2.cast<Complex>().asDiagonal();
    return realify_operator(lin, anti);
  }

 private:
  GroundStructure ground_;
  double beta_;
  Vector s_;
  Vector c_;
};

inline ThermalDoubling build_thermal(const GroundStructure& g, double beta) { return ThermalDoubling(g, beta); }

/// conj(s u) (+) c u as a vector of C^{2n}.
inline CVector k_beta(const ThermalDoubling& th, const CVector& u) {
  const Index n = th.n_modes();
  if (u.size() != n) throw Error("k_beta: vector has the wrong number of modes");
  CVector out(2 * n);
  out.head(n) = (th.sinh_weights().cast<Complex>().array() * u.array()).conjugate().matrix();
  out.tail(n) = (th.cosh_weights().cast<Complex>().array() * u.array()).matrix();
  return out;
}

inline CVector time_evolve(const GroundStructure& g, double t, const CVector& u) {
  if (u.size() != g.n_modes()) throw Error("time_evolve: vector has the wrong number of modes");
  return (g.evolution_phases(t).array() * u.array()).matrix();
}

/// e^{ith} (+) e^{-ith} on the doubled space.
inline CVector time_evolve(const ThermalDoubling& th, double t, const CVector& x) {
  const Index n = th.n_modes();
  if (x.size() != 2 * n) throw Error("time_evolve: doubled vector has the wrong size");
  const CVector p = th.ground().evolution_phases(t);
  CVector out(2 * n);
  out.head(n) = (p.conjugate().array() * x.head(n).array()).matrix();
  out.tail(n) = (p.array() * x.tail(n).array()).matrix();
  return out;
}

struct SymplecticReport {
  double lhs = 0.0;  // 2 Im <K u, K v>
  double rhs = 0.0;  // 2 Im <u, v>
  double deviation = 0.0;
  bool pass = false;
};

inline SymplecticReport verify_symplectic_preservation(const ThermalDoubling& th, const CVector& u, const CVector& v,
                                                       double tol_eq = Tolerances{}.eq) {
  SymplecticReport r;
  r.lhs = 2.0 * k_beta(th, u).dot(k_beta(th, v)).imag();
  r.rhs = 2.0 * u.dot(v).imag();
  r.deviation = std::abs(r.lhs - r.rhs);
  r.pass = r.deviation < tol_eq;
  return r;
}

struct KmsReport {
  double abs_deviation = 0.0;      // max_t |F(t + i beta) - G(t)|
  double rel_deviation = 0.0;      // abs_deviation / max_t |G(t)|
  double literal_residual = 0.0;   // the symmetric-split form, reported only
  double max_abs_g = 0.0;
  bool pass = false;
};

// F(t) = <e^{-it h~} x, y>, G(t) = <y, e^{-it h~} x> with x = K u, y = K v.
// The continuation F(t + i beta) = sum conj(x) e^{it h~} e^{-beta h~} y is exact.
inline KmsReport verify_one_particle_kms(const ThermalDoubling& th, const CVector& u, const CVector& v,
                                         const std::vector<double>& t_grid, double tol_eq = Tolerances{}.eq) {
  const CVector x = k_beta(th, u), y = k_beta(th, v);
  const Vector g = th.doubled_generator();
  const Index m = g.size();
  KmsReport r;
  for (double t : t_grid) {
    Complex f_cont = 0.0, gt = 0.0, lit_lhs = 0.0, lit_rhs = 0.0;
    for (Index k = 0; k < m; ++k) {
      const Complex fwd = std::polar(1.0, t * g[k]);  // e^{i t h~}
      const Complex bwd = std::conj(fwd);             // e^{-i t h~}
      const Complex xy = std::conj(x[k]) * y[k];
      f_cont += xy * fwd * std::exp(-th.beta() * g[k]);
      gt += std::conj(y[k]) * bwd * x[k];
      lit_lhs += xy * fwd;
      lit_rhs += xy * bwd * std::exp(-th.beta() * g[k]);
    }
    r.abs_deviation = std::max(r.abs_deviation, std::abs(f_cont - gt));
    r.max_abs_g = std::max(r.max_abs_g, std::abs(gt));
    r.literal_residual = std::max(r.literal_residual, std::abs(lit_lhs - lit_rhs));
  }
  r.rel_deviation = r.max_abs_g > 0.0 ? r.abs_deviation / r.max_abs_g : r.abs_deviation;
  r.pass = r.rel_deviation < tol_eq;
  return r;
}

}  // namespace mdlab
