#pragma once
//
// Massive free scalar field on a periodic box, sampled on a spacetime grid.
//
// Conventions (see docs/conventions.md):
//   spatial transform   F f(p) = a^d sum_j f_j e^{-i p.x_j}
//   inverse             F^{-1} psi(x) = L^{-d} sum_k psi_k e^{i p_k.x}
//   one-particle image  (K f)(p) = a^d tau sum_{n,j} f(t_n, x_j) e^{i w t_n} e^{-i p.x_j}
//   H inner product     <psi, phi> = L^{-d} sum_k conj(psi_k) phi_k / (2 w_k)
//   causal propagator   (E h)^(t, p) = tau sum_n sin(w (t_n - t)) / w  h^(t_n, p)
//
// The ground structure works in whitened coordinates u_k = psi_k / sqrt(2 L^d w_k)
// so that the H inner product is the plain Euclidean one.
//

#include "mdlab/duality.hpp"

#include <array>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mdlab {

struct ModelParams {
  int d = 1;
  int N = 16;
  double L = 16.0;
  double mass = 1.0;
  int M = 161;      // time samples, odd so that t = 0 is on the grid
  double T = 8.0;   // time extent, grid is [-T/2, T/2]
};

// ---------------------------------------------------------------------------
// Second-order jets for analytic time derivatives
// ---------------------------------------------------------------------------

struct Jet2 {
  double v = 0.0, d1 = 0.0, d2 = 0.0;

  static Jet2 constant(double c) { return {c, 0.0, 0.0}; }
  static Jet2 variable(double x) { return {x, 1.0, 0.0}; }

  friend Jet2 operator+(Jet2 a, Jet2 b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
  friend Jet2 operator-(Jet2 a, Jet2 b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
  friend Jet2 operator-(Jet2 a) { return {-a.v, -a.d1, -a.d2}; }
  friend Jet2 operator*(Jet2 a, Jet2 b) { return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2}; }
  friend Jet2 operator*(double s, Jet2 a) { return {s * a.v, s * a.d1, s * a.d2}; }
  friend Jet2 operator/(Jet2 a, Jet2 b) { return a * inverse(b); }

  friend Jet2 inverse(Jet2 b) {
    const double b2 = b.v * b.v;
    return {1.0 / b.v, -b.d1 / b2, -b.d2 / b2 + 2.0 * b.d1 * b.d1 / (b2 * b.v)};
  }
  friend Jet2 exp(Jet2 a) {
    const double e = std::exp(a.v);
    return {e, e * a.d1, e * (a.d2 + a.d1 * a.d1)};
  }
  friend Jet2 pow(Jet2 a, int p) {
    if (p == 0) return constant(1.0);
    const double pm1 = std::pow(a.v, p - 1);
    const double pm2 = p >= 2 ? std::pow(a.v, p - 2) : 0.0;
    return {pm1 * a.v, p * pm1 * a.d1, p * (p - 1) * pm2 * a.d1 * a.d1 + p * pm1 * a.d2};
  }
  /// Chain rule for x = s * t + shift.
  Jet2 rescaled(double s) const { return {v, d1 * s, d2 * s * s}; }
};

// ---------------------------------------------------------------------------
// Smooth profiles
// ---------------------------------------------------------------------------

/// Profile on [-1, 1] with two derivatives; zero outside.
/// "smooth": exp(-1/(1-u^2)), "poly": (1-u^2)^order.
inline Jet2 bump_profile(const std::string& family, int order, double u) {
  if (std::abs(u) >= 1.0) return Jet2{};
  const Jet2 x = Jet2::variable(u);
  const Jet2 one_minus = Jet2::constant(1.0) - x * x;
  if (family == "smooth") {
    if (one_minus.v < 1e-3) return Jet2{};
    return exp(-inverse(one_minus));
  }
  if (family == "poly") {
    if (order < 2) throw Error("bump_profile: poly family needs order >= 2");
    return pow(one_minus, order);
  }
  throw Error("bump_profile: unknown family '" + family + "' (expected smooth or poly)");
}

/// Smooth monotone step from 0 at t <= -width to 1 at t >= width.
struct SmoothStep {
  double width = 1.0;

  Jet2 operator()(double t) const {
    const double u = (t + width) / (2.0 * width);
    if (u <= 0.0) return Jet2{};
    if (u >= 1.0) return Jet2::constant(1.0);
    const Jet2 x = Jet2::variable(u);
    const Jet2 a = edge(x), b = edge(Jet2::constant(1.0) - x);
    return (a / (a + b)).rescaled(1.0 / (2.0 * width));
  }

 private:
  static Jet2 edge(Jet2 x) {
    if (x.v < 1e-3) return Jet2{};
    return exp(-inverse(x));
  }
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

class FieldModel {
 public:
  explicit FieldModel(ModelParams p) : p_(p) {
    if (p_.d < 1 || p_.d > 3) throw Error("FieldModel: spatial dimension must be 1, 2 or 3");
    if (p_.N < 2) throw Error("FieldModel: need at least two points per axis");
    if (!(p_.L > 0.0)) throw Error("FieldModel: box size must be positive");
    if (!(p_.mass > 0.0)) throw Error("FieldModel: mass must be positive");
    if (p_.M < 3 || p_.M % 2 == 0) throw Error("FieldModel: time grid needs an odd number (>= 3) of points");
    if (!(p_.T > 0.0)) throw Error("FieldModel: time extent must be positive");
    a_ = p_.L / p_.N;
    volume_ = std::pow(p_.L, p_.d);
    cell_ = std::pow(a_, p_.d);
    tau_ = p_.T / (p_.M - 1);
    sites_ = 1;
    for (int i = 0; i < p_.d; ++i) sites_ *= p_.N;

    positions_.resize(sites_, p_.d);
    momenta_.resize(sites_, p_.d);
    omega_.resize(sites_);
    reflection_.resize(static_cast<std::size_t>(sites_));
    const int kmin = -(p_.N / 2);
    for (Index j = 0; j < sites_; ++j) {
      Index rest = j, reflected = 0, stride = 1;
      double p2 = 0.0;
      for (int ax = 0; ax < p_.d; ++ax) {
        const int idx = static_cast<int>(rest % p_.N);
        rest /= p_.N;
        positions_(j, ax) = idx * a_;
        const int k = kmin + idx;
        momenta_(j, ax) = 2.0 * std::numbers::pi * k / p_.L;
        p2 += momenta_(j, ax) * momenta_(j, ax);
        int ridx = (-k) - kmin;
        ridx = ((ridx % p_.N) + p_.N) % p_.N;
        reflected += ridx * stride;
        stride *= p_.N;
      }
      omega_[j] = std::sqrt(p2 + p_.mass * p_.mass);
      reflection_[static_cast<std::size_t>(j)] = reflected;
    }

    dft_.resize(sites_, sites_);
    for (Index k = 0; k < sites_; ++k)
      for (Index j = 0; j < sites_; ++j)
        dft_(k, j) = cell_ * std::polar(1.0, -momenta_.row(k).dot(positions_.row(j)));
    idft_ = dft_.adjoint() / (cell_ * volume_);

    whitening_ = (2.0 * volume_ * omega_.array()).rsqrt().matrix();

    // Real form: images of real spatial functions, in whitened realified coordinates.
    factor_ = orthonormalize(realified_columns(whitening_.cast<Complex>()));
    if (factor_.rank() != sites_) throw Error("FieldModel: real form has unexpected rank");
  }

  const ModelParams& params() const { return p_; }
  int spatial_dim() const { return p_.d; }
  Index sites() const { return sites_; }
  double spacing() const { return a_; }
  double cell_volume() const { return cell_; }
  double volume() const { return volume_; }
  double mass() const { return p_.mass; }
  Index time_points() const { return p_.M; }
  double tau() const { return tau_; }
  double time(Index n) const { return -0.5 * p_.T + static_cast<double>(n) * tau_; }
  std::vector<double> times() const {
    std::vector<double> t(static_cast<std::size_t>(p_.M));
    for (Index n = 0; n < p_.M; ++n) t[static_cast<std::size_t>(n)] = time(n);
    return t;
  }
  Index time_zero() const { return (p_.M - 1) / 2; }

  const Matrix& positions() const { return positions_; }
  const Matrix& momenta() const { return momenta_; }
  const Vector& dispersion() const { return omega_; }
  const std::vector<Index>& reflection() const { return reflection_; }
  const Vector& whitening() const { return whitening_; }
  const CMatrix& transform_matrix() const { return dft_; }
  const RealSubspace& real_form() const { return factor_; }

  GroundStructure ground() const { return GroundStructure(omega_, factor_); }

  CVector transform(const Vector& f) const {
    require_spatial(f.size());
    return dft_ * f.cast<Complex>();
  }
  CVector inverse_transform(const CVector& psi) const {
    require_spatial(psi.size());
    return idft_ * psi;
  }

  Complex h_inner(const CVector& psi, const CVector& phi) const {
    return (psi.conjugate().array() * phi.array() / (2.0 * omega_.array())).sum() / volume_;
  }
  double l2_inner(const Vector& f, const Vector& g) const { return cell_ * f.dot(g); }
  double phi_inner(const Vector& f, const Vector& g) const {
    const CVector a = transform(f), b = transform(g);
    return ((a.conjugate().array() * b.array()).real() / (2.0 * omega_.array())).sum() / volume_;
  }
  double pi_inner(const Vector& f, const Vector& g) const {
    const CVector a = transform(f), b = transform(g);
    return ((a.conjugate().array() * b.array()).real() * omega_.array() / 2.0).sum() / volume_;
  }

  CVector whiten(const CVector& psi) const { return (psi.array() * whitening_.array().cast<Complex>()).matrix(); }
  CVector unwhiten(const CVector& u) const { return (u.array() / whitening_.array().cast<Complex>()).matrix(); }

  /// Realified columns diag(weights) F e_j for every site.
  Matrix realified_columns(const CVector& weights) const {
    const CMatrix m = weights.asDiagonal() * dft_;
    Matrix out(2 * sites_, sites_);
    out.topRows(sites_) = m.real();
    out.bottomRows(sites_) = m.imag();
    return out;
  }

  void require_spatial(Index size) const {
    if (size != sites_) throw Error("FieldModel: spatial vector has " + std::to_string(size) + " entries, expected " +
                                    std::to_string(sites_));
  }

 private:
  ModelParams p_;
  double a_ = 0.0, volume_ = 0.0, cell_ = 0.0, tau_ = 0.0;
  Index sites_ = 0;
  Matrix positions_, momenta_;
  Vector omega_, whitening_;
  std::vector<Index> reflection_;
  CMatrix dft_, idft_;
  RealSubspace factor_;
};

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

/// Real samples on the spacetime grid, rows indexed by time.
struct TestFunction {
  Matrix values;                 // M x sites
  std::optional<Matrix> dtt;     // second time derivative, when known analytically

  static TestFunction zero(const FieldModel& m) { return {Matrix::Zero(m.time_points(), m.sites()), Matrix::Zero(m.time_points(), m.sites())}; }

  Matrix reversed(const Matrix& x) const { return x.colwise().reverse(); }
  TestFunction symmetric_part() const { return {0.5 * (values + reversed(values)), dtt ? std::optional<Matrix>(0.5 * (*dtt + reversed(*dtt))) : std::nullopt}; }
  TestFunction antisymmetric_part() const { return {0.5 * (values - reversed(values)), dtt ? std::optional<Matrix>(0.5 * (*dtt - reversed(*dtt))) : std::nullopt}; }

  std::vector<bool> support_mask() const {
    std::vector<bool> m(static_cast<std::size_t>(values.cols()), false);
    for (Index j = 0; j < values.cols(); ++j) m[static_cast<std::size_t>(j)] = values.col(j).cwiseAbs().maxCoeff() > 0.0;
    return m;
  }

  bool touches_time_boundary() const {
    return values.row(0).cwiseAbs().maxCoeff() > 0.0 || values.row(values.rows() - 1).cwiseAbs().maxCoeff() > 0.0;
  }

  /// (T f)(t, x) = f(t - steps * tau, x); samples shifted off the grid must vanish.
  TestFunction shifted(Index steps) const {
    const Index m = values.rows();
    auto shift = [&](const Matrix& x) {
      Matrix out = Matrix::Zero(x.rows(), x.cols());
      for (Index n = 0; n < m; ++n) {
        const Index src = n - steps;
        if (src >= 0 && src < m) out.row(n) = x.row(src);
      }
      return out;
    };
    const Index lo = steps > 0 ? m - steps : 0, hi = steps > 0 ? m : -steps;
    for (Index n = lo; n < hi; ++n)
      if (values.row(n).cwiseAbs().maxCoeff() > 0.0) throw Error("TestFunction::shifted: support leaves the time grid");
    return {shift(values), dtt ? std::optional<Matrix>(shift(*dtt)) : std::nullopt};
  }

  TestFunction operator+(const TestFunction& o) const {
    return {values + o.values, dtt && o.dtt ? std::optional<Matrix>(*dtt + *o.dtt) : std::nullopt};
  }
  TestFunction operator*(double s) const { return {s * values, dtt ? std::optional<Matrix>(s * *dtt) : std::nullopt}; }
};

/// Separable bump amplitude * b((t - t0)/wt) * prod_a b(dist_a(x, x0)/wx).
struct BumpSpec {
  std::string family = "smooth";
  int order = 4;
  double amplitude = 1.0;
  double t_center = 0.0;
  double t_width = 1.5;
  std::vector<double> x_center{0.0};
  double x_width = 2.0;

  TestFunction sample(const FieldModel& m) const {
    if (static_cast<int>(x_center.size()) != m.spatial_dim()) throw Error("BumpSpec: centre has the wrong dimension");
    if (!(t_width > 0.0) || !(x_width > 0.0)) throw Error("BumpSpec: widths must be positive");
    const double box = m.params().L;
    Vector spatial(m.sites());
    for (Index j = 0; j < m.sites(); ++j) {
      double prod = 1.0;
      for (int ax = 0; ax < m.spatial_dim(); ++ax) {
        double dx = std::fmod(m.positions()(j, ax) - x_center[static_cast<std::size_t>(ax)], box);
        if (dx > box / 2) dx -= box;
        if (dx < -box / 2) dx += box;
        prod *= bump_profile(family, order, dx / x_width).v;
      }
      spatial[j] = prod;
    }
    TestFunction f{Matrix(m.time_points(), m.sites()), Matrix(m.time_points(), m.sites())};
    for (Index n = 0; n < m.time_points(); ++n) {
      const Jet2 b = bump_profile(family, order, (m.time(n) - t_center) / t_width).rescaled(1.0 / t_width);
      f.values.row(n) = amplitude * b.v * spatial.transpose();
      f.dtt->row(n) = amplitude * b.d2 * spatial.transpose();
    }
    return f;
  }
};

/// CSV with header t,x,value (one spatial dimension). Missing grid points are zero.
inline TestFunction load_test_function_csv(const FieldModel& m, const std::string& path) {
  if (m.spatial_dim() != 1) throw Error("load_test_function_csv: only one spatial dimension is supported");
  std::ifstream in(path);
  if (!in) throw Error("load_test_function_csv: cannot open " + path);
  TestFunction f{Matrix::Zero(m.time_points(), m.sites()), std::nullopt};
  std::string line;
  std::getline(in, line);
  if (line.find('t') == std::string::npos) throw Error("load_test_function_csv: missing header t,x,value");
  const double tol = 1e-9 * std::max({1.0, m.params().T, m.params().L});
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::array<double, 3> v{};
    std::string cell;
    for (double& x : v) {
      if (!std::getline(ss, cell, ',')) throw Error("load_test_function_csv: line " + std::to_string(lineno) + " has fewer than 3 columns");
      x = std::stod(cell);
    }
    const double fn = (v[0] + 0.5 * m.params().T) / m.tau();
    const double fj = v[1] / m.spacing();
    const Index n = static_cast<Index>(std::llround(fn)), j = static_cast<Index>(std::llround(fj));
    if (std::abs(fn - n) * m.tau() > tol || std::abs(fj - j) * m.spacing() > tol || n < 0 || n >= m.time_points() || j < 0 ||
        j >= m.sites())
      throw Error("load_test_function_csv: line " + std::to_string(lineno) + " is not on the grid");
    f.values(n, j) = v[2];
  }
  return f;
}

// ---------------------------------------------------------------------------
// One-particle map, initial data, propagator
// ---------------------------------------------------------------------------

namespace detail {

/// Spatial transform of every time slice: sites x M.
inline CMatrix slice_transforms(const FieldModel& m, const Matrix& values) {
  if (values.rows() != m.time_points() || values.cols() != m.sites()) throw Error("test function does not match the grid");
  return m.transform_matrix() * values.transpose().cast<Complex>();
}

}  // namespace detail

inline CVector k_infty(const FieldModel& m, const TestFunction& f) {
  const CMatrix hat = detail::slice_transforms(m, f.values);
  CVector out = CVector::Zero(m.sites());
  for (Index n = 0; n < m.time_points(); ++n) {
    const double t = m.time(n);
    for (Index k = 0; k < m.sites(); ++k) out[k] += std::polar(m.tau(), m.dispersion()[k] * t) * hat(k, n);
  }
  return out;
}

/// delta0 psi = Re F^{-1} psi
inline Vector delta0(const FieldModel& m, const CVector& psi) { return m.inverse_transform(psi).real(); }

/// delta1 psi = Re F^{-1}(psi / (i w))
inline Vector delta1(const FieldModel& m, const CVector& psi) {
  const CVector scaled = (psi.array() / (Complex(0.0, 1.0) * m.dispersion().array().cast<Complex>())).matrix();
  return m.inverse_transform(scaled).real();
}

inline CVector delta0_inverse(const FieldModel& m, const Vector& f) { return m.transform(f); }

inline CVector delta1_inverse(const FieldModel& m, const Vector& g) {
  return (Complex(0.0, 1.0) * m.dispersion().array().cast<Complex>() * m.transform(g).array()).matrix();
}

/// delta0 o i o delta1^{-1}: a real function of F_pi mapped into F_phi.
inline Vector beta_pi_phi(const FieldModel& m, const Vector& g) {
  return delta0(m, Complex(0.0, 1.0) * delta1_inverse(m, g));
}

struct PropagatedData {
  Vector value;  // (E h)(t, .)
  Vector dt;     // d/dt (E h)(t, .)
};

inline void require_interior_support(const TestFunction& h) {
  if (h.touches_time_boundary())
    throw Error("causal_propagator: source support touches the time-grid boundary");
}

inline PropagatedData propagate_at(const FieldModel& m, const TestFunction& h, double t) {
  require_interior_support(h);
  const CMatrix hat = detail::slice_transforms(m, h.values);
  CVector val = CVector::Zero(m.sites()), der = CVector::Zero(m.sites());
  for (Index n = 0; n < m.time_points(); ++n) {
    const double dt = m.time(n) - t;
    for (Index k = 0; k < m.sites(); ++k) {
      const double w = m.dispersion()[k];
      val[k] += m.tau() * std::sin(w * dt) / w * hat(k, n);
      der[k] -= m.tau() * std::cos(w * dt) * hat(k, n);
    }
  }
  return {m.inverse_transform(val).real(), m.inverse_transform(der).real()};
}

/// E h evaluated on every grid time.
struct SpacetimeField {
  Matrix values;  // M x sites
  Matrix dt;
  Matrix dtt;
};

inline SpacetimeField causal_propagator(const FieldModel& m, const TestFunction& h) {
  require_interior_support(h);
  const CMatrix hat = detail::slice_transforms(m, h.values);
  const Index mm = m.time_points(), s = m.sites();
  CMatrix val = CMatrix::Zero(s, mm), der = CMatrix::Zero(s, mm);
  for (Index k = 0; k < s; ++k) {
    const double w = m.dispersion()[k];
    for (Index i = 0; i < mm; ++i) {
      Complex acc = 0.0, dacc = 0.0;
      for (Index n = 0; n < mm; ++n) {
        const double dt = m.time(n) - m.time(i);
        acc += std::sin(w * dt) / w * hat(k, n);
        dacc -= std::cos(w * dt) * hat(k, n);
      }
      val(k, i) = m.tau() * acc;
      der(k, i) = m.tau() * dacc;
    }
  }
  SpacetimeField out;
  out.values.resize(mm, s);
  out.dt.resize(mm, s);
  out.dtt.resize(mm, s);
  for (Index i = 0; i < mm; ++i) {
    out.values.row(i) = m.inverse_transform(val.col(i)).real().transpose();
    out.dt.row(i) = m.inverse_transform(der.col(i)).real().transpose();
    // Each mode solves the free equation, so the second derivative is -w^2 times the value.
    const CVector acc = (-(m.dispersion().array().square()).cast<Complex>() * val.col(i).array()).matrix();
    out.dtt.row(i) = m.inverse_transform(acc).real().transpose();
  }
  return out;
}

/// P = -d_t^2 + Laplacian - m^2, i.e. -d_t^2 - w^2 per mode, using the analytic d_t^2.
inline TestFunction apply_kg(const FieldModel& m, const TestFunction& g) {
  if (!g.dtt) throw Error("apply_kg: the second time derivative is not available");
  const CMatrix hat = detail::slice_transforms(m, g.values);
  const CMatrix hat_tt = detail::slice_transforms(m, *g.dtt);
  const CMatrix w2 = m.dispersion().array().square().matrix().cast<Complex>().asDiagonal();
  const CMatrix p_hat = -hat_tt - w2 * hat;
  TestFunction out{Matrix(m.time_points(), m.sites()), std::nullopt};
  for (Index n = 0; n < m.time_points(); ++n) out.values.row(n) = m.inverse_transform(p_hat.col(n)).real().transpose();
  return out;
}

/// Residual of P applied to a propagated field: -E h_tt - w^2 E h per mode.
inline double kg_residual(const FieldModel& m, const SpacetimeField& e) {
  Matrix r = -e.dtt;
  for (Index n = 0; n < e.values.rows(); ++n) {
    const CVector hat = m.transform(e.values.row(n).transpose());
    const CVector w2 = (m.dispersion().array().square().cast<Complex>() * hat.array()).matrix();
    r.row(n) -= m.inverse_transform(w2).real().transpose();
  }
  return r.cwiseAbs().maxCoeff();
}

/// h = P(chi phi) with phi the free solution of data (f, g) at t = 0.
inline TestFunction source_from_initial_data(const FieldModel& m, const Vector& f, const Vector& g, const SmoothStep& chi) {
  m.require_spatial(f.size());
  m.require_spatial(g.size());
  const double margin = 2.0 * m.tau();
  if (!(chi.width > 0.0) || chi.width + margin > 0.5 * m.params().T)
    throw Error("source_from_initial_data: cutoff window does not fit inside the time grid");
  const CVector fh = m.transform(f), gh = m.transform(g);
  const Vector& w = m.dispersion();
  TestFunction h{Matrix::Zero(m.time_points(), m.sites()), std::nullopt};
  for (Index n = 0; n < m.time_points(); ++n) {
    const double t = m.time(n);
    const Jet2 c = chi(t);
    if (c.d1 == 0.0 && c.d2 == 0.0) continue;
    CVector slice(m.sites());
    for (Index k = 0; k < m.sites(); ++k) {
      const double cw = std::cos(w[k] * t), sw = std::sin(w[k] * t);
      const Complex phi = fh[k] * cw + gh[k] * sw / w[k];
      const Complex phi_t = -fh[k] * w[k] * sw + gh[k] * cw;
      slice[k] = -(c.d2 * phi + 2.0 * c.d1 * phi_t);
    }
    h.values.row(n) = m.inverse_transform(slice).real().transpose();
  }
  return h;
}

// ---------------------------------------------------------------------------
// Localized subspaces
// ---------------------------------------------------------------------------

using SiteMask = std::vector<bool>;

inline SiteMask complement(const SiteMask& mask) {
  SiteMask out(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = !mask[i];
  return out;
}

inline Index mask_size(const SiteMask& mask) { return static_cast<Index>(std::count(mask.begin(), mask.end(), true)); }

/// Base of a causal diamond: sites within a periodic max-norm box around the centre.
struct Region {
  SiteMask base;

  static Region box(const FieldModel& m, const std::vector<double>& center, double halfwidth) {
    if (static_cast<int>(center.size()) != m.spatial_dim()) throw Error("Region: centre has the wrong dimension");
    if (!(halfwidth > 0.0) || halfwidth > m.params().L / 2) throw Error("Region: halfwidth must lie in (0, L/2]");
    const double box = m.params().L;
    Region r{SiteMask(static_cast<std::size_t>(m.sites()), true)};
    for (Index j = 0; j < m.sites(); ++j)
      for (int ax = 0; ax < m.spatial_dim(); ++ax) {
        double dx = std::fmod(std::abs(m.positions()(j, ax) - center[static_cast<std::size_t>(ax)]), box);
        dx = std::min(dx, box - dx);
        if (dx > halfwidth + 1e-12 * box) r.base[static_cast<std::size_t>(j)] = false;
      }
    return r;
  }

  static Region whole(const FieldModel& m) { return {SiteMask(static_cast<std::size_t>(m.sites()), true)}; }

  Region causal_complement() const { return {complement(base)}; }
  Index size() const { return mask_size(base); }
};

namespace detail {

inline RealSubspace masked_span(const FieldModel& m, const SiteMask& mask, const CVector& weights) {
  if (static_cast<Index>(mask.size()) != m.sites()) throw Error("mask does not match the grid");
  const Matrix cols = m.realified_columns(weights);
  std::vector<Index> keep;
  for (Index j = 0; j < m.sites(); ++j)
    if (mask[static_cast<std::size_t>(j)]) keep.push_back(j);
  if (keep.empty()) return RealSubspace::zero(2 * m.sites());
  return orthonormalize(Matrix(cols(Eigen::all, keep)));
}

}  // namespace detail

/// Field data localized in the mask, as a subspace of the whitened one-particle space.
inline RealSubspace build_FR(const FieldModel& m, const SiteMask& mask) {
  return detail::masked_span(m, mask, m.whitening().cast<Complex>());
}

/// beta_{pi phi} of momentum data localized in the mask: -w times the localized functions.
inline RealSubspace build_FI(const FieldModel& m, const SiteMask& mask) {
  return detail::masked_span(m, mask, (-m.dispersion().array() * m.whitening().array()).matrix().cast<Complex>());
}

struct ArakiReport {
  Index mask_size = 0;
  SubspaceComparison real_part;       // F_R(mask)^perp vs F_I(mask^c)
  SubspaceComparison imaginary_part;  // F_I(mask)^perp vs F_R(mask^c)
  double cross_gram = 0.0;            // max |<F_R(mask), F_I(mask^c)>|
  bool pass = false;
};

inline ArakiReport araki_duality_check(const FieldModel& m, const SiteMask& mask, double tol_eq = Tolerances{}.eq) {
  const SiteMask comp = complement(mask);
  const RealSubspace fr = build_FR(m, mask), fi = build_FI(m, mask);
  const RealSubspace fr_c = build_FR(m, comp), fi_c = build_FI(m, comp);
  ArakiReport r;
  r.mask_size = mask_size(mask);
  r.real_part = compare_subspaces(orthocomplement(fr, m.real_form(), tol_eq), fi_c, tol_eq);
  r.imaginary_part = compare_subspaces(orthocomplement(fi, m.real_form(), tol_eq), fr_c, tol_eq);
  if (!fr.is_zero() && !fi_c.is_zero()) r.cross_gram = (fr.frame().transpose() * fi_c.frame()).cwiseAbs().maxCoeff();
  r.pass = r.real_part.pass && r.imaginary_part.pass;
  return r;
}

struct LocalThermalSubspaces {
  RealSubspace u;
  RealSubspace v;
};

inline LocalThermalSubspaces build_local_thermal_subspaces(const DualityContext& ctx, const FieldModel& m,
                                                           const Region& region) {
  return {build_U(ctx, build_FR(m, region.base)), build_V(ctx, build_FI(m, region.base))};
}

inline DualityContext model_context(const FieldModel& m, double beta, Tolerances tol = {}) {
  return DualityContext(build_thermal(m.ground(), beta), tol);
}

struct HaagReport {
  Index region_size = 0;
  ComplementReport u_complement;   // U_O^perp vs V_O' + V~
  ComplementReport v_complement;   // V_O^perp vs U_O' + U~
  SubspaceComparison duality;      // symplectic complement vs (U_O' + iV_O') + j H
  double sigma_residual = 0.0;
  std::string commutant_label;
  bool pass = false;
};

inline HaagReport haag_duality_check(const DualityContext& ctx, const FieldModel& m, const Region& region,
                                     const std::optional<ModularData>& modular = std::nullopt) {
  const Tolerances& tol = ctx.tolerances();
  const Region outside = region.causal_complement();
  const auto local = build_local_thermal_subspaces(ctx, m, region);
  const auto other = build_local_thermal_subspaces(ctx, m, outside);
  HaagReport r;
  r.region_size = region.size();

  const RealSubspace up = orthocomplement(local.u, ctx.doubled_factor(), tol.eq);
  const RealSubspace vp = orthocomplement(local.v, ctx.doubled_factor(), tol.eq);
  r.u_complement = to_complement_report(compare_subspaces(up, sum_closure(other.v, build_Vtilde(ctx)), tol.eq));
  r.v_complement = to_complement_report(compare_subspaces(vp, sum_closure(other.u, build_Utilde(ctx)), tol.eq));

  const Matrix beta = ctx.doubled_complex_structure();
  const auto sc = symplectic_complement(ctx, sum_closure(local.u, apply_operator(beta, local.v)));
  r.sigma_residual = sc.sigma_residual;
  const ModularData md = modular ? *modular : modular_data(ctx);
  const RealSubspace rhs = sum_closure({other.u, apply_operator(beta, other.v), apply_operator(md.j, global_thermal_subspace(ctx))});
  r.duality = compare_subspaces(sc.complement, rhs, tol.eq);

  const auto labels = commutant_labels(SubspaceLabel::named("F_R(O)"), SubspaceLabel::named("F_I(O)"));
  r.commutant_label = "(" + labels.first.str() + ", " + labels.second.str() + ")";
  r.pass = r.u_complement.pass && r.v_complement.pass && r.duality.pass && r.sigma_residual < tol.eq;
  return r;
}

struct StandardnessReport {
  Index rank = 0;             // dim H
  Index separating_dim = 0;   // dim(H ^ iH)
  Index span_rank = 0;        // rank(H + iH)
  Index ambient = 0;
  Index cyclic_deficit = 0;   // ambient - span_rank
  Index expected_deficit = 0;
  bool pass = false;
};

inline StandardnessReport standardness_report(const DualityContext& ctx, const RealSubspace& h, Index expected_deficit) {
  const Matrix beta = ctx.doubled_complex_structure();
  const RealSubspace ih = apply_operator(beta, h);
  StandardnessReport r;
  r.rank = h.rank();
  r.separating_dim = intersect(h, ih, ctx.tolerances().intersect).rank();
  r.span_rank = sum_closure(h, ih).rank();
  r.ambient = beta.rows();
  r.cyclic_deficit = r.ambient - r.span_rank;
  r.expected_deficit = expected_deficit;
  r.pass = r.separating_dim == 0 && r.cyclic_deficit == expected_deficit;
  return r;
}

inline StandardnessReport standardness_report(const DualityContext& ctx, const FieldModel& m, const Region& region) {
  const auto local = build_local_thermal_subspaces(ctx, m, region);
  const RealSubspace h = sum_closure(local.u, apply_operator(ctx.doubled_complex_structure(), local.v));
  return standardness_report(ctx, h, 4 * (m.sites() - region.size()));
}

inline StandardnessReport standardness_report_global(const DualityContext& ctx) {
  return standardness_report(ctx, global_thermal_subspace(ctx), 0);
}

}  // namespace mdlab
