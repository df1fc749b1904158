#pragma once
//
// Realified Hilbert spaces and closed real subspaces.
//
// A complex vector u in C^n is stored as the real vector (Re u, Im u) in
// R^{2n}. Multiplication by i is the complex structure [[0,-I],[I,0]], the
// real inner product is Re<.,.> and the symplectic form is 2 Im<.,.> (the
// complex inner product is antilinear in its first slot).
//
// Subspaces are orthonormal frames; projectors are derived on demand.
//

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdlab {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double rank = 1e-10;       // relative singular-value cutoff
  double eq = 1e-8;          // equality of subspaces / operators
  double intersect = 1e-8;   // principal-angle threshold for the meet
};

// ---------------------------------------------------------------------------
// Realification
// ---------------------------------------------------------------------------

inline Vector realify(const CVector& u) {
  const Index n = u.size();
  Vector v(2 * n);
  v.head(n) = u.real();
  v.tail(n) = u.imag();
  return v;
}

inline CVector complexify(const Vector& v) {
  if (v.size() % 2 != 0) throw Error("complexify: odd real dimension");
  const Index n = v.size() / 2;
  CVector u(n);
  for (Index k = 0; k < n; ++k) u[k] = Complex(v[k], v[n + k]);
  return u;
}

/// Realified matrix of x -> L x + M conj(x).
inline Matrix realify_operator(const CMatrix& linear, const CMatrix& antilinear) {
  const Index r = linear.rows(), c = linear.cols();
  if (antilinear.rows() != r || antilinear.cols() != c)
    throw Error("realify_operator: block shape mismatch");
  Matrix out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = linear.real() + antilinear.real();
  out.topRightCorner(r, c) = -linear.imag() + antilinear.imag();
  out.bottomLeftCorner(r, c) = linear.imag() + antilinear.imag();
  out.bottomRightCorner(r, c) = linear.real() - antilinear.real();
  return out;
}

inline Matrix realify_linear(const CMatrix& linear) {
  return realify_operator(linear, CMatrix::Zero(linear.rows(), linear.cols()));
}

inline Matrix realify_antilinear(const CMatrix& antilinear) {
  return realify_operator(CMatrix::Zero(antilinear.rows(), antilinear.cols()), antilinear);
}

inline Matrix complex_structure(Index complex_dim) {
  Matrix beta = Matrix::Zero(2 * complex_dim, 2 * complex_dim);
  beta.topRightCorner(complex_dim, complex_dim) = -Matrix::Identity(complex_dim, complex_dim);
  beta.bottomLeftCorner(complex_dim, complex_dim) = Matrix::Identity(complex_dim, complex_dim);
  return beta;
}

/// C^n viewed as the real Hilbert space R^{2n}.
class RealifiedSpace {
 public:
  explicit RealifiedSpace(Index complex_dim) : n_(complex_dim) {
    if (complex_dim <= 0) throw Error("RealifiedSpace: complex dimension must be positive");
    beta_ = mdlab::complex_structure(n_);
  }

  Index complex_dim() const { return n_; }
  Index real_dim() const { return 2 * n_; }
  const Matrix& complex_structure() const { return beta_; }

  Vector apply_complex_structure(const Vector& v) const {
    Vector w(2 * n_);
    w.head(n_) = -v.tail(n_);
    w.tail(n_) = v.head(n_);
    return w;
  }

  double inner(const Vector& v, const Vector& w) const { return v.dot(w); }

  // sigma(v, w) = 2 Im<v, w> = 2 <beta v, w>_R
  double symplectic(const Vector& v, const Vector& w) const {
    return 2.0 * apply_complex_structure(v).dot(w);
  }

 private:
  Index n_;
  Matrix beta_;
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

class RealLinearOperator {
 public:
  RealLinearOperator() = default;
  explicit RealLinearOperator(Matrix m) : m_(std::move(m)) {}

  static RealLinearOperator identity(Index dim) { return RealLinearOperator(Matrix::Identity(dim, dim)); }

  const Matrix& matrix() const { return m_; }
  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }

  RealLinearOperator adjoint() const { return RealLinearOperator(m_.transpose()); }

  RealLinearOperator compose(const RealLinearOperator& rhs) const {
    if (m_.cols() != rhs.rows()) throw Error("compose: inner dimension mismatch");
    return RealLinearOperator(m_ * rhs.m_);
  }

  Vector apply(const Vector& v) const {
    if (v.size() != m_.cols()) throw Error("apply: dimension mismatch");
    return m_ * v;
  }

  /// Two-norm condition number; infinite for rank-deficient or non-square operators.
  double condition_number() const {
    if (m_.rows() != m_.cols() || m_.rows() == 0) return std::numeric_limits<double>::infinity();
    Eigen::JacobiSVD<Matrix> svd(m_);
    const auto& s = svd.singularValues();
    const double smin = s[s.size() - 1];
    return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
  }

  double spectral_norm() const {
    if (m_.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m_);
    return svd.singularValues()[0];
  }

  RealLinearOperator inverse(double max_condition = 1e12) const {
    if (!(condition_number() < max_condition)) throw Error("inverse: operator is singular or ill-conditioned");
    return RealLinearOperator(m_.partialPivLu().inverse());
  }

 private:
  Matrix m_;
};

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

class RealSubspace {
 public:
  RealSubspace() = default;

  static RealSubspace zero(Index ambient_dim, double tol_rank = Tolerances{}.rank) {
    return RealSubspace(Matrix(ambient_dim, 0), tol_rank);
  }
  static RealSubspace whole(Index ambient_dim, double tol_rank = Tolerances{}.rank) {
    return RealSubspace(Matrix::Identity(ambient_dim, ambient_dim), tol_rank);
  }
  /// Caller guarantees the columns are orthonormal.
  static RealSubspace from_orthonormal(Matrix frame, double tol_rank = Tolerances{}.rank) {
    return RealSubspace(std::move(frame), tol_rank);
  }

  Index ambient_dim() const { return frame_.rows(); }
  Index rank() const { return frame_.cols(); }
  bool is_zero() const { return frame_.cols() == 0; }
  double tol_rank() const { return tol_rank_; }
  const Matrix& frame() const { return frame_; }

  Matrix projector() const { return frame_ * frame_.transpose(); }

  Vector project(const Vector& v) const {
    if (is_zero()) return Vector::Zero(v.size());
    return frame_ * (frame_.transpose() * v);
  }

  double distance(const Vector& v) const { return (v - project(v)).norm(); }

  /// Largest deviation of frame^T frame from the identity.
  double orthonormality_defect() const {
    if (is_zero()) return 0.0;
    return (frame_.transpose() * frame_ - Matrix::Identity(rank(), rank())).cwiseAbs().maxCoeff();
  }

 private:
  RealSubspace(Matrix frame, double tol_rank) : frame_(std::move(frame)), tol_rank_(tol_rank) {}

  Matrix frame_;
  double tol_rank_ = Tolerances{}.rank;
};

/// Orthonormal frame for the span of the columns. Singular directions below
/// tol_rank * (largest singular value) are dropped.
inline RealSubspace orthonormalize(const Matrix& columns, double tol_rank = Tolerances{}.rank) {
  const Index ambient = columns.rows();
  if (columns.cols() == 0 || ambient == 0) return RealSubspace::zero(ambient, tol_rank);
  Eigen::BDCSVD<Matrix> svd(columns, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0 || !std::isfinite(s[0])) {
    if (!std::isfinite(s.size() ? s[0] : 0.0)) throw Error("orthonormalize: non-finite input");
    return RealSubspace::zero(ambient, tol_rank);
  }
  Index r = 0;
  while (r < s.size() && s[r] > tol_rank * s[0]) ++r;
  return RealSubspace::from_orthonormal(svd.matrixU().leftCols(r), tol_rank);
}

inline RealSubspace orthonormalize(const std::vector<Vector>& vectors, double tol_rank = Tolerances{}.rank) {
  if (vectors.empty()) return RealSubspace::zero(0, tol_rank);
  const Index dim = vectors.front().size();
  Matrix cols(dim, static_cast<Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != dim) throw Error("orthonormalize: vectors have different dimensions");
    cols.col(static_cast<Index>(j)) = vectors[j];
  }
  return orthonormalize(cols, tol_rank);
}

inline void require_same_ambient(const RealSubspace& a, const RealSubspace& b, const char* what) {
  if (a.ambient_dim() != b.ambient_dim())
    throw Error(std::string(what) + ": ambient dimensions differ (" + std::to_string(a.ambient_dim()) +
                " vs " + std::to_string(b.ambient_dim()) + ")");
}

/// Largest distance of a frame vector of `inner` from `outer`.
inline double containment_defect(const RealSubspace& inner, const RealSubspace& outer) {
  require_same_ambient(inner, outer, "containment_defect");
  if (inner.is_zero()) return 0.0;
  Matrix r = inner.frame();
  if (!outer.is_zero()) r -= outer.frame() * (outer.frame().transpose() * inner.frame());
  return r.colwise().norm().maxCoeff();
}

inline RealSubspace orthocomplement(const RealSubspace& s, const std::optional<RealSubspace>& within = std::nullopt,
                                    double tol_eq = Tolerances{}.eq) {
  if (within) {
    require_same_ambient(s, *within, "orthocomplement");
    if (containment_defect(s, *within) > tol_eq) throw Error("orthocomplement: subspace is not contained in `within`");
    const Index w = within->rank();
    if (w == 0) return RealSubspace::zero(s.ambient_dim(), s.tol_rank());
    if (s.is_zero()) return *within;
    // Coordinates of S inside W, complemented there, then mapped back.
    const Matrix coords = within->frame().transpose() * s.frame();
    const RealSubspace local = orthonormalize(coords, s.tol_rank());
    Eigen::HouseholderQR<Matrix> qr(local.frame());
    const Matrix q = qr.householderQ() * Matrix::Identity(w, w);
    return RealSubspace::from_orthonormal(within->frame() * q.rightCols(w - local.rank()), s.tol_rank());
  }
  const Index d = s.ambient_dim();
  if (s.is_zero()) return RealSubspace::whole(d, s.tol_rank());
  Eigen::HouseholderQR<Matrix> qr(s.frame());
  const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return RealSubspace::from_orthonormal(q.rightCols(d - s.rank()), s.tol_rank());
}

namespace detail {

// Sines of the principal angles, ascending, with the right singular vectors
// of (I - P_a) F_b. Requires rank(b) <= rank(a).
struct SineDecomposition {
  Vector sines;
  Matrix right;
};

inline SineDecomposition sine_decomposition(const RealSubspace& a, const RealSubspace& b) {
  Matrix residual = b.frame();
  if (!a.is_zero()) residual -= a.frame() * (a.frame().transpose() * b.frame());
  Eigen::JacobiSVD<Matrix> svd(residual, Eigen::ComputeThinV);
  // JacobiSVD returns descending values; reverse to ascending.
  const Index q = b.rank();
  SineDecomposition out{Vector(q), Matrix(b.rank(), q)};
  const auto& s = svd.singularValues();
  const Index have = s.size();
  for (Index i = 0; i < q; ++i) {
    // When residual has fewer rows than columns, missing values are zero.
    const Index src = have - 1 - i;
    if (src >= 0) {
      out.sines[i] = s[src];
      out.right.col(i) = svd.matrixV().col(src);
    } else {
      out.sines[i] = 0.0;
      out.right.col(i).setZero();
    }
  }
  return out;
}

}  // namespace detail

/// Principal angles in [0, pi/2], ascending. Small angles come from the sines
/// and large ones from the cosines so both ends are resolved accurately.
inline std::vector<double> principal_angles(const RealSubspace& s1, const RealSubspace& s2) {
  require_same_ambient(s1, s2, "principal_angles");
  const RealSubspace& a = s1.rank() >= s2.rank() ? s1 : s2;
  const RealSubspace& b = s1.rank() >= s2.rank() ? s2 : s1;
  const Index q = b.rank();
  std::vector<double> angles;
  if (q == 0) return angles;
  Eigen::JacobiSVD<Matrix> cos_svd(a.frame().transpose() * b.frame());
  const Vector& cosines = cos_svd.singularValues();
  const auto sin = detail::sine_decomposition(a, b);
  angles.resize(static_cast<std::size_t>(q));
  for (Index i = 0; i < q; ++i) {
    const double si = std::clamp(sin.sines[i], 0.0, 1.0);
    const double ci = std::clamp(i < cosines.size() ? cosines[i] : 0.0, 0.0, 1.0);
    angles[static_cast<std::size_t>(i)] = si * si < 0.5 ? std::asin(si) : std::acos(ci);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

/// Numerical meet: the span of directions whose principal angle is below tol.
inline RealSubspace intersect(const RealSubspace& s1, const RealSubspace& s2, double tol = Tolerances{}.intersect) {
  require_same_ambient(s1, s2, "intersect");
  const RealSubspace& a = s1.rank() >= s2.rank() ? s1 : s2;
  const RealSubspace& b = s1.rank() >= s2.rank() ? s2 : s1;
  if (b.is_zero()) return RealSubspace::zero(s1.ambient_dim(), s1.tol_rank());
  const auto sin = detail::sine_decomposition(a, b);
  Index keep = 0;
  while (keep < sin.sines.size() && std::asin(std::clamp(sin.sines[keep], 0.0, 1.0)) < tol) ++keep;
  if (keep == 0) return RealSubspace::zero(s1.ambient_dim(), s1.tol_rank());
  return orthonormalize(Matrix(b.frame() * sin.right.leftCols(keep)), s1.tol_rank());
}

inline RealSubspace sum_closure(const RealSubspace& s1, const RealSubspace& s2) {
  require_same_ambient(s1, s2, "sum_closure");
  Matrix cols(s1.ambient_dim(), s1.rank() + s2.rank());
  cols << s1.frame(), s2.frame();
  return orthonormalize(cols, std::max(s1.tol_rank(), s2.tol_rank()));
}

inline RealSubspace sum_closure(std::initializer_list<RealSubspace> parts) {
  if (parts.size() == 0) throw Error("sum_closure: no subspaces");
  RealSubspace acc = *parts.begin();
  for (auto it = parts.begin() + 1; it != parts.end(); ++it) acc = sum_closure(acc, *it);
  return acc;
}

inline RealSubspace apply_operator(const RealLinearOperator& op, const RealSubspace& s) {
  if (op.cols() != s.ambient_dim()) throw Error("apply_operator: operator does not act on the subspace's ambient space");
  if (s.is_zero()) return RealSubspace::zero(op.rows(), s.tol_rank());
  return orthonormalize(Matrix(op.matrix() * s.frame()), s.tol_rank());
}

inline RealSubspace apply_operator(const Matrix& op, const RealSubspace& s) {
  return apply_operator(RealLinearOperator(op), s);
}

// ---------------------------------------------------------------------------
// Comparisons
// ---------------------------------------------------------------------------

struct SubspaceComparison {
  Index lhs_rank = 0;
  Index rhs_rank = 0;
  double max_angle = 0.0;   // pi/2 when the ranks differ
  bool pass = false;
};

inline SubspaceComparison compare_subspaces(const RealSubspace& lhs, const RealSubspace& rhs, double tol) {
  SubspaceComparison c{lhs.rank(), rhs.rank(), 0.0, false};
  if (lhs.rank() != rhs.rank()) {
    c.max_angle = kHalfPi;
    return c;
  }
  const auto angles = principal_angles(lhs, rhs);
  c.max_angle = angles.empty() ? 0.0 : angles.back();
  c.pass = c.max_angle < tol;
  return c;
}

struct BoundedInverseReport {
  Index lhs_rank = 0;
  Index rhs_rank = 0;
  double deviation = 0.0;  // max principal angle
  double condition = 0.0;
  bool pass = false;
};

/// (A V)^perp versus (A^*)^{-1} V^perp.
inline BoundedInverseReport check_bounded_inverse_identity(const RealLinearOperator& a, const RealSubspace& v,
                                                           double tol_eq = Tolerances{}.eq) {
  if (a.rows() != a.cols() || a.cols() != v.ambient_dim())
    throw Error("check_bounded_inverse_identity: operator must be square on the subspace's ambient space");
  const double cond = a.condition_number();
  if (!(cond < 1e12)) throw Error("check_bounded_inverse_identity: operator is singular");
  const RealSubspace lhs = orthocomplement(apply_operator(a, v));
  const RealLinearOperator adj_inv(a.matrix().transpose().partialPivLu().inverse());
  const RealSubspace rhs = apply_operator(adj_inv, orthocomplement(v));
  const auto cmp = compare_subspaces(lhs, rhs, tol_eq);
  return {cmp.lhs_rank, cmp.rhs_rank, cmp.max_angle, cond, cmp.pass};
}

}  // namespace mdlab
