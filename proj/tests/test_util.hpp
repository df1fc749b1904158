#pragma once
// Shared fixtures and independent oracles for the unit tests.

#include "mdlab/subspace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>
#include <vector>

namespace mdlab::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Index n) { return random_matrix(rng, n, 1).col(0); }

inline CVector random_cvector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

inline RealSubspace random_subspace(std::mt19937_64& rng, Index ambient, Index rank) {
  return orthonormalize(random_matrix(rng, ambient, rank));
}

/// Random subspace of span(frame) with the given rank.
inline RealSubspace random_subspace_of(std::mt19937_64& rng, const RealSubspace& host, Index rank) {
  if (rank == 0) return RealSubspace::zero(host.ambient_dim());
  return orthonormalize(Matrix(host.frame() * random_matrix(rng, host.rank(), rank)));
}

// Oracle: cos^2 of the principal angles are the top eigenvalues of P2 P1 P2.
inline std::vector<double> angles_via_projectors(const RealSubspace& a, const RealSubspace& b) {
  const Index q = std::min(a.rank(), b.rank());
  std::vector<double> out;
  if (q == 0) return out;
  const Matrix m = b.projector() * a.projector() * b.projector();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  const Vector ev = es.eigenvalues();  // ascending
  for (Index i = 0; i < q; ++i) {
    const double c2 = std::clamp(ev[ev.size() - 1 - i], 0.0, 1.0);
    out.push_back(std::acos(std::sqrt(c2)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Oracle: dimension of the null space of [F1, -F2] via full-pivot LU.
inline Index intersection_dim_via_kernel(const RealSubspace& a, const RealSubspace& b, double threshold = 1e-9) {
  if (a.is_zero() || b.is_zero()) return 0;
  Matrix m(a.ambient_dim(), a.rank() + b.rank());
  m << a.frame(), -b.frame();
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(threshold);
  return lu.dimensionOfKernel();
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace mdlab::testing
