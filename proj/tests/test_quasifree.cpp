#include "mdlab/quasifree.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mdlab;
using mdlab::testing::max_abs;
using mdlab::testing::random_cvector;

namespace {

// Values at beta * omega = 1, evaluated to 20 digits offline.
constexpr double kSinhWeightAtOne = 0.76287397836689018;   // 1/sqrt(e - 1)
constexpr double kCoshWeightAtOne = 1.2577665549971212;    // 1/sqrt(1 - 1/e)
constexpr double kCothHalf = 2.1639534137386528;           // coth(1/2)

GroundStructure single_mode(double omega) { return GroundStructure(Vector::Constant(1, omega)); }

GroundStructure lattice_table(Index n, double mass) {
  Vector w(n);
  for (Index k = 0; k < n; ++k) {
    const double p = 2.0 * std::numbers::pi * static_cast<double>(k - n / 2) / static_cast<double>(n);
    w[k] = std::sqrt(p * p + mass * mass);
  }
  return GroundStructure(w);
}

std::vector<double> time_points(double lo, double hi, int count) {
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(lo + (hi - lo) * i / (count - 1));
  return t;
}

}  // namespace

TEST(Ground, RejectsNonPositiveDispersion) {
  EXPECT_THROW(GroundStructure(Vector::Zero(3)), Error);
  Vector w = Vector::Ones(3);
  w[1] = -1.0;
  EXPECT_THROW(GroundStructure{w}, Error);
}

TEST(Ground, ConjugationReversesEvolution) {
  const auto g = lattice_table(8, 0.5);
  const Matrix gam = g.conjugation();
  EXPECT_LT(max_abs(gam * gam - Matrix::Identity(16, 16)), 1e-15);
  for (double t : {-1.3, 0.2, 2.7})
    EXPECT_LT(max_abs(gam * g.evolution(t) - g.evolution(-t) * gam), 1e-12);
}

TEST(Thermal, WeightsAtUnitArgument) {
  const auto th = build_thermal(single_mode(1.0), 1.0);
  EXPECT_NEAR(th.sinh_weights()[0], kSinhWeightAtOne, 1e-15);
  EXPECT_NEAR(th.cosh_weights()[0], kCoshWeightAtOne, 1e-15);
}

TEST(Thermal, GroundStateLimit) {
  const auto th = build_thermal(single_mode(1.0), 60.0);
  EXPECT_LT(th.sinh_weights()[0], 1e-12);
  EXPECT_NEAR(th.cosh_weights()[0], 1.0, 1e-12);
  const CVector u = CVector::Constant(1, Complex(0.3, -0.7));
  const CVector k = k_beta(th, u);
  EXPECT_LT(std::abs(k[0]), 1e-12);
  EXPECT_LT(std::abs(k[1] - u[0]), 1e-12);
}

TEST(Thermal, RejectsBadBeta) {
  EXPECT_THROW(build_thermal(single_mode(1.0), 0.0), Error);
  EXPECT_THROW(build_thermal(single_mode(1.0), -2.0), Error);
}

TEST(Thermal, WeightIdentitiesAcrossTable) {
  const auto g = lattice_table(64, 1.0);
  for (double beta : {0.1, 1.0, 10.0}) {
    const auto th = build_thermal(g, beta);
    for (Index k = 0; k < 64; ++k) {
      const double s = th.sinh_weights()[k], c = th.cosh_weights()[k];
      EXPECT_NEAR(c * c - s * s, 1.0, 1e-12);
      EXPECT_NEAR(s / c, std::exp(-beta * g.dispersion()[k] / 2.0), 1e-12);
    }
  }
}

TEST(KBeta, ZeroAndNorm) {
  const auto th = build_thermal(single_mode(1.0), 1.0);
  EXPECT_EQ(k_beta(th, CVector::Zero(1)).norm(), 0.0);
  const CVector u = CVector::Constant(1, 1.0);
  EXPECT_NEAR(k_beta(th, u).squaredNorm(), kCothHalf, 1e-14);
}

TEST(KBeta, RealLinearAndConjugateFirstCopy) {
  std::mt19937_64 rng(20);
  const auto th = build_thermal(lattice_table(12, 0.8), 0.7);
  const CVector u = random_cvector(rng, 12), v = random_cvector(rng, 12);
  const double a = 1.7, b = -0.4;
  EXPECT_LT((k_beta(th, a * u + b * v) - (a * k_beta(th, u) + b * k_beta(th, v))).norm(), 1e-12);
  const CVector k = k_beta(th, u);
  for (Index i = 0; i < 12; ++i) EXPECT_LT(std::abs(k[i] - std::conj(th.sinh_weights()[i] * u[i])), 1e-15);
  // Realified matrix agrees with the complex form.
  EXPECT_LT((th.k_beta_matrix() * realify(u) - realify(k)).norm(), 1e-12);
}

TEST(Symplectic, Preserved) {
  const auto th = build_thermal(single_mode(1.0), 1.0);
  const CVector e = CVector::Constant(1, 1.0);
  const CVector ie = CVector::Constant(1, Complex(0.0, 1.0));
  const auto same = verify_symplectic_preservation(th, e, e);
  EXPECT_NEAR(same.lhs, 0.0, 1e-15);
  const auto r = verify_symplectic_preservation(th, e, ie);
  EXPECT_NEAR(r.lhs, 2.0, 1e-12);
  EXPECT_NEAR(r.rhs, 2.0, 1e-15);

  std::mt19937_64 rng(21);
  const auto big = build_thermal(lattice_table(64, 1.0), 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i)
    worst = std::max(worst, verify_symplectic_preservation(big, random_cvector(rng, 64), random_cvector(rng, 64)).deviation);
  EXPECT_LT(worst, 1e-10);
}

TEST(Kms, SingleModeAtZero) {
  const auto th = build_thermal(single_mode(1.3), 0.9);
  const CVector u = CVector::Constant(1, 0.8);
  const auto r = verify_one_particle_kms(th, u, u, {0.0});
  EXPECT_LT(r.abs_deviation, 1e-14);
}

TEST(Kms, DisjointSupports) {
  const auto th = build_thermal(lattice_table(4, 1.0), 1.0);
  CVector u = CVector::Zero(4), v = CVector::Zero(4);
  u[0] = Complex(1.0, 2.0);
  v[3] = Complex(-0.5, 0.25);
  const auto r = verify_one_particle_kms(th, u, v, time_points(-2, 2, 9));
  EXPECT_EQ(r.abs_deviation, 0.0);
}

TEST(Kms, RandomPairs) {
  std::mt19937_64 rng(22);
  const auto th = build_thermal(lattice_table(32, 1.0), 1.0);
  const auto t = time_points(-2, 2, 17);
  double worst = 0.0, literal = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto r = verify_one_particle_kms(th, random_cvector(rng, 32), random_cvector(rng, 32), t);
    worst = std::max(worst, r.rel_deviation);
    literal = std::max(literal, r.literal_residual);
  }
  EXPECT_LT(worst, 1e-9);
  // The symmetric-split form does not hold with this orientation of the doubled generator.
  EXPECT_GT(literal, 1e-3);
}

TEST(TimeEvolve, GroupLawAndUnitarity) {
  std::mt19937_64 rng(23);
  const auto g = lattice_table(10, 1.0);
  const CVector u = random_cvector(rng, 10);
  EXPECT_LT((time_evolve(g, 0.0, u) - u).norm(), 1e-15);
  EXPECT_LT((time_evolve(g, -1.7, time_evolve(g, 1.7, u)) - u).norm(), 1e-12);
  EXPECT_NEAR(time_evolve(g, 3.1, u).norm(), u.norm(), 1e-12);
  const auto th = build_thermal(g, 1.0);
  const CVector x = random_cvector(rng, 20);
  EXPECT_NEAR(time_evolve(th, 0.9, x).norm(), x.norm(), 1e-12);
  EXPECT_LT((time_evolve(th, -0.9, time_evolve(th, 0.9, x)) - x).norm(), 1e-12);
}

TEST(TimeEvolve, PeriodicPhase) {
  const auto g = single_mode(2.0);
  const CVector u = CVector::Constant(1, 1.0);
  EXPECT_LT(std::abs(time_evolve(g, std::numbers::pi, u)[0] - 1.0), 1e-12);
}

TEST(TimeEvolve, DoubledIntertwinesKBeta) {
  std::mt19937_64 rng(24);
  const auto th = build_thermal(lattice_table(8, 1.0), 0.6);
  const CVector u = random_cvector(rng, 8);
  for (double t : {-1.0, 0.4, 2.2})
    EXPECT_LT((k_beta(th, time_evolve(th.ground(), t, u)) - time_evolve(th, t, k_beta(th, u))).norm(), 1e-12);
}
