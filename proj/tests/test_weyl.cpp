#include "mdlab/weyl.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace mdlab;
using mdlab::testing::random_vector;

namespace {

constexpr double kCothHalf = 2.1639534137386528;

GroundStructure ground(Index n) {
  Vector w(n);
  for (Index k = 0; k < n; ++k) w[k] = 1.0 + 0.37 * k;
  return GroundStructure(w);
}

WeylWord random_word(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> ph(-3.0, 3.0);
  return {std::polar(1.0, ph(rng)), 0.6 * random_vector(rng, 2 * n)};
}

double phase_gap(Complex a, Complex b) { return std::abs(a - b); }

std::vector<double> grid(double lo, double hi, int count) {
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(lo + (hi - lo) * i / (count - 1));
  return t;
}

}  // namespace

TEST(Weyl, UnitAndInverse) {
  std::mt19937_64 rng(60);
  const auto w = random_word(rng, 5);
  const auto id = WeylWord::identity(10);
  const auto a = weyl_multiply(w, id);
  EXPECT_LT(phase_gap(a.phase, w.phase), 1e-15);
  EXPECT_EQ(a.label, w.label);
  const auto g = WeylWord::generator(w.label);
  const auto b = weyl_multiply(g, WeylWord::generator(-w.label));
  EXPECT_LT(phase_gap(b.phase, 1.0), 1e-15);
  EXPECT_EQ(b.label.norm(), 0.0);
}

TEST(Weyl, Associativity) {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_word(rng, 4), b = random_word(rng, 4), c = random_word(rng, 4);
    const auto l = weyl_multiply(weyl_multiply(a, b), c), r = weyl_multiply(a, weyl_multiply(b, c));
    EXPECT_LT(phase_gap(l.phase, r.phase), 1e-12);
    EXPECT_LT((l.label - r.label).norm(), 1e-12);
    EXPECT_NEAR(std::abs(l.phase), 1.0, 1e-12);
  }
}

TEST(Weyl, Star) {
  std::mt19937_64 rng(62);
  const auto id = WeylWord::identity(8);
  EXPECT_LT(phase_gap(weyl_star(id).phase, 1.0), 1e-15);
  for (int i = 0; i < 10; ++i) {
    const auto f = random_word(rng, 4), g = random_word(rng, 4);
    const auto l = weyl_star(weyl_multiply(f, g)), r = weyl_multiply(weyl_star(g), weyl_star(f));
    EXPECT_LT(phase_gap(l.phase, r.phase), 1e-12);
    EXPECT_LT((l.label - r.label).norm(), 1e-12);
    const auto ss = weyl_star(weyl_star(f));
    EXPECT_EQ(ss.label, f.label);
    EXPECT_LT(phase_gap(ss.phase, f.phase), 1e-15);
  }
}

TEST(Weyl, CommutationPhase) {
  // W(f) W(g) = e^{-i sigma(f, g)} W(g) W(f), checked against the complex inner product.
  std::mt19937_64 rng(63);
  const auto f = WeylWord::generator(random_vector(rng, 6)), g = WeylWord::generator(random_vector(rng, 6));
  const auto fg = weyl_multiply(f, g), gf = weyl_multiply(g, f);
  const double sigma = 2.0 * complexify(f.label).dot(complexify(g.label)).imag();
  EXPECT_LT(phase_gap(fg.phase, gf.phase * std::polar(1.0, -sigma)), 1e-12);
}

TEST(Dynamics, GroupLawAndSymplecticInvariance) {
  std::mt19937_64 rng(64);
  const auto g = ground(5);
  const auto w = random_word(rng, 5);
  const auto same = free_dynamics(w, 0.0, g);
  EXPECT_LT((same.label - w.label).norm(), 1e-15);
  const auto back = free_dynamics(free_dynamics(w, 1.3, g), -1.3, g);
  EXPECT_LT((back.label - w.label).norm(), 1e-12);
  const auto ts = free_dynamics(free_dynamics(w, 0.4, g), 0.9, g), t = free_dynamics(w, 1.3, g);
  EXPECT_LT((ts.label - t.label).norm(), 1e-10);
  const auto v = random_word(rng, 5);
  const RealifiedSpace sp(5);
  EXPECT_NEAR(sp.symplectic(free_dynamics(w, 2.1, g).label, free_dynamics(v, 2.1, g).label),
              sp.symplectic(w.label, v.label), 1e-9);
}

TEST(Dynamics, MatchesModelTimeShift) {
  ModelParams p;
  p.N = 16;
  p.L = 16;
  const FieldModel m(p);
  BumpSpec b;
  b.x_center = {5.0};
  const auto f = b.sample(m);
  const Index steps = 20;
  const auto lhs = weyl_generator(m, f.shifted(steps));
  const auto rhs = free_dynamics(weyl_generator(m, f), steps * m.tau(), m.ground());
  EXPECT_LT((lhs.label - rhs.label).norm(), 1e-9);
}

TEST(State, IdentityAndThermalEnhancement) {
  const GroundStructure g(Vector::Constant(1, 1.0));
  const auto th = build_thermal(g, 1.0);
  EXPECT_LT(std::abs(evaluate_quasifree(WeylWord::identity(2), g) - 1.0), 1e-15);
  const WeylWord w = WeylWord::generator(Vector::Unit(2, 0) * 0.7);
  const double ground_exp = -std::log(evaluate_quasifree(w, g).real());
  const double thermal_exp = -std::log(evaluate_quasifree(w, th).real());
  EXPECT_NEAR(thermal_exp / ground_exp, kCothHalf, 1e-12);
  EXPECT_THROW(evaluate_quasifree(WeylWord::identity(4), th), Error);
}

TEST(State, PositivityOnSmallGrams) {
  std::mt19937_64 rng(65);
  const auto th = build_thermal(ground(3), 0.8);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<WeylWord> ws;
    for (int i = 0; i < 4; ++i) ws.push_back(random_word(rng, 3));
    Eigen::Matrix4cd gram;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) gram(i, j) = evaluate_quasifree(weyl_multiply(weyl_star(ws[i]), ws[j]), th);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(gram);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
    const auto& f = ws[0];
    EXPECT_GE(evaluate_quasifree(weyl_multiply(weyl_star(f), f), th).real() + 1e-15,
              std::norm(evaluate_quasifree(f, th)));
  }
}

TEST(State, ThermalExponentIsWeightedGroundNorm) {
  std::mt19937_64 rng(66);
  const auto th = build_thermal(ground(6), 0.9);
  const Vector v = random_vector(rng, 12);
  const CVector u = complexify(v);
  double weighted = 0.0;
  for (Index k = 0; k < 6; ++k)
    weighted += (std::pow(th.sinh_weights()[k], 2) + std::pow(th.cosh_weights()[k], 2)) * std::norm(u[k]);
  EXPECT_NEAR(-2.0 * std::log(evaluate_quasifree(WeylWord::generator(v), th).real()), weighted, 1e-12);
}

TEST(Segal, RoundTripAndUniqueSplit) {
  std::mt19937_64 rng(67);
  const auto g = ground(5);
  for (int i = 0; i < 10; ++i) {
    const auto w = random_word(rng, 5);
    const auto s = to_segal(w, g.factor_subspace());
    const auto back = to_weyl(s);
    EXPECT_LT(phase_gap(back.phase, w.phase), 1e-12);
    EXPECT_LT((back.label - w.label).norm(), 1e-12);
    EXPECT_LT(split_real_form(w.label, g.factor_subspace()).residual, 1e-10);
  }
}

TEST(Segal, ProductMatchesWeylProduct) {
  std::mt19937_64 rng(68);
  const auto g = ground(4);
  for (int i = 0; i < 10; ++i) {
    const auto a = random_word(rng, 4), b = random_word(rng, 4);
    const auto via_segal = to_weyl(segal_multiply(to_segal(a, g.factor_subspace()), to_segal(b, g.factor_subspace())));
    const auto direct = weyl_multiply(a, b);
    EXPECT_LT(phase_gap(via_segal.phase, direct.phase), 1e-12);
    EXPECT_LT((via_segal.label - direct.label).norm(), 1e-12);
  }
}

TEST(Labels, FieldAlgebraCommutant) {
  const auto a = AlgebraLabel::field(SubspaceLabel::named("K1"), SubspaceLabel::named("K2"));
  EXPECT_EQ(a.commutant().str(), "R_F(K2^perp, K1^perp)");
  EXPECT_EQ(a.commutant().commutant().str(), a.str());
  EXPECT_EQ(a.as_segal().str(), "R_S(U(K1) + iV(K2))");
}

TEST(Kms, TrivialSecondArgument) {
  std::mt19937_64 rng(69);
  const auto th = build_thermal(ground(4), 1.0);
  const auto r = kms_boundary_check(random_vector(rng, 8), Vector::Zero(8), th, grid(-1, 1, 5));
  EXPECT_LT(r.abs_deviation, 1e-15);
  EXPECT_TRUE(r.pass);
}

TEST(Kms, SingleModeRealBump) {
  const auto th = build_thermal(GroundStructure(Vector::Constant(1, 1.0)), 1.0);
  Vector f(2);
  f << 0.8, 0.0;
  const auto r = kms_boundary_check(f, f, th, grid(-3, 3, 13));
  EXPECT_LT(r.rel_deviation, 1e-10);
  EXPECT_LT(r.closed_form_residual, 1e-12);
}

TEST(Kms, ModelBumpPair) {
  ModelParams p;
  p.N = 32;
  p.L = 32;
  const FieldModel m(p);
  const auto th = build_thermal(m.ground(), 1.0);
  BumpSpec b1, b2;
  b1.x_center = {10.0};
  b2.x_center = {14.0};
  b2.t_center = 0.3;
  const auto wf = weyl_generator(m, b1.sample(m)), wg = weyl_generator(m, b2.sample(m));
  const auto r = kms_boundary_check(wf.label, wg.label, th, grid(-3, 3, 25));
  EXPECT_LT(r.rel_deviation, 1e-8);
  EXPECT_TRUE(r.pass);
}
