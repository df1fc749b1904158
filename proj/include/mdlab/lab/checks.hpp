#pragma once
// Named verification checks. Each maps onto one module operation and emits one report.

#include "mdlab/lab/report.hpp"
#include "mdlab/weyl.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <random>

namespace mdlab::lab {

namespace detail {

inline std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

/// Per-check generator: the config seed mixed with the check name.
inline std::mt19937_64 named_rng(std::uint64_t seed, const std::string& name) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(name_hash(name)), static_cast<std::uint32_t>(name_hash(name) >> 32)};
  return std::mt19937_64(seq);
}

inline Matrix gaussian_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = g(rng);
  return m;
}

inline Vector gaussian_vector(std::mt19937_64& rng, Index n) { return gaussian_matrix(rng, n, 1).col(0); }

inline CVector gaussian_cvector(std::mt19937_64& rng, Index n) { return complexify(gaussian_vector(rng, 2 * n)); }

inline RealSubspace random_subspace_of(std::mt19937_64& rng, const RealSubspace& host, Index rank) {
  if (rank == 0) return RealSubspace::zero(host.ambient_dim());
  return orthonormalize(Matrix(host.frame() * gaussian_matrix(rng, host.rank(), rank)));
}

inline Index uniform_index(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline std::vector<double> linear_grid(double lo, double hi, int count) {
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) t[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return t;
}

inline double rank_gap(const SubspaceComparison& c) { return static_cast<double>(std::abs(c.lhs_rank - c.rhs_rank)); }

inline Vector periodic_gaussian(const FieldModel& m, double center, double width) {
  Vector f(m.sites());
  const double box = m.params().L;
  for (Index j = 0; j < m.sites(); ++j) {
    double dx = m.positions()(j, 0) - center;
    dx -= box * std::round(dx / box);
    f[j] = std::exp(-dx * dx / (2 * width * width));
  }
  return f;
}

inline BumpSpec bump_at(const LabConfig& c, double t_center, double x_fraction, double t_width) {
  BumpSpec b;
  b.t_center = t_center;
  b.t_width = t_width;
  b.x_center.assign(static_cast<std::size_t>(c.d), x_fraction * c.L);
  b.x_width = std::max(2.0, c.L / 8);
  return b;
}

}  // namespace detail

using CheckFn = std::function<void(const LabConfig&, std::mt19937_64&, CheckReport&)>;

namespace checks {

inline void subspace_axioms(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const Index dim = 2 * c.N, common = std::max<Index>(1, c.N / 4);
  const RealSubspace whole = RealSubspace::whole(dim);
  const RealSubspace shared = detail::random_subspace_of(rng, whole, common);
  const RealSubspace a = sum_closure(shared, detail::random_subspace_of(rng, whole, c.N / 2));
  const RealSubspace b = sum_closure(shared, detail::random_subspace_of(rng, whole, c.N / 3));
  const double tol = c.tol_eq;
  const RealSubspace ap = orthocomplement(a), bp = orthocomplement(b);
  const RealSubspace meet = intersect(a, b, tol), join = sum_closure(a, b);
  r.add("double_complement_angle", compare_subspaces(orthocomplement(ap), a, tol).max_angle);
  r.add("join_complement_angle", compare_subspaces(orthocomplement(join), intersect(ap, bp, tol), tol).max_angle);
  r.add("meet_complement_angle", compare_subspaces(orthocomplement(meet), sum_closure(ap, bp), tol).max_angle);
  r.add("meet_rank", static_cast<double>(meet.rank()));
  r.add("dimension_formula_defect",
        static_cast<double>(std::abs(join.rank() + meet.rank() - a.rank() - b.rank())));
  const Matrix j = complex_structure(c.N);
  r.add("complex_structure_defect", (j * j + Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff());
  r.add("orthonormality_defect", std::max({join.orthonormality_defect(), meet.orthonormality_defect()}));
  r.pass = r.metric("double_complement_angle") < tol && r.metric("join_complement_angle") < tol &&
           r.metric("meet_complement_angle") < tol && r.metric("meet_rank") == static_cast<double>(common) &&
           r.metric("dimension_formula_defect") == 0.0 && r.metric("complex_structure_defect") < tol &&
           r.metric("orthonormality_defect") < tol;
}

inline void bounded_inverse(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const Index dim = 2 * c.N;
  Matrix g = detail::gaussian_matrix(rng, dim, dim);
  const RealLinearOperator op(Matrix(Matrix::Identity(dim, dim) + 0.5 * g / RealLinearOperator(g).spectral_norm()));
  const RealSubspace v = detail::random_subspace_of(rng, RealSubspace::whole(dim), c.N / 2 + 1);
  const auto random_case = check_bounded_inverse_identity(op, v, c.tol_eq);

  const FieldModel m(c.model_params());
  const DualityContext ctx = model_context(m, c.beta, c.tolerances());
  const auto a = operator_A(ctx);
  const RealSubspace k1 = detail::random_subspace_of(rng, ctx.factor(), c.N / 2);
  const RealSubspace first_copy = orthonormalize(embed_doubled(k1.frame(), Matrix::Zero(2 * c.N, k1.rank())));
  const auto a_case = check_bounded_inverse_identity(a.a, first_copy, c.tol_eq);
  r.add("random_operator_angle", random_case.deviation);
  r.add("random_operator_condition", random_case.condition);
  r.add("operator_a_angle", a_case.deviation);
  r.add("operator_a_condition", a_case.condition);
  r.pass = random_case.pass && a_case.pass;
}

inline void purification(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const FieldModel m(c.model_params());
  const auto th = build_thermal(m.ground(), c.beta);
  const Vector& w = m.dispersion();
  const Vector& s = th.sinh_weights();
  const Vector& ch = th.cosh_weights();
  double pyth = 0.0, ratio = 0.0;
  for (Index k = 0; k < w.size(); ++k) {
    pyth = std::max(pyth, std::abs(ch[k] * ch[k] - s[k] * s[k] - 1.0));
    const double expected = std::exp(-0.5 * c.beta * w[k]);
    ratio = std::max(ratio, std::abs(s[k] / ch[k] - expected) / expected);
  }
  double norm_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const CVector u = detail::gaussian_cvector(rng, m.sites());
    double weighted = 0.0;
    for (Index k = 0; k < u.size(); ++k) weighted += std::norm(u[k]) / std::tanh(0.5 * c.beta * w[k]);
    norm_rel = std::max(norm_rel, std::abs(k_beta(th, u).squaredNorm() - weighted) / weighted);
  }
  r.add("cosh_sinh_identity", pyth);
  r.add("weight_ratio_rel_error", ratio);
  r.add("coth_norm_rel_error", norm_rel);
  r.pass = pyth < c.tol_eq && ratio < c.tol_eq && norm_rel < c.tol_eq;
}

inline void one_particle_kms(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const FieldModel m(c.model_params());
  const auto th = build_thermal(m.ground(), c.beta);
  const auto grid = detail::linear_grid(-2.0, 2.0, 17);
  double sym = 0.0, rel = 0.0, literal = 0.0;
  for (int i = 0; i < 100; ++i) {
    const CVector u = detail::gaussian_cvector(rng, m.sites()), v = detail::gaussian_cvector(rng, m.sites());
    sym = std::max(sym, verify_symplectic_preservation(th, u, v, c.tol_eq).deviation);
    if (i < 20) {
      const auto k = verify_one_particle_kms(th, u, v, grid, c.tol_eq);
      rel = std::max(rel, k.rel_deviation);
      literal = std::max(literal, k.literal_residual);
    }
  }
  r.add("symplectic_deviation", sym);
  r.add("kms_rel_deviation", rel);
  r.add("literal_form_residual", literal);
  r.pass = sym < c.tol_eq && rel < c.tol_eq;
}

inline void prop_orthogonals(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const FieldModel m(c.model_params());
  std::uniform_real_distribution<double> log_beta(std::log(c.beta / 4), std::log(c.beta * 4));
  double angle_u = 0.0, angle_v = 0.0, rank_gaps = 0.0, a_excess = -1.0, a_residual = 0.0;
  bool all = true;
  for (int i = 0; i < 20; ++i) {
    const DualityContext ctx = model_context(m, std::exp(log_beta(rng)), c.tolerances());
    const auto k1 = detail::random_subspace_of(rng, ctx.factor(), detail::uniform_index(rng, 0, c.N));
    const auto k2 = detail::random_subspace_of(rng, ctx.factor(), detail::uniform_index(rng, 0, c.N));
    const auto ru = orthocomplement_U(ctx, k1), rv = orthocomplement_V(ctx, k2);
    angle_u = std::max(angle_u, ru.max_angle);
    angle_v = std::max(angle_v, rv.max_angle);
    rank_gaps += std::abs(ru.lhs_rank - ru.rhs_rank) + std::abs(rv.lhs_rank - rv.rhs_rank);
    const auto a = operator_A(ctx);
    a_excess = std::max(a_excess, a.norm - a.bound);
    a_residual = std::max(a_residual, a.inverse_residual);
    all = all && ru.pass && rv.pass;
  }
  const auto a = operator_A(model_context(m, c.beta, c.tolerances()));
  r.add("u_complement_angle", angle_u);
  r.add("v_complement_angle", angle_v);
  r.add("rank_mismatch", rank_gaps);
  r.add("operator_a_norm", a.norm);
  r.add("operator_a_bound", a.bound);
  r.add("operator_a_bound_excess", a_excess);
  r.add("operator_a_inverse_residual", a_residual);
  r.pass = all && rank_gaps == 0.0 && a_excess <= 1e-12 && a_residual < c.tol_eq;
}

inline void generic_position(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const FieldModel m(c.model_params());
  const DualityContext ctx = model_context(m, c.beta, c.tolerances());
  double failures = 0.0, reduction_failures = 0.0, max_meet = 0.0, overlapping = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto k1 = detail::random_subspace_of(rng, ctx.factor(), detail::uniform_index(rng, 1, c.N));
    // Every fourth instance shares a direction with K1 so that K1 ^ K2 is nontrivial.
    RealSubspace k2 = detail::random_subspace_of(rng, ctx.factor(), detail::uniform_index(rng, 0, c.N - 1));
    if (i % 4 == 0) k2 = sum_closure(k2, detail::random_subspace_of(rng, k1, 1));
    if (!intersect(k1, k2, c.tol_eq).is_zero()) overlapping += 1.0;
    const auto g = generic_position_report(ctx, k1, k2);
    const auto red = reduce_to_generic_position(ctx, k1, k2);
    max_meet = std::max(max_meet, static_cast<double>(g.dim_u_and_v));
    if (!g.pass || g.dim_uperp_and_vperp != g.expected_uperp_and_vperp) failures += 1.0;
    if (!red.pass) reduction_failures += 1.0;
  }
  r.add("criteria_failures", failures);
  r.add("reduction_failures", reduction_failures);
  r.add("max_dim_u_and_v", max_meet);
  r.add("instances_with_overlapping_factors", overlapping);
  r.pass = failures == 0.0 && reduction_failures == 0.0 && max_meet == 0.0 && overlapping > 0.0;
}

inline void nongeneric_counterexample_check(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const FieldModel m(c.model_params());
  const DualityContext ctx = model_context(m, c.beta, c.tolerances());
  const Index rank = std::max<Index>(1, c.N / 4);
  const auto k1 = detail::random_subspace_of(rng, ctx.factor(), rank);
  const auto k2 = detail::random_subspace_of(rng, ctx.factor(), rank);
  const Vector w = ctx.factor().frame() * detail::gaussian_vector(rng, ctx.factor().rank());
  const auto cx = nongeneric_counterexample(ctx, k1, k2, w / w.norm());
  r.add("witness_distance", cx.witness_distance);
  r.add("residual", cx.residual);
  r.add("sum_rank", static_cast<double>(cx.sum_rank));
  r.pass = cx.residual > 1e-6;
}

inline void modular_data_check(const LabConfig& c, std::mt19937_64&, CheckReport& r) {
  const FieldModel m(c.model_params());
  const auto md = modular_data(model_context(m, c.beta, c.tolerances()));
  r.add("delta_rel_error", md.delta_rel_error);
  r.add("j_rel_error", md.j_rel_error);
  r.add("j_involution", md.j_involution);
  r.add("j_antilinear", md.j_antilinear);
  r.add("delta_linear", md.delta_linear);
  r.add("generator_residual", md.generator_residual);
  r.add("j_image_angle", md.j_image_angle);
  r.add("condition", md.condition);
  r.pass = md.pass;
}

inline void propagator_identities(const LabConfig& c, std::mt19937_64&, CheckReport& r) {
  if (c.d != 1) throw Error("propagator-identities runs on d = 1 grids");
  const FieldModel m(c.model_params());
  const Index z = m.time_zero();
  double value = 0.0, deriv = 0.0;
  for (double tc : {-0.6, 0.25}) {
    const auto h = detail::bump_at(c, tc, 0.5, 1.5).sample(m);
    const auto e0 = propagate_at(m, h, 0.0);
    value = std::max(value, (e0.value - delta1(m, k_infty(m, h.antisymmetric_part()))).cwiseAbs().maxCoeff());
    deriv = std::max(deriv, (-e0.dt - delta0(m, k_infty(m, h.symmetric_part()))).cwiseAbs().maxCoeff());
  }
  double ep = 0.0, pe = 0.0;
  for (double tc : {-0.8, 0.9}) {
    const auto g = detail::bump_at(c, tc, 0.4, 3.0).sample(m);
    ep = std::max(ep, causal_propagator(m, apply_kg(m, g)).values.cwiseAbs().maxCoeff());
    pe = std::max(pe, kg_residual(m, causal_propagator(m, g)));
  }
  const Vector f = detail::periodic_gaussian(m, 0.4 * c.L, 1.5), g = 0.5 * detail::periodic_gaussian(m, 0.6 * c.L, 2.0);
  const auto e1 = causal_propagator(m, source_from_initial_data(m, f, g, SmoothStep{1.5}));
  const auto e2 = causal_propagator(m, source_from_initial_data(m, f, g, SmoothStep{2.5}));
  const double roundtrip = std::max((e1.values.row(z).transpose() - f).cwiseAbs().maxCoeff(),
                                    (e1.dt.row(z).transpose() - g).cwiseAbs().maxCoeff());
  const double cutoff = (e1.values - e2.values).cwiseAbs().maxCoeff();
  r.add("initial_value_residual", value);
  r.add("initial_momentum_residual", deriv);
  r.add("propagator_after_kg", ep);
  r.add("kg_after_propagator", pe);
  r.add("source_roundtrip", roundtrip);
  r.add("cutoff_dependence", cutoff);
  r.pass = value < c.tol_eq && deriv < c.tol_eq && ep < c.tol_eq && pe < c.tol_eq && roundtrip < c.tol_eq &&
           cutoff < c.tol_eq;
}

inline void araki_duality(const LabConfig& c, std::mt19937_64&, CheckReport& r) {
  const FieldModel m(c.model_params());
  const Region region = Region::box(m, c.base_center, c.base_halfwidth);
  const auto a = araki_duality_check(m, region.base, c.tol_eq);
  r.add("mask_size", static_cast<double>(a.mask_size));
  r.add("real_part_angle", a.real_part.max_angle);
  r.add("imaginary_part_angle", a.imaginary_part.max_angle);
  r.add("rank_mismatch", detail::rank_gap(a.real_part) + detail::rank_gap(a.imaginary_part));
  r.add("cross_gram", a.cross_gram);
  r.pass = a.pass;
}

inline void haag_duality(const LabConfig& c, std::mt19937_64&, CheckReport& r) {
  const FieldModel m(c.model_params());
  const DualityContext ctx = model_context(m, c.beta, c.tolerances());
  const auto h = haag_duality_check(ctx, m, Region::box(m, c.base_center, c.base_halfwidth));
  r.add("region_size", static_cast<double>(h.region_size));
  r.add("u_complement_angle", h.u_complement.max_angle);
  r.add("v_complement_angle", h.v_complement.max_angle);
  r.add("duality_angle", h.duality.max_angle);
  r.add("rank_mismatch", static_cast<double>(std::abs(h.u_complement.lhs_rank - h.u_complement.rhs_rank) +
                                             std::abs(h.v_complement.lhs_rank - h.v_complement.rhs_rank)) +
                             detail::rank_gap(h.duality));
  r.add("sigma_residual", h.sigma_residual);
  r.pass = h.pass;
}

inline void standardness(const LabConfig& c, std::mt19937_64&, CheckReport& r) {
  const FieldModel m(c.model_params());
  const DualityContext ctx = model_context(m, c.beta, c.tolerances());
  const auto g = standardness_report_global(ctx);
  const auto l = standardness_report(ctx, m, Region::box(m, c.base_center, c.base_halfwidth));
  r.add("global_separating_dim", static_cast<double>(g.separating_dim));
  r.add("global_cyclic_deficit", static_cast<double>(g.cyclic_deficit));
  r.add("local_separating_dim", static_cast<double>(l.separating_dim));
  r.add("local_cyclic_deficit", static_cast<double>(l.cyclic_deficit));
  r.add("local_expected_deficit", static_cast<double>(l.expected_deficit));
  r.pass = g.pass && l.pass;
}

inline void weyl_relations(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const FieldModel m(c.model_params());
  const GroundStructure& g = m.ground();
  const Index n = g.n_modes();
  std::uniform_real_distribution<double> ph(-3.0, 3.0);
  auto word = [&] { return WeylWord{std::polar(1.0, ph(rng)), 0.5 * detail::gaussian_vector(rng, 2 * n)}; };
  auto gap = [](const WeylWord& a, const WeylWord& b) {
    return std::max(std::abs(a.phase - b.phase), (a.label - b.label).cwiseAbs().maxCoeff());
  };
  double assoc = 0.0, star = 0.0, unit = 0.0, segal = 0.0, segal_product = 0.0, dynamics = 0.0, split = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto a = word(), b = word(), d = word();
    assoc = std::max(assoc, gap(weyl_multiply(weyl_multiply(a, b), d), weyl_multiply(a, weyl_multiply(b, d))));
    star = std::max({star, gap(weyl_star(weyl_multiply(a, b)), weyl_multiply(weyl_star(b), weyl_star(a))),
                     gap(weyl_star(weyl_star(a)), a)});
    const auto inv = weyl_multiply(WeylWord::generator(a.label), WeylWord::generator(-a.label));
    unit = std::max({unit, gap(inv, WeylWord::identity(2 * n)), gap(weyl_multiply(a, WeylWord::identity(2 * n)), a)});
    segal = std::max(segal, gap(to_weyl(to_segal(a, g.factor_subspace())), a));
    split = std::max(split, split_real_form(a.label, g.factor_subspace()).residual);
    segal_product = std::max(segal_product, gap(to_weyl(segal_multiply(to_segal(a, g.factor_subspace()),
                                                                       to_segal(b, g.factor_subspace()))),
                                                 weyl_multiply(a, b)));
    dynamics = std::max(dynamics, gap(free_dynamics(free_dynamics(a, 0.7, g), -1.9, g), free_dynamics(a, -1.2, g)));
  }
  r.add("associativity", assoc);
  r.add("star_antihomomorphism", star);
  r.add("unit_and_inverse", unit);
  r.add("segal_round_trip", segal);
  r.add("segal_split_residual", split);
  r.add("segal_product", segal_product);
  r.add("dynamics_group_law", dynamics);
  const double worst = std::max({assoc, star, unit, segal, split, segal_product, dynamics});
  r.pass = worst < std::min(c.tol_eq, 1e-10);
}

inline void weyl_kms(const LabConfig& c, std::mt19937_64& rng, CheckReport& r) {
  const FieldModel m(c.model_params());
  const auto th = build_thermal(m.ground(), c.beta);
  const auto grid = detail::linear_grid(-3.0, 3.0, 25);
  const auto f = weyl_generator(m, detail::bump_at(c, 0.0, 0.3, 1.5).sample(m));
  const auto g = weyl_generator(m, detail::bump_at(c, 0.3, 0.45, 1.5).sample(m));
  const auto bumps = kms_boundary_check(f.label, g.label, th, grid, c.tol_eq);
  const Index n = m.sites();
  const auto random = kms_boundary_check(0.3 * detail::gaussian_vector(rng, 2 * n), 0.3 * detail::gaussian_vector(rng, 2 * n),
                                         th, grid, c.tol_eq);
  r.add("bump_rel_deviation", bumps.rel_deviation);
  r.add("bump_closed_form_residual", bumps.closed_form_residual);
  r.add("random_rel_deviation", random.rel_deviation);
  r.add("random_closed_form_residual", random.closed_form_residual);
  r.pass = bumps.pass && random.pass;
}

}  // namespace checks

inline const std::vector<std::pair<std::string, CheckFn>>& check_registry() {
  static const std::vector<std::pair<std::string, CheckFn>> reg = {
      {"subspace-axioms", checks::subspace_axioms},
      {"bounded-inverse", checks::bounded_inverse},
      {"purification", checks::purification},
      {"one-particle-kms", checks::one_particle_kms},
      {"prop-orthogonals", checks::prop_orthogonals},
      {"generic-position", checks::generic_position},
      {"nongeneric-counterexample", checks::nongeneric_counterexample_check},
      {"modular-data", checks::modular_data_check},
      {"propagator-identities", checks::propagator_identities},
      {"araki-duality", checks::araki_duality},
      {"haag-duality", checks::haag_duality},
      {"standardness", checks::standardness},
      {"weyl-relations", checks::weyl_relations},
      {"weyl-kms", checks::weyl_kms},
  };
  return reg;
}

inline std::vector<std::string> check_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : check_registry()) out.push_back(name);
  return out;
}

inline Json report_params(const LabConfig& c) {
  return Json{{"d", c.d},       {"N", c.N},       {"L", c.L},
              {"mass", c.mass}, {"M", c.M},       {"T", c.T},
              {"beta", c.beta}, {"halfwidth", c.base_halfwidth}, {"base_center", c.base_center}};
}

/// Runs one named check. Numerical failures inside the check become a failing report.
inline CheckReport run_check(const std::string& name, const LabConfig& config) {
  const auto& reg = check_registry();
  const auto it = std::find_if(reg.begin(), reg.end(), [&](const auto& e) { return e.first == name; });
  if (it == reg.end()) {
    std::string valid;
    for (const auto& n : check_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw Error("unknown check '" + name + "'; valid checks: " + valid);
  }
  validate(config);
  CheckReport r;
  r.check = name;
  r.params = report_params(config);
  r.tolerance = config.tol_eq;
  r.seed = config.rng_seed;
  auto rng = detail::named_rng(config.rng_seed, name);
  const auto start = std::chrono::steady_clock::now();
  try {
    it->second(config, rng, r);
  } catch (const std::exception& e) {
    r.pass = false;
    r.error = e.what();
  }
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace mdlab::lab
