#include "mdlab/lab/sweep.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

using namespace mdlab;
using namespace mdlab::lab;

namespace {

const std::string kDefault = std::string(MDLAB_SOURCE_DIR) + "/configs/default.json";

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mdlab_test_" + name);
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

CheckReport synthetic(const std::string& check, double n, double beta, double value) {
  CheckReport r;
  r.check = check;
  r.params = Json{{"N", n}, {"beta", beta}, {"halfwidth", 4.0}};
  r.add("residual", value);
  r.pass = true;
  return r;
}

}  // namespace

TEST(Config, DefaultsFileMatchesStructDefaults) {
  const LabConfig c = load_config(kDefault);
  EXPECT_EQ(c.N, 16);
  EXPECT_EQ(c.M, 481);
  EXPECT_DOUBLE_EQ(c.T, 10.0);
  EXPECT_DOUBLE_EQ(c.beta, 1.0);
  EXPECT_DOUBLE_EQ(c.base_halfwidth, 4.0);
  EXPECT_TRUE(c.sweep.empty());
}

TEST(Config, UnknownKeysAreErrors) {
  Json j = config_to_json(LabConfig{});
  j["model"]["spacing"] = 1.0;
  EXPECT_THROW(config_from_json(j), Error);
  Json top = config_to_json(LabConfig{});
  top["seed"] = 3;
  EXPECT_THROW(config_from_json(top), Error);
}

TEST(Config, InvariantsAreEnforced) {
  auto with = [](const std::string& set) {
    Json j = config_to_json(LabConfig{});
    apply_override(j, set);
    return config_from_json(j);
  };
  EXPECT_THROW(with("model.N=24"), Error);
  EXPECT_THROW(with("region.base_halfwidth=8.5"), Error);
  EXPECT_THROW(with("region.base_halfwidth=0"), Error);
  EXPECT_THROW(with("thermal.beta=0"), Error);
  EXPECT_THROW(with("model.mass=-1"), Error);
  EXPECT_THROW(with("model.time_grid.M=100"), Error);
  EXPECT_THROW(with("model.N=\"sixteen\""), Error);
  EXPECT_NO_THROW(with("region.base_halfwidth=8"));
}

TEST(Config, OverridesUseDottedPaths) {
  const LabConfig c = load_config(kDefault, {"model.N=32", "thermal.beta=2.5", "sweep.beta=[0.5,2]", "region.base_center=3"});
  EXPECT_EQ(c.N, 32);
  EXPECT_DOUBLE_EQ(c.beta, 2.5);
  ASSERT_EQ(c.sweep.beta.size(), 2u);
  ASSERT_EQ(c.base_center.size(), 1u);
  EXPECT_DOUBLE_EQ(c.base_center[0], 3.0);
  EXPECT_THROW(load_config(kDefault, {"model.N"}), Error);
  EXPECT_THROW(load_config(kDefault, {"model..N=4"}), Error);
  EXPECT_THROW(load_config(kDefault, {"model.N.x=4"}), Error);
}

TEST(Config, JsonRoundTrip) {
  LabConfig c;
  c.sweep.N = {16, 32};
  const LabConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back).dump(), config_to_json(c).dump());
}

TEST(RunCheck, UnknownNameListsValidNames) {
  try {
    run_check("no-such-check", LabConfig{});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    for (const auto& n : check_names()) EXPECT_NE(msg.find(n), std::string::npos) << n;
  }
  EXPECT_EQ(check_names().size(), 14u);
}

TEST(RunCheck, InvalidConfigIsAnError) {
  LabConfig c;
  c.N = 12;
  EXPECT_THROW(run_check("purification", c), Error);
}

TEST(RunCheck, ArakiDefaults) {
  const auto r = run_check("araki-duality", load_config(kDefault));
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.metric("real_part_angle"), 1e-8);
  EXPECT_LT(r.metric("imaginary_part_angle"), 1e-8);
  EXPECT_EQ(r.metric("rank_mismatch"), 0.0);
}

TEST(RunCheck, HaagAtSixteenModes) {
  const auto r = run_check("haag-duality", load_config(kDefault, {"model.N=16", "thermal.beta=1"}));
  EXPECT_TRUE(r.pass) << r.error;
  EXPECT_LT(r.metric("duality_angle"), 1e-8);
}

TEST(RunCheck, EveryCheckPassesOnDefaults) {
  const LabConfig c = load_config(kDefault);
  for (const auto& name : check_names()) {
    const auto r = run_check(name, c);
    EXPECT_TRUE(r.pass) << name << " " << r.error;
    EXPECT_FALSE(r.metrics.empty()) << name;
    EXPECT_EQ(r.seed, c.rng_seed);
  }
}

TEST(RunCheck, NumericalFailureBecomesFailingReport) {
  // T = 4 leaves no room for the wider cutoff window used by the propagator check.
  const auto r = run_check("propagator-identities", load_config(kDefault, {"model.time_grid.T=4", "model.time_grid.M=161"}));
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.error.empty());
}

TEST(Determinism, SameSeedSameMetrics) {
  const LabConfig c = load_config(kDefault);
  for (const std::string name : {"subspace-axioms", "generic-position", "one-particle-kms", "weyl-relations"}) {
    const auto a = run_check(name, c), b = run_check(name, c);
    ASSERT_EQ(a.metrics.size(), b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
      EXPECT_EQ(a.metrics[i].first, b.metrics[i].first);
      EXPECT_EQ(a.metrics[i].second, b.metrics[i].second) << name << " " << a.metrics[i].first;
    }
  }
}

TEST(Determinism, SeedChangesRandomInstances) {
  LabConfig a = load_config(kDefault), b = a;
  b.rng_seed = a.rng_seed + 1;
  EXPECT_NE(run_check("nongeneric-counterexample", a).metric("residual"),
            run_check("nongeneric-counterexample", b).metric("residual"));
}

TEST(Sweep, CartesianProductCount) {
  const LabConfig c = load_config(kDefault, {"sweep.N=[32,64]", "sweep.beta=[0.5,2]"});
  const auto points = sweep_points(c);
  ASSERT_EQ(points.size(), 4u);
  EXPECT_EQ(points[0].N, 32);
  EXPECT_DOUBLE_EQ(points[0].L, 32.0);
  EXPECT_DOUBLE_EQ(points[0].base_center[0], 16.0);
  EXPECT_DOUBLE_EQ(points[3].beta, 2.0);
  const auto reports = run_sweep(c, {"purification", "araki-duality"});
  ASSERT_EQ(reports.size(), 8u);
  const auto s = summarize(reports);
  ASSERT_EQ(s.checks.size(), 2u);
  for (const auto& cs : s.checks) EXPECT_EQ(cs.runs, 4);
  EXPECT_EQ(s.passes, 8);
}

TEST(Sweep, EmptyAxesGiveSingleRun) {
  EXPECT_EQ(sweep_points(load_config(kDefault)).size(), 1u);
}

TEST(Sweep, UnknownCheckIsAnError) {
  EXPECT_THROW(run_sweep(load_config(kDefault), {"purification", "bogus"}), Error);
}

TEST(Sweep, IdenticalAcrossThreadCounts) {
  const LabConfig c = load_config(kDefault, {"sweep.beta=[0.5,1,2]"});
  const std::vector<std::string> names{"generic-position", "weyl-kms"};
  setenv("MDLAB_THREADS", "1", 1);
  const auto serial = run_sweep(c, names);
  setenv("MDLAB_THREADS", "4", 1);
  const auto parallel = run_sweep(c, names);
  unsetenv("MDLAB_THREADS");
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].check, parallel[i].check);
    EXPECT_EQ(to_json(serial[i])["metrics"].dump(), to_json(parallel[i])["metrics"].dump());
  }
}

TEST(Summary, WorstMetricAndMonotonicity) {
  const std::vector<CheckReport> reports{synthetic("a", 16, 0.5, 1e-14), synthetic("a", 16, 2.0, 3e-14),
                                         synthetic("a", 32, 0.5, 2e-14), synthetic("a", 64, 0.5, 5e-14),
                                         synthetic("b", 16, 0.5, 4e-13), synthetic("b", 32, 0.5, 1e-13)};
  const auto s = summarize(reports);
  ASSERT_EQ(s.checks.size(), 2u);
  EXPECT_EQ(s.checks[0].worst[0].second, 5e-14);
  EXPECT_EQ(s.checks[1].worst[0].second, 4e-13);
  bool seen_a = false, seen_b = false;
  for (const auto& t : s.trends) {
    if (t.axis != "N") continue;
    if (t.check == "a") {
      seen_a = true;
      EXPECT_EQ(t.worst, (std::vector<double>{3e-14, 2e-14, 5e-14}));
      EXPECT_FALSE(t.nondecreasing);
    } else {
      seen_b = true;
      EXPECT_FALSE(t.nondecreasing);
    }
  }
  EXPECT_TRUE(seen_a && seen_b);
  const auto mono = summarize({synthetic("c", 16, 1, 1.0), synthetic("c", 32, 1, 2.0)});
  ASSERT_EQ(mono.trends.size(), 1u);
  EXPECT_TRUE(mono.trends[0].nondecreasing);
}

TEST(Emit, EmptyListWritesOnlyHeaders) {
  const auto jl = temp_path("empty.jsonl"), csv = temp_path("empty.csv");
  write_jsonl(jl.string(), {});
  write_csv(csv.string(), {});
  EXPECT_EQ(count_lines(jl), 1u);
  EXPECT_EQ(count_lines(csv), 2u);
  EXPECT_TRUE(read_jsonl(jl.string()).empty());
  std::filesystem::remove(jl);
  std::filesystem::remove(csv);
}

TEST(Emit, JsonLinesRoundTrip) {
  const LabConfig c = load_config(kDefault);
  std::vector<CheckReport> reports;
  for (const std::string name : {"purification", "araki-duality", "weyl-relations", "standardness"})
    reports.push_back(run_check(name, c));
  const auto path = temp_path("four.jsonl");
  write_jsonl(path.string(), reports);
  EXPECT_EQ(count_lines(path), 5u);
  const auto back = read_jsonl(path.string());
  ASSERT_EQ(back.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(to_json(back[i]).dump(), to_json(reports[i]).dump());
  std::filesystem::remove(path);
}

TEST(Emit, CsvParseBackIsExact) {
  const LabConfig c = load_config(kDefault, {"region.base_center=[8.25]"});
  std::vector<CheckReport> reports{run_check("modular-data", c), run_check("one-particle-kms", c)};
  std::stringstream ss;
  write_csv(ss, reports);
  const auto rows = read_csv(ss);
  std::size_t expected = 0;
  for (const auto& r : reports) expected += r.metrics.size();
  ASSERT_EQ(rows.size(), expected);
  for (const auto& row : rows) EXPECT_EQ(row.value, reports[row.run].metric(row.metric)) << row.metric;
}

TEST(Emit, CsvParamsNeverSplitColumns) {
  CheckReport r = synthetic("x", 16, 1, 0.5);
  r.params["base_center"] = std::vector<double>{1.5, 2.5};
  std::stringstream ss;
  write_csv(ss, {r});
  EXPECT_EQ(read_csv(ss).size(), 1u);
}

TEST(Emit, UnwritablePathIsAnError) {
  EXPECT_THROW(write_jsonl("/nonexistent-dir/x.jsonl", {}), Error);
  EXPECT_THROW(write_csv("/nonexistent-dir/x.csv", {}), Error);
}

TEST(Emit, PlotSeriesRows) {
  const std::vector<CheckReport> reports{synthetic("a", 16, 1, 1.0), synthetic("a", 32, 1, 2.0)};
  std::stringstream ss;
  write_plot_data(ss, reports, "N");
  EXPECT_EQ(std::count(std::istreambuf_iterator<char>(ss), {}, '\n'), 3);
}

TEST(Emit, EmitReportFormats) {
  const std::vector<CheckReport> reports{synthetic("a", 16, 1, 1.0), synthetic("a", 32, 1, 2.0)};
  const auto jl = temp_path("emit.jsonl"), csv = temp_path("emit.csv");
  emit_report(reports, "json-lines", jl.string());
  emit_report(reports, "csv", csv.string(), "N");
  EXPECT_EQ(count_lines(jl), 3u);
  EXPECT_EQ(count_lines(csv), 4u);
  EXPECT_EQ(count_lines(csv.string() + ".plot.csv"), 3u);
  EXPECT_THROW(emit_report(reports, "xml", jl.string()), Error);
  for (const auto& p : {jl, csv, std::filesystem::path(csv.string() + ".plot.csv")}) std::filesystem::remove(p);
}
