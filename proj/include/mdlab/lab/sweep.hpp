#pragma once
// Parameter sweeps: Cartesian product of the configured axes, run on a small thread pool.

#include "mdlab/lab/checks.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace mdlab::lab {

/// Sweep points. Changing N keeps the lattice spacing and the relative base centre fixed.
inline std::vector<LabConfig> sweep_points(const LabConfig& base) {
  const std::vector<int> ns = base.sweep.N.empty() ? std::vector<int>{base.N} : base.sweep.N;
  const std::vector<double> betas = base.sweep.beta.empty() ? std::vector<double>{base.beta} : base.sweep.beta;
  const std::vector<double> hws =
      base.sweep.halfwidth.empty() ? std::vector<double>{base.base_halfwidth} : base.sweep.halfwidth;
  std::vector<LabConfig> out;
  for (int n : ns)
    for (double b : betas)
      for (double hw : hws) {
        LabConfig c = base;
        c.sweep = {};
        const double scale = static_cast<double>(n) / base.N;
        c.N = n;
        c.L = base.L * scale;
        for (auto& x : c.base_center) x *= scale;
        c.beta = b;
        c.base_halfwidth = hw;
        validate(c);
        out.push_back(c);
      }
  return out;
}

inline unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MDLAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs every check on every sweep point. Reports come back in (point, check) order.
inline std::vector<CheckReport> run_sweep(const LabConfig& base, const std::vector<std::string>& names) {
  const auto points = sweep_points(base);
  for (const auto& n : names) {
    const auto all = check_names();
    if (std::find(all.begin(), all.end(), n) == all.end()) run_check(n, base);  // throws with the valid list
  }
  const std::size_t jobs = points.size() * names.size();
  std::vector<CheckReport> out(jobs);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) out[i] = run_check(names[i % names.size()], points[i / names.size()]);
  };
  std::vector<std::thread> pool;
  const unsigned workers = worker_count(jobs);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

struct CheckSummary {
  std::string check;
  int runs = 0;
  int passes = 0;
  std::vector<std::pair<std::string, double>> worst;  // max over runs, per metric
};

struct MetricTrend {
  std::string check;
  std::string axis;
  std::string metric;
  std::vector<double> x;
  std::vector<double> worst;  // max over the other axes at each x
  bool nondecreasing = true;
};

struct SweepSummary {
  int runs = 0;
  int passes = 0;
  std::vector<CheckSummary> checks;
  std::vector<MetricTrend> trends;
};

inline SweepSummary summarize(const std::vector<CheckReport>& reports) {
  SweepSummary s;
  std::map<std::string, std::size_t> index;
  for (const auto& r : reports) {
    ++s.runs;
    s.passes += r.pass ? 1 : 0;
    auto [it, fresh] = index.emplace(r.check, s.checks.size());
    if (fresh) s.checks.push_back({r.check, 0, 0, {}});
    auto& c = s.checks[it->second];
    ++c.runs;
    c.passes += r.pass ? 1 : 0;
    for (const auto& [k, v] : r.metrics) {
      auto w = std::find_if(c.worst.begin(), c.worst.end(), [&](const auto& e) { return e.first == k; });
      if (w == c.worst.end())
        c.worst.emplace_back(k, v);
      else
        w->second = std::max(w->second, v);
    }
  }
  for (const std::string axis : {"N", "beta", "halfwidth"}) {
    for (const auto& c : s.checks) {
      for (const auto& [metric, unused] : c.worst) {
        std::map<double, double> by_x;
        for (const auto& r : reports) {
          if (r.check != c.check) continue;
          const double x = r.params.at(axis).get<double>();
          double v = -std::numeric_limits<double>::infinity();
          for (const auto& [k, val] : r.metrics)
            if (k == metric) v = val;
          auto [it, fresh] = by_x.emplace(x, v);
          if (!fresh) it->second = std::max(it->second, v);
        }
        if (by_x.size() < 2) continue;
        MetricTrend t{c.check, axis, metric, {}, {}, true};
        for (const auto& [x, y] : by_x) {
          if (!t.worst.empty() && y < t.worst.back()) t.nondecreasing = false;
          t.x.push_back(x);
          t.worst.push_back(y);
        }
        s.trends.push_back(std::move(t));
      }
    }
  }
  return s;
}

inline Json to_json(const SweepSummary& s) {
  Json j;
  j["schema"] = kReportSchema;
  j["kind"] = "summary";
  j["runs"] = s.runs;
  j["passes"] = s.passes;
  j["checks"] = Json::array();
  for (const auto& c : s.checks) {
    Json w = Json::object();
    for (const auto& [k, v] : c.worst) w[k] = v;
    j["checks"].push_back({{"check", c.check}, {"runs", c.runs}, {"passes", c.passes}, {"worst", w}});
  }
  j["trends"] = Json::array();
  for (const auto& t : s.trends)
    j["trends"].push_back({{"check", t.check},
                           {"axis", t.axis},
                           {"metric", t.metric},
                           {"x", t.x},
                           {"worst", t.worst},
                           {"nondecreasing", t.nondecreasing}});
  return j;
}

}  // namespace mdlab::lab
