#pragma once
// Lab configuration: a JSON document with a closed key set.

#include "mdlab/subspace.hpp"
#include "mdlab/minkowski.hpp"

#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace mdlab::lab {

using Json = nlohmann::ordered_json;

struct SweepAxes {
  std::vector<int> N;
  std::vector<double> beta;
  std::vector<double> halfwidth;

  bool empty() const { return N.empty() && beta.empty() && halfwidth.empty(); }
};

struct LabConfig {
  int d = 1;
  int N = 16;
  double L = 16.0;
  double mass = 1.0;
  int M = 481;
  double T = 10.0;
  double beta = 1.0;
  std::vector<double> base_center{8.0};
  double base_halfwidth = 4.0;
  double tol_rank = 1e-10;
  double tol_eq = 1e-8;
  std::uint64_t rng_seed = 20240611;
  SweepAxes sweep;

  ModelParams model_params() const {
    ModelParams p;
    p.d = d;
    p.N = N;
    p.L = L;
    p.mass = mass;
    p.M = M;
    p.T = T;
    return p;
  }

  Tolerances tolerances() const { return {tol_rank, tol_eq, tol_eq}; }
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error("config: '" + where + "' must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!keys.count(k)) throw Error("config: unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

template <class T>
void read(const Json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error("config: '" + where + "." + key + "' has the wrong type");
  }
}

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace detail

inline void validate(const LabConfig& c) {
  if (c.d < 1 || c.d > 3) throw Error("config: model.d must be 1, 2 or 3");
  if (!detail::is_power_of_two(c.N)) throw Error("config: model.N must be a power of two");
  if (!(c.L > 0.0)) throw Error("config: model.L must be positive");
  if (!(c.mass > 0.0)) throw Error("config: model.mass must be positive");
  if (c.M < 3 || c.M % 2 == 0) throw Error("config: model.time_grid.M must be odd and at least 3");
  if (!(c.T > 0.0)) throw Error("config: model.time_grid.T must be positive");
  if (!(c.beta > 0.0)) throw Error("config: thermal.beta must be positive");
  if (static_cast<int>(c.base_center.size()) != c.d) throw Error("config: region.base_center needs d coordinates");
  if (!(c.base_halfwidth > 0.0) || c.base_halfwidth > c.L / 2)
    throw Error("config: region.base_halfwidth must lie in (0, L/2]");
  if (!(c.tol_rank > 0.0) || !(c.tol_eq > 0.0)) throw Error("config: tolerances must be positive");
  for (int n : c.sweep.N)
    if (!detail::is_power_of_two(n)) throw Error("config: sweep.N entries must be powers of two");
  for (double b : c.sweep.beta)
    if (!(b > 0.0)) throw Error("config: sweep.beta entries must be positive");
  for (double h : c.sweep.halfwidth)
    if (!(h > 0.0)) throw Error("config: sweep.halfwidth entries must be positive");
}

inline LabConfig config_from_json(const Json& j) {
  using detail::read;
  using detail::reject_unknown;
  reject_unknown(j, "", {"model", "thermal", "region", "tolerances", "rng_seed", "sweep"});
  LabConfig c;
  if (j.contains("model")) {
    const Json& m = j.at("model");
    reject_unknown(m, "model", {"d", "N", "L", "mass", "time_grid"});
    read(m, "d", c.d, "model");
    read(m, "N", c.N, "model");
    read(m, "L", c.L, "model");
    read(m, "mass", c.mass, "model");
    if (m.contains("time_grid")) {
      const Json& t = m.at("time_grid");
      reject_unknown(t, "model.time_grid", {"M", "T"});
      read(t, "M", c.M, "model.time_grid");
      read(t, "T", c.T, "model.time_grid");
    }
  }
  if (j.contains("thermal")) {
    reject_unknown(j.at("thermal"), "thermal", {"beta"});
    read(j.at("thermal"), "beta", c.beta, "thermal");
  }
  if (j.contains("region")) {
    const Json& r = j.at("region");
    reject_unknown(r, "region", {"base_center", "base_halfwidth"});
    if (r.contains("base_center") && r.at("base_center").is_number())
      c.base_center = {r.at("base_center").get<double>()};
    else
      read(r, "base_center", c.base_center, "region");
    read(r, "base_halfwidth", c.base_halfwidth, "region");
  }
  if (j.contains("tolerances")) {
    reject_unknown(j.at("tolerances"), "tolerances", {"tol_rank", "tol_eq"});
    read(j.at("tolerances"), "tol_rank", c.tol_rank, "tolerances");
    read(j.at("tolerances"), "tol_eq", c.tol_eq, "tolerances");
  }
  detail::read(j, "rng_seed", c.rng_seed, "");
  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    reject_unknown(s, "sweep", {"N", "beta", "halfwidth"});
    read(s, "N", c.sweep.N, "sweep");
    read(s, "beta", c.sweep.beta, "sweep");
    read(s, "halfwidth", c.sweep.halfwidth, "sweep");
  }
  validate(c);
  return c;
}

inline Json config_to_json(const LabConfig& c) {
  Json j;
  j["model"] = {{"d", c.d}, {"N", c.N}, {"L", c.L}, {"mass", c.mass}, {"time_grid", {{"M", c.M}, {"T", c.T}}}};
  j["thermal"] = {{"beta", c.beta}};
  j["region"] = {{"base_center", c.base_center}, {"base_halfwidth", c.base_halfwidth}};
  j["tolerances"] = {{"tol_rank", c.tol_rank}, {"tol_eq", c.tol_eq}};
  j["rng_seed"] = c.rng_seed;
  if (!c.sweep.empty())
    j["sweep"] = {{"N", c.sweep.N}, {"beta", c.sweep.beta}, {"halfwidth", c.sweep.halfwidth}};
  return j;
}

/// Applies "a.b.c=value"; the value is parsed as JSON and falls back to a string.
inline void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw Error("--set expects key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  Json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw Error("--set: empty path component in '" + path + "'");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    Json& next = (*node)[parts[i]];
    if (next.is_null()) next = Json::object();
    if (!next.is_object()) throw Error("--set: '" + parts[i] + "' is not a section");
    node = &next;
  }
  (*node)[parts.back()] = value;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw Error("config '" + path + "' is not valid JSON: " + e.what());
  }
}

inline LabConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  Json j = read_json_file(path);
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

}  // namespace mdlab::lab
