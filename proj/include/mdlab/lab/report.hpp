#pragma once
// Check reports: JSON lines (primary record), CSV and plot-series exports.

#include "mdlab/lab/config.hpp"

#include <cstdio>
#include <mutex>
#include <utility>

namespace mdlab::lab {

inline constexpr const char* kReportSchema = "mdlab.report/1";

struct CheckReport {
  std::string check;
  Json params = Json::object();
  std::vector<std::pair<std::string, double>> metrics;
  double tolerance = 0.0;
  bool pass = false;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // non-empty when the check threw

  void add(const std::string& name, double value) { metrics.emplace_back(name, value); }

  double metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    throw Error("report '" + check + "' has no metric '" + name + "'");
  }
};

inline Json to_json(const CheckReport& r) {
  Json m = Json::object();
  for (const auto& [k, v] : r.metrics) m[k] = v;
  Json j;
  j["schema"] = kReportSchema;
  j["check"] = r.check;
  j["params"] = r.params;
  j["metrics"] = m;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["wall_ms"] = r.wall_ms;
  j["seed"] = r.seed;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline CheckReport report_from_json(const Json& j) {
  if (j.value("schema", "") != kReportSchema) throw Error("report line has an unsupported schema");
  CheckReport r;
  r.check = j.at("check").get<std::string>();
  r.params = j.at("params");
  for (const auto& [k, v] : j.at("metrics").items()) r.metrics.emplace_back(k, v.get<double>());
  r.tolerance = j.at("tolerance").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.wall_ms = j.at("wall_ms").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.error = j.value("error", "");
  return r;
}

inline Json report_header() { return Json{{"schema", kReportSchema}, {"kind", "header"}}; }

/// Serialized single writer; each report becomes one flushed line.
class ReportWriter {
 public:
  explicit ReportWriter(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw Error("cannot write report file '" + path + "'");
    out_ << report_header().dump() << '\n';
    out_.flush();
  }

  void append(const CheckReport& r) {
    std::lock_guard<std::mutex> lock(mu_);
    out_ << to_json(r).dump() << '\n';
    out_.flush();
    if (!out_) throw Error("report write failed");
  }

 private:
  std::ofstream out_;
  std::mutex mu_;
};

inline void write_jsonl(const std::string& path, const std::vector<CheckReport>& reports) {
  ReportWriter w(path);
  for (const auto& r : reports) w.append(r);
}

inline std::vector<CheckReport> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report file '" + path + "'");
  std::vector<CheckReport> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error("report file '" + path + "' has a malformed line");
    if (!header) {
      if (j.value("kind", "") != "header" || j.value("schema", "") != kReportSchema)
        throw Error("report file '" + path + "' lacks the " + std::string(kReportSchema) + " header");
      header = true;
      continue;
    }
    out.push_back(report_from_json(j));
  }
  if (!header) throw Error("report file '" + path + "' is empty");
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string scalar_field(const Json& v) {
  return v.is_number_float() ? format_double(v.get<double>()) : v.dump();
}

// Arrays are space-separated so the field never contains a comma.
inline std::string params_field(const Json& params) {
  std::string s;
  for (const auto& [k, v] : params.items()) {
    if (!s.empty()) s += ';';
    s += k + '=';
    if (v.is_array()) {
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + scalar_field(v[i]);
    } else {
      s += scalar_field(v);
    }
  }
  return s;
}

// Long format: one row per (report, metric). Lossy: errors and wall times are dropped.
inline void write_csv(std::ostream& out, const std::vector<CheckReport>& reports) {
  out << "# " << kReportSchema << '\n';
  out << "run,check,seed,pass,tolerance,params,metric,value\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    for (const auto& [k, v] : r.metrics)
      out << i << ',' << r.check << ',' << r.seed << ',' << (r.pass ? 1 : 0) << ',' << format_double(r.tolerance) << ','
          << params_field(r.params) << ',' << k << ',' << format_double(v) << '\n';
  }
}

inline void write_csv(const std::string& path, const std::vector<CheckReport>& reports) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write csv file '" + path + "'");
  write_csv(out, reports);
}

struct CsvRow {
  std::size_t run = 0;
  std::string check;
  std::string metric;
  double value = 0.0;
};

inline std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != std::string("# ") + kReportSchema) throw Error("csv lacks the schema line");
  std::getline(in, line);
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw Error("csv row has " + std::to_string(f.size()) + " fields");
    rows.push_back({std::stoul(f[0]), f[1], f[6], std::strtod(f[7].c_str(), nullptr)});
  }
  return rows;
}

/// x-y series of each metric against one swept parameter.
inline void write_plot_data(std::ostream& out, const std::vector<CheckReport>& reports, const std::string& axis) {
  out << "check,axis,x,metric,y\n";
  for (const auto& r : reports) {
    if (!r.params.contains(axis)) continue;
    const double x = r.params.at(axis).get<double>();
    for (const auto& [k, v] : r.metrics)
      out << r.check << ',' << axis << ',' << format_double(x) << ',' << k << ',' << format_double(v) << '\n';
  }
}

/// Writes reports as "json-lines" or "csv"; with a plot axis, also writes <path>.plot.csv.
inline void emit_report(const std::vector<CheckReport>& reports, const std::string& format, const std::string& path,
                        const std::string& plot_axis = "") {
  if (format == "json-lines")
    write_jsonl(path, reports);
  else if (format == "csv")
    write_csv(path, reports);
  else
    throw Error("unknown report format '" + format + "' (expected json-lines or csv)");
  if (!plot_axis.empty()) {
    std::ofstream out(path + ".plot.csv", std::ios::trunc);
    if (!out) throw Error("cannot write plot file '" + path + ".plot.csv'");
    write_plot_data(out, reports, plot_axis);
  }
}

}  // namespace mdlab::lab
