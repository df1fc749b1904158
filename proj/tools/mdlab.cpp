// mdlab: run verification checks and sweeps, convert report files.

#include "mdlab/lab/sweep.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

using namespace mdlab::lab;

void print_line(const CheckReport& r) {
  std::printf("%-4s %-26s %9.1f ms", r.pass ? "PASS" : "FAIL", r.check.c_str(), r.wall_ms);
  for (const auto& [k, v] : r.metrics) std::printf("  %s=%.3g", k.c_str(), v);
  if (!r.error.empty()) std::printf("  error=\"%s\"", r.error.c_str());
  std::printf("\n");
}

std::vector<std::string> resolve_checks(const std::string& which) {
  if (which == "all") return check_names();
  std::vector<std::string> out;
  std::stringstream ss(which);
  std::string part;
  while (std::getline(ss, part, ','))
    if (!part.empty()) out.push_back(part);
  return out;
}

int cmd_verify(const std::string& which, const std::string& config, const std::vector<std::string>& sets,
               const std::string& out) {
  const LabConfig cfg = load_config(config, sets);
  const auto names = resolve_checks(which);
  std::optional<ReportWriter> writer;
  if (!out.empty()) writer.emplace(out);
  bool ok = true;
  for (const auto& name : names) {
    const CheckReport r = run_check(name, cfg);
    print_line(r);
    if (writer) writer->append(r);
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

int cmd_sweep(const std::string& which, const std::string& config, const std::vector<std::string>& sets,
              const std::string& out, const std::string& summary_out, const std::string& plot_axis,
              const std::string& plot_out) {
  const LabConfig cfg = load_config(config, sets);
  const auto reports = run_sweep(cfg, resolve_checks(which));
  for (const auto& r : reports) {
    std::printf("[N=%d beta=%g hw=%g] ", r.params.at("N").get<int>(), r.params.at("beta").get<double>(),
                r.params.at("halfwidth").get<double>());
    print_line(r);
  }
  if (!out.empty()) write_jsonl(out, reports);
  const SweepSummary s = summarize(reports);
  std::printf("sweep: %d/%d reports pass\n", s.passes, s.runs);
  for (const auto& c : s.checks) std::printf("  %-26s %d/%d\n", c.check.c_str(), c.passes, c.runs);
  if (!summary_out.empty()) {
    std::ofstream f(summary_out, std::ios::trunc);
    if (!f) throw mdlab::Error("cannot write summary file '" + summary_out + "'");
    f << to_json(s).dump(2) << '\n';
  }
  if (!plot_out.empty()) {
    std::ofstream f(plot_out, std::ios::trunc);
    if (!f) throw mdlab::Error("cannot write plot file '" + plot_out + "'");
    write_plot_data(f, reports, plot_axis);
  }
  return s.passes == s.runs ? 0 : 1;
}

int cmd_report(const std::string& in, const std::string& format, const std::string& out) {
  const auto reports = read_jsonl(in);
  if (!out.empty()) {
    emit_report(reports, format, out);
  } else if (format == "csv") {
    write_csv(std::cout, reports);
  } else {
    std::cout << report_header().dump() << '\n';
    for (const auto& r : reports) std::cout << to_json(r).dump() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdlab: one-particle thermal duality verification lab"};
  app.require_subcommand(1);

  std::string which, config, out, in, format = "csv", summary_out, plot_axis = "N", plot_out;
  std::vector<std::string> sets;

  auto* verify = app.add_subcommand("verify", "Run one check, a comma-separated list, or 'all'");
  verify->add_option("check", which, "Check name or 'all'")->required();
  verify->add_option("--config", config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  verify->add_option("--set", sets, "Override a config key, e.g. model.N=32");
  verify->add_option("--out", out, "Write reports as JSON lines");

  auto* sweep = app.add_subcommand("sweep", "Run checks over the Cartesian product of the sweep axes");
  std::string sweep_checks = "all";
  sweep->add_option("--config", config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--set", sets, "Override a config key");
  sweep->add_option("--checks", sweep_checks, "Comma-separated check names or 'all'");
  sweep->add_option("--out", out, "Write reports as JSON lines");
  sweep->add_option("--summary", summary_out, "Write the aggregated summary as JSON");
  sweep->add_option("--plot-axis", plot_axis, "Swept parameter for plot data")->check(CLI::IsMember({"N", "beta", "halfwidth"}));
  sweep->add_option("--plot-out", plot_out, "Write metric-vs-parameter series as CSV");

  auto* report = app.add_subcommand("report", "Convert a JSON-lines report file");
  report->add_option("--in", in, "Input JSON-lines file")->required()->check(CLI::ExistingFile);
  report->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json-lines"}));
  report->add_option("--out", out, "Output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify) return cmd_verify(which, config, sets, out);
    if (*sweep) return cmd_sweep(sweep_checks, config, sets, out, summary_out, plot_axis, plot_out);
    if (*report) return cmd_report(in, format, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mdlab: %s\n", e.what());
    return 2;
  }
  return 2;
}
