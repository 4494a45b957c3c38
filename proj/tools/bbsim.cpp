#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bbsim/analysis.hpp"
#include "bbsim/config.hpp"
#include "bbsim/engine.hpp"
#include "bbsim/integrators.hpp"
#include "bbsim/modulator.hpp"
#include "bbsim/scenarios.hpp"
#include "bbsim/trace_io.hpp"

namespace {

using namespace bbsim;

std::string metrics_path_for(const std::string& csv_path) {
  std::string base = csv_path;
  if (base.size() > 4 && base.substr(base.size() - 4) == ".csv") {
    base.resize(base.size() - 4);
  }
  return base + ".metrics.txt";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ConfigError(fmt::format("cannot open '{}' for writing", path));
  }
  out << text;
  out.flush();
  if (!out) {
    throw ConfigError(fmt::format("failed writing '{}'", path));
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 const SimOverrides& ov) {
  Scenario sc = apply_overrides(load_config_file(config_path), ov);
  if (sc.name.empty()) {
    sc.name = std::filesystem::path(config_path).stem().string();
  }
  const ScenarioResult r = run_scenario(sc);
  write_csv_file(out_path, r.trace);
  const std::string mpath = metrics_path_for(out_path);
  write_text_file(mpath, render_metrics(r));
  fmt::print("{}: {} samples -> {}, mean v_out {:.6f} V over the last 10 periods\n",
             sc.name, r.trace.size(), out_path, r.metrics.final_mean);
  fmt::print("metrics -> {}\n", mpath);
  return 0;
}

int cmd_suite(const std::vector<std::string>& names_in, bool step_tests,
              const std::string& out_dir, const SimOverrides& ov) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw ConfigError(fmt::format("cannot create output directory '{}': {}", out_dir,
                                  ec.message()));
  }
  // Accept both space- and comma-separated preset lists; no names means all.
  std::vector<std::string> names;
  for (const std::string& n : names_in) {
    std::size_t start = 0;
    while (start <= n.size()) {
      const std::size_t comma = n.find(',', start);
      const std::size_t len = comma == std::string::npos ? std::string::npos
                                                         : comma - start;
      if (const std::string piece = n.substr(start, len); !piece.empty()) {
        names.push_back(piece);
      }
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
  }
  if (names.empty()) {
    names.emplace_back("all");
  }
  const SuiteReport rep = run_suite(names, step_tests, ov);
  for (const ScenarioResult& r : rep.results) {
    write_csv_file((std::filesystem::path(out_dir) / (r.scenario.name + ".csv")).string(),
                   r.trace);
  }
  const std::string report = render_report(rep);
  write_text_file((std::filesystem::path(out_dir) / "report.txt").string(), report);
  fmt::print("{}", report);
  fmt::print("{} trace files and report.txt written to {}\n", rep.results.size(),
             out_dir);
  return rep.all_pass ? 0 : 1;
}

struct CheckRow {
  std::string label;
  double residual;
  double limit;
  bool expect_fail = false;  // negative-control rows are expected to exceed
};

// Lossless conversion-ratio sweep: with every parasitic resistance at zero the
// mean output over the last 20 of 2000 periods must follow d / (1 - d).
CheckRow ratio_sweep_row(double d) {
  ConverterParams p;
  p.vin = 2.5;
  p.l = 280e-9;
  p.c = 250e-9;
  p.r_l = 0.0;
  p.r_esr = 0.0;
  p.r_load = 10.0;
  p.f_sw = 50e6;

  ControllerSpec ctl;
  ctl.kind = ControllerKind::OpenLoop;
  ctl.open_loop_d = d;
  ctl.v_ref = p.vin * ideal_ratio(d);

  SimConfig cfg;
  cfg.t_end = 2000.0 * p.period();
  cfg.steps_per_period = 64;
  cfg.record_decimation = 1;
  cfg.integrator = IntegratorKind::Rk4;

  const Trace trace = run(p, ctl, cfg, {});
  const double mean = mean_v_out(trace, 20.0 * p.period());
  const double ideal = p.vin * ideal_ratio(d);
  return {fmt::format("conversion ratio sweep d = {:.2f}", d),
          std::abs(mean / ideal - 1.0), 1e-2};
}

// Max relative state difference between two traces on the same grid.
double trace_deviation(const Trace& a, const Trace& b) {
  if (a.size() != b.size()) {
    throw SimError("integrator comparison traces differ in length");
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    scale = std::max({scale, std::abs(b[i].i_l), std::abs(b[i].v_c)});
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double di = std::abs(a[i].i_l - b[i].i_l);
    const double dv = std::abs(a[i].v_c - b[i].v_c);
    worst = std::max(worst, std::max(di, dv));
  }
  return worst / scale;
}

CheckRow integrator_row() {
  Scenario sc = make_preset("boost-open");
  SimConfig cfg = sc.sim;
  cfg.t_end = 1000.0 * sc.converter.period();
  cfg.record_decimation = 1;
  cfg.integrator = IntegratorKind::Rk4;
  const Trace rk4 = run(sc.converter, sc.controller, cfg, {});
  cfg.integrator = IntegratorKind::Exact;
  const Trace exact = run(sc.converter, sc.controller, cfg, {});
  return {"rk4 vs exact, 1000 periods", trace_deviation(rk4, exact), 1e-6};
}

// Negative control: a deliberately low-order integrator run through the same
// comparison must blow the 1e-6 budget, proving the check has teeth.
CheckRow corrupted_integrator_row() {
  const Scenario sc = make_preset("boost-open");
  const ConverterParams& p = sc.converter;
  const double T = p.period();
  const SwitchSchedule sched =
      schedule_period({sc.controller.open_loop_d, 0}, p);
  const double h_max = T / 64.0;

  StateVector xe{0.0, 0.0};
  StateVector xu{0.0, 0.0};
  double scale = 0.0;
  double worst = 0.0;
  for (int period = 0; period < 1000; ++period) {
    for (const Segment& seg : sched) {
      const AffineSystem sys = phase_affine(p, seg.phase);
      const int n = std::max(1, static_cast<int>(std::ceil(seg.duration / h_max)));
      const double h = seg.duration / n;
      for (int i = 0; i < n; ++i) {
        xe = exact_step(sys, xe, h);
        const StateDerivative dx = sys.rhs(xu);
        xu = {xu.i_l + h * dx.d_i_l, xu.v_c + h * dx.d_v_c};
        scale = std::max({scale, std::abs(xe.i_l), std::abs(xe.v_c)});
        worst = std::max({worst, std::abs(xu.i_l - xe.i_l), std::abs(xu.v_c - xe.v_c)});
      }
    }
  }
  return {"forward euler vs exact (negative control)", worst / scale, 1e-6, true};
}

int cmd_verify(bool corrupt_integrator) {
  std::vector<CheckRow> rows;
  for (double d : {0.25, 0.5, 0.75}) {
    rows.push_back(ratio_sweep_row(d));
  }
  rows.push_back(corrupt_integrator ? corrupted_integrator_row() : integrator_row());

  const SuiteReport rep = run_suite({"all"}, false);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    rows.push_back({fmt::format("volt-second balance {}", rep.rows[i].name),
                    rep.rows[i].vs_residual_rel, 1e-3});
    rows.push_back({fmt::format("charge balance {}", rep.rows[i].name),
                    rep.rows[i].q_residual_rel, 1e-3});
  }

  bool all_pass = true;
  fmt::print("{:<44} {:>12} {:>10} {:>8}\n", "property", "residual", "limit", "status");
  for (const CheckRow& row : rows) {
    const bool ok = row.residual <= row.limit;
    all_pass = all_pass && ok;
    fmt::print("{:<44} {:>12.3e} {:>10.1e} {:>8}\n", row.label, row.residual, row.limit,
               ok ? "pass" : (row.expect_fail ? "FAIL (expected)" : "FAIL"));
  }
  fmt::print("verify: {}\n", all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"four-switch non-inverting buck-boost converter simulator"};
  app.require_subcommand(1);

  std::string integrator;
  int steps_per_period = 0;
  app.add_option("--integrator", integrator, "override integrator for simulate/suite")
      ->check(CLI::IsMember({"rk4", "exact"}));
  app.add_option("--steps-per-period", steps_per_period,
                 "override integrator steps per switching period")
      ->check(CLI::PositiveNumber);

  auto* sim_cmd =
      app.add_subcommand("simulate", "run one scenario described by a config file");
  std::string config_path;
  std::string out_path = "trace.csv";
  sim_cmd->add_option("--config", config_path, "scenario config file")->required();
  sim_cmd->add_option("--out", out_path,
                      "output CSV path (metrics summary written beside it)");

  auto* suite_cmd =
      app.add_subcommand("suite", "run preset scenarios and write traces plus a report");
  std::vector<std::string> names;
  suite_cmd->add_option("names", names, "preset names, or 'all' (default)");
  bool step_tests = false;
  suite_cmd->add_flag("--step-tests", step_tests,
                      "add supply/load disturbance variants and the matched comparison");
  std::string out_dir = "suite-out";
  suite_cmd->add_option("--out", out_dir, "output directory");

  auto* verify_cmd =
      app.add_subcommand("verify", "run the built-in oracle and property checks");
  bool corrupt = false;
  verify_cmd
      ->add_flag("--corrupt-integrator", corrupt,
                 "substitute a low-order integrator; the check must then fail")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  SimOverrides ov;
  if (integrator == "rk4") {
    ov.integrator = IntegratorKind::Rk4;
  } else if (integrator == "exact") {
    ov.integrator = IntegratorKind::Exact;
  }
  if (steps_per_period > 0) {
    ov.steps_per_period = steps_per_period;
  }

  try {
    if (*sim_cmd) {
      return cmd_simulate(config_path, out_path, ov);
    }
    if (*suite_cmd) {
      return cmd_suite(names, step_tests, out_dir, ov);
    }
    return cmd_verify(corrupt);
  } catch (const SimError& e) {
    fmt::print(stderr, "simulation error: {}\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
