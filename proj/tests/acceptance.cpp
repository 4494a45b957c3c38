// Release gate: one pass/fail line per criterion, nonzero exit if any fails.
// Tolerances and runtime caps are stated inline with each check; measured
// values are printed so a failing line is diagnosable from the log alone.
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "bbsim/analysis.hpp"
#include "bbsim/controllers.hpp"
#include "bbsim/converter.hpp"
#include "bbsim/engine.hpp"
#include "bbsim/modulator.hpp"
#include "bbsim/scenarios.hpp"

using namespace bbsim;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double rel_err(double measured, double expected) {
  return std::abs(measured - expected) / std::abs(expected);
}

struct Gate {
  int passed = 0;
  int total = 0;

  void line(int id, const std::string& title, bool ok, const std::string& detail) {
    ++total;
    passed += ok;
    fmt::print("[{}] criterion {} ({}): {}\n", ok ? "PASS" : "FAIL", id, title,
               detail);
    std::fflush(stdout);
  }
};

ConverterParams lossless_stage() {
  ConverterParams p = make_preset("boost-open").converter;
  p.r_l = 0.0;
  p.r_esr = 0.0;
  p.r_on1 = p.r_on2 = p.r_on3 = p.r_on4 = 0.0;
  p.t_dead = 0.0;
  return p;
}

const ScenarioSummary* find_row(const SuiteReport& rep, const std::string& name) {
  for (const ScenarioSummary& row : rep.rows) {
    if (row.name == name) {
      return &row;
    }
  }
  return nullptr;
}

bool is_step_row(const std::string& name) {
  return name.find("-vin-step") != std::string::npos ||
         name.find("-load-step") != std::string::npos;
}

}  // namespace

int main() {
  Gate gate;
  constexpr double kTarget = 3.24;

  // 1. Lossless conversion ratio: mean v_out/vin == d/(1-d) within 1%,
  //    averaged over the last 20 of 2000 switching periods.
  {
    Stopwatch sw;
    const ConverterParams p = lossless_stage();
    double worst = 0.0;
    for (double d : {0.25, 0.5, 0.75}) {
      ControllerSpec ctl;
      ctl.kind = ControllerKind::OpenLoop;
      ctl.open_loop_d = d;
      SimConfig cfg;
      cfg.t_end = 2000.0 * p.period();
      cfg.record_decimation = 4;
      const Trace tr = run(p, ctl, cfg, {});
      const double ratio = mean_v_out(tr, 20.0 * p.period()) / p.vin;
      worst = std::max(worst, rel_err(ratio, ideal_ratio(d)));
    }
    const double secs = sw.seconds();
    gate.line(1, "lossless ratio sweep", worst <= 0.01 && secs < 5.0,
              fmt::format("worst |ratio - d/(1-d)| = {:.3e} rel (limit 1e-2), "
                          "{:.2f} s (limit 5 s)",
                          worst, secs));
  }

  // Shared by criteria 2 and 3: duty side checks compare boost vs buck.
  double boost_analog_duty = 0.0;
  double boost_digital_duty = 0.0;

  // 2. Boost regulation to 3.24 V within 1% for both closed-loop presets.
  {
    bool ok = true;
    std::string detail;
    for (const char* name : {"boost-analog", "boost-digital"}) {
      Stopwatch sw;
      const ScenarioResult r = run_scenario(make_preset(name));
      const double err = rel_err(r.metrics.final_mean, kTarget);
      const double secs = sw.seconds();
      ok = ok && err <= 0.01 && secs < 30.0;
      detail += fmt::format("{} mean {:.5f} V (err {:.3f}%, {:.2f} s)  ", name,
                            r.metrics.final_mean, err * 100.0, secs);
      (std::string(name) == "boost-analog" ? boost_analog_duty
                                           : boost_digital_duty) = r.duty_tail;
    }
    gate.line(2, "boost regulation", ok, detail + "(limit 1%, 30 s each)");
  }

  // 3. Buck regulation within the same band, plus the duty side convention:
  //    steady duty < 0.5 stepping down, > 0.5 stepping up.
  {
    bool ok = true;
    std::string detail;
    for (const char* name : {"buck-analog", "buck-digital"}) {
      Stopwatch sw;
      const ScenarioResult r = run_scenario(make_preset(name));
      const double err = rel_err(r.metrics.final_mean, kTarget);
      const double secs = sw.seconds();
      ok = ok && err <= 0.01 && secs < 30.0 && r.duty_tail < 0.5;
      detail += fmt::format("{} mean {:.5f} V (err {:.3f}%, duty {:.3f}, {:.2f} s)  ",
                            name, r.metrics.final_mean, err * 100.0, r.duty_tail,
                            secs);
    }
    ok = ok && boost_analog_duty > 0.5 && boost_digital_duty > 0.5;
    detail += fmt::format("boost duties {:.3f}/{:.3f} > 0.5", boost_analog_duty,
                          boost_digital_duty);
    gate.line(3, "buck regulation and duty sides", ok, detail);
  }

  // The disturbance suite feeds criteria 4, 7, and 8.
  const SuiteReport suite = run_suite({"all"}, true);

  // 4. Robustness: closed loops re-regulate after vin and load steps while
  //    open loop demonstrably does not. The boost-digital load step lands on
  //    a power stage whose averaged output peaks below the target across the
  //    whole duty range, so no controller can reach 3.24 V there; the loop
  //    must rail and the simulation must match the railed equilibrium.
  {
    bool ok = true;
    double worst_closed = 0.0;
    int closed_rows = 0;
    const ScenarioSummary* railed_row = nullptr;
    for (const ScenarioSummary& row : suite.rows) {
      if (!is_step_row(row.name)) {
        continue;
      }
      ++closed_rows;
      if (row.railed) {
        ok = ok && railed_row == nullptr;
        railed_row = &row;
        continue;
      }
      ok = ok && row.pass && row.error_pct <= 1.0 && row.settled;
      worst_closed = std::max(worst_closed, row.error_pct);
    }
    ok = ok && closed_rows == 8 && railed_row != nullptr &&
         railed_row->name == "boost-digital-load-step";

    std::string railed_detail = "railed row missing";
    if (railed_row != nullptr) {
      ConverterParams p5 = make_preset("boost-digital").converter;
      p5.r_load = 5.0;
      const DutyLimits lim = make_preset("boost-digital").controller.limits;
      const SteadyStatePrediction peak = averaged_peak(p5, lim.min, lim.max);
      const SteadyStatePrediction railed = averaged_steady_state(p5, lim.max);
      ok = ok && peak.v_out_avg < kTarget && railed_row->error_pct <= 2.0 &&
           rel_err(railed_row->expected_v, railed.v_out_avg) < 1e-9;
      railed_detail =
          fmt::format("railed row peak {:.4f} V < {:.2f} V, sim vs rail {:.3f}% "
                      "(limit 2%)",
                      peak.v_out_avg, kTarget, railed_row->error_pct);
    }

    // Open loop holds its duty through the same disturbances and misses.
    double open_worst = 1.0;
    for (const auto& [preset, target] :
         {std::pair<const char*, StepEvent::Target>{"boost-open",
                                                    StepEvent::Target::Vin},
          {"buck-open", StepEvent::Target::RLoad}}) {
      Scenario sc = make_preset(preset);
      sc.sim.t_end = 2.0 * sc.sim.t_end;
      const double value = target == StepEvent::Target::Vin ? 5.0 : 5.0;
      sc.events.push_back({sc.sim.t_end / 2.0, target, value});
      const ScenarioResult r = run_scenario(sc);
      const double err = rel_err(r.post_step->final_mean, kTarget);
      open_worst = std::min(open_worst, err);
    }
    ok = ok && open_worst > 0.05;

    gate.line(4, "step robustness", ok,
              fmt::format("7 closed rows re-regulate, worst err {:.3f}% (limit "
                          "1%); {}; open-loop err >= {:.1f}% (limit > 5%)",
                          worst_closed, railed_detail, open_worst * 100.0));
  }

  // 5. Averaged-model oracle: with dead time removed and duty held fixed,
  //    simulated mean inductor current and output voltage match the averaged
  //    steady state within 2% on every preset's power stage.
  {
    bool ok = true;
    double worst = 0.0;
    for (const std::string& name : preset_names()) {
      Scenario sc = make_preset(name);
      sc.converter.t_dead = 0.0;
      const double d = duty_for_ratio(sc.converter.vin, kTarget);
      sc.controller = ControllerSpec{};
      sc.controller.kind = ControllerKind::OpenLoop;
      sc.controller.open_loop_d = d;
      sc.events.clear();
      const ScenarioResult r = run_scenario(sc);
      const SteadyStatePrediction pred = averaged_steady_state(sc.converter, d);
      const double ev = rel_err(r.metrics.final_mean, pred.v_out_avg);
      const double ei = rel_err(r.i_l_tail, pred.i_l_avg);
      worst = std::max({worst, ev, ei});
      ok = ok && ev <= 0.02 && ei <= 0.02;
    }
    gate.line(5, "averaged-model oracle", ok,
              fmt::format("6 presets at fixed duty, worst (v_out, i_l) error "
                          "{:.3e} rel (limit 2e-2)",
                          worst));
  }

  // 6. Integrator oracle: the two independent propagators agree to 1e-6
  //    max relative state error over 1000 periods.
  {
    const Scenario sc = make_preset("boost-open");
    SimConfig cfg = sc.sim;
    cfg.t_end = 1000.0 * sc.converter.period();
    cfg.record_decimation = 1;
    cfg.integrator = IntegratorKind::Rk4;
    const Trace rk4 = run(sc.converter, sc.controller, cfg, {});
    cfg.integrator = IntegratorKind::Exact;
    const Trace exact = run(sc.converter, sc.controller, cfg, {});

    bool ok = rk4.size() == exact.size() && !rk4.empty();
    double worst = 0.0;
    double scale = 0.0;
    if (ok) {
      for (std::size_t i = 0; i < rk4.size(); ++i) {
        worst = std::max({worst, std::abs(rk4.samples[i].i_l - exact.samples[i].i_l),
                          std::abs(rk4.samples[i].v_c - exact.samples[i].v_c)});
        scale = std::max({scale, std::abs(exact.samples[i].i_l),
                          std::abs(exact.samples[i].v_c)});
      }
    }
    const double rel = ok ? worst / scale : 1.0;
    ok = ok && rel <= 1e-6;
    gate.line(6, "rk4 vs exact over 1000 periods", ok,
              fmt::format("max relative state deviation {:.3e} (limit 1e-6)", rel));
  }

  // 7. Periodic balance: volt-second and charge residuals stay under 0.1%
  //    of their natural scales on every preset.
  {
    bool ok = true;
    double worst_vs = 0.0;
    double worst_q = 0.0;
    for (const std::string& name : preset_names()) {
      const ScenarioSummary* row = find_row(suite, name);
      if (row == nullptr) {
        ok = false;
        continue;
      }
      worst_vs = std::max(worst_vs, row->vs_residual_rel);
      worst_q = std::max(worst_q, row->q_residual_rel);
      ok = ok && row->vs_residual_rel <= 1e-3 && row->q_residual_rel <= 1e-3;
    }
    gate.line(7, "volt-second and charge balance", ok,
              fmt::format("worst residuals: volt-second {:.3e}, charge {:.3e} "
                          "(limit 1e-3)",
                          worst_vs, worst_q));
  }

  // 8. Matched-stage comparison: identical power stages and identical steps,
  //    analog vs digital loop; deltas must be computed and the digital loop
  //    must settle at least as fast under the default designs.
  {
    bool ok = suite.matched.has_value();
    std::string detail = "matched comparison missing from report";
    if (ok) {
      const MatchedComparison& m = *suite.matched;
      ok = m.all_pass && m.rows.size() == 4;
      detail.clear();
      for (const ComparisonRow& row : m.rows) {
        ok = ok && row.both_settled && row.digital_not_slower;
        detail += fmt::format("{}/{} analog {:.2e} s digital {:.2e} s{}  ",
                              row.mode, row.step_kind, row.analog_settling,
                              row.digital_settling, row.railed ? " (railed)" : "");
      }
    }
    gate.line(8, "digital vs analog dynamic response", ok, detail);
  }

  fmt::print("acceptance: {} ({}/{} criteria)\n",
             gate.passed == gate.total ? "PASS" : "FAIL", gate.passed, gate.total);
  return gate.passed == gate.total ? 0 : 1;
}
