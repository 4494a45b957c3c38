#include "bbsim/scenarios.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include "bbsim/modulator.hpp"

namespace bbsim {

namespace {

// Low-inductance power stage used by the open-loop and digital experiments.
// Conduction losses are lumped into the series resistance.
ConverterParams fast_stage(double vin) {
  ConverterParams p;
  p.vin = vin;
  p.l = 280e-9;
  p.c = 250e-9;
  p.r_l = 0.5;
  p.r_esr = 1e-4;
  p.r_load = 10.0;
  p.f_sw = 50e6;
  p.t_dead = 0.0;
  return p;
}

// Larger-LC power stage used by the analog compensator experiments.
ConverterParams analog_stage(double vin) {
  ConverterParams p;
  p.vin = vin;
  p.l = 1e-6;
  p.c = 22e-6;
  p.r_l = 8e-2;
  p.r_esr = 60e-3;
  p.r_load = 10.0;
  p.f_sw = 50e6;
  p.t_dead = 0.0;
  return p;
}

SimConfig horizon(double t_end, int decimation) {
  SimConfig cfg;
  cfg.t_end = t_end;
  cfg.steps_per_period = 64;
  cfg.record_decimation = decimation;
  cfg.integrator = IntegratorKind::Rk4;
  return cfg;
}

constexpr double kTarget = 3.24;

// Closed-loop expectation for a run that ended with params `p`: the target
// itself when attainable, otherwise the railed-duty operating point the
// integrating loop winds up at. Only the upper rail matters here; every
// scenario target sits far above the d_min output.
struct Expectation {
  double v = 0.0;
  bool railed = false;
};

Expectation closed_loop_expectation(const ConverterParams& p,
                                    const ControllerSpec& c) {
  const SteadyStatePrediction peak =
      averaged_peak(p, c.limits.min, c.limits.max);
  if (c.v_ref > peak.v_out_avg) {
    return {averaged_steady_state(p, c.limits.max).v_out_avg, true};
  }
  return {c.v_ref, false};
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "boost-open",  "boost-analog",  "boost-digital",
      "buck-open",   "buck-analog",   "buck-digital",
  };
  return names;
}

Scenario make_preset(const std::string& name) {
  Scenario sc;
  sc.name = name;
  const bool boost = name.rfind("boost-", 0) == 0;
  const bool buck = name.rfind("buck-", 0) == 0;
  if (!boost && !buck) {
    throw std::invalid_argument(fmt::format("unknown preset '{}'", name));
  }
  const double vin = boost ? 2.5 : 5.0;
  const std::string kind = name.substr(name.find('-') + 1);
  const char* dir = boost ? "2.5 V up to 3.24 V" : "5 V down to 3.24 V";

  if (kind == "open") {
    sc.converter = fast_stage(vin);
    sc.controller.kind = ControllerKind::OpenLoop;
    sc.controller.v_ref = kTarget;
    sc.controller.open_loop_d = duty_for_ratio(vin, kTarget);
    sc.sim = horizon(200e-6, 8);
    sc.description = fmt::format("fixed duty cycle, {}", dir);
  } else if (kind == "analog") {
    sc.converter = analog_stage(vin);
    sc.controller = design_defaults(sc.converter, ControllerKind::AnalogType3, kTarget);
    sc.sim = horizon(2e-3, 64);
    sc.description = fmt::format("analog third-order compensator, {}", dir);
  } else if (kind == "digital") {
    sc.converter = fast_stage(vin);
    sc.controller = design_defaults(sc.converter, ControllerKind::Digital2p2z, kTarget);
    sc.sim = horizon(400e-6, 8);
    sc.description = fmt::format("digital two-pole two-zero compensator, {}", dir);
  } else {
    throw std::invalid_argument(fmt::format("unknown preset '{}'", name));
  }
  return sc;
}

Scenario with_step(Scenario base, const std::string& step_kind) {
  if (base.controller.kind == ControllerKind::OpenLoop) {
    throw std::invalid_argument("disturbance variants require a closed-loop preset");
  }
  StepEvent ev;
  ev.t = 0.5 * base.sim.t_end;
  if (step_kind == "vin-step") {
    ev.target = StepEvent::Target::Vin;
    // Swap between the two canonical supply levels, crossing the regulation
    // target so the converter changes conversion mode under closed loop.
    ev.value = base.converter.vin < base.controller.v_ref ? 2.0 * base.converter.vin
                                                          : 0.5 * base.converter.vin;
    base.description += fmt::format("; supply step to {:g} V at {:g} s", ev.value, ev.t);
  } else if (step_kind == "load-step") {
    ev.target = StepEvent::Target::RLoad;
    ev.value = 0.5 * base.converter.r_load;
    base.description +=
        fmt::format("; load step to {:g} ohm at {:g} s", ev.value, ev.t);
  } else {
    throw std::invalid_argument(fmt::format("unknown step kind '{}'", step_kind));
  }
  base.events.push_back(ev);
  base.name += "-" + step_kind;
  return base;
}

Scenario apply_overrides(Scenario sc, const SimOverrides& ov) {
  if (ov.integrator) {
    sc.sim.integrator = *ov.integrator;
  }
  if (ov.steps_per_period) {
    sc.sim.steps_per_period = *ov.steps_per_period;
  }
  sc.sim.validate();
  return sc;
}

ScenarioResult run_scenario(const Scenario& sc) {
  const double T = sc.converter.period();
  SimConfig cfg = sc.sim;
  // Record coarsely through the transient, then at full resolution for the
  // final 25 periods so the periodic balance checks see every substep.
  const double tail = 25.0 * T;
  const bool two_phase = cfg.t_end > 2.0 * tail && cfg.record_decimation > 1;
  if (!two_phase) {
    cfg.record_decimation = 1;
  }
  Simulator sim(sc.converter, sc.controller, cfg, sc.events);
  try {
    if (two_phase) {
      sim.advance_to(cfg.t_end - tail);
      sim.set_record_decimation(1);
    }
    sim.advance_to(cfg.t_end);
  } catch (const SimError& e) {
    throw SimError(fmt::format("{}: {}", sc.name, e.what()));
  }
  sim.record_now();

  ScenarioResult out;
  out.scenario = sc;
  out.final_params = sim.current_params();
  out.trace = sim.take_trace();
  out.metrics = transient_metrics(out.trace, sc.controller.v_ref, T);
  if (!sc.events.empty()) {
    out.post_step = transient_metrics(out.trace, sc.controller.v_ref, T, 0.02,
                                      sc.events.front().t);
  }
  out.vs_residual = volt_second_balance(out.trace, out.final_params);
  out.q_residual = charge_balance(out.trace, out.final_params);
  out.i_l_tail = mean_i_l(out.trace, 10.0 * T);
  out.duty_tail = mean_duty(out.trace, 10.0 * T);
  out.predicted = averaged_steady_state(out.final_params, out.duty_tail);
  return out;
}

ScenarioSummary summarize(const ScenarioResult& r) {
  ScenarioSummary s;
  s.name = r.scenario.name;
  const TransientMetrics& m = r.post_step ? *r.post_step : r.metrics;
  s.final_mean = m.final_mean;
  s.ripple_pp = m.ripple_pp;
  s.settling_time = m.settling_time;
  s.settled = m.settled;

  const double T = r.final_params.period();
  s.vs_residual_rel = std::abs(r.vs_residual) / (r.final_params.vin * T);
  s.q_residual_rel =
      std::abs(r.q_residual) / (std::max(std::abs(r.i_l_tail), 1e-9) * T);

  const bool open = r.scenario.controller.kind == ControllerKind::OpenLoop;
  // Open loop is judged against the averaged lossy model (it cannot hit the
  // design target); closed loop against the regulation target, unless that
  // target is beyond the attainable output range, in which case the loop
  // rails and the averaged railed-duty level is the honest expectation.
  double ref = r.predicted.v_out_avg;
  if (!open) {
    const Expectation ex =
        closed_loop_expectation(r.final_params, r.scenario.controller);
    ref = ex.v;
    s.railed = ex.railed;
  }
  s.expected_v = ref;
  s.error_pct = std::abs(s.final_mean - ref) / std::abs(ref) * 100.0;
  const double error_limit = open || s.railed ? 2.0 : 1.0;
  s.pass = s.settled && s.error_pct <= error_limit && s.vs_residual_rel <= 1e-3 &&
           s.q_residual_rel <= 1e-3;
  return s;
}

MatchedComparison matched_step_comparison(const SimOverrides& ov) {
  MatchedComparison out;
  out.all_pass = true;
  for (const char* mode : {"boost", "buck"}) {
    const double vin = std::string(mode) == "boost" ? 2.5 : 5.0;
    // The low-inductance stage is the one both default designs are sized to
    // regulate well; it makes the head-to-head about the controllers, not
    // about re-tuning for a foreign power stage.
    const ConverterParams stage = fast_stage(vin);
    for (const char* step_kind : {"vin-step", "load-step"}) {
      auto build = [&](ControllerKind kind, const char* tag) {
        Scenario sc;
        sc.name = fmt::format("{}-matched-{}", mode, tag);
        sc.converter = stage;
        sc.controller = design_defaults(stage, kind, kTarget);
        sc.sim = horizon(400e-6, 8);
        return apply_overrides(with_step(std::move(sc), step_kind), ov);
      };
      const ScenarioResult ra = run_scenario(build(ControllerKind::AnalogType3, "analog"));
      const ScenarioResult rd = run_scenario(build(ControllerKind::Digital2p2z, "digital"));

      // Both runs end at identical params, so they share one expectation.
      const Expectation ex =
          closed_loop_expectation(rd.final_params, rd.scenario.controller);

      ComparisonRow row;
      row.mode = mode;
      row.step_kind = step_kind;
      row.analog_settling = ra.post_step->settling_time;
      row.digital_settling = rd.post_step->settling_time;
      row.analog_overshoot_pct = ra.post_step->overshoot_pct;
      row.digital_overshoot_pct = rd.post_step->overshoot_pct;
      row.expected_v = ex.v;
      row.railed = ex.railed;
      row.analog_error_pct =
          std::abs(ra.post_step->final_mean - ex.v) / ex.v * 100.0;
      row.digital_error_pct =
          std::abs(rd.post_step->final_mean - ex.v) / ex.v * 100.0;
      row.both_settled = ra.post_step->settled && rd.post_step->settled;
      row.digital_not_slower = row.digital_settling <= row.analog_settling;
      const double err_limit = row.railed ? 2.0 : 1.0;
      out.all_pass = out.all_pass && row.both_settled && row.digital_not_slower &&
                     row.analog_error_pct <= err_limit &&
                     row.digital_error_pct <= err_limit;
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

SuiteReport run_suite(std::vector<std::string> names, bool step_tests,
                      const SimOverrides& ov) {
  const auto& all = preset_names();
  bool take_all = false;
  for (const auto& n : names) {
    if (n == "all") {
      take_all = true;
    } else if (std::find(all.begin(), all.end(), n) == all.end()) {
      throw std::invalid_argument(fmt::format("unknown preset '{}'", n));
    }
  }
  std::vector<Scenario> scenarios;
  for (const auto& n : all) {
    if (!take_all && std::find(names.begin(), names.end(), n) == names.end()) {
      continue;
    }
    Scenario base = make_preset(n);
    const bool closed = base.controller.kind != ControllerKind::OpenLoop;
    scenarios.push_back(apply_overrides(base, ov));
    if (step_tests && closed) {
      scenarios.push_back(apply_overrides(with_step(base, "vin-step"), ov));
      scenarios.push_back(apply_overrides(with_step(base, "load-step"), ov));
    }
  }

  std::vector<std::future<ScenarioResult>> futures;
  futures.reserve(scenarios.size());
  for (const auto& sc : scenarios) {
    futures.push_back(std::async(std::launch::async, run_scenario, sc));
  }
  std::future<MatchedComparison> matched_future;
  if (step_tests) {
    matched_future =
        std::async(std::launch::async, [&ov] { return matched_step_comparison(ov); });
  }

  SuiteReport rep;
  rep.all_pass = true;
  for (auto& f : futures) {
    rep.results.push_back(f.get());
    rep.rows.push_back(summarize(rep.results.back()));
    rep.all_pass = rep.all_pass && rep.rows.back().pass;
  }
  if (step_tests) {
    rep.matched = matched_future.get();
    rep.all_pass = rep.all_pass && rep.matched->all_pass;
  }
  return rep;
}

}  // namespace bbsim
