#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bbsim/analysis.hpp"
#include "bbsim/controllers.hpp"
#include "bbsim/converter.hpp"
#include "bbsim/engine.hpp"

namespace bbsim {

// A fully pinned experiment: plant, controller, horizon, and disturbances.
struct Scenario {
  std::string name;
  std::string description;
  ConverterParams converter;
  ControllerSpec controller;
  SimConfig sim;
  std::vector<StepEvent> events;
};

// Everything the reporting layer needs from one run. The trace ends with a
// 25-period full-resolution tail so the periodic balance checks always see a
// complete switching period at integration resolution.
struct ScenarioResult {
  Scenario scenario;
  Trace trace;
  ConverterParams final_params;  // reflects any applied step events
  TransientMetrics metrics;                   // measured from t = 0
  std::optional<TransientMetrics> post_step;  // measured from the first event
  SteadyStatePrediction predicted;            // averaged model at the tail duty
  double vs_residual = 0.0;                   // integral of v_L, last period [V*s]
  double q_residual = 0.0;                    // integral of i_C, last period [A*s]
  double i_l_tail = 0.0;                      // mean inductor current, last 10 periods
  double duty_tail = 0.0;                     // mean latched duty, last 10 periods
};

// Condensed pass/fail view of one result, used by the suite report.
struct ScenarioSummary {
  std::string name;
  double final_mean = 0.0;     // mean output voltage, last 10 periods [V]
  double expected_v = 0.0;     // value `error_pct` is measured against [V]
  double error_pct = 0.0;      // vs target (closed loop) or averaged model (open)
  double ripple_pp = 0.0;      // peak-to-peak output ripple, last 10 periods [V]
  double settling_time = 0.0;  // from t = 0, or from the step for variants [s]
  bool settled = false;
  // Target above the attainable output range, so the loop is expected to rail
  // at the maximum duty; the row is judged against the railed operating point.
  bool railed = false;
  double vs_residual_rel = 0.0;  // |integral v_L| / (vin * T)
  double q_residual_rel = 0.0;   // |integral i_C| / (|i_l| * T)
  bool pass = false;
};

// One matched-hardware head-to-head: both controller families driving the
// same power stage through the same disturbance.
struct ComparisonRow {
  std::string mode;       // "boost" or "buck"
  std::string step_kind;  // "vin-step" or "load-step"
  double analog_settling = 0.0;
  double digital_settling = 0.0;
  double analog_overshoot_pct = 0.0;
  double digital_overshoot_pct = 0.0;
  double expected_v = 0.0;         // regulation target, or the railed level
  double analog_error_pct = 0.0;   // post-step error vs expected_v
  double digital_error_pct = 0.0;
  bool both_settled = false;
  bool digital_not_slower = false;
  // Post-step target above the attainable range: both loops rail at maximum
  // duty and the row compares convergence to that operating point instead.
  bool railed = false;
};

struct MatchedComparison {
  std::vector<ComparisonRow> rows;
  bool all_pass = false;
};

struct SuiteReport {
  std::vector<ScenarioSummary> rows;    // canonical order, variants follow base
  std::vector<ScenarioResult> results;  // parallel to `rows`
  std::optional<MatchedComparison> matched;
  bool all_pass = false;
};

// Canonical preset order: boost-open, boost-analog, boost-digital, then the
// buck trio. `make_preset` throws std::invalid_argument for unknown names.
const std::vector<std::string>& preset_names();
Scenario make_preset(const std::string& name);

// Derives a disturbance variant from a closed-loop preset. `step_kind` is
// "vin-step" (supply swaps between the buck and boost levels at t_end / 2) or
// "load-step" (load resistance halves at t_end / 2).
Scenario with_step(Scenario base, const std::string& step_kind);

// Command-line overrides applied uniformly to every scenario a command runs.
struct SimOverrides {
  std::optional<IntegratorKind> integrator;
  std::optional<int> steps_per_period;
};
Scenario apply_overrides(Scenario sc, const SimOverrides& ov);

// Simulation failures are rethrown with the scenario name prefixed.
ScenarioResult run_scenario(const Scenario& sc);
ScenarioSummary summarize(const ScenarioResult& r);

// Runs both controller families, each with its default design, on the
// identical low-inductance power stage in both conversion modes, through both
// disturbance kinds. Report-only: no preset or trace files correspond to
// these runs.
MatchedComparison matched_step_comparison(const SimOverrides& ov = {});

// Runs the named presets; "all" selects every preset, an empty list runs
// nothing and yields an empty report. When `step_tests` is set, closed-loop
// presets gain their two disturbance variants and the matched head-to-head
// comparison is appended. Scenarios run concurrently; the report order is
// deterministic regardless of completion order.
SuiteReport run_suite(std::vector<std::string> names, bool step_tests,
                      const SimOverrides& ov = {});

}  // namespace bbsim
