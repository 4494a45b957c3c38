#include "bbsim/trace_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iterator>

#include "bbsim/config.hpp"

namespace bbsim {

void write_csv(std::ostream& os, const Trace& trace) {
  fmt::memory_buffer buf;
  auto sink = std::back_inserter(buf);
  fmt::format_to(sink, "t,i_l,v_c,v_out,duty,phase\n");
  for (const TraceSample& s : trace.samples) {
    fmt::format_to(sink, "{},{},{},{},{},{}\n", s.t, s.i_l, s.v_c, s.v_out, s.duty,
                   phase_name(s.phase));
    if (buf.size() >= (1u << 16)) {
      os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) {
    throw ConfigError("failed while writing CSV output");
  }
}

void write_csv_file(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ConfigError(fmt::format("cannot open '{}' for writing", path));
  }
  write_csv(out, trace);
  out.flush();
  if (!out) {
    throw ConfigError(fmt::format("failed writing trace to '{}'", path));
  }
}

std::string render_metrics(const ScenarioResult& r) {
  const TransientMetrics& m = r.metrics;
  std::string out;
  out += fmt::format("scenario = {}\n", r.scenario.name);
  if (!r.scenario.description.empty()) {
    out += fmt::format("description = {}\n", r.scenario.description);
  }
  out += fmt::format("target_v = {}\n", r.scenario.controller.v_ref);
  out += fmt::format("final_mean_v = {}\n", m.final_mean);
  out += fmt::format("ss_error_v = {}\n", m.ss_error);
  out += fmt::format("ripple_pp_v = {}\n", m.ripple_pp);
  out += fmt::format("overshoot_pct = {}\n", m.overshoot_pct);
  out += fmt::format("settling_time_s = {}\n", m.settling_time);
  out += fmt::format("settled = {}\n", m.settled);
  out += fmt::format("duty_mean = {}\n", r.duty_tail);
  out += fmt::format("i_l_mean_a = {}\n", r.i_l_tail);
  out += fmt::format("predicted_v_out_v = {}\n", r.predicted.v_out_avg);
  out += fmt::format("predicted_i_l_a = {}\n", r.predicted.i_l_avg);
  out += fmt::format("vs_residual_vs = {}\n", r.vs_residual);
  out += fmt::format("q_residual_as = {}\n", r.q_residual);
  out += fmt::format("samples = {}\n", r.trace.size());
  if (r.post_step) {
    out += "\n[post_step]\n";
    out += fmt::format("t_step_s = {}\n", r.scenario.events.front().t);
    out += fmt::format("final_mean_v = {}\n", r.post_step->final_mean);
    out += fmt::format("ss_error_v = {}\n", r.post_step->ss_error);
    out += fmt::format("overshoot_pct = {}\n", r.post_step->overshoot_pct);
    out += fmt::format("settling_time_s = {}\n", r.post_step->settling_time);
    out += fmt::format("settled = {}\n", r.post_step->settled);
  }
  return out;
}

namespace {

// Overshoot for the row's reported window (post-step when the scenario has a
// disturbance, whole run otherwise).
double row_overshoot(const ScenarioResult& r) {
  return r.post_step ? r.post_step->overshoot_pct : r.metrics.overshoot_pct;
}

const ScenarioSummary* find_row(const SuiteReport& rep, const std::string& name) {
  for (const auto& row : rep.rows) {
    if (row.name == name) {
      return &row;
    }
  }
  return nullptr;
}

const ScenarioResult* find_result(const SuiteReport& rep, const std::string& name) {
  for (const auto& res : rep.results) {
    if (res.scenario.name == name) {
      return &res;
    }
  }
  return nullptr;
}

}  // namespace

std::string render_report(const SuiteReport& rep) {
  std::string out = "scenario suite report\n=====================\n\n";
  out += fmt::format("{:<26} {:>9} {:>9} {:>7} {:>10} {:>8} {:>11} {:>9} {:>9} {:>5}\n",
                     "scenario", "final_v", "expect_v", "err_%", "ripple_v", "over_%",
                     "settle_s", "vs_rel", "q_rel", "pass");
  bool any_railed = false;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const ScenarioSummary& row = rep.rows[i];
    out += fmt::format(
        "{:<26} {:>9.5f} {:>9.5f} {:>7.3f} {:>10.3e} {:>8.3f} {:>11.4e} {:>9.2e} "
        "{:>9.2e} {:>5}{}\n",
        row.name, row.final_mean, row.expected_v, row.error_pct, row.ripple_pp,
        row_overshoot(rep.results[i]), row.settling_time, row.vs_residual_rel,
        row.q_residual_rel, row.pass ? "yes" : "NO", row.railed ? "  *" : "");
    any_railed = any_railed || row.railed;
  }
  if (any_railed) {
    out += "  * target exceeds the attainable output for the final load; the loop\n";
    out += "    rails at maximum duty and is judged against that operating point.\n";
  }

  // Analog-vs-digital deltas between the presets themselves. These use the
  // experiment tables' own component values, which differ between the two
  // controller columns; the matched table below is the controlled comparison.
  bool any_pair = false;
  std::string pairs;
  for (const char* mode : {"boost", "buck"}) {
    const auto* a = find_row(rep, fmt::format("{}-analog", mode));
    const auto* d = find_row(rep, fmt::format("{}-digital", mode));
    if (a == nullptr || d == nullptr) {
      continue;
    }
    const auto* ra = find_result(rep, a->name);
    const auto* rd = find_result(rep, d->name);
    pairs += fmt::format(
        "  {:<5}  settle analog {:.4e} s, digital {:.4e} s, delta {:+.4e} s; "
        "overshoot analog {:.3f} %, digital {:.3f} %, delta {:+.3f} %\n",
        mode, a->settling_time, d->settling_time, d->settling_time - a->settling_time,
        row_overshoot(*ra), row_overshoot(*rd), row_overshoot(*rd) - row_overshoot(*ra));
    any_pair = true;
  }
  if (any_pair) {
    out += "\npreset deltas, digital minus analog (power stages differ by design):\n";
    out += pairs;
  }

  if (rep.matched) {
    out += "\nmatched-hardware comparison (both controller defaults driving the\n";
    out += "identical low-inductance power stage; artifact-defined experiment,\n";
    out += "not part of the preset tables):\n";
    out += fmt::format("{:<6} {:<10} {:>12} {:>12} {:>12} {:>9} {:>9} {:>8} {:>8} {:>7}\n",
                       "mode", "step", "ana_set_s", "dig_set_s", "delta_s", "ana_ov%",
                       "dig_ov%", "ana_e%", "dig_e%", "dig_ok");
    bool any_matched_railed = false;
    for (const ComparisonRow& row : rep.matched->rows) {
      out += fmt::format(
          "{:<6} {:<10} {:>12.4e} {:>12.4e} {:>+12.4e} {:>9.3f} {:>9.3f} {:>8.3f} "
          "{:>8.3f} {:>7}{}\n",
          row.mode, row.step_kind, row.analog_settling, row.digital_settling,
          row.digital_settling - row.analog_settling, row.analog_overshoot_pct,
          row.digital_overshoot_pct, row.analog_error_pct, row.digital_error_pct,
          row.digital_not_slower ? "yes" : "NO", row.railed ? "  *" : "");
      any_matched_railed = any_matched_railed || row.railed;
    }
    for (const ComparisonRow& row : rep.matched->rows) {
      if (row.railed) {
        out += fmt::format(
            "  * {} {}: post-step target exceeds the attainable output; both\n"
            "    loops rail at maximum duty and race to {:.5f} V instead.\n",
            row.mode, row.step_kind, row.expected_v);
      }
    }
    out += fmt::format("matched comparison: {}\n",
                       rep.matched->all_pass ? "PASS" : "FAIL");
  }

  out += fmt::format("\noverall: {}\n", rep.all_pass ? "PASS" : "FAIL");
  return out;
}

}  // namespace bbsim
