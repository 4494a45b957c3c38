#pragma once

#include <ostream>
#include <string>

#include "bbsim/engine.hpp"
#include "bbsim/scenarios.hpp"

namespace bbsim {

// CSV with the fixed header "t,i_l,v_c,v_out,duty,phase". Numbers use the
// shortest decimal that round-trips to the same double, so identical runs
// produce byte-identical files; phase renders as ON / OFF / DEAD.
void write_csv(std::ostream& os, const Trace& trace);

// Throws ConfigError when the path cannot be opened or written.
void write_csv_file(const std::string& path, const Trace& trace);

// Key = value summary of one run's metrics (plus a post-step block when the
// scenario contains disturbance events).
std::string render_metrics(const ScenarioResult& r);

// Human-readable suite report: per-scenario metric rows, analog-vs-digital
// deltas between presets, the matched-hardware comparison when present, and
// an overall PASS / FAIL verdict.
std::string render_report(const SuiteReport& rep);

}  // namespace bbsim
