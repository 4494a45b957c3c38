#pragma once

#include <stdexcept>
#include <string>

#include "bbsim/scenarios.hpp"

namespace bbsim {

// Raised for malformed documents and invalid parameter values alike; the CLI
// maps it to exit code 1 (simulation-time failures use SimError, exit 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses a sectioned key = value document:
//
//   [converter]   vin, l, c, r_l, r_on1..r_on4, r_esr, r_load, f_sw, t_dead,
//                 v_diode
//   [controller]  kind (open_loop | analog_type3 | digital_2p2z), v_ref,
//                 d_min, d_max, adc_bits, then per-kind keys:
//                 open_loop: d; analog_type3: k, wz1, wz2, wp1, wp2, v_ramp;
//                 digital_2p2z: b0, b1, b2, a1, a2, resolution_bits
//   [sim]         name, t_end, steps_per_period, record_decimation,
//                 integrator (rk4 | exact), initial_i_l, initial_v_c
//   [events]      step = <t> <vin|r_load> <value>   (repeatable)
//
// Values are decimal (scientific notation accepted), SI units throughout.
// Unknown sections and keys are rejected by name, as are keys that belong to
// a different controller kind. Missing keys keep their defaults. `#` and `;`
// start comments. The scenario description is presentation-only and does not
// round-trip.
Scenario parse_config(const std::string& text);
Scenario load_config_file(const std::string& path);

// Emits every key explicitly, shortest round-trip decimals, such that
// parse_config(serialize_config(sc)) reproduces sc field for field
// (description excluded).
std::string serialize_config(const Scenario& sc);

}  // namespace bbsim
