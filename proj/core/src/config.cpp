#include "bbsim/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cerrno>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace bbsim {

namespace {

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  return s.substr(0, s.find_first_of("#;"));
}

double parse_double(const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(fmt::format("line {}: '{}' is not a finite number for key '{}'",
                                  e.line, e.value, e.key));
  }
  return v;
}

int parse_int(const Entry& e) {
  const char* s = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || errno == ERANGE || v < INT_MIN || v > INT_MAX) {
    throw ConfigError(fmt::format("line {}: '{}' is not an integer for key '{}'", e.line,
                                  e.value, e.key));
  }
  return static_cast<int>(v);
}

ControllerKind parse_kind(const Entry& e) {
  if (e.value == "open_loop") {
    return ControllerKind::OpenLoop;
  }
  if (e.value == "analog_type3") {
    return ControllerKind::AnalogType3;
  }
  if (e.value == "digital_2p2z") {
    return ControllerKind::Digital2p2z;
  }
  throw ConfigError(fmt::format(
      "line {}: unknown controller kind '{}' (open_loop | analog_type3 | digital_2p2z)",
      e.line, e.value));
}

IntegratorKind parse_integrator(const Entry& e) {
  if (e.value == "rk4") {
    return IntegratorKind::Rk4;
  }
  if (e.value == "exact") {
    return IntegratorKind::Exact;
  }
  throw ConfigError(
      fmt::format("line {}: unknown integrator '{}' (rk4 | exact)", e.line, e.value));
}

void apply_converter(Scenario& sc, const Entry& e) {
  ConverterParams& p = sc.converter;
  if (e.key == "vin") {
    p.vin = parse_double(e);
  } else if (e.key == "l") {
    p.l = parse_double(e);
  } else if (e.key == "c") {
    p.c = parse_double(e);
  } else if (e.key == "r_l") {
    p.r_l = parse_double(e);
  } else if (e.key == "r_on1") {
    p.r_on1 = parse_double(e);
  } else if (e.key == "r_on2") {
    p.r_on2 = parse_double(e);
  } else if (e.key == "r_on3") {
    p.r_on3 = parse_double(e);
  } else if (e.key == "r_on4") {
    p.r_on4 = parse_double(e);
  } else if (e.key == "r_esr") {
    p.r_esr = parse_double(e);
  } else if (e.key == "r_load") {
    p.r_load = parse_double(e);
  } else if (e.key == "f_sw") {
    p.f_sw = parse_double(e);
  } else if (e.key == "t_dead") {
    p.t_dead = parse_double(e);
  } else if (e.key == "v_diode") {
    p.v_diode = parse_double(e);
  } else {
    throw ConfigError(
        fmt::format("line {}: unknown key '{}' in [converter]", e.line, e.key));
  }
}

bool is_open_key(const std::string& k) { return k == "d"; }

bool is_analog_key(const std::string& k) {
  return k == "k" || k == "wz1" || k == "wz2" || k == "wp1" || k == "wp2" ||
         k == "v_ramp";
}

bool is_digital_key(const std::string& k) {
  return k == "b0" || k == "b1" || k == "b2" || k == "a1" || k == "a2" ||
         k == "resolution_bits";
}

void apply_controller(Scenario& sc, const Entry& e) {
  ControllerSpec& c = sc.controller;
  if (e.key == "kind") {
    return;  // consumed by the first pass
  }
  if (e.key == "v_ref") {
    c.v_ref = parse_double(e);
  } else if (e.key == "d_min") {
    c.limits.min = parse_double(e);
  } else if (e.key == "d_max") {
    c.limits.max = parse_double(e);
  } else if (e.key == "adc_bits") {
    c.adc_bits = parse_int(e);
  } else if (is_open_key(e.key)) {
    if (c.kind != ControllerKind::OpenLoop) {
      throw ConfigError(fmt::format(
          "line {}: key '{}' in [controller] requires kind = open_loop", e.line, e.key));
    }
    c.open_loop_d = parse_double(e);
  } else if (is_analog_key(e.key)) {
    if (c.kind != ControllerKind::AnalogType3) {
      throw ConfigError(
          fmt::format("line {}: key '{}' in [controller] requires kind = analog_type3",
                      e.line, e.key));
    }
    if (e.key == "k") {
      c.type3.k = parse_double(e);
    } else if (e.key == "wz1") {
      c.type3.wz1 = parse_double(e);
    } else if (e.key == "wz2") {
      c.type3.wz2 = parse_double(e);
    } else if (e.key == "wp1") {
      c.type3.wp1 = parse_double(e);
    } else if (e.key == "wp2") {
      c.type3.wp2 = parse_double(e);
    } else {
      c.type3.v_ramp = parse_double(e);
    }
  } else if (is_digital_key(e.key)) {
    if (c.kind != ControllerKind::Digital2p2z) {
      throw ConfigError(
          fmt::format("line {}: key '{}' in [controller] requires kind = digital_2p2z",
                      e.line, e.key));
    }
    if (e.key == "b0") {
      c.dig.b0 = parse_double(e);
    } else if (e.key == "b1") {
      c.dig.b1 = parse_double(e);
    } else if (e.key == "b2") {
      c.dig.b2 = parse_double(e);
    } else if (e.key == "a1") {
      c.dig.a1 = parse_double(e);
    } else if (e.key == "a2") {
      c.dig.a2 = parse_double(e);
    } else {
      c.dig.resolution_bits = parse_int(e);
    }
  } else {
    throw ConfigError(
        fmt::format("line {}: unknown key '{}' in [controller]", e.line, e.key));
  }
}

void apply_sim(Scenario& sc, const Entry& e) {
  SimConfig& s = sc.sim;
  if (e.key == "name") {
    sc.name = e.value;
  } else if (e.key == "t_end") {
    s.t_end = parse_double(e);
  } else if (e.key == "steps_per_period") {
    s.steps_per_period = parse_int(e);
  } else if (e.key == "record_decimation") {
    s.record_decimation = parse_int(e);
  } else if (e.key == "integrator") {
    s.integrator = parse_integrator(e);
  } else if (e.key == "initial_i_l") {
    s.initial_i_l = parse_double(e);
  } else if (e.key == "initial_v_c") {
    s.initial_v_c = parse_double(e);
  } else {
    throw ConfigError(fmt::format("line {}: unknown key '{}' in [sim]", e.line, e.key));
  }
}

StepEvent parse_event(const Entry& e) {
  std::istringstream in(e.value);
  std::string t_tok, target_tok, value_tok, extra;
  if (!(in >> t_tok >> target_tok >> value_tok) || (in >> extra)) {
    throw ConfigError(fmt::format(
        "line {}: expected 'step = <t> <vin|r_load> <value>', got '{}'", e.line,
        e.value));
  }
  StepEvent ev;
  ev.t = parse_double({e.section, "step time", t_tok, e.line});
  if (target_tok == "vin") {
    ev.target = StepEvent::Target::Vin;
  } else if (target_tok == "r_load") {
    ev.target = StepEvent::Target::RLoad;
  } else {
    throw ConfigError(fmt::format("line {}: unknown step target '{}' (vin | r_load)",
                                  e.line, target_tok));
  }
  ev.value = parse_double({e.section, "step value", value_tok, e.line});
  if (!(ev.t >= 0.0)) {
    throw ConfigError(fmt::format("line {}: step time must be >= 0", e.line));
  }
  if (!(ev.value > 0.0)) {
    throw ConfigError(fmt::format("line {}: step value must be positive", e.line));
  }
  return ev;
}

const char* integrator_name(IntegratorKind k) {
  return k == IntegratorKind::Rk4 ? "rk4" : "exact";
}

}  // namespace

Scenario parse_config(const std::string& text) {
  std::vector<Entry> entries;
  std::vector<Entry> event_entries;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(fmt::format("line {}: malformed section header '{}'", line_no, line));
      }
      section = line.substr(1, line.size() - 2);
      if (section != "converter" && section != "controller" && section != "sim" &&
          section != "events") {
        throw ConfigError(fmt::format("line {}: unknown section [{}]", line_no, section));
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    }
    Entry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (section.empty()) {
      throw ConfigError(fmt::format("line {}: key '{}' appears outside any section",
                                    line_no, e.key));
    }
    if (e.key.empty()) {
      throw ConfigError(fmt::format("line {}: empty key", line_no));
    }
    if (section == "events") {
      if (e.key != "step") {
        throw ConfigError(
            fmt::format("line {}: unknown key '{}' in [events]", line_no, e.key));
      }
      event_entries.push_back(std::move(e));
      continue;
    }
    if (!seen.insert(section + "\x1f" + e.key).second) {
      throw ConfigError(
          fmt::format("line {}: duplicate key '{}' in [{}]", line_no, e.key, section));
    }
    entries.push_back(std::move(e));
  }

  Scenario sc;
  // First pass fixes the controller kind so per-kind keys can be checked no
  // matter where 'kind' appears in the document.
  for (const Entry& e : entries) {
    if (e.section == "controller" && e.key == "kind") {
      sc.controller.kind = parse_kind(e);
    }
  }
  for (const Entry& e : entries) {
    if (e.section == "converter") {
      apply_converter(sc, e);
    } else if (e.section == "controller") {
      apply_controller(sc, e);
    } else {
      apply_sim(sc, e);
    }
  }
  for (const Entry& e : event_entries) {
    sc.events.push_back(parse_event(e));
  }
  std::stable_sort(sc.events.begin(), sc.events.end(),
                   [](const StepEvent& a, const StepEvent& b) { return a.t < b.t; });

  try {
    sc.converter.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(fmt::format("[converter] {}", ex.what()));
  }
  try {
    sc.controller.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(fmt::format("[controller] {}", ex.what()));
  }
  try {
    sc.sim.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(fmt::format("[sim] {}", ex.what()));
  }
  return sc;
}

Scenario load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError(fmt::format("cannot open config file '{}'", path));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const Scenario& sc) {
  std::string out;
  const ConverterParams& p = sc.converter;
  out += "[converter]\n";
  out += fmt::format("vin = {}\n", p.vin);
  out += fmt::format("l = {}\n", p.l);
  out += fmt::format("c = {}\n", p.c);
  out += fmt::format("r_l = {}\n", p.r_l);
  out += fmt::format("r_on1 = {}\n", p.r_on1);
  out += fmt::format("r_on2 = {}\n", p.r_on2);
  out += fmt::format("r_on3 = {}\n", p.r_on3);
  out += fmt::format("r_on4 = {}\n", p.r_on4);
  out += fmt::format("r_esr = {}\n", p.r_esr);
  out += fmt::format("r_load = {}\n", p.r_load);
  out += fmt::format("f_sw = {}\n", p.f_sw);
  out += fmt::format("t_dead = {}\n", p.t_dead);
  out += fmt::format("v_diode = {}\n", p.v_diode);

  const ControllerSpec& c = sc.controller;
  out += "\n[controller]\n";
  out += fmt::format("kind = {}\n", controller_kind_name(c.kind));
  out += fmt::format("v_ref = {}\n", c.v_ref);
  out += fmt::format("d_min = {}\n", c.limits.min);
  out += fmt::format("d_max = {}\n", c.limits.max);
  out += fmt::format("adc_bits = {}\n", c.adc_bits);
  switch (c.kind) {
    case ControllerKind::OpenLoop:
      out += fmt::format("d = {}\n", c.open_loop_d);
      break;
    case ControllerKind::AnalogType3:
      out += fmt::format("k = {}\n", c.type3.k);
      out += fmt::format("wz1 = {}\n", c.type3.wz1);
      out += fmt::format("wz2 = {}\n", c.type3.wz2);
      out += fmt::format("wp1 = {}\n", c.type3.wp1);
      out += fmt::format("wp2 = {}\n", c.type3.wp2);
      out += fmt::format("v_ramp = {}\n", c.type3.v_ramp);
      break;
    case ControllerKind::Digital2p2z:
      out += fmt::format("b0 = {}\n", c.dig.b0);
      out += fmt::format("b1 = {}\n", c.dig.b1);
      out += fmt::format("b2 = {}\n", c.dig.b2);
      out += fmt::format("a1 = {}\n", c.dig.a1);
      out += fmt::format("a2 = {}\n", c.dig.a2);
      out += fmt::format("resolution_bits = {}\n", c.dig.resolution_bits);
      break;
  }

  const SimConfig& s = sc.sim;
  out += "\n[sim]\n";
  if (!sc.name.empty()) {
    out += fmt::format("name = {}\n", sc.name);
  }
  out += fmt::format("t_end = {}\n", s.t_end);
  out += fmt::format("steps_per_period = {}\n", s.steps_per_period);
  out += fmt::format("record_decimation = {}\n", s.record_decimation);
  out += fmt::format("integrator = {}\n", integrator_name(s.integrator));
  out += fmt::format("initial_i_l = {}\n", s.initial_i_l);
  out += fmt::format("initial_v_c = {}\n", s.initial_v_c);

  if (!sc.events.empty()) {
    out += "\n[events]\n";
    for (const StepEvent& ev : sc.events) {
      out += fmt::format("step = {} {} {}\n", ev.t,
                         ev.target == StepEvent::Target::Vin ? "vin" : "r_load",
                         ev.value);
    }
  }
  return out;
}

}  // namespace bbsim
