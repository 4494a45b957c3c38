#pragma once

#include <array>

#include "bbsim/converter.hpp"
#include "bbsim/modulator.hpp"

namespace bbsim {

enum class ControllerKind { OpenLoop, AnalogType3, Digital2p2z };

const char* controller_kind_name(ControllerKind k);

// Continuous Type-III compensator
//   Gc(s) = k (1 + s/wz1)(1 + s/wz2) / [ s (1 + s/wp1)(1 + s/wp2) ]
// whose output is compared against a v_ramp sawtooth to form the duty cycle.
struct Type3Params {
  double k = 0.0;       // [1/s]
  double wz1 = 0.0;     // [rad/s]
  double wz2 = 0.0;
  double wp1 = 0.0;
  double wp2 = 0.0;
  double v_ramp = 1.0;  // PWM ramp amplitude [V]
};

// Discrete compensator u[n] = b0 e[n] + b1 e[n-1] + b2 e[n-2]
//                            - a1 u[n-1] - a2 u[n-2]
// sampled once per switching period. 1 + a1 + a2 = 0 places a pole at z = 1
// (integral action, zero steady-state error).
struct TwoPoleTwoZero {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
  int resolution_bits = 0;  // digital PWM resolution, 0 = continuous
};

struct ControllerSpec {
  ControllerKind kind = ControllerKind::OpenLoop;
  double v_ref = 3.24;       // regulation target [V]
  double open_loop_d = 0.5;  // fixed duty for OpenLoop
  Type3Params type3;
  TwoPoleTwoZero dig;
  DutyLimits limits;
  int adc_bits = 0;  // output-voltage sampling quantization, 0 = ideal

  void validate() const;  // throws std::invalid_argument naming the field
};

// Runtime state for any controller variant; unused halves stay zero.
struct ControllerState {
  // Analog: cascade realization of Gc, one integrator plus two pole states.
  std::array<double, 3> x{};
  // Digital: error and post-clamp output histories.
  double e1 = 0.0, e2 = 0.0;
  double u1 = 0.0, u2 = 0.0;
};

DutyCommand open_loop_command(const ControllerSpec& spec);

// Advances the compensator states over dt with the error held constant
// (co-simulation with the plant integrator grid).
void type3_advance(const Type3Params& g, ControllerState& st, double e, double dt);

// Compensator output; Gc is strictly proper so this depends on states only.
double control_voltage(const Type3Params& g, const ControllerState& st);

// Duty latched at period start: clamp(control_voltage / v_ramp).
DutyCommand type3_command(const ControllerSpec& spec, const ControllerState& st);

// One sample-rate update: runs the recurrence, clamps, stores the post-clamp
// output (anti-windup), then quantizes to the PWM resolution.
DutyCommand digital_2p2z_update(const ControllerSpec& spec, ControllerState& st,
                                double v_out_sampled);

// Loop-shaping defaults. Zeros at the LC resonance, poles at the ESR zero
// (capped at pi*f_sw) and pi*f_sw, gain set for unity loop magnitude at
// f_sw / crossover_divisor around the v_ref operating point.
Type3Params design_type3(const ConverterParams& p, double v_ref,
                         double crossover_divisor, double v_ramp = 1.0,
                         const DutyLimits& lim = {});

// Bilinear transform of the Type-III design with the pi*f_sw pole dropped
// (the sampling itself provides that roll-off), sampled at f_s. The
// integrator pole maps to z = 1, so 1 + a1 + a2 = 0 holds exactly.
TwoPoleTwoZero bilinear_2p2z(const Type3Params& g, double f_s);

// Default closed-loop designs: analog crosses over at f_sw/500, digital at
// f_sw/250 so the discrete loop is decisively the faster of the two.
ControllerSpec design_defaults(const ConverterParams& p, ControllerKind kind,
                               double v_ref = 3.24);

}  // namespace bbsim
