#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace bbsim {

// Raised for runtime simulation failures (divergence, unrealizable switching
// schedule). The CLI maps this to exit code 2.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Conduction topology of the four-switch non-inverting stage over one
// interval of the switching period.
//
//   On   M1/M3 closed: the supply magnetizes the inductor, the load runs
//        off the output capacitor alone.
//   Off  M2/M4 closed: the inductor is in series with the output and
//        demagnetizes into capacitor and load.
//   Dead all switches open: the inductor current freewheels through the
//        body diodes in the Off topology, with two diode drops opposing it.
enum class Phase { On, Off, Dead };

const char* phase_name(Phase p);

// Electrical constants of the power stage, SI base units throughout.
struct ConverterParams {
  double vin = 2.5;      // supply voltage [V]
  double l = 280e-9;     // inductance [H]
  double c = 250e-9;     // output capacitance [F]
  double r_l = 0.0;      // inductor winding resistance [ohm]
  double r_on1 = 0.0;    // switch on-resistances M1..M4 [ohm]
  double r_on2 = 0.0;
  double r_on3 = 0.0;
  double r_on4 = 0.0;
  double r_esr = 0.0;    // capacitor equivalent series resistance [ohm]
  double r_load = 10.0;  // resistive load [ohm]
  double f_sw = 50e6;    // switching frequency [Hz]
  double t_dead = 0.0;   // dead-time inserted at each switching edge [s]
  double v_diode = 0.7;  // body-diode forward drop [V]

  double period() const { return 1.0 / f_sw; }

  // Series conduction resistance seen by the inductor in a phase.
  double conduction_r(Phase ph) const;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Plant state: inductor current and capacitor voltage. The output voltage is
// an algebraic function of the state, not a state itself.
struct StateVector {
  double i_l = 0.0;  // [A]
  double v_c = 0.0;  // [V]

  bool finite() const { return std::isfinite(i_l) && std::isfinite(v_c); }
};

struct StateDerivative {
  double d_i_l = 0.0;  // [A/s]
  double d_v_c = 0.0;  // [V/s]
};

// Switched-linear model of one phase: dx/dt = a*x + b with x = (i_l, v_c).
struct AffineSystem {
  double a00 = 0.0, a01 = 0.0;
  double a10 = 0.0, a11 = 0.0;
  double b0 = 0.0, b1 = 0.0;

  StateDerivative rhs(const StateVector& s) const {
    return {a00 * s.i_l + a01 * s.v_c + b0, a10 * s.i_l + a11 * s.v_c + b1};
  }
};

// Output voltage with the load closure i_out = v_out / r_load solved through
// the ESR divider. During On the inductor is disconnected from the output;
// during Off/Dead its current splits between capacitor and load.
double output_voltage(const ConverterParams& p, Phase ph, const StateVector& s);

// Right-hand side of the switched state equations. For Dead the diode drop
// enters as 2*v_diode*sign(i_l); the zero-current blocking behaviour is the
// integrator loop's responsibility.
StateDerivative phase_dynamics(const ConverterParams& p, Phase ph, const StateVector& s);

// Affine form of phase_dynamics. Dead refers to the i_l > 0 branch.
AffineSystem phase_affine(const ConverterParams& p, Phase ph);

// Dead-time branches: sign = +1/-1 selects the diode conduction direction,
// sign = 0 is the blocked state (i_l pinned at zero, capacitor feeds the load).
AffineSystem dead_branch_affine(const ConverterParams& p, int sign);

}  // namespace bbsim
