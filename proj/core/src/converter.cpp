#include "bbsim/converter.hpp"

namespace bbsim {

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::On:
      return "ON";
    case Phase::Off:
      return "OFF";
    case Phase::Dead:
      return "DEAD";
  }
  return "?";
}

double ConverterParams::conduction_r(Phase ph) const {
  switch (ph) {
    case Phase::On:
      return r_l + r_on1 + r_on3;
    case Phase::Off:
      return r_l + r_on2 + r_on4;
    case Phase::Dead:
      return r_l;  // diodes carry the current, drops handled separately
  }
  return r_l;
}

void ConverterParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(name) + " must be positive and finite");
    }
  };
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(name) + " must be non-negative and finite");
    }
  };
  positive(vin, "vin");
  positive(l, "l");
  positive(c, "c");
  positive(r_load, "r_load");
  positive(f_sw, "f_sw");
  non_negative(r_l, "r_l");
  non_negative(r_on1, "r_on1");
  non_negative(r_on2, "r_on2");
  non_negative(r_on3, "r_on3");
  non_negative(r_on4, "r_on4");
  non_negative(r_esr, "r_esr");
  non_negative(t_dead, "t_dead");
  non_negative(v_diode, "v_diode");
  if (!(2.0 * t_dead < period())) {
    throw std::invalid_argument("t_dead must satisfy 2*t_dead < 1/f_sw");
  }
}

double output_voltage(const ConverterParams& p, Phase ph, const StateVector& s) {
  const double divider = p.r_load / (p.r_load + p.r_esr);
  if (ph == Phase::On) {
    return s.v_c * divider;
  }
  return (s.v_c + p.r_esr * s.i_l) * divider;
}

StateDerivative phase_dynamics(const ConverterParams& p, Phase ph, const StateVector& s) {
  const double v_out = output_voltage(p, ph, s);
  const double i_out = v_out / p.r_load;
  switch (ph) {
    case Phase::On:
      return {(p.vin - p.conduction_r(Phase::On) * s.i_l) / p.l, -i_out / p.c};
    case Phase::Off:
      return {-(p.conduction_r(Phase::Off) * s.i_l + v_out) / p.l, (s.i_l - i_out) / p.c};
    case Phase::Dead: {
      const double sign = s.i_l > 0.0 ? 1.0 : (s.i_l < 0.0 ? -1.0 : 0.0);
      const double drop = p.r_l * s.i_l + 2.0 * p.v_diode * sign;
      return {-(drop + v_out) / p.l, (s.i_l - i_out) / p.c};
    }
  }
  return {};
}

namespace {

// Off-topology coupling terms shared by Off and Dead.
//   alpha  ESR divider r_load / (r_load + r_esr)
//   r_par  r_esr parallel r_load
//   g      1 / (c * (r_load + r_esr)), capacitor discharge rate into the load
struct OffCoupling {
  double alpha, r_par, g;
};

OffCoupling off_coupling(const ConverterParams& p) {
  const double alpha = p.r_load / (p.r_load + p.r_esr);
  return {alpha, p.r_esr * alpha, 1.0 / (p.c * (p.r_load + p.r_esr))};
}

}  // namespace

AffineSystem phase_affine(const ConverterParams& p, Phase ph) {
  const OffCoupling k = off_coupling(p);
  AffineSystem sys;
  switch (ph) {
    case Phase::On:
      sys.a00 = -p.conduction_r(Phase::On) / p.l;
      sys.a11 = -k.g;
      sys.b0 = p.vin / p.l;
      break;
    case Phase::Off:
      sys.a00 = -(p.conduction_r(Phase::Off) + k.r_par) / p.l;
      sys.a01 = -k.alpha / p.l;
      sys.a10 = k.alpha / p.c;
      sys.a11 = -k.g;
      break;
    case Phase::Dead:
      return dead_branch_affine(p, 1);
  }
  return sys;
}

AffineSystem dead_branch_affine(const ConverterParams& p, int sign) {
  const OffCoupling k = off_coupling(p);
  AffineSystem sys;
  if (sign == 0) {
    // Diodes blocked: i_l stays at zero, the capacitor alone feeds the load.
    sys.a11 = -k.g;
    return sys;
  }
  sys.a00 = -(p.r_l + k.r_par) / p.l;
  sys.a01 = -k.alpha / p.l;
  sys.a10 = k.alpha / p.c;
  sys.a11 = -k.g;
  sys.b0 = -2.0 * p.v_diode * static_cast<double>(sign) / p.l;
  return sys;
}

}  // namespace bbsim
