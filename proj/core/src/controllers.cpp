#include "bbsim/controllers.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace bbsim {

const char* controller_kind_name(ControllerKind k) {
  switch (k) {
    case ControllerKind::OpenLoop:
      return "open_loop";
    case ControllerKind::AnalogType3:
      return "analog_type3";
    case ControllerKind::Digital2p2z:
      return "digital_2p2z";
  }
  return "?";
}

void ControllerSpec::validate() const {
  if (!(limits.min > 0.0 && limits.min <= limits.max && limits.max < 1.0)) {
    throw std::invalid_argument("d_min/d_max must satisfy 0 < d_min <= d_max < 1");
  }
  if (adc_bits < 0 || adc_bits > 48) {
    throw std::invalid_argument("adc_bits must be in [0, 48]");
  }
  switch (kind) {
    case ControllerKind::OpenLoop:
      if (!(open_loop_d >= limits.min && open_loop_d <= limits.max)) {
        throw std::invalid_argument("d must lie within [d_min, d_max]");
      }
      break;
    case ControllerKind::AnalogType3: {
      if (!(v_ref > 0.0)) {
        throw std::invalid_argument("v_ref must be positive");
      }
      const Type3Params& g = type3;
      if (!(g.k > 0.0) || !(g.v_ramp > 0.0)) {
        throw std::invalid_argument("k and v_ramp must be positive");
      }
      if (!(0.0 < g.wz1 && g.wz1 <= g.wz2 && g.wz2 < g.wp1 && g.wp1 <= g.wp2)) {
        throw std::invalid_argument("compensator must satisfy 0 < wz1 <= wz2 < wp1 <= wp2");
      }
      break;
    }
    case ControllerKind::Digital2p2z: {
      if (!(v_ref > 0.0)) {
        throw std::invalid_argument("v_ref must be positive");
      }
      const TwoPoleTwoZero& c = dig;
      const double scale = 1.0 + std::abs(c.a1) + std::abs(c.a2);
      if (std::abs(1.0 + c.a1 + c.a2) > 1e-9 * scale) {
        throw std::invalid_argument("a1/a2 must satisfy 1 + a1 + a2 = 0 (integral action)");
      }
      if (c.resolution_bits < 0 || c.resolution_bits > 48) {
        throw std::invalid_argument("resolution_bits must be in [0, 48]");
      }
      break;
    }
  }
}

DutyCommand open_loop_command(const ControllerSpec& spec) {
  return {clamp_duty(spec.open_loop_d, spec.limits), 0};
}

namespace {

struct CascadeDeriv {
  double dx1, dx2, dx3;
};

// Cascade: integrator k/s, then lead sections (1+s/wz)/(1+s/wp), each with
// unity DC gain. Strictly proper overall, so no direct e feedthrough.
CascadeDeriv cascade_rhs(const Type3Params& g, const std::array<double, 3>& x, double e) {
  const double u2 = (g.wp1 / g.wz1) * (x[0] + (g.wz1 - g.wp1) * x[1]);
  return {g.k * e, x[0] - g.wp1 * x[1], u2 - g.wp2 * x[2]};
}

}  // namespace

void type3_advance(const Type3Params& g, ControllerState& st, double e, double dt) {
  // Op-amp rail model: the compensator output is only meaningful across the
  // PWM ramp span, so once it sits beyond that span (plus headroom) and the
  // error keeps pushing outward, the integrator stops accumulating
  // (conditional integration). Without this, a cold start winds the
  // integrator far past the rails and the loop relaxes into a rail-to-rail
  // limit cycle instead of regulating.
  constexpr double kRailMargin = 0.05;
  const double u = control_voltage(g, st);
  const double lo = -kRailMargin * g.v_ramp;
  const double hi = (1.0 + kRailMargin) * g.v_ramp;
  if ((u >= hi && e > 0.0) || (u <= lo && e < 0.0)) {
    e = 0.0;
  }
  auto& x = st.x;
  const CascadeDeriv k1 = cascade_rhs(g, x, e);
  const std::array<double, 3> x2{x[0] + 0.5 * dt * k1.dx1, x[1] + 0.5 * dt * k1.dx2,
                                 x[2] + 0.5 * dt * k1.dx3};
  const CascadeDeriv k2 = cascade_rhs(g, x2, e);
  const std::array<double, 3> x3{x[0] + 0.5 * dt * k2.dx1, x[1] + 0.5 * dt * k2.dx2,
                                 x[2] + 0.5 * dt * k2.dx3};
  const CascadeDeriv k3 = cascade_rhs(g, x3, e);
  const std::array<double, 3> x4{x[0] + dt * k3.dx1, x[1] + dt * k3.dx2,
                                 x[2] + dt * k3.dx3};
  const CascadeDeriv k4 = cascade_rhs(g, x4, e);
  x[0] += dt / 6.0 * (k1.dx1 + 2.0 * k2.dx1 + 2.0 * k3.dx1 + k4.dx1);
  x[1] += dt / 6.0 * (k1.dx2 + 2.0 * k2.dx2 + 2.0 * k3.dx2 + k4.dx2);
  x[2] += dt / 6.0 * (k1.dx3 + 2.0 * k2.dx3 + 2.0 * k3.dx3 + k4.dx3);
}

double control_voltage(const Type3Params& g, const ControllerState& st) {
  const auto& x = st.x;
  const double u2 = (g.wp1 / g.wz1) * (x[0] + (g.wz1 - g.wp1) * x[1]);
  return (g.wp2 / g.wz2) * (u2 + (g.wz2 - g.wp2) * x[2]);
}

DutyCommand type3_command(const ControllerSpec& spec, const ControllerState& st) {
  const double d = control_voltage(spec.type3, st) / spec.type3.v_ramp;
  return {clamp_duty(d, spec.limits), 0};
}

DutyCommand digital_2p2z_update(const ControllerSpec& spec, ControllerState& st,
                                double v_out_sampled) {
  double v = v_out_sampled;
  if (spec.adc_bits > 0) {
    const double lsb = spec.v_ref * std::ldexp(1.0, -spec.adc_bits);
    v = std::round(v / lsb) * lsb;
  }
  const double e = spec.v_ref - v;
  const TwoPoleTwoZero& c = spec.dig;
  const double u_raw = c.b0 * e + c.b1 * st.e1 + c.b2 * st.e2 - c.a1 * st.u1 - c.a2 * st.u2;
  const double u = clamp_duty(u_raw, spec.limits);  // anti-windup: store post-clamp
  st.e2 = st.e1;
  st.e1 = e;
  st.u2 = st.u1;
  st.u1 = u;
  const double d = clamp_duty(quantize_duty(u, c.resolution_bits), spec.limits);
  return {d, c.resolution_bits};
}

namespace {

// Duty-weighted conduction resistance of the averaged model (ESR excluded).
double r_eff_at(const ConverterParams& p, double d) {
  return d * (p.r_l + p.r_on1 + p.r_on3) + (1.0 - d) * (p.r_l + p.r_on2 + p.r_on4);
}

// Averaged steady state at duty d:
//   d vin = r_eff i_l + (1-d) v_out,   i_l (1-d) = v_out / r_load
double averaged_vout(const ConverterParams& p, double d) {
  const double u = 1.0 - d;
  return d * p.vin * u * p.r_load / (u * u * p.r_load + r_eff_at(p, d));
}

// Smallest duty whose averaged output hits v_ref; bisection on the rising
// part of the (lossy, non-monotone) conversion curve.
double duty_for_target(const ConverterParams& p, double v_ref, const DutyLimits& lim) {
  double lo = lim.min;
  double hi = lim.max;
  // Cap the bracket at the curve peak so the interval stays monotone.
  const double r = r_eff_at(p, 0.5);
  if (r > 0.0) {
    const double u_peak = (-r + std::sqrt(r * r + r * p.r_load)) / p.r_load;
    hi = std::min(hi, 1.0 - u_peak);
  }
  if (averaged_vout(p, hi) < v_ref) {
    throw std::invalid_argument("v_ref is unreachable for these converter parameters");
  }
  if (averaged_vout(p, lo) > v_ref) {
    return lo;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (averaged_vout(p, mid) < v_ref ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Type3Params design_type3(const ConverterParams& p, double v_ref,
                         double crossover_divisor, double v_ramp,
                         const DutyLimits& lim) {
  using std::numbers::pi;
  Type3Params g;
  g.v_ramp = v_ramp;
  g.wz1 = g.wz2 = 1.0 / std::sqrt(p.l * p.c);
  g.wp2 = pi * p.f_sw;
  g.wp1 = p.r_esr > 0.0 ? std::min(1.0 / (p.r_esr * p.c), g.wp2) : g.wp2;

  // Small-signal duty-to-output response of the averaged model around the
  // v_ref operating point:
  //   Gvd(s) = [ (1-D)(vin + V) - I (sL + r_eff) ]
  //          / [ LC s^2 + s (L/R + r_eff C) + (1-D)^2 + r_eff/R ]
  const double d0 = duty_for_target(p, v_ref, lim);
  const double u0 = 1.0 - d0;
  const double V = averaged_vout(p, d0);
  const double I = V / (p.r_load * u0);
  const double re = r_eff_at(p, d0);
  const double wc = 2.0 * pi * p.f_sw / crossover_divisor;

  const std::complex<double> s(0.0, wc);
  const std::complex<double> num = u0 * (p.vin + V) - I * (s * p.l + re);
  const std::complex<double> den =
      p.l * p.c * s * s + s * (p.l / p.r_load + re * p.c) + u0 * u0 + re / p.r_load;
  const double gvd = std::abs(num / den);

  auto mag1p = [&](double w) { return std::abs(1.0 + s / w); };
  g.k = v_ramp * wc * mag1p(g.wp1) * mag1p(g.wp2) / (mag1p(g.wz1) * mag1p(g.wz2) * gvd);
  return g;
}

TwoPoleTwoZero bilinear_2p2z(const Type3Params& g, double f_s) {
  const double K = 2.0 * f_s;
  const double gain = g.k * g.wp1 / (g.wz1 * g.wz2 * K * (g.wp1 + K));
  const double pole = (g.wp1 - K) / (g.wp1 + K);
  TwoPoleTwoZero c;
  c.b0 = gain * (g.wz1 + K) * (g.wz2 + K);
  c.b1 = gain * ((g.wz1 + K) * (g.wz2 - K) + (g.wz1 - K) * (g.wz2 + K));
  c.b2 = gain * (g.wz1 - K) * (g.wz2 - K);
  c.a1 = pole - 1.0;
  c.a2 = -pole;
  return c;
}

ControllerSpec design_defaults(const ConverterParams& p, ControllerKind kind,
                               double v_ref) {
  ControllerSpec spec;
  spec.kind = kind;
  spec.v_ref = v_ref;
  switch (kind) {
    case ControllerKind::OpenLoop:
      spec.open_loop_d = clamp_duty(duty_for_ratio(p.vin, v_ref), spec.limits);
      break;
    case ControllerKind::AnalogType3:
      spec.type3 = design_type3(p, v_ref, 500.0, 1.0, spec.limits);
      break;
    case ControllerKind::Digital2p2z:
      spec.dig = bilinear_2p2z(design_type3(p, v_ref, 250.0, 1.0, spec.limits), p.f_sw);
      break;
  }
  spec.validate();
  return spec;
}

}  // namespace bbsim
