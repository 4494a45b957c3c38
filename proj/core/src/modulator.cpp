#include "bbsim/modulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bbsim {

namespace {

// Nudges `last` so that left-to-right accumulation of the previous segment
// durations plus `last` reproduces `total` bit-exactly. Terminates in a few
// iterations because floats with fl(partial + x) == total exist within one
// ulp of total - partial.
double close_exactly(double total, double partial, double last) {
  while (partial + last > total) {
    last = std::nextafter(last, -std::numeric_limits<double>::infinity());
  }
  while (partial + last < total) {
    last = std::nextafter(last, std::numeric_limits<double>::infinity());
  }
  return last;
}

}  // namespace

SwitchSchedule schedule_period(const DutyCommand& cmd, const ConverterParams& p) {
  const double T = p.period();
  const double td = p.t_dead;
  const double t_on = cmd.d * T - td;
  const double t_off = (1.0 - cmd.d) * T - td;
  if (!(cmd.d > 0.0 && cmd.d < 1.0) || !(t_on > 0.0) || !(t_off > 0.0)) {
    throw SimError("duty cycle " + std::to_string(cmd.d) +
                   " is unrealizable with t_dead = " + std::to_string(td) + " s");
  }

  SwitchSchedule s;
  if (td == 0.0) {
    const double rem = close_exactly(T, t_on, T - t_on);
    s.seg[0] = {Phase::On, t_on};
    s.seg[1] = {Phase::Off, rem};
    s.count = 2;
  } else {
    const double partial = (t_on + td) + t_off;
    const double rem = close_exactly(T, partial, T - partial);
    if (!(rem > 0.0)) {
      throw SimError("dead-time leaves no room in the switching period");
    }
    s.seg[0] = {Phase::On, t_on};
    s.seg[1] = {Phase::Dead, td};
    s.seg[2] = {Phase::Off, t_off};
    s.seg[3] = {Phase::Dead, rem};
    s.count = 4;
  }
  return s;
}

double duty_for_ratio(double vin, double vout) {
  return vout / (vin + vout);
}

double quantize_duty(double d, int bits) {
  if (bits <= 0) {
    return d;
  }
  const double steps = std::ldexp(1.0, bits);  // 2^bits
  return std::round(d * steps) / steps;
}

double clamp_duty(double d, const DutyLimits& lim) {
  return std::clamp(d, lim.min, lim.max);
}

}  // namespace bbsim
