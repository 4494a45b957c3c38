#pragma once

#include <array>

#include "bbsim/converter.hpp"

namespace bbsim {

// Saturation limits applied to every duty command before scheduling.
struct DutyLimits {
  double min = 0.05;
  double max = 0.95;
};

// One latched duty-cycle request. The producer quantizes d for digital PWM
// (see quantize_duty) before forming the command; resolution_bits records the
// DPWM resolution that was used, 0 meaning continuous. schedule_period takes
// d verbatim, so a clamped command may sit off the quantization grid at the
// saturation limits, which is exactly how a saturating DPWM behaves.
struct DutyCommand {
  double d = 0.5;
  int resolution_bits = 0;
};

struct Segment {
  Phase phase;
  double duration;  // [s]
};

// One switching period of a trailing-edge modulator with symmetric dead-time:
// [On d*T - t_dead, Dead t_dead, Off (1-d)*T - t_dead, Dead t_dead], with
// zero-duration Dead segments omitted. The last duration is adjusted by at
// most a few ulp so the left-to-right sum closes exactly at T.
struct SwitchSchedule {
  std::array<Segment, 4> seg{};
  int count = 0;

  const Segment* begin() const { return seg.data(); }
  const Segment* end() const { return seg.data() + count; }
};

// Builds the period schedule. Throws SimError if the duty command leaves no
// room for a conduction interval (d*T <= t_dead or (1-d)*T <= t_dead).
SwitchSchedule schedule_period(const DutyCommand& cmd, const ConverterParams& p);

// Ideal lossless duty for a conversion ratio: inverts vout/vin = d/(1-d).
double duty_for_ratio(double vin, double vout);

// Nearest multiple of 2^-bits; bits = 0 returns d unchanged. Idempotent.
double quantize_duty(double d, int bits);

double clamp_duty(double d, const DutyLimits& lim);

}  // namespace bbsim
