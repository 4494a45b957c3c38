#pragma once

#include "bbsim/converter.hpp"
#include "bbsim/engine.hpp"

namespace bbsim {

// Lossless conversion ratio vout/vin = d/(1-d).
double ideal_ratio(double d);

// Cycle-averaged steady state at fixed duty, solving
//   d*vin = r_eff*i_l + (1-d)*v_out      (volt-second balance)
//   i_l*(1-d) = v_out / r_load           (charge balance)
// with r_eff the duty-weighted conduction resistance. ESR is excluded; it
// only shapes the ripple, not the average. Reduces to ideal_ratio when all
// resistances vanish.
struct SteadyStatePrediction {
  double duty = 0.0;
  double i_l_avg = 0.0;   // [A]
  double v_out_avg = 0.0; // [V]
};

SteadyStatePrediction averaged_steady_state(const ConverterParams& p, double d);

// Maximum averaged output over duty in [d_min, d_max]. Conduction losses make
// the duty-to-output curve peak and then fall, so regulation targets above
// this value are unreachable and an integrating loop rails at d_max.
SteadyStatePrediction averaged_peak(const ConverterParams& p, double d_min,
                                    double d_max);

// Duty-weighted conduction resistance used by the averaged model.
double effective_resistance(const ConverterParams& p, double d);

// Net inductor volt-seconds over the last full switching period of the
// trace: trapezoidal integral of L*di_l/dt reconstructed per interval from
// the recorded phase. ~0 in periodic steady state. Requires the trace to be
// period-aligned and densely sampled (record_decimation = 1 tail).
double volt_second_balance(const Trace& trace, const ConverterParams& p);

// Net capacitor charge over the last full period: integral of C*dv_c/dt.
double charge_balance(const Trace& trace, const ConverterParams& p);

// Time-weighted mean of v_out (or i_l) over the trailing `window` seconds.
double mean_v_out(const Trace& trace, double window);
double mean_i_l(const Trace& trace, double window);
double mean_duty(const Trace& trace, double window);

struct TransientMetrics {
  double final_mean = 0.0;     // mean v_out over the last 10 periods [V]
  double ss_error = 0.0;       // |final_mean - v_ref| [V]
  double overshoot_pct = 0.0;  // max(v_out - final_mean, 0)/final_mean * 100
  double ripple_pp = 0.0;      // peak-to-peak v_out over the last 10 periods [V]
  double settling_time = 0.0;  // first entry into the band it never leaves [s]
  bool settled = false;        // false if v_out is outside the band at the end
};

// Computes step-response metrics over samples with t >= from_time, with
// times rebased to from_time (the metrics are invariant under a uniform
// time shift). `band` is the settling band as a fraction of final_mean.
TransientMetrics transient_metrics(const Trace& trace, double v_ref, double period,
                                   double band = 0.02, double from_time = 0.0);

}  // namespace bbsim
