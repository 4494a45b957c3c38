#include "bbsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bbsim {

double ideal_ratio(double d) {
  if (!(d >= 0.0 && d < 1.0)) {
    throw std::invalid_argument("duty must lie in [0, 1)");
  }
  return d / (1.0 - d);
}

double effective_resistance(const ConverterParams& p, double d) {
  return d * p.conduction_r(Phase::On) + (1.0 - d) * p.conduction_r(Phase::Off);
}

SteadyStatePrediction averaged_steady_state(const ConverterParams& p, double d) {
  if (!(d > 0.0 && d < 1.0)) {
    throw std::invalid_argument("duty must lie in (0, 1)");
  }
  const double u = 1.0 - d;
  const double r_eff = effective_resistance(p, d);
  const double v_out = d * p.vin * u * p.r_load / (u * u * p.r_load + r_eff);
  return {d, v_out / (p.r_load * u), v_out};
}

SteadyStatePrediction averaged_peak(const ConverterParams& p, double d_min,
                                    double d_max) {
  if (!(d_min > 0.0 && d_min <= d_max && d_max < 1.0)) {
    throw std::invalid_argument("duty range must satisfy 0 < d_min <= d_max < 1");
  }
  // The curve is smooth with a single interior maximum, so a fine grid scan
  // is accurate well past the 1% tolerances this feeds into.
  constexpr int kPoints = 4096;
  SteadyStatePrediction best = averaged_steady_state(p, d_min);
  for (int i = 1; i <= kPoints; ++i) {
    const double d = d_min + (d_max - d_min) * i / kPoints;
    const SteadyStatePrediction cand = averaged_steady_state(p, d);
    if (cand.v_out_avg > best.v_out_avg) {
      best = cand;
    }
  }
  return best;
}

namespace {

// Index of the first sample at or after `t_start` (within alignment slack).
std::size_t window_begin(const Trace& trace, double t_start, double slack) {
  const auto& s = trace.samples;
  auto it = std::lower_bound(s.begin(), s.end(), t_start - slack,
                             [](const TraceSample& a, double t) { return a.t < t; });
  if (it == s.end()) {
    throw std::invalid_argument("trace window is empty");
  }
  return static_cast<std::size_t>(it - s.begin());
}

// Trapezoidal integral of a per-sample quantity, evaluated piecewise with the
// interval's recorded phase so switching discontinuities are respected.
template <typename F>
double integrate_tail(const Trace& trace, const ConverterParams& p, double window,
                      F&& value) {
  if (trace.size() < 2) {
    throw std::invalid_argument("trace too short to integrate");
  }
  const double t_end = trace.back().t;
  const double slack = 1e-6 * window;
  const std::size_t i0 = window_begin(trace, t_end - window, slack);
  if (std::abs(trace[i0].t - (t_end - window)) > 1e-3 * window) {
    throw std::invalid_argument("trace is not aligned to the requested window");
  }
  double acc = 0.0;
  for (std::size_t i = i0; i + 1 < trace.size(); ++i) {
    const Phase ph = trace[i].phase;
    const double h = trace[i + 1].t - trace[i].t;
    acc += 0.5 * h * (value(p, ph, trace[i]) + value(p, ph, trace[i + 1]));
  }
  return acc;
}

double sample_state_v_l(const ConverterParams& p, Phase ph, const TraceSample& s) {
  return p.l * phase_dynamics(p, ph, {s.i_l, s.v_c}).d_i_l;
}

double sample_state_i_c(const ConverterParams& p, Phase ph, const TraceSample& s) {
  return p.c * phase_dynamics(p, ph, {s.i_l, s.v_c}).d_v_c;
}

template <typename F>
double tail_mean(const Trace& trace, double window, F&& value) {
  if (trace.size() < 2) {
    throw std::invalid_argument("trace too short to average");
  }
  const double t_end = trace.back().t;
  const double t0 = std::max(trace[0].t, t_end - window);
  const std::size_t i0 = window_begin(trace, t0, 0.0);
  double acc = 0.0;
  double span = 0.0;
  for (std::size_t i = i0; i + 1 < trace.size(); ++i) {
    const double h = trace[i + 1].t - trace[i].t;
    acc += 0.5 * h * (value(trace[i]) + value(trace[i + 1]));
    span += h;
  }
  if (!(span > 0.0)) {
    throw std::invalid_argument("trace window is degenerate");
  }
  return acc / span;
}

}  // namespace

double volt_second_balance(const Trace& trace, const ConverterParams& p) {
  return integrate_tail(trace, p, p.period(), sample_state_v_l);
}

double charge_balance(const Trace& trace, const ConverterParams& p) {
  return integrate_tail(trace, p, p.period(), sample_state_i_c);
}

double mean_v_out(const Trace& trace, double window) {
  return tail_mean(trace, window, [](const TraceSample& s) { return s.v_out; });
}

double mean_i_l(const Trace& trace, double window) {
  return tail_mean(trace, window, [](const TraceSample& s) { return s.i_l; });
}

double mean_duty(const Trace& trace, double window) {
  return tail_mean(trace, window, [](const TraceSample& s) { return s.duty; });
}

TransientMetrics transient_metrics(const Trace& trace, double v_ref, double period,
                                   double band, double from_time) {
  if (!(period > 0.0) || !(band > 0.0)) {
    throw std::invalid_argument("period and band must be positive");
  }
  const std::size_t i0 = window_begin(trace, from_time, 0.0);
  if (trace.size() - i0 < 2) {
    throw std::invalid_argument("trace window too short for transient metrics");
  }

  TransientMetrics m;
  {
    // final_mean and ripple over the last 10 periods (time-weighted).
    const double t_end = trace.back().t;
    const double t0 = std::max(trace[i0].t, t_end - 10.0 * period);
    const std::size_t j0 = window_begin(trace, t0, 0.0);
    double acc = 0.0, span = 0.0;
    double lo = trace[j0].v_out, hi = trace[j0].v_out;
    for (std::size_t i = j0; i + 1 < trace.size(); ++i) {
      const double h = trace[i + 1].t - trace[i].t;
      acc += 0.5 * h * (trace[i].v_out + trace[i + 1].v_out);
      span += h;
      lo = std::min(lo, trace[i + 1].v_out);
      hi = std::max(hi, trace[i + 1].v_out);
    }
    m.final_mean = span > 0.0 ? acc / span : trace.back().v_out;
    m.ripple_pp = hi - lo;
  }

  m.ss_error = std::abs(m.final_mean - v_ref);

  double peak = trace[i0].v_out;
  for (std::size_t i = i0; i < trace.size(); ++i) {
    peak = std::max(peak, trace[i].v_out);
  }
  m.overshoot_pct = m.final_mean != 0.0
                        ? std::max(peak - m.final_mean, 0.0) / std::abs(m.final_mean) * 100.0
                        : 0.0;

  // Settling: first sample after which v_out never leaves the band.
  const double half_band = band * std::abs(m.final_mean);
  std::size_t last_outside = i0;
  bool any_outside = false;
  for (std::size_t i = i0; i < trace.size(); ++i) {
    if (std::abs(trace[i].v_out - m.final_mean) > half_band) {
      last_outside = i;
      any_outside = true;
    }
  }
  if (!any_outside) {
    m.settled = true;
    m.settling_time = 0.0;
  } else if (last_outside + 1 < trace.size()) {
    m.settled = true;
    m.settling_time = trace[last_outside + 1].t - trace[i0].t;
  } else {
    m.settled = false;
    m.settling_time = trace.back().t - trace[i0].t;
  }
  return m;
}

}  // namespace bbsim
