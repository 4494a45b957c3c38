#pragma once

#include <cstdint>
#include <vector>

#include "bbsim/controllers.hpp"
#include "bbsim/converter.hpp"
#include "bbsim/modulator.hpp"

namespace bbsim {

enum class IntegratorKind { Rk4, Exact };

struct SimConfig {
  double t_end = 0.0;            // [s]
  int steps_per_period = 64;     // integrator substeps per switching period
  int record_decimation = 1;     // record every k-th integration step
  IntegratorKind integrator = IntegratorKind::Rk4;
  double initial_i_l = 0.0;      // cold start is (0, 0)
  double initial_v_c = 0.0;

  void validate() const;
};

// Piecewise-constant parameter change applied exactly at time t by splitting
// the integration step there. Changing vin or r_load never alters f_sw, so
// period bookkeeping stays valid across events.
struct StepEvent {
  enum class Target { Vin, RLoad };
  double t = 0.0;
  Target target = Target::Vin;
  double value = 0.0;
};

// One recorded sample. `phase` and `v_out` describe the interval that STARTS
// at time t (On again at each period boundary), so a piecewise trapezoidal
// rule over samples respects the switching boundaries. `duty` is the most
// recently latched command.
struct TraceSample {
  double t;
  double i_l;
  double v_c;
  double v_out;
  double duty;
  Phase phase;
};

struct Trace {
  std::vector<TraceSample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  const TraceSample& back() const { return samples.back(); }
  const TraceSample& operator[](std::size_t i) const { return samples[i]; }
};

// Resumable fixed-step simulator.
//
// Time is kept as (period index, offset-within-period); absolute time is
// recomputed as period*T + offset, never accumulated, so there is no drift
// across millions of periods. The duty command is latched at each period
// start and expanded to the segment schedule; integration steps never span a
// segment boundary, a StepEvent time, or an advance_to() target.
class Simulator {
 public:
  Simulator(ConverterParams params, ControllerSpec controller, SimConfig cfg,
            std::vector<StepEvent> events = {});

  // Advances simulation time to `t_target` (absolute seconds), recording per
  // the current decimation. Throws SimError on divergence.
  void advance_to(double t_target);

  // Records the current state if the last sample is older than now.
  void record_now();

  void set_record_decimation(int k);

  double time() const;
  StateVector state() const { return state_; }
  double latched_duty() const { return duty_.d; }
  const ConverterParams& current_params() const { return params_; }
  const Trace& trace() const { return trace_; }
  Trace take_trace() { return std::move(trace_); }

 private:
  struct SegmentPlan {
    Phase phase;
    double begin;  // offset of segment start within the period
    double end;
    int substeps;
  };

  double period_start() const;
  void begin_period();
  void enter_segment();
  void refresh_affine();
  void apply_due_events(double now);
  void step_within_period(double target_offset);
  void integrate(double dt);
  void maybe_record();

  ConverterParams params_;
  ControllerSpec ctrl_spec_;
  SimConfig cfg_;
  std::vector<StepEvent> events_;
  std::size_t next_event_ = 0;

  ControllerState ctrl_{};
  DutyCommand duty_{};
  StateVector state_{};

  std::int64_t period_ = 0;
  double offset_ = 0.0;
  bool in_period_ = false;
  std::array<SegmentPlan, 4> plan_{};
  int plan_count_ = 0;
  int seg_ = 0;
  int sub_ = 0;
  int dead_sign_ = 0;
  AffineSystem affine_{};

  Trace trace_;
  std::int64_t step_count_ = 0;
  int decimation_ = 1;
};

// Runs a complete simulation and returns the trace, including the initial
// state and a final sample exactly at t_end.
Trace run(const ConverterParams& params, const ControllerSpec& controller,
          const SimConfig& cfg, const std::vector<StepEvent>& events = {});

}  // namespace bbsim
