#pragma once

#include <vector>

#include "cyclic_swarm/core.hpp"
#include "cyclic_swarm/trajectory.hpp"

namespace cyclic_swarm {

/// p_i' = p_{i+1} - p_i + b_i u_c. Requires every agent active.
std::vector<Vec2> linear_rhs(const SwarmState& state, Vec2 u_c, const LeaderSet& leaders);

/// Classical 4-stage Runge-Kutta stepping of linear cyclic pursuit.
class LinearEngine {
 public:
  explicit LinearEngine(SwarmState state);

  void enter_interval(const ControlInterval& iv);
  /// Advances to t_next (> state().t) under the current interval.
  void step_to(double t_next);
  TrajectoryRecord record() const;

  const SwarmState& state() const { return state_; }
  const ControlInterval& interval() const { return interval_; }

 private:
  SwarmState state_;
  ControlInterval interval_;
  std::vector<Vec2> k1_, k2_, k3_, k4_, tmp_;
};

/// Runs a Linear scenario over its whole schedule. Emits the t0 record, one
/// record every output_stride steps and always the t_end record.
std::vector<TrajectoryRecord> simulate_linear(const ScenarioConfig& config);

}  // namespace cyclic_swarm
