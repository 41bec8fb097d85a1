#pragma once

#include <cstddef>

#include "cyclic_swarm/core.hpp"
#include "cyclic_swarm/step_clock.hpp"

namespace cyclic_swarm {

/// Steps `engine` across the config's schedule on the StepClock grid.
/// Interval changes take effect at the boundary instant, before the record
/// for that instant is taken. `on_record(engine)` fires at t0, every
/// output_stride steps and at t_end.
template <class Engine, class OnRecord>
void drive_schedule(Engine& engine, const ScenarioConfig& config, OnRecord&& on_record) {
  const auto& schedule = config.schedule;
  StepClock clock(schedule.t0(), config.dt);
  std::size_t k = 0;
  engine.enter_interval(schedule.interval(0));
  on_record(static_cast<const Engine&>(engine));
  std::size_t steps = 0;
  const double t_end = schedule.t_end();
  while (engine.state().t < t_end) {
    const auto plan = clock.plan(schedule.interval_end(k));
    engine.step_to(plan.t_next);
    clock.commit(plan);
    ++steps;
    const double t = engine.state().t;
    while (k + 1 < schedule.size() && t >= schedule.interval(k + 1).t_start) {
      ++k;
      engine.enter_interval(schedule.interval(k));
    }
    if (steps % config.output_stride == 0 || t >= t_end) on_record(static_cast<const Engine&>(engine));
  }
}

}  // namespace cyclic_swarm
