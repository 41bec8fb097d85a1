#pragma once

#include <cstdint>

namespace cyclic_swarm {

/// Fixed-step time grid t0 + k*dt that lands exactly on interval boundaries.
/// A step crossing a boundary is shortened to end on it; the grid resumes on
/// the following step. Step ends within `snap` of a boundary are moved onto it.
class StepClock {
 public:
  struct Plan {
    double t_next;
    bool on_grid;
  };

  StepClock(double t0, double dt) : t0_(t0), dt_(dt), snap_(1e-7 * dt) {}

  Plan plan(double limit) const {
    const double next = grid(k_ + 1);
    if (next >= limit - snap_) return {limit, next <= limit + snap_};
    return {next, true};
  }
  void commit(const Plan& p) {
    if (p.on_grid) ++k_;
  }
  void reset() { k_ = 0; }
  double dt() const { return dt_; }
  double grid(std::int64_t k) const { return t0_ + static_cast<double>(k) * dt_; }

 private:
  double t0_;
  double dt_;
  double snap_;
  std::int64_t k_{0};
};

}  // namespace cyclic_swarm
