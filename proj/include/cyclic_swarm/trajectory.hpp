#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cyclic_swarm/vec2.hpp"

namespace cyclic_swarm {

/// One sampled instant of a run. `distances`, `active` and `detect` are only
/// filled for the bugs model (empty for linear runs).
struct TrajectoryRecord {
  double t{0.0};
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;  // RHS evaluated at the recorded state
  Vec2 u_c{};
  std::size_t n_l{0};
  std::vector<double> distances;       // d_i = |p_{i+1} - p_i|
  std::vector<std::uint8_t> active;
  std::vector<std::uint8_t> detect;    // effective flags
};

}  // namespace cyclic_swarm
