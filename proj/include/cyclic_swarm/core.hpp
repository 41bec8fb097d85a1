#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cyclic_swarm/vec2.hpp"

namespace cyclic_swarm {

/// Per-agent broadcast-detection flags b_i.
class LeaderSet {
 public:
  LeaderSet() = default;
  explicit LeaderSet(std::size_t n, bool value = false) : flags_(n, value ? 1 : 0) {}
  explicit LeaderSet(std::vector<std::uint8_t> flags);
  /// Parses "010000"-style strings.
  static LeaderSet from_string(std::string_view bits);
  static LeaderSet all(std::size_t n) { return LeaderSet(n, true); }

  std::size_t size() const { return flags_.size(); }
  bool operator[](std::size_t i) const { return flags_[i] != 0; }
  void set(std::size_t i, bool v) { flags_.at(i) = v ? 1 : 0; }

  /// n_l
  std::size_t count() const;
  bool all_set() const { return count() == size(); }
  bool none_set() const { return count() == 0; }
  std::string to_string() const;

  const std::vector<std::uint8_t>& raw() const { return flags_; }
  friend bool operator==(const LeaderSet&, const LeaderSet&) = default;

 private:
  std::vector<std::uint8_t> flags_;
};

struct ControlInterval {
  double t_start{0.0};
  Vec2 u_c{};
  LeaderSet leaders;
};

/// Piecewise-constant (U_c, B) over [t0, t_end), right-open intervals.
class ControlSchedule {
 public:
  ControlSchedule() = default;
  /// Throws ConfigError unless t_start is strictly increasing, all leader sets
  /// share one size, values are finite and t_end > first t_start.
  ControlSchedule(std::vector<ControlInterval> intervals, double t_end);

  double t0() const { return intervals_.front().t_start; }
  double t_end() const { return t_end_; }
  std::size_t size() const { return intervals_.size(); }
  const std::vector<ControlInterval>& intervals() const { return intervals_; }
  const ControlInterval& interval(std::size_t k) const { return intervals_.at(k); }

  /// Index of the interval owning t; throws std::out_of_range outside [t0, t_end).
  std::size_t index_at(double t) const;
  /// Like index_at but t_end maps to the last interval (terminal records).
  std::size_t index_at_or_last(double t) const;
  /// Start of interval k+1, or t_end for the last interval.
  double interval_end(std::size_t k) const;

 private:
  std::vector<ControlInterval> intervals_;
  double t_end_{0.0};
};

/// Pure lookup (u_c, B) for t in [t0, t_end).
std::pair<Vec2, LeaderSet> evaluate_schedule(const ControlSchedule& schedule, double t);

enum class Model { Linear, Bugs };

std::string_view to_string(Model m);
Model model_from_string(std::string_view s);

struct SamplingBox {
  double xmin{-5.0};
  double xmax{5.0};
  double ymin{-5.0};
  double ymax{5.0};
};

struct ScenarioConfig {
  Model model{Model::Linear};
  std::size_t n{0};
  std::optional<std::vector<Vec2>> initial_positions;
  std::optional<std::uint64_t> prng_seed;
  SamplingBox sampling_box;
  ControlSchedule schedule;
  double dt{1e-3};
  double capture_epsilon{1e-3};
  std::size_t output_stride{1};

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// Mutable simulator state. Owned by one session/run at a time.
struct SwarmState {
  double t{0.0};
  std::vector<Vec2> positions;
  LeaderSet detect;                    // effective flags (cluster OR)
  std::vector<std::size_t> cluster_of;  // flattened: leader index of each agent
  std::vector<std::uint8_t> active;     // 1 iff agent is a cluster leader

  std::size_t size() const { return positions.size(); }
  bool is_active(std::size_t i) const { return active[i] != 0; }
  std::size_t active_count() const;
  /// Next active agent clockwise from i (the prey of active i). Returns i when
  /// i is the only active agent.
  std::size_t next_active(std::size_t i) const;
  bool gathered() const { return active_count() == 1; }

  /// Recomputes every agent's effective flag as the OR of `leaders` over its
  /// cluster's members.
  void apply_leaders(const LeaderSet& leaders);

  /// Throws ConsistencyError if a cluster invariant is broken.
  void check_invariants() const;

  /// All agents active, cluster_of[i] = i.
  static SwarmState fresh(double t, std::vector<Vec2> positions, const LeaderSet& leaders);
};

/// Positions from the config (explicit or sampled from prng_seed inside the
/// sampling box), all agents active, detect = first interval's leaders.
SwarmState sample_initial_state(const ScenarioConfig& config);

/// Uniform positions in the box; deterministic in the seed.
std::vector<Vec2> sample_positions(std::uint64_t seed, std::size_t n, const SamplingBox& box);

}  // namespace cyclic_swarm
