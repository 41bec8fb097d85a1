#pragma once

// Bearing-only ("bugs") cyclic pursuit: unit-speed chasers that merge with
// their prey on capture, plus the broadcast term b_i U_c. Merged clusters move
// as their foremost member and detect U_c if any member does.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "cyclic_swarm/core.hpp"
#include "cyclic_swarm/trajectory.hpp"

namespace cyclic_swarm {

enum class CaptureCause { Proximity, Overtake };
std::string_view to_string(CaptureCause c);
CaptureCause capture_cause_from_string(std::string_view s);

struct CaptureEvent {
  double t{0.0};
  std::size_t chaser{0};
  std::size_t prey{0};
  CaptureCause cause{CaptureCause::Proximity};
  friend bool operator==(const CaptureEvent&, const CaptureEvent&) = default;
};

enum class RateCase { NeitherDetects, BothDetect, ChaserDetects, PreyDetects };
std::string_view to_string(RateCase c);

/// Instantaneous d_i' broken down by which end of the pair detects U_c.
///   Neither/Both: rate = cos(theta) - 1
///   Chaser:       rate = cos(theta) - |U_c| cos(alpha) - 1
///   Prey:         rate = cos(theta) + |U_c| cos(alpha) - 1
/// theta is the angle between the two pursuit directions (with U_c removed
/// from whichever velocity contains it); alpha is the angle between U_c and
/// the velocity of the agent that does not detect it in the Prey case, or the
/// chaser's pursuit direction in the Chaser case. alpha is 0 when unused.
struct DistanceRateBreakdown {
  std::size_t i{0};
  std::size_t prey{0};
  RateCase case_id{RateCase::NeitherDetects};
  double theta{0.0};
  double alpha{0.0};
  double rate{0.0};                 // case formula
  double inner_product_rate{0.0};   // <p_j' - p_i', p_j - p_i> / d_i
};

/// Active i with prey j: p_i' = (p_j - p_i)/d_i + b_i u_c; inactive agents copy
/// their leader. A single remaining cluster moves with b u_c. Throws
/// EventHandlingError if two distinct active agents coincide.
std::vector<Vec2> bugs_rhs(const SwarmState& state, Vec2 u_c);

/// Both routes to d_i' for active agent i; throws ConsistencyError if they
/// differ by more than 1e-9, std::invalid_argument if i is not a chaser with
/// d_i > 0.
DistanceRateBreakdown distance_rate(const SwarmState& state, Vec2 u_c, std::size_t i);

struct StepOptions {
  /// Split the step when a pair could close its gap within it.
  bool subdivide{true};
};

struct BugsStepResult {
  SwarmState state;
  std::vector<CaptureEvent> events;
};

/// Explicit Euler advance by dt followed by capture resolution to a fixpoint
/// (ascending chaser index). A chaser captures its prey when the post-step gap
/// is <= epsilon (Proximity) or when its displacement relative to the prey,
/// projected on the pre-step line of sight, exceeds the pre-step gap
/// (Overtake). Throws StepTooLargeError if a chaser passes two preys in one
/// unguarded step.
BugsStepResult step_bugs(const SwarmState& state, Vec2 u_c, double dt, double epsilon,
                         StepOptions options = {});

/// In-place variant used by the simulators. Appends to `events`.
void advance_bugs(SwarmState& state, Vec2 u_c, double dt, double epsilon,
                  std::vector<CaptureEvent>& events, StepOptions options = {});

/// Merges every active pair already within epsilon (no motion).
void resolve_proximity(SwarmState& state, double epsilon, std::vector<CaptureEvent>& events);

/// d_i = |p_{i+1} - p_i| over the original ring (0 inside a cluster).
std::vector<double> ring_distances(const SwarmState& state);
double sum_distances(const SwarmState& state);

/// 1 / (2 n^2): |U_c| below this guarantees gathering.
double gather_bound(std::size_t n);

/// t + 2n sum d_i / (1 - 2 n^2 |u_c|) when |u_c| < 1/(2n^2), else nullopt.
std::optional<double> termination_bound(const SwarmState& state, Vec2 u_c);

class BugsEngine {
 public:
  BugsEngine(SwarmState state, double epsilon);

  void enter_interval(const ControlInterval& iv);
  void step_to(double t_next);
  TrajectoryRecord record() const;

  const SwarmState& state() const { return state_; }
  const ControlInterval& interval() const { return interval_; }
  const std::vector<CaptureEvent>& events() const { return events_; }
  std::optional<double> gathered_at() const { return gathered_at_; }

 private:
  void note_gathering();

  SwarmState state_;
  double epsilon_;
  ControlInterval interval_;
  std::vector<CaptureEvent> events_;
  std::optional<double> gathered_at_;
  // Closed-form motion once gathered: p(t) = anchor_p + v (t - anchor_t).
  double anchor_t_{0.0};
  Vec2 anchor_p_{};
};

struct BugsRun {
  std::vector<TrajectoryRecord> records;
  std::vector<CaptureEvent> events;
  std::optional<double> gathered_at;
};

/// Runs a Bugs scenario to the schedule's t_end. After gathering the single
/// cluster advances in closed form.
BugsRun simulate_bugs(const ScenarioConfig& config);

}  // namespace cyclic_swarm
