#pragma once

// One live simulation steered by an external controller. Commands are queued
// and applied at step boundaries; each accepted U_c / leader change starts a
// new piecewise-constant interval at the current time, so the applied history
// is an ordinary ControlSchedule that replays through simulate_linear or
// simulate_bugs.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclic_swarm/bugs_sim.hpp"
#include "cyclic_swarm/core.hpp"
#include "cyclic_swarm/linear_sim.hpp"
#include "cyclic_swarm/step_clock.hpp"

namespace cyclic_swarm {

inline constexpr int kProtocolVersion = 1;

enum class CommandKind { SetUc, SetLeaders, Pause, Resume, Reset, SetSpeed };
std::string_view to_string(CommandKind k);

struct SessionCommand {
  CommandKind kind{CommandKind::Pause};
  Vec2 u_c{};                          // SetUc
  LeaderSet leaders;                   // SetLeaders
  std::optional<std::uint64_t> seed;   // Reset
  double speed{1.0};                   // SetSpeed

  static SessionCommand set_uc(Vec2 u) { return {CommandKind::SetUc, u, {}, {}, 1.0}; }
  static SessionCommand set_leaders(LeaderSet b) { return {CommandKind::SetLeaders, {}, std::move(b), {}, 1.0}; }
  static SessionCommand pause() { return {CommandKind::Pause, {}, {}, {}, 1.0}; }
  static SessionCommand resume() { return {CommandKind::Resume, {}, {}, {}, 1.0}; }
  static SessionCommand reset(std::optional<std::uint64_t> s = {}) { return {CommandKind::Reset, {}, {}, s, 1.0}; }
  static SessionCommand set_speed(double x) { return {CommandKind::SetSpeed, {}, {}, {}, x}; }
};

/// Parses one protocol line, e.g. {"v":1,"cmd":"set_uc","ux":6,"uy":3}.
/// Throws ParseError on malformed JSON, a missing/unsupported "v" or an
/// unknown command.
SessionCommand parse_command(std::string_view line);
nlohmann::json command_to_json(const SessionCommand& cmd);

struct SessionReply {
  std::uint64_t client{0};
  std::string cmd;
  bool accepted{false};
  double t{0.0};
  std::string reason;
};
nlohmann::json reply_to_json(const SessionReply& r);

struct SessionSnapshot {
  std::uint64_t seq{0};
  double t{0.0};
  Model model{Model::Linear};
  std::vector<Vec2> positions;
  std::vector<std::uint8_t> active;
  std::vector<std::uint8_t> detect;
  Vec2 u_c{};
  std::size_t n_l{0};
  Vec2 predicted_velocity{};
  Vec2 mean_velocity{};
  std::vector<double> distances;   // bugs only
  bool gathered{false};
  bool paused{false};
  double speed{1.0};
};
nlohmann::json snapshot_to_json(const SessionSnapshot& s);

struct SessionOptions {
  /// Simulation steps per tick at speed 1.
  std::size_t cadence_steps{50};
  double max_speed{1000.0};
};

class Session {
 public:
  explicit Session(ScenarioConfig config, SessionOptions options = {});

  /// Validates against the state the queue will produce and enqueues.
  /// Returns the rejection when the command is refused outright.
  std::optional<SessionReply> submit(const SessionCommand& cmd, std::uint64_t client = 0);

  /// Applies queued commands at the current step boundary. U_c / leader
  /// changes stay queued while paused.
  std::vector<SessionReply> drain();

  /// Runs cadence * speed steps (fractional steps carry over). No-op while paused.
  void advance();

  /// drain() then advance().
  std::vector<SessionReply> tick();

  SessionSnapshot snapshot() const;

  /// Scenario reproducing this session's run from its last reset up to now.
  /// Throws ConfigError before the first step.
  ScenarioConfig export_config() const;

  const SwarmState& state() const;
  const ControlInterval& interval() const;
  const std::vector<ControlInterval>& history() const { return history_; }
  const ScenarioConfig& base_config() const { return base_; }
  bool paused() const { return paused_; }
  double speed() const { return speed_; }
  std::uint64_t steps() const { return steps_; }
  std::size_t queued() const { return queue_.size(); }

 private:
  struct Pending {
    SessionCommand cmd;
    std::uint64_t client;
  };
  using Engine = std::variant<LinearEngine, BugsEngine>;

  void restart();
  std::optional<std::string> validate(const SessionCommand& cmd) const;
  void change_interval(const ControlInterval& iv);
  void step_once();

  ScenarioConfig base_;
  SessionOptions options_;
  std::vector<Vec2> start_positions_;
  std::optional<Engine> engine_;
  std::optional<StepClock> clock_;
  std::vector<ControlInterval> history_;
  std::size_t next_configured_{1};
  std::deque<Pending> queue_;
  // Interval the queue will leave in force; used to validate new commands.
  Vec2 pending_u_{};
  LeaderSet pending_leaders_;
  bool paused_{false};
  double speed_{1.0};
  double carry_{0.0};
  std::uint64_t steps_{0};
  std::uint64_t seq_{0};
};

}  // namespace cyclic_swarm
