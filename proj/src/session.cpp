#include "cyclic_swarm/session.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/spectral.hpp"

namespace cyclic_swarm {
namespace {

using nlohmann::json;

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

json points_json(const std::vector<Vec2>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(vec_json(p));
  return a;
}

double number_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw ParseError(fmt::format("'{}' must be a number", key));
  return it->get<double>();
}

}  // namespace

std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::SetUc: return "set_uc";
    case CommandKind::SetLeaders: return "set_leaders";
    case CommandKind::Pause: return "pause";
    case CommandKind::Resume: return "resume";
    case CommandKind::Reset: return "reset";
    case CommandKind::SetSpeed: return "set_speed";
  }
  return "?";
}

SessionCommand parse_command(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!j.is_object()) throw ParseError("message must be a JSON object");
  const auto v = j.find("v");
  if (v == j.end()) throw ParseError("missing protocol version \"v\"");
  if (!v->is_number_integer() || v->get<int>() != kProtocolVersion)
    throw ParseError(fmt::format("unsupported protocol version {}", v->dump()));
  const auto cmd = j.find("cmd");
  if (cmd == j.end() || !cmd->is_string()) throw ParseError("missing \"cmd\"");
  const auto name = cmd->get<std::string>();

  if (name == "set_uc") return SessionCommand::set_uc({number_field(j, "ux"), number_field(j, "uy")});
  if (name == "set_leaders") {
    const auto f = j.find("flags");
    if (f == j.end()) throw ParseError("set_leaders needs \"flags\"");
    if (f->is_string()) {
      try {
        return SessionCommand::set_leaders(LeaderSet::from_string(f->get<std::string>()));
      } catch (const ConfigError& e) {
        throw ParseError(e.what());
      }
    }
    if (!f->is_array()) throw ParseError("\"flags\" must be an array or a bit string");
    std::vector<std::uint8_t> flags;
    for (const auto& e : *f) {
      if (e.is_boolean()) flags.push_back(e.get<bool>() ? 1 : 0);
      else if (e.is_number_integer() && (e.get<int>() == 0 || e.get<int>() == 1)) flags.push_back(static_cast<std::uint8_t>(e.get<int>()));
      else throw ParseError("flags entries must be 0/1 or booleans");
    }
    return SessionCommand::set_leaders(LeaderSet(std::move(flags)));
  }
  if (name == "pause") return SessionCommand::pause();
  if (name == "resume") return SessionCommand::resume();
  if (name == "reset") {
    const auto s = j.find("seed");
    if (s == j.end() || s->is_null()) return SessionCommand::reset();
    if (!s->is_number_unsigned()) throw ParseError("\"seed\" must be a non-negative integer");
    return SessionCommand::reset(s->get<std::uint64_t>());
  }
  if (name == "set_speed") return SessionCommand::set_speed(number_field(j, "x"));
  throw ParseError(fmt::format("unknown command '{}'", name));
}

json command_to_json(const SessionCommand& c) {
  json j{{"v", kProtocolVersion}, {"cmd", std::string(to_string(c.kind))}};
  switch (c.kind) {
    case CommandKind::SetUc:
      j["ux"] = c.u_c.x;
      j["uy"] = c.u_c.y;
      break;
    case CommandKind::SetLeaders: j["flags"] = c.leaders.raw(); break;
    case CommandKind::Reset:
      if (c.seed) j["seed"] = *c.seed;
      break;
    case CommandKind::SetSpeed: j["x"] = c.speed; break;
    default: break;
  }
  return j;
}

json reply_to_json(const SessionReply& r) {
  json body{{"cmd", r.cmd}, {"t", r.t}};
  if (!r.reason.empty() || !r.accepted) body["reason"] = r.reason;
  return {{"v", kProtocolVersion}, {r.accepted ? "ack" : "reject", body}};
}

json snapshot_to_json(const SessionSnapshot& s) {
  json body{{"seq", s.seq},
            {"t", s.t},
            {"model", std::string(to_string(s.model))},
            {"positions", points_json(s.positions)},
            {"active", s.active},
            {"detect", s.detect},
            {"u_c", vec_json(s.u_c)},
            {"n_l", s.n_l},
            {"predicted_velocity", vec_json(s.predicted_velocity)},
            {"mean_velocity", vec_json(s.mean_velocity)},
            {"gathered", s.gathered},
            {"paused", s.paused},
            {"speed", s.speed}};
  if (s.model == Model::Bugs) body["distances"] = s.distances;
  return {{"v", kProtocolVersion}, {"snapshot", body}};
}

Session::Session(ScenarioConfig config, SessionOptions options)
    : base_(std::move(config)), options_(options) {
  base_.validate();
  if (options_.cadence_steps == 0) throw ConfigError("cadence must be at least one step");
  restart();
}

void Session::restart() {
  const auto initial = sample_initial_state(base_);
  start_positions_ = initial.positions;
  const auto& first = base_.schedule.interval(0);
  if (base_.model == Model::Linear) engine_.emplace(std::in_place_type<LinearEngine>, initial);
  else engine_.emplace(std::in_place_type<BugsEngine>, initial, base_.capture_epsilon);
  std::visit([&](auto& e) { e.enter_interval(first); }, *engine_);
  clock_.emplace(base_.schedule.t0(), base_.dt);
  history_.assign(1, first);
  next_configured_ = 1;
  carry_ = 0.0;
  steps_ = 0;
}

const SwarmState& Session::state() const {
  return std::visit([](const auto& e) -> const SwarmState& { return e.state(); }, *engine_);
}

const ControlInterval& Session::interval() const {
  return std::visit([](const auto& e) -> const ControlInterval& { return e.interval(); }, *engine_);
}

std::optional<std::string> Session::validate(const SessionCommand& cmd) const {
  const std::size_t n = base_.n;
  switch (cmd.kind) {
    case CommandKind::SetUc:
      if (!is_finite(cmd.u_c)) return "U_c must be finite";
      if (base_.model == Model::Bugs && !pending_leaders_.all_set() && norm(cmd.u_c) > 1.0)
        return fmt::format("|U_c| = {} exceeds 1 while the leader set is partial (bugs model)",
                           norm(cmd.u_c));
      return std::nullopt;
    case CommandKind::SetLeaders:
      if (cmd.leaders.size() != n)
        return fmt::format("leader set has {} flags, expected {}", cmd.leaders.size(), n);
      if (base_.model == Model::Bugs && !cmd.leaders.all_set() && norm(pending_u_) > 1.0)
        return fmt::format("partial leader set with |U_c| = {} > 1 (bugs model)", norm(pending_u_));
      return std::nullopt;
    case CommandKind::SetSpeed:
      if (!std::isfinite(cmd.speed) || !(cmd.speed > 0.0) || cmd.speed > options_.max_speed)
        return fmt::format("speed must be in (0, {}]", options_.max_speed);
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::optional<SessionReply> Session::submit(const SessionCommand& cmd, std::uint64_t client) {
  if (queue_.empty()) {
    pending_u_ = interval().u_c;
    pending_leaders_ = interval().leaders;
  }
  if (auto why = validate(cmd))
    return SessionReply{client, std::string(to_string(cmd.kind)), false, state().t, *why};
  switch (cmd.kind) {
    case CommandKind::SetUc: pending_u_ = cmd.u_c; break;
    case CommandKind::SetLeaders: pending_leaders_ = cmd.leaders; break;
    case CommandKind::Reset: {
      const auto& first = base_.schedule.interval(0);
      pending_u_ = first.u_c;
      pending_leaders_ = first.leaders;
      break;
    }
    default: break;
  }
  queue_.push_back({cmd, client});
  return std::nullopt;
}

void Session::change_interval(const ControlInterval& iv) {
  // Replaces an interval that starts at this same instant.
  if (history_.back().t_start == iv.t_start) history_.back() = iv;
  else history_.push_back(iv);
  std::visit([&](auto& e) { e.enter_interval(iv); }, *engine_);
  // The operator has taken over: the remaining configured intervals are dropped.
  next_configured_ = base_.schedule.size();
}

std::vector<SessionReply> Session::drain() {
  std::vector<SessionReply> replies;
  std::deque<Pending> held;
  while (!queue_.empty()) {
    auto [cmd, client] = std::move(queue_.front());
    queue_.pop_front();
    const std::string name(to_string(cmd.kind));
    const bool steering = cmd.kind == CommandKind::SetUc || cmd.kind == CommandKind::SetLeaders;
    if (steering && paused_) {
      held.push_back({std::move(cmd), client});
      continue;
    }
    switch (cmd.kind) {
      case CommandKind::SetUc: {
        auto iv = interval();
        iv.t_start = state().t;
        iv.u_c = cmd.u_c;
        change_interval(iv);
        break;
      }
      case CommandKind::SetLeaders: {
        auto iv = interval();
        iv.t_start = state().t;
        iv.leaders = cmd.leaders;
        change_interval(iv);
        break;
      }
      case CommandKind::Pause: paused_ = true; break;
      case CommandKind::Resume:
        paused_ = false;
        // Steering held during the pause now applies, in arrival order.
        while (!held.empty()) {
          queue_.push_front(std::move(held.back()));
          held.pop_back();
        }
        break;
      case CommandKind::Reset:
        held.clear();
        if (cmd.seed) {
          base_.prng_seed = *cmd.seed;
          base_.initial_positions.reset();
        }
        restart();
        break;
      case CommandKind::SetSpeed: speed_ = cmd.speed; break;
    }
    replies.push_back({client, name, true, state().t, {}});
  }
  queue_ = std::move(held);
  return replies;
}

void Session::step_once() {
  const double limit = next_configured_ < base_.schedule.size()
                           ? base_.schedule.interval(next_configured_).t_start
                           : std::numeric_limits<double>::infinity();
  const auto plan = clock_->plan(limit);
  std::visit([&](auto& e) { e.step_to(plan.t_next); }, *engine_);
  clock_->commit(plan);
  ++steps_;
  while (next_configured_ < base_.schedule.size() &&
         state().t >= base_.schedule.interval(next_configured_).t_start) {
    const auto& iv = base_.schedule.interval(next_configured_++);
    history_.push_back(iv);
    std::visit([&](auto& e) { e.enter_interval(iv); }, *engine_);
  }
}

void Session::advance() {
  ++seq_;
  if (paused_) return;
  carry_ += static_cast<double>(options_.cadence_steps) * speed_;
  const double whole = std::floor(carry_);
  carry_ -= whole;
  for (auto k = static_cast<std::uint64_t>(whole); k > 0; --k) step_once();
}

std::vector<SessionReply> Session::tick() {
  auto replies = drain();
  advance();
  return replies;
}

SessionSnapshot Session::snapshot() const {
  SessionSnapshot s;
  const auto& st = state();
  const auto& iv = interval();
  s.seq = seq_;
  s.t = st.t;
  s.model = base_.model;
  s.positions = st.positions;
  s.active = st.active;
  s.detect = st.detect.raw();
  s.u_c = iv.u_c;
  s.n_l = iv.leaders.count();
  s.predicted_velocity = agreement_velocity(iv.leaders, iv.u_c);
  const auto vel = base_.model == Model::Linear ? linear_rhs(st, iv.u_c, iv.leaders)
                                                : bugs_rhs(st, iv.u_c);
  for (const auto& v : vel) s.mean_velocity += v;
  s.mean_velocity = s.mean_velocity / static_cast<double>(vel.size());
  if (base_.model == Model::Bugs) s.distances = ring_distances(st);
  s.gathered = base_.model == Model::Bugs && st.gathered();
  s.paused = paused_;
  s.speed = speed_;
  return s;
}

ScenarioConfig Session::export_config() const {
  const double t = state().t;
  if (!(t > base_.schedule.t0())) throw ConfigError("session has not advanced past t0");
  ScenarioConfig c = base_;
  c.initial_positions = start_positions_;
  c.prng_seed.reset();
  std::vector<ControlInterval> ivs;
  for (const auto& iv : history_)
    if (iv.t_start < t) ivs.push_back(iv);
  c.schedule = ControlSchedule(std::move(ivs), t);
  return c;
}

}  // namespace cyclic_swarm
