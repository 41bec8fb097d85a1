#include "cyclic_swarm/bugs_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/kernels.hpp"
#include "cyclic_swarm/run_driver.hpp"

namespace cyclic_swarm {
namespace {

constexpr double kRateAgreement = 1e-9;

// prey[i] = next active agent after i, for every active i.
std::vector<std::size_t> prey_table(const SwarmState& s) {
  const std::size_t n = s.size();
  std::vector<std::size_t> prey(n, n);
  std::vector<std::size_t> ring;
  ring.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (s.active[i]) ring.push_back(i);
  for (std::size_t r = 0; r < ring.size(); ++r) prey[ring[r]] = ring[(r + 1) % ring.size()];
  return prey;
}

void evaluate_rhs(const SwarmState& s, const std::vector<std::size_t>& prey, Vec2 u_c,
                  std::vector<Vec2>& vel, std::vector<double>& dist) {
  const std::size_t n = s.size();
  vel.resize(n);
  dist.resize(n);
  kernels::BugsView view{s.positions, prey, s.cluster_of, s.active, s.detect.raw()};
  kernels::omp::bugs_rhs(view, u_c, vel, dist);
}

double angle_between(Vec2 a, Vec2 b) { return std::atan2(std::abs(cross(a, b)), dot(a, b)); }

// Every member of chaser's cluster joins prey's cluster.
void merge_into(SwarmState& s, std::size_t chaser, std::size_t prey) {
  const bool flag = s.detect[chaser] || s.detect[prey];
  const Vec2 at = s.positions[prey];
  for (std::size_t m = 0; m < s.size(); ++m) {
    if (s.cluster_of[m] == chaser) {
      s.cluster_of[m] = prey;
      s.positions[m] = at;
    }
  }
  s.active[chaser] = 0;
  for (std::size_t m = 0; m < s.size(); ++m)
    if (s.cluster_of[m] == prey) s.detect.set(m, flag);
}

struct PreStep {
  std::vector<Vec2> positions;
  std::vector<std::size_t> prey;
  std::vector<double> dist;
};

bool overtaken(const SwarmState& s, const PreStep& pre, std::size_t i, std::size_t j) {
  const double d0 = pre.dist[i];
  if (!(d0 > 0.0)) return false;
  const Vec2 los = (pre.positions[j] - pre.positions[i]) / d0;
  const Vec2 rel = (s.positions[i] - pre.positions[i]) - (s.positions[j] - pre.positions[j]);
  return dot(rel, los) > d0;
}

void resolve_captures(SwarmState& s, double epsilon, const PreStep* pre,
                      std::vector<CaptureEvent>& events) {
  bool changed = true;
  while (changed && !s.gathered()) {
    changed = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s.active[i]) continue;
      const std::size_t j = s.next_active(i);
      if (j == i) break;
      const double d = norm(s.positions[j] - s.positions[i]);
      std::optional<CaptureCause> cause;
      if (d <= epsilon) {
        cause = CaptureCause::Proximity;
      } else if (pre && pre->prey[i] == j && overtaken(s, *pre, i, j)) {
        cause = CaptureCause::Overtake;
      }
      if (cause) {
        merge_into(s, i, j);
        events.push_back({s.t, i, j, *cause});
        changed = true;
      }
    }
  }
}

// A chaser that also passed its prey's prey cannot be resolved by one merge.
void check_double_overtake(const SwarmState& s, const PreStep& pre) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (pre.prey[i] >= s.size()) continue;
    const std::size_t j = pre.prey[i];
    const std::size_t k = pre.prey[j];
    // With three agents k is i's own chaser; that pair is an ordinary capture.
    if (k == i || k >= s.size() || pre.prey[k] == i) continue;
    if (!overtaken(s, pre, i, j)) continue;
    const Vec2 gap = pre.positions[k] - pre.positions[i];
    const double d0 = norm(gap);
    if (!(d0 > 0.0)) continue;
    const Vec2 rel = (s.positions[i] - pre.positions[i]) - (s.positions[k] - pre.positions[k]);
    if (dot(rel, gap / d0) > d0)
      throw StepTooLargeError(fmt::format(
          "agent {} passed both {} and {} in one step at t={}; reduce dt", i, j, k, s.t));
  }
}

Vec2 gathered_velocity(const SwarmState& s, Vec2 u_c) {
  return s.detect[0] ? u_c : Vec2{};
}

}  // namespace

std::string_view to_string(CaptureCause c) {
  return c == CaptureCause::Proximity ? "proximity" : "overtake";
}

CaptureCause capture_cause_from_string(std::string_view s) {
  if (s == "proximity" || s == "Proximity") return CaptureCause::Proximity;
  if (s == "overtake" || s == "Overtake") return CaptureCause::Overtake;
  throw ParseError(fmt::format("unknown capture cause '{}'", s));
}

std::string_view to_string(RateCase c) {
  switch (c) {
    case RateCase::NeitherDetects: return "neither_detects";
    case RateCase::BothDetect: return "both_detect";
    case RateCase::ChaserDetects: return "chaser_detects";
    case RateCase::PreyDetects: return "prey_detects";
  }
  return "?";
}

std::vector<Vec2> bugs_rhs(const SwarmState& state, Vec2 u_c) {
  if (state.gathered()) return std::vector<Vec2>(state.size(), gathered_velocity(state, u_c));
  const auto prey = prey_table(state);
  std::vector<Vec2> vel;
  std::vector<double> dist;
  evaluate_rhs(state, prey, u_c, vel, dist);
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.active[i] && !(dist[i] > 0.0))
      throw EventHandlingError(fmt::format(
          "active agents {} and {} coincide at t={}; resolve captures first", i, prey[i], state.t));
  }
  return vel;
}

DistanceRateBreakdown distance_rate(const SwarmState& state, Vec2 u_c, std::size_t i) {
  if (i >= state.size() || !state.active[i] || state.gathered())
    throw std::invalid_argument(fmt::format("distance_rate: agent {} is not an active chaser", i));
  const std::size_t j = state.next_active(i);
  const Vec2 gap = state.positions[j] - state.positions[i];
  const double d = norm(gap);
  if (!(d > 0.0)) throw std::invalid_argument("distance_rate: d_i must be positive");

  const auto vel = bugs_rhs(state, u_c);
  DistanceRateBreakdown out;
  out.i = i;
  out.prey = j;
  out.inner_product_rate = dot(vel[j] - vel[i], gap) / d;

  const bool bi = state.detect[i];
  const bool bj = state.detect[j];
  const Vec2 pursuit_i = bi ? vel[i] - u_c : vel[i];
  const Vec2 pursuit_j = bj ? vel[j] - u_c : vel[j];
  const double speed = norm(u_c);
  out.theta = angle_between(pursuit_i, pursuit_j);
  const double cos_theta = std::cos(out.theta);
  if (bi == bj) {
    out.case_id = bi ? RateCase::BothDetect : RateCase::NeitherDetects;
    out.rate = cos_theta - 1.0;
  } else {
    out.alpha = speed > 0.0 ? angle_between(u_c, pursuit_i) : 0.0;
    const double cos_alpha = std::cos(out.alpha);
    if (bi) {
      out.case_id = RateCase::ChaserDetects;
      out.rate = cos_theta - speed * cos_alpha - 1.0;
    } else {
      out.case_id = RateCase::PreyDetects;
      out.rate = cos_theta + speed * cos_alpha - 1.0;
    }
  }
  if (!(std::abs(out.rate - out.inner_product_rate) <= kRateAgreement))
    throw ConsistencyError(fmt::format("distance_rate({}): case formula {} vs inner product {}", i,
                                       out.rate, out.inner_product_rate));
  return out;
}

void resolve_proximity(SwarmState& state, double epsilon, std::vector<CaptureEvent>& events) {
  resolve_captures(state, epsilon, nullptr, events);
}

void advance_bugs(SwarmState& s, Vec2 u_c, double dt, double epsilon,
                  std::vector<CaptureEvent>& events, StepOptions options) {
  if (!(dt > 0.0)) throw std::invalid_argument("advance_bugs: dt must be > 0");
  const double t_final = s.t + dt;
  const double speed = norm(u_c);
  PreStep pre;
  std::vector<Vec2> vel;
  while (s.t < t_final) {
    const double remaining = t_final - s.t;
    if (s.gathered()) {
      const Vec2 v = gathered_velocity(s, u_c);
      for (auto& p : s.positions) p += remaining * v;
      break;
    }
    pre.prey = prey_table(s);
    evaluate_rhs(s, pre.prey, u_c, vel, pre.dist);
    double min_gap = std::numeric_limits<double>::infinity();
    double min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s.active[i]) continue;
      if (!(pre.dist[i] > 0.0))
        throw EventHandlingError(fmt::format("active agents {} and {} coincide at t={}", i,
                                             pre.prey[i], s.t));
      // Bound on how fast the pair can close: two unit pursuit terms plus
      // U_c when only one end detects it.
      const bool split = s.detect[i] != s.detect[pre.prey[i]];
      const double closing = 2.0 + (split ? speed : 0.0);
      min_gap = std::min(min_gap, pre.dist[i]);
      min_ratio = std::min(min_ratio, pre.dist[i] / closing);
    }
    double h = remaining;
    if (options.subdivide && h > min_ratio && min_gap > epsilon) h = std::min(h, 0.5 * min_ratio);
    const bool last = h >= remaining;

    pre.positions = s.positions;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s.active[i]) s.positions[i] += h * vel[i];
    for (std::size_t i = 0; i < s.size(); ++i)
      if (!s.active[i]) s.positions[i] = s.positions[s.cluster_of[i]];
    s.t = last ? t_final : s.t + h;

    check_double_overtake(s, pre);
    resolve_captures(s, epsilon, &pre, events);
  }
  s.t = t_final;
}

BugsStepResult step_bugs(const SwarmState& state, Vec2 u_c, double dt, double epsilon,
                         StepOptions options) {
  BugsStepResult r{state, {}};
  advance_bugs(r.state, u_c, dt, epsilon, r.events, options);
  return r;
}

std::vector<double> ring_distances(const SwarmState& state) {
  const std::size_t n = state.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = norm(state.positions[(i + 1) % n] - state.positions[i]);
  return d;
}

double sum_distances(const SwarmState& state) {
  double s = 0.0;
  for (double d : ring_distances(state)) s += d;
  return s;
}

double gather_bound(std::size_t n) {
  if (n < 2) throw std::domain_error("gather_bound needs n >= 2");
  const double nn = static_cast<double>(n);
  return 1.0 / (2.0 * nn * nn);
}

std::optional<double> termination_bound(const SwarmState& state, Vec2 u_c) {
  const double n = static_cast<double>(state.size());
  const double denom = 1.0 - 2.0 * n * n * norm(u_c);
  if (!(norm(u_c) < gather_bound(state.size())) || !(denom > 0.0)) return std::nullopt;
  return state.t + 2.0 * n * sum_distances(state) / denom;
}

BugsEngine::BugsEngine(SwarmState state, double epsilon)
    : state_(std::move(state)), epsilon_(epsilon) {}

void BugsEngine::note_gathering() {
  if (!gathered_at_ && state_.gathered()) {
    gathered_at_ = events_.empty() ? state_.t : events_.back().t;
    anchor_t_ = state_.t;
    anchor_p_ = state_.positions.front();
  }
}

void BugsEngine::enter_interval(const ControlInterval& iv) {
  interval_ = iv;
  state_.apply_leaders(iv.leaders);
  if (gathered_at_) {
    anchor_t_ = state_.t;
    anchor_p_ = state_.positions.front();
  } else {
    resolve_proximity(state_, epsilon_, events_);
    note_gathering();
  }
}

void BugsEngine::step_to(double t_next) {
  if (gathered_at_) {
    const Vec2 v = gathered_velocity(state_, interval_.u_c);
    const Vec2 p = anchor_p_ + (t_next - anchor_t_) * v;
    for (auto& q : state_.positions) q = p;
    state_.t = t_next;
    return;
  }
  advance_bugs(state_, interval_.u_c, t_next - state_.t, epsilon_, events_);
  state_.t = t_next;
  note_gathering();
}

TrajectoryRecord BugsEngine::record() const {
  TrajectoryRecord r;
  r.t = state_.t;
  r.positions = state_.positions;
  r.velocities = bugs_rhs(state_, interval_.u_c);
  r.u_c = interval_.u_c;
  r.n_l = interval_.leaders.count();
  r.distances = ring_distances(state_);
  r.active = state_.active;
  r.detect = state_.detect.raw();
  return r;
}

BugsRun simulate_bugs(const ScenarioConfig& config) {
  config.validate();
  if (config.model != Model::Bugs) throw ConfigError("simulate_bugs needs a bugs scenario");
  BugsEngine engine(sample_initial_state(config), config.capture_epsilon);
  BugsRun run;
  drive_schedule(engine, config, [&](const BugsEngine& e) { run.records.push_back(e.record()); });
  run.events = engine.events();
  run.gathered_at = engine.gathered_at();
  return run;
}

}  // namespace cyclic_swarm
