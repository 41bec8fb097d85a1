#include "cyclic_swarm/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/prng.hpp"

namespace cyclic_swarm {

LeaderSet::LeaderSet(std::vector<std::uint8_t> flags) : flags_(std::move(flags)) {
  for (auto& f : flags_) f = f ? 1 : 0;
}

LeaderSet LeaderSet::from_string(std::string_view bits) {
  std::vector<std::uint8_t> flags;
  flags.reserve(bits.size());
  for (char c : bits) {
    if (c == '0' || c == '1') {
      flags.push_back(c == '1' ? 1 : 0);
    } else if (c != ' ') {
      throw ConfigError(fmt::format("leader string contains '{}'", c));
    }
  }
  return LeaderSet(std::move(flags));
}

std::size_t LeaderSet::count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

std::string LeaderSet::to_string() const {
  std::string s;
  s.reserve(flags_.size());
  for (auto f : flags_) s.push_back(f ? '1' : '0');
  return s;
}

ControlSchedule::ControlSchedule(std::vector<ControlInterval> intervals, double t_end)
    : intervals_(std::move(intervals)), t_end_(t_end) {
  if (intervals_.empty()) throw ConfigError("schedule has no intervals");
  const std::size_t n = intervals_.front().leaders.size();
  for (std::size_t k = 0; k < intervals_.size(); ++k) {
    const auto& iv = intervals_[k];
    if (!std::isfinite(iv.t_start) || !is_finite(iv.u_c))
      throw ConfigError(fmt::format("interval {} has non-finite values", k));
    if (iv.leaders.size() != n)
      throw ConfigError(fmt::format("interval {} leader set has size {}, expected {}", k,
                                    iv.leaders.size(), n));
    if (k > 0 && !(iv.t_start > intervals_[k - 1].t_start))
      throw ConfigError(fmt::format("interval {} t_start {} not after previous", k, iv.t_start));
  }
  if (!std::isfinite(t_end_) || !(t_end_ > intervals_.back().t_start))
    throw ConfigError("schedule t_end must be after the last interval start");
}

std::size_t ControlSchedule::index_at(double t) const {
  if (!(t >= t0()) || !(t < t_end_))
    throw std::out_of_range(fmt::format("t={} outside schedule [{}, {})", t, t0(), t_end_));
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](double v, const ControlInterval& iv) { return v < iv.t_start; });
  return static_cast<std::size_t>(std::distance(intervals_.begin(), it)) - 1;
}

std::size_t ControlSchedule::index_at_or_last(double t) const {
  if (t >= t_end_ && t <= t_end_) return intervals_.size() - 1;
  return index_at(t);
}

double ControlSchedule::interval_end(std::size_t k) const {
  return k + 1 < intervals_.size() ? intervals_[k + 1].t_start : t_end_;
}

std::pair<Vec2, LeaderSet> evaluate_schedule(const ControlSchedule& schedule, double t) {
  const auto& iv = schedule.interval(schedule.index_at(t));
  return {iv.u_c, iv.leaders};
}

std::string_view to_string(Model m) { return m == Model::Linear ? "linear" : "bugs"; }

Model model_from_string(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "linear") return Model::Linear;
  if (lower == "bugs") return Model::Bugs;
  throw ConfigError(fmt::format("unknown model '{}'", s));
}

void ScenarioConfig::validate() const {
  if (n < 2) throw ConfigError(fmt::format("n must be >= 2 (got {})", n));
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (!(capture_epsilon > 0.0) || !std::isfinite(capture_epsilon))
    throw ConfigError("capture_epsilon must be > 0");
  if (output_stride == 0) throw ConfigError("output_stride must be positive");
  if (schedule.size() == 0) throw ConfigError("schedule is empty");
  if (schedule.intervals().front().leaders.size() != n)
    throw ConfigError(fmt::format("leader sets have size {}, expected n={}",
                                  schedule.intervals().front().leaders.size(), n));
  if (initial_positions) {
    if (initial_positions->size() != n)
      throw ConfigError(fmt::format("initial_positions has {} entries, expected n={}",
                                    initial_positions->size(), n));
    for (const auto& p : *initial_positions)
      if (!is_finite(p)) throw ConfigError("initial_positions contains non-finite values");
  } else if (!prng_seed) {
    throw ConfigError("either initial_positions or prng_seed is required");
  }
  if (!(sampling_box.xmax > sampling_box.xmin) || !(sampling_box.ymax > sampling_box.ymin))
    throw ConfigError("sampling_box must have xmax > xmin and ymax > ymin");
  if (model == Model::Bugs) {
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      const auto& iv = schedule.interval(k);
      if (!iv.leaders.all_set() && norm(iv.u_c) > 1.0)
        throw ConfigError(fmt::format(
            "interval {}: |U_c| = {} exceeds 1 with a partial leader set (bugs model)", k,
            norm(iv.u_c)));
    }
  }
}

std::size_t SwarmState::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), std::uint8_t{1}));
}

std::size_t SwarmState::next_active(std::size_t i) const {
  const std::size_t n = size();
  for (std::size_t s = 1; s < n; ++s) {
    const std::size_t j = (i + s) % n;
    if (active[j]) return j;
  }
  return i;
}

void SwarmState::apply_leaders(const LeaderSet& leaders) {
  const std::size_t n = size();
  std::vector<std::uint8_t> cluster_flag(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (leaders[i]) cluster_flag[cluster_of[i]] = 1;
  LeaderSet eff(n);
  for (std::size_t i = 0; i < n; ++i) eff.set(i, cluster_flag[cluster_of[i]] != 0);
  detect = std::move(eff);
}

void SwarmState::check_invariants() const {
  const std::size_t n = size();
  if (detect.size() != n || cluster_of.size() != n || active.size() != n)
    throw ConsistencyError("swarm state vectors have mismatched sizes");
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = cluster_of[i];
    if (c >= n) throw ConsistencyError(fmt::format("cluster_of[{}] out of range", i));
    if ((c == i) != (active[i] != 0))
      throw ConsistencyError(fmt::format("agent {}: cluster_of/active disagree", i));
    if (cluster_of[c] != c)
      throw ConsistencyError(fmt::format("agent {}: cluster_of not path-compressed", i));
    if (!active[i] && !(positions[i] == positions[c]))
      throw ConsistencyError(fmt::format("agent {} not snapped to its cluster leader", i));
    if (detect[i] != detect[c])
      throw ConsistencyError(fmt::format("agent {} flag differs from its cluster", i));
  }
}

SwarmState SwarmState::fresh(double t, std::vector<Vec2> positions, const LeaderSet& leaders) {
  SwarmState s;
  const std::size_t n = positions.size();
  s.t = t;
  s.positions = std::move(positions);
  s.detect = leaders;
  s.cluster_of.resize(n);
  std::iota(s.cluster_of.begin(), s.cluster_of.end(), std::size_t{0});
  s.active.assign(n, 1);
  return s;
}

std::vector<Vec2> sample_positions(std::uint64_t seed, std::size_t n, const SamplingBox& box) {
  Pcg32 rng(seed);
  std::vector<Vec2> out(n);
  for (auto& p : out) {
    p.x = rng.uniform(box.xmin, box.xmax);
    p.y = rng.uniform(box.ymin, box.ymax);
  }
  return out;
}

SwarmState sample_initial_state(const ScenarioConfig& config) {
  config.validate();
  auto positions = config.initial_positions
                       ? *config.initial_positions
                       : sample_positions(*config.prng_seed, config.n, config.sampling_box);
  return SwarmState::fresh(config.schedule.t0(), std::move(positions),
                           config.schedule.intervals().front().leaders);
}

}  // namespace cyclic_swarm
