#include "cyclic_swarm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/kernels.hpp"
#include "cyclic_swarm/spectral.hpp"

namespace cyclic_swarm {
namespace {

using namespace tolerances;

// Running worst case of one property.
class Tracker {
 public:
  Tracker(std::string id, double tolerance) {
    report_.property_id = std::move(id);
    report_.tolerance = tolerance;
    report_.worst_violation = -std::numeric_limits<double>::infinity();
  }
  void observe(double violation, double t) {
    seen_ = true;
    if (violation > report_.worst_violation || std::isnan(violation)) {
      report_.worst_violation = violation;
      report_.location_t = t;
    }
  }
  PropertyReport finish(std::string detail = {}) {
    report_.detail = std::move(detail);
    if (!seen_) {
      report_.status = PropertyStatus::NotApplicable;
      report_.worst_violation = 0.0;
    } else {
      report_.status = report_.worst_violation <= report_.tolerance ? PropertyStatus::Pass
                                                                    : PropertyStatus::Fail;
    }
    return report_;
  }
  static PropertyReport not_applicable(std::string id, double tolerance, std::string why) {
    Tracker t(std::move(id), tolerance);
    return t.finish(std::move(why));
  }

 private:
  PropertyReport report_;
  bool seen_{false};
};

double max_abs_diff(Vec2 a, Vec2 b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

Vec2 centroid(const std::vector<Vec2>& p) {
  Vec2 c;
  for (const auto& q : p) c += q;
  return c / static_cast<double>(p.size());
}

// Integral of n_l(t) u_c(t) over [a, b] for a piecewise-constant schedule.
Vec2 integrated_input(const ControlSchedule& s, double a, double b) {
  Vec2 total;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double lo = std::max(a, s.interval(k).t_start);
    const double hi = std::min(b, k + 1 < s.size() ? s.interval(k + 1).t_start
                                                   : std::numeric_limits<double>::infinity());
    if (hi > lo) total += (hi - lo) * static_cast<double>(s.interval(k).leaders.count()) * s.interval(k).u_c;
  }
  return total;
}

// Largest |U_c| over intervals overlapping [a, b].
double max_speed(const ControlSchedule& s, double a, double b) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double lo = s.interval(k).t_start;
    const double hi = k + 1 < s.size() ? s.interval(k + 1).t_start : std::numeric_limits<double>::infinity();
    if (hi > a && lo <= b) m = std::max(m, norm(s.interval(k).u_c));
  }
  return m;
}

bool input_zero_over(const ControlSchedule& s, double a, double b) { return max_speed(s, a, b) == 0.0; }

std::size_t active_of(const TrajectoryRecord& r) {
  return static_cast<std::size_t>(std::count(r.active.begin(), r.active.end(), std::uint8_t{1}));
}

std::vector<std::size_t> prey_of(const TrajectoryRecord& r) {
  const std::size_t n = r.active.size();
  std::vector<std::size_t> prey(n, n);
  std::vector<std::size_t> ring;
  for (std::size_t i = 0; i < n; ++i)
    if (r.active[i]) ring.push_back(i);
  for (std::size_t k = 0; k < ring.size(); ++k) prey[ring[k]] = ring[(k + 1) % ring.size()];
  return prey;
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double d : v) s += d;
  return s;
}

}  // namespace

std::string_view to_string(PropertyStatus s) {
  switch (s) {
    case PropertyStatus::Pass: return "pass";
    case PropertyStatus::Fail: return "fail";
    case PropertyStatus::NotApplicable: return "not_applicable";
  }
  return "?";
}

double slowest_time_constant(std::size_t n) {
  return 1.0 / (1.0 - std::cos(2.0 * std::numbers::pi / static_cast<double>(n)));
}

std::vector<PropertyReport> check_linear_asymptotics(const Trace& trace,
                                                     const ControlSchedule& schedule) {
  const std::size_t n = trace.header.n;
  if (trace.header.model != Model::Linear) throw ParseError("expected a linear trace");
  if (trace.records.empty()) throw ParseError("trace has no records");
  if (schedule.interval(0).leaders.size() != n)
    throw ParseError(fmt::format("trace has n={} but schedule leader sets have size {}", n,
                                 schedule.interval(0).leaders.size()));
  for (const auto& r : trace.records)
    if (r.positions.size() != n || r.velocities.size() != n) throw ParseError("record size mismatch");

  std::vector<PropertyReport> out;
  const auto& last = trace.records.back();
  const std::size_t k_last = schedule.index_at_or_last(last.t);
  const auto& iv = schedule.interval(k_last);
  const double elapsed = last.t - iv.t_start;
  const double needed = kAsymptoticTimeConstants * slowest_time_constant(n);
  const bool asymptotic = elapsed >= needed;
  const std::string why = fmt::format("final interval spans {}s, asymptotic checks need {}s",
                                      elapsed, needed);

  {
    Tracker v("linear.velocity_record", kVelocityRecord);
    std::vector<Vec2> rhs(n);
    for (const auto& r : trace.records) {
      const auto& ivr = schedule.interval(schedule.index_at_or_last(r.t));
      kernels::omp::linear_rhs(r.positions, ivr.leaders.raw(), ivr.u_c, rhs);
      double worst = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, max_abs_diff(rhs[i], r.velocities[i]) /
                                    std::max(1.0, norm(rhs[i])));
      v.observe(worst, r.t);
    }
    out.push_back(v.finish("recorded velocities equal the RHS at the recorded state"));
  }

  const Vec2 predicted = agreement_velocity(iv.leaders, iv.u_c);
  if (asymptotic) {
    Tracker v("linear.terminal_velocity", kTerminalVelocity);
    double worst = 0.0;
    for (const auto& vel : last.velocities) worst = std::max(worst, max_abs_diff(vel, predicted));
    v.observe(worst, last.t);
    out.push_back(v.finish(fmt::format("predicted (n_l/n)U_c = ({}, {})", predicted.x, predicted.y)));
  } else {
    out.push_back(Tracker::not_applicable("linear.terminal_velocity", kTerminalVelocity, why));
  }

  const auto basis = build_basis(n);
  const auto gamma = deviation_vector(basis, iv.leaders, 1.0);
  const double u_norm = norm(iv.u_c);
  double gamma_extent = 0.0;
  for (double g : gamma) gamma_extent = std::max(gamma_extent, std::abs(g) * u_norm);

  if (asymptotic && u_norm > 0.0) {
    Tracker c("linear.collinearity", kCollinearity);
    const Vec2 normal{-iv.u_c.y / u_norm, iv.u_c.x / u_norm};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : last.positions) {
      lo = std::min(lo, dot(p, normal));
      hi = std::max(hi, dot(p, normal));
    }
    c.observe(hi - lo, last.t);
    out.push_back(c.finish("spread of final positions across the U_c direction"));
  } else {
    out.push_back(Tracker::not_applicable("linear.collinearity", kCollinearity,
                                          asymptotic ? "U_c = 0" : why));
  }

  if (asymptotic && iv.u_c.x != 0.0 && gamma_extent > 1e-3) {
    Tracker s("linear.slope", kSlope);
    const double slope = fitted_slope(last.positions);
    s.observe(std::abs(slope - iv.u_c.y / iv.u_c.x), last.t);
    out.push_back(s.finish(fmt::format("fitted slope {} vs U_y/U_x = {}", slope, iv.u_c.y / iv.u_c.x)));
  } else {
    out.push_back(Tracker::not_applicable(
        "linear.slope", kSlope,
        !asymptotic ? why : "formation degenerates to a point or U_x = 0"));
  }

  if (asymptotic) {
    Tracker d("linear.deviation", kDeviation);
    const Vec2 c = centroid(last.positions);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      worst = std::max(worst, max_abs_diff(last.positions[i] - c, gamma[i] * iv.u_c));
    d.observe(worst, last.t);
    out.push_back(d.finish("offset from the moving centroid vs deviation vector"));
  } else {
    out.push_back(Tracker::not_applicable("linear.deviation", kDeviation, why));
  }

  {
    Tracker c("linear.centroid_drift", kCentroidDrift);
    const auto& first = trace.records.front();
    Vec2 s0;
    for (const auto& p : first.positions) s0 += p;
    for (const auto& r : trace.records) {
      Vec2 s;
      for (const auto& p : r.positions) s += p;
      const Vec2 expect = s0 + integrated_input(schedule, first.t, r.t);
      c.observe(max_abs_diff(s, expect), r.t);
    }
    out.push_back(c.finish("sum of positions vs initial sum + integral of n_l U_c"));
  }
  return out;
}

std::vector<PropertyReport> check_bugs_properties(const Trace& trace,
                                                  std::span<const CaptureEvent> events,
                                                  const ScenarioConfig& config) {
  const std::size_t n = trace.header.n;
  if (trace.header.model != Model::Bugs) throw ParseError("expected a bugs trace");
  if (trace.records.empty()) throw ParseError("trace has no records");
  if (config.n != n) throw ParseError(fmt::format("trace has n={} but config n={}", n, config.n));
  for (const auto& r : trace.records)
    if (r.positions.size() != n || r.distances.size() != n || r.active.size() != n)
      throw ParseError("bugs record is missing distance/active blocks");

  const auto& schedule = config.schedule;
  const double dt = trace.header.dt;
  const double nd = static_cast<double>(n);
  std::vector<PropertyReport> out;

  {
    Tracker m("bugs.monotone_distances", kMonotonePerStep);
    for (std::size_t r = 0; r + 1 < trace.records.size(); ++r) {
      const auto& a = trace.records[r];
      const auto& b = trace.records[r + 1];
      if (active_of(a) < 2 || active_of(b) < 2 || !input_zero_over(schedule, a.t, b.t)) continue;
      const auto prey_a = prey_of(a);
      const auto prey_b = prey_of(b);
      const double steps = std::max(1.0, std::round((b.t - a.t) / dt));
      for (std::size_t i = 0; i < n; ++i) {
        if (!a.active[i] || !b.active[i] || prey_a[i] != prey_b[i]) continue;
        m.observe((b.distances[i] - a.distances[i]) / steps, b.t);
      }
    }
    out.push_back(m.finish("per-step increase of d_i for a fixed chaser/prey pair, U_c = 0"));
  }

  {
    Tracker s("bugs.sum_rate_bound", kSumRateSlack);
    for (std::size_t r = 0; r + 1 < trace.records.size(); ++r) {
      const auto& a = trace.records[r];
      const auto& b = trace.records[r + 1];
      if (active_of(a) < 2 || active_of(b) < 2 || !(b.t > a.t)) continue;
      const double rate = (sum_of(b.distances) - sum_of(a.distances)) / (b.t - a.t);
      const double bound = -1.0 / (2.0 * nd) + nd * max_speed(schedule, a.t, b.t);
      s.observe(rate - bound, b.t);
    }
    out.push_back(s.finish("finite-difference sum of d_i' minus (-1/(2n) + n|U_c|)"));
  }

  const auto gathered_rec = std::find_if(trace.records.begin(), trace.records.end(),
                                         [](const TrajectoryRecord& r) { return active_of(r) == 1; });
  std::optional<double> gathered_at;
  if (events.size() + 1 >= n && !events.empty()) gathered_at = events.back().t;
  else if (gathered_rec != trace.records.end()) gathered_at = gathered_rec->t;

  {
    const auto& first = trace.records.front();
    const double speed = max_speed(schedule, first.t, trace.records.back().t);
    Tracker tb("bugs.termination_bound", dt);
    std::string detail;
    if (speed < gather_bound(n)) {
      const double bound = first.t + 2.0 * nd * sum_of(first.distances) / (1.0 - 2.0 * nd * nd * speed);
      detail = fmt::format("bound {} for |U_c| <= {}", bound, speed);
      if (gathered_at) {
        tb.observe(*gathered_at - bound, *gathered_at);
      } else if (trace.records.back().t > bound + dt) {
        tb.observe(trace.records.back().t - bound, trace.records.back().t);
      } else {
        detail += "; trace ends before the bound without gathering";
      }
    } else {
      detail = fmt::format("|U_c| = {} >= 1/(2n^2) = {}: bound inapplicable", speed, gather_bound(n));
    }
    out.push_back(tb.finish(detail));
  }

  {
    Tracker u("bugs.unit_relative_speed", kUnitSpeed);
    for (const auto& r : trace.records) {
      if (active_of(r) < 2) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (!r.active[i]) continue;
        const Vec2 pursuit = r.detect[i] ? r.velocities[i] - r.u_c : r.velocities[i];
        u.observe(std::abs(norm(pursuit) - 1.0), r.t);
      }
    }
    out.push_back(u.finish("|p_i' - b_i U_c| = 1 for active agents"));
  }

  {
    Tracker g("bugs.post_gathering_velocity", kPostGatherVelocity);
    for (const auto& r : trace.records) {
      if (active_of(r) != 1) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2 expect = r.detect[i] ? r.u_c : Vec2{};
        g.observe(max_abs_diff(r.velocities[i], expect), r.t);
      }
    }
    out.push_back(g.finish("gathered swarm moves with b U_c"));
  }

  {
    Tracker e("bugs.event_consistency", 0.0);
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    std::set<std::size_t> chasers;
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& ev : events) {
      double bad = 0.0;
      if (ev.chaser >= n || ev.prey >= n || ev.chaser == ev.prey) bad = 1.0;
      if (ev.t < prev) bad = std::max(bad, prev - ev.t);
      if (!pairs.insert({ev.chaser, ev.prey}).second || !chasers.insert(ev.chaser).second) bad = 1.0;
      prev = ev.t;
      e.observe(bad, ev.t);
    }
    if (events.size() >= n) e.observe(1.0, events.back().t);
    out.push_back(e.finish("event times non-decreasing; each chaser captures once"));
  }
  return out;
}

bool any_failed(std::span<const PropertyReport> reports) {
  return std::any_of(reports.begin(), reports.end(),
                     [](const PropertyReport& r) { return r.status == PropertyStatus::Fail; });
}

nlohmann::json reports_to_json(std::span<const PropertyReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    arr.push_back({{"property_id", r.property_id},
                   {"status", std::string(to_string(r.status))},
                   {"worst_violation", r.worst_violation},
                   {"location_t", r.location_t},
                   {"tolerance", r.tolerance},
                   {"detail", r.detail}});
  }
  return {{"v", 1}, {"pass", !any_failed(reports)}, {"reports", arr}};
}

}  // namespace cyclic_swarm
