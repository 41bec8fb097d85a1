#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cyclic_swarm/bugs_sim.hpp"
#include "cyclic_swarm/core.hpp"
#include "cyclic_swarm/trace_io.hpp"

namespace cyclic_swarm {

enum class PropertyStatus { Pass, Fail, NotApplicable };
std::string_view to_string(PropertyStatus s);

/// Fail iff worst_violation > tolerance. For inequality properties the
/// violation is the signed excess over the bound, so it can be negative.
struct PropertyReport {
  std::string property_id;
  PropertyStatus status{PropertyStatus::NotApplicable};
  double worst_violation{0.0};
  double location_t{0.0};
  double tolerance{0.0};
  std::string detail;
};

namespace tolerances {
inline constexpr double kTerminalVelocity = 2e-3;
inline constexpr double kSlope = 1e-4;
inline constexpr double kCollinearity = 1e-4;
inline constexpr double kDeviation = 1e-6;
inline constexpr double kCentroidDrift = 1e-6;
inline constexpr double kVelocityRecord = 1e-9;
/// Asymptotic checks need the last interval to span this many slowest-mode
/// time constants 1/(1 - cos(2 pi / n)).
inline constexpr double kAsymptoticTimeConstants = 20.0;

inline constexpr double kMonotonePerStep = 1e-9;
inline constexpr double kSumRateSlack = 1e-3;
inline constexpr double kUnitSpeed = 1e-12;
inline constexpr double kPostGatherVelocity = 1e-12;
}  // namespace tolerances

/// Slowest decay time constant of the linear pursuit for n agents.
double slowest_time_constant(std::size_t n);

/// Linear-trace checks: velocity records, terminal velocity, collinearity and
/// slope, deviation from the moving centroid, centroid drift law.
/// Throws ParseError when the trace does not fit the schedule.
std::vector<PropertyReport> check_linear_asymptotics(const Trace& trace,
                                                     const ControlSchedule& schedule);

/// Bugs-trace checks: monotone distances on U_c = 0 spans, aggregate
/// distance-rate bound, termination bound, unit relative speed,
/// post-gathering velocity, event-list consistency.
std::vector<PropertyReport> check_bugs_properties(const Trace& trace,
                                                  std::span<const CaptureEvent> events,
                                                  const ScenarioConfig& config);

bool any_failed(std::span<const PropertyReport> reports);
nlohmann::json reports_to_json(std::span<const PropertyReport> reports);

}  // namespace cyclic_swarm
