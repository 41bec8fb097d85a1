#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cyclic_swarm/bugs_sim.hpp"
#include "cyclic_swarm/core.hpp"
#include "cyclic_swarm/trajectory.hpp"

namespace cyclic_swarm {

enum class TraceFormat { Jsonl, Csv };
TraceFormat trace_format_from_string(std::string_view s);

/// Run metadata carried at the top of every trace so checkers can scale
/// O(dt) tolerances.
struct TraceHeader {
  Model model{Model::Linear};
  std::size_t n{0};
  double dt{0.0};
  double t0{0.0};
  double t_end{0.0};
  double capture_epsilon{0.0};
  std::size_t output_stride{1};

  static TraceHeader from_config(const ScenarioConfig& c);
};

struct Trace {
  TraceHeader header;
  std::vector<TrajectoryRecord> records;
};

/// Numbers are written with 17 significant digits.
void write_trace(std::ostream& out, const Trace& trace, TraceFormat format);
/// Detects JSONL vs CSV from the first line. Throws ParseError.
Trace read_trace(std::istream& in);
Trace read_trace_file(const std::filesystem::path& path);

void write_events(std::ostream& out, std::span<const CaptureEvent> events);
std::vector<CaptureEvent> read_events(std::istream& in);
std::vector<CaptureEvent> read_events_file(const std::filesystem::path& path);

/// "<trace>.events.jsonl"
std::filesystem::path events_path_for(const std::filesystem::path& trace_path);

/// Shortest text form of a double that still has 17 significant digits.
std::string format_real(double v);

}  // namespace cyclic_swarm
