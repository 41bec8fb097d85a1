#include "cyclic_swarm/trace_io.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cyclic_swarm/errors.hpp"

namespace cyclic_swarm {
namespace {

using nlohmann::json;

void append_real(std::string& s, double v) { s += format_real(v); }

std::string header_json(const TraceHeader& h) {
  std::string s = "{\"v\":1,\"header\":{\"model\":\"";
  s += to_string(h.model);
  s += fmt::format("\",\"n\":{},\"dt\":", h.n);
  append_real(s, h.dt);
  s += ",\"t0\":";
  append_real(s, h.t0);
  s += ",\"t_end\":";
  append_real(s, h.t_end);
  s += ",\"capture_epsilon\":";
  append_real(s, h.capture_epsilon);
  s += fmt::format(",\"output_stride\":{}}}}}", h.output_stride);
  return s;
}

TraceHeader header_from_json(const json& j) {
  const auto& h = j.at("header");
  TraceHeader out;
  out.model = model_from_string(h.at("model").get<std::string>());
  out.n = h.at("n").get<std::size_t>();
  out.dt = h.at("dt").get<double>();
  out.t0 = h.value("t0", 0.0);
  out.t_end = h.value("t_end", 0.0);
  out.capture_epsilon = h.value("capture_epsilon", 0.0);
  out.output_stride = h.value("output_stride", std::size_t{1});
  if (out.n == 0 || !(out.dt > 0.0)) throw ParseError("trace header needs n > 0 and dt > 0");
  return out;
}

void append_vec_array(std::string& s, const std::vector<Vec2>& v) {
  s += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += '[';
    append_real(s, v[i].x);
    s += ',';
    append_real(s, v[i].y);
    s += ']';
  }
  s += ']';
}

template <class T>
void append_int_array(std::string& s, const std::vector<T>& v) {
  s += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt::format("{}", static_cast<unsigned>(v[i]));
  }
  s += ']';
}

std::string record_jsonl(const TrajectoryRecord& r) {
  std::string s = "{\"t\":";
  append_real(s, r.t);
  s += ",\"positions\":";
  append_vec_array(s, r.positions);
  s += ",\"velocities\":";
  append_vec_array(s, r.velocities);
  s += ",\"u_c\":[";
  append_real(s, r.u_c.x);
  s += ',';
  append_real(s, r.u_c.y);
  s += fmt::format("],\"n_l\":{}", r.n_l);
  if (!r.distances.empty()) {
    s += ",\"distances\":[";
    for (std::size_t i = 0; i < r.distances.size(); ++i) {
      if (i) s += ',';
      append_real(s, r.distances[i]);
    }
    s += "],\"active\":";
    append_int_array(s, r.active);
    s += ",\"detect\":";
    append_int_array(s, r.detect);
  }
  s += '}';
  return s;
}

std::vector<Vec2> vecs_from_json(const json& j, std::size_t n, const char* what) {
  if (!j.is_array() || j.size() != n) throw ParseError(fmt::format("{}: expected {} entries", what, n));
  std::vector<Vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {j[i].at(0).get<double>(), j[i].at(1).get<double>()};
  return out;
}

TrajectoryRecord record_from_json(const json& j, std::size_t n) {
  TrajectoryRecord r;
  r.t = j.at("t").get<double>();
  r.positions = vecs_from_json(j.at("positions"), n, "positions");
  r.velocities = vecs_from_json(j.at("velocities"), n, "velocities");
  r.u_c = {j.at("u_c").at(0).get<double>(), j.at("u_c").at(1).get<double>()};
  r.n_l = j.at("n_l").get<std::size_t>();
  if (j.contains("distances")) {
    r.distances = j.at("distances").get<std::vector<double>>();
    r.active = j.at("active").get<std::vector<std::uint8_t>>();
    r.detect = j.at("detect").get<std::vector<std::uint8_t>>();
    if (r.distances.size() != n || r.active.size() != n || r.detect.size() != n)
      throw ParseError("bugs record blocks must have n entries");
  }
  return r;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::string> csv_columns(const TraceHeader& h) {
  std::vector<std::string> cols{"t"};
  const std::size_t n = h.n;
  for (const char* prefix : {"x", "y", "vx", "vy"})
    for (std::size_t i = 0; i < n; ++i) cols.push_back(fmt::format("{}_{}", prefix, i));
  cols.insert(cols.end(), {"ux", "uy", "n_l"});
  if (h.model == Model::Bugs) {
    for (const char* prefix : {"d", "active", "b"})
      for (std::size_t i = 0; i < n; ++i) cols.push_back(fmt::format("{}_{}", prefix, i));
  }
  return cols;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(fmt::format("line {}: '{}' is not a number", line_no, s));
  }
}

Trace read_csv(std::istream& in, const std::string& first_line) {
  Trace trace;
  if (first_line.size() < 2 || first_line[0] != '#')
    throw ParseError("csv trace must start with a '# {header}' line");
  try {
    trace.header = header_from_json(json::parse(first_line.substr(1)));
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("csv trace header: {}", e.what()));
  }
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv trace missing column line");
  const auto names = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < names.size(); ++c) col[names[c]] = c;
  for (const auto& expected : csv_columns(trace.header))
    if (!col.count(expected)) throw ParseError(fmt::format("csv trace missing column '{}'", expected));

  const std::size_t n = trace.header.n;
  const bool bugs = trace.header.model == Model::Bugs;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != names.size())
      throw ParseError(fmt::format("line {}: {} cells, expected {}", line_no, cells.size(), names.size()));
    auto get = [&](const std::string& name) { return parse_double(cells[col.at(name)], line_no); };
    TrajectoryRecord r;
    r.t = get("t");
    r.positions.resize(n);
    r.velocities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      r.positions[i] = {get(fmt::format("x_{}", i)), get(fmt::format("y_{}", i))};
      r.velocities[i] = {get(fmt::format("vx_{}", i)), get(fmt::format("vy_{}", i))};
    }
    r.u_c = {get("ux"), get("uy")};
    r.n_l = static_cast<std::size_t>(get("n_l"));
    if (bugs) {
      r.distances.resize(n);
      r.active.resize(n);
      r.detect.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        r.distances[i] = get(fmt::format("d_{}", i));
        r.active[i] = get(fmt::format("active_{}", i)) != 0.0;
        r.detect[i] = get(fmt::format("b_{}", i)) != 0.0;
      }
    }
    trace.records.push_back(std::move(r));
  }
  return trace;
}

}  // namespace

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

TraceFormat trace_format_from_string(std::string_view s) {
  if (s == "jsonl") return TraceFormat::Jsonl;
  if (s == "csv") return TraceFormat::Csv;
  throw ConfigError(fmt::format("unknown trace format '{}' (jsonl|csv)", s));
}

TraceHeader TraceHeader::from_config(const ScenarioConfig& c) {
  return {c.model, c.n, c.dt, c.schedule.t0(), c.schedule.t_end(), c.capture_epsilon, c.output_stride};
}

void write_trace(std::ostream& out, const Trace& trace, TraceFormat format) {
  if (format == TraceFormat::Jsonl) {
    out << header_json(trace.header) << '\n';
    for (const auto& r : trace.records) out << record_jsonl(r) << '\n';
    return;
  }
  out << '#' << header_json(trace.header) << '\n';
  const auto cols = csv_columns(trace.header);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  const bool bugs = trace.header.model == Model::Bugs;
  for (const auto& r : trace.records) {
    std::string s = format_real(r.t);
    for (const auto& p : r.positions) s += ',' + format_real(p.x);
    for (const auto& p : r.positions) s += ',' + format_real(p.y);
    for (const auto& v : r.velocities) s += ',' + format_real(v.x);
    for (const auto& v : r.velocities) s += ',' + format_real(v.y);
    s += ',' + format_real(r.u_c.x) + ',' + format_real(r.u_c.y) + fmt::format(",{}", r.n_l);
    if (bugs) {
      for (double d : r.distances) s += ',' + format_real(d);
      for (auto a : r.active) s += fmt::format(",{}", static_cast<unsigned>(a));
      for (auto b : r.detect) s += fmt::format(",{}", static_cast<unsigned>(b));
    }
    out << s << '\n';
  }
}

Trace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace");
  if (!line.empty() && line[0] == '#') return read_csv(in, line);
  Trace trace;
  std::size_t line_no = 1;
  try {
    trace.header = header_from_json(json::parse(line));
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      trace.records.push_back(record_from_json(json::parse(line), trace.header.n));
    }
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("trace line {}: {}", line_no, e.what()));
  }
  return trace;
}

Trace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open trace '{}'", path.string()));
  return read_trace(in);
}

void write_events(std::ostream& out, std::span<const CaptureEvent> events) {
  for (const auto& e : events) {
    out << "{\"v\":1,\"t\":" << format_real(e.t) << ",\"chaser\":" << e.chaser
        << ",\"prey\":" << e.prey << ",\"cause\":\"" << to_string(e.cause) << "\"}\n";
  }
}

std::vector<CaptureEvent> read_events(std::istream& in) {
  std::vector<CaptureEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("t").get<double>(), j.at("chaser").get<std::size_t>(),
                     j.at("prey").get<std::size_t>(),
                     capture_cause_from_string(j.at("cause").get<std::string>())});
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("events line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

std::vector<CaptureEvent> read_events_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open events '{}'", path.string()));
  return read_events(in);
}

std::filesystem::path events_path_for(const std::filesystem::path& trace_path) {
  auto p = trace_path;
  p += ".events.jsonl";
  return p;
}

}  // namespace cyclic_swarm
