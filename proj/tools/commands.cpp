#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cyclic_swarm/bugs_sim.hpp"
#include "cyclic_swarm/config_io.hpp"
#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/linear_sim.hpp"
#include "cyclic_swarm/server.hpp"
#include "cyclic_swarm/session.hpp"
#include "cyclic_swarm/spectral.hpp"
#include "cyclic_swarm/trace_io.hpp"
#include "cyclic_swarm/verify.hpp"

namespace cyclic_swarm::cli {
namespace {

using nlohmann::json;

ScenarioConfig load(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  auto config = load_config(path);
  if (seed) {
    config.prng_seed = *seed;
    config.initial_positions.reset();
  }
  config.validate();
  return config;
}

TraceFormat pick_format(const RunOptions& o) {
  if (!o.format.empty()) return trace_format_from_string(o.format);
  if (o.out && o.out->extension() == ".csv") return TraceFormat::Csv;
  return TraceFormat::Jsonl;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot write '{}'", p.string()));
  return f;
}

double max_speed(const ControlSchedule& s) {
  double m = 0.0;
  for (const auto& iv : s.intervals()) m = std::max(m, norm(iv.u_c));
  return m;
}

std::string vec(Vec2 v) { return fmt::format("({:.6f}, {:.6f})", v.x, v.y); }

Vec2 mean(const std::vector<Vec2>& vs) {
  Vec2 m;
  for (const auto& v : vs) m += v;
  return m / static_cast<double>(vs.size());
}

json bugs_bounds(const ScenarioConfig& c) {
  const auto s0 = sample_initial_state(c);
  const double speed = max_speed(c.schedule);
  const auto bound = termination_bound(s0, {speed, 0.0});
  json j{{"gather_bound", gather_bound(c.n)},
         {"max_speed", speed},
         {"sum_distances_t0", sum_distances(s0)},
         {"certified", bound.has_value()}};
  j["termination_bound"] = bound ? json(*bound) : json(nullptr);
  return j;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kValidation;
  if (dynamic_cast<const ParseError*>(&e)) return kValidation;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  return kInternal;
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  const auto config = load(o.config, o.seed_override);
  const auto format = pick_format(o);
  Trace trace{TraceHeader::from_config(config), {}};
  std::vector<CaptureEvent> events;
  std::optional<double> gathered_at;

  spdlog::info("running {} scenario, n={}, t=[{}, {}], dt={}", to_string(config.model), config.n,
               config.schedule.t0(), config.schedule.t_end(), config.dt);
  if (config.model == Model::Linear) {
    trace.records = simulate_linear(config);
  } else {
    auto run = simulate_bugs(config);
    trace.records = std::move(run.records);
    events = std::move(run.events);
    gathered_at = run.gathered_at;
  }

  if (o.out) {
    auto f = open_out(*o.out);
    write_trace(f, trace, format);
    if (!f) throw IoError(fmt::format("write to '{}' failed", o.out->string()));
    if (config.model == Model::Bugs) {
      auto ef = open_out(events_path_for(*o.out));
      write_events(ef, events);
    }
  }

  const auto& last = trace.records.back();
  const auto& iv = config.schedule.interval(config.schedule.index_at_or_last(last.t));
  fmt::print(out, "model            {}\n", to_string(config.model));
  fmt::print(out, "agents           {}\n", config.n);
  fmt::print(out, "records          {}\n", trace.records.size());
  fmt::print(out, "t_end            {}\n", last.t);
  fmt::print(out, "mean velocity    {}\n", vec(mean(last.velocities)));
  if (config.model == Model::Linear) {
    const Vec2 predicted = agreement_velocity(iv.leaders, iv.u_c);
    double spread = 0.0;
    for (const auto& v : last.velocities) spread = std::max(spread, norm(v - predicted));
    fmt::print(out, "predicted        {}  (n_l/n = {}/{})\n", vec(predicted), iv.leaders.count(), config.n);
    fmt::print(out, "max |v_i - pred| {:.3e}\n", spread);
  } else {
    const auto b = bugs_bounds(config);
    fmt::print(out, "captures         {}\n", events.size());
    fmt::print(out, "gathered_at      {}\n", gathered_at ? format_real(*gathered_at) : "not gathered");
    fmt::print(out, "gather_bound     {}\n", b["gather_bound"].get<double>());
    if (b["certified"].get<bool>())
      fmt::print(out, "termination      {} (certified)\n", b["termination_bound"].get<double>());
    else
      fmt::print(out, "termination      uncertified (max |U_c| = {} >= 1/(2n^2))\n", b["max_speed"].get<double>());
  }
  if (o.out) fmt::print(out, "trace            {}\n", o.out->string());
  return kOk;
}

int cmd_predict(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override,
                std::ostream& out) {
  const auto config = load(path, seed_override);
  const auto s0 = sample_initial_state(config);
  json report{{"model", std::string(to_string(config.model))}, {"n", config.n}};
  if (config.model == Model::Linear) {
    const auto basis = build_basis(config.n);
    // The centroid moves with the mean velocity, so each interval's alpha is
    // the centroid reached at its start.
    Vec2 centroid = mean(s0.positions);
    json intervals = json::array();
    const auto& s = config.schedule;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const auto& iv = s.interval(k);
      std::vector<Vec2> at_start(config.n, centroid);
      const auto f = predict_formation(basis, at_start, iv.leaders, iv.u_c);
      json xi = json::array();
      for (std::size_t i = 0; i < config.n; ++i) xi.push_back({f.deviation(i).x, f.deviation(i).y});
      intervals.push_back({{"t_start", iv.t_start},
                           {"u_c", {iv.u_c.x, iv.u_c.y}},
                           {"n_l", iv.leaders.count()},
                           {"alpha", {f.alpha.x, f.alpha.y}},
                           {"beta", f.beta},
                           {"velocity", {f.velocity().x, f.velocity().y}},
                           {"xi", xi},
                           {"time_constant", slowest_time_constant(config.n)},
                           {"asymptotic", s.interval_end(k) - iv.t_start >=
                                              tolerances::kAsymptoticTimeConstants *
                                                  slowest_time_constant(config.n)}});
      centroid += (s.interval_end(k) - iv.t_start) * f.velocity();
    }
    report["intervals"] = intervals;
  } else {
    report["bugs"] = bugs_bounds(config);
  }
  out << report.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  const auto config = load(o.config, o.seed_override);
  const auto trace = read_trace_file(o.trace);
  if (trace.header.model != config.model)
    throw ParseError(fmt::format("trace model {} does not match config model {}",
                                 to_string(trace.header.model), to_string(config.model)));
  std::vector<PropertyReport> reports;
  if (config.model == Model::Linear) {
    reports = check_linear_asymptotics(trace, config.schedule);
  } else {
    const auto events_path = o.events ? *o.events : events_path_for(o.trace);
    const auto events = read_events_file(events_path);
    reports = check_bugs_properties(trace, events, config);
  }
  out << reports_to_json(reports).dump(2) << '\n';
  for (const auto& r : reports)
    spdlog::info("{:<28} {:<15} worst {:.3e} at t={} (tol {:.1e})", r.property_id,
                 to_string(r.status), r.worst_violation, r.location_t, r.tolerance);
  return any_failed(reports) ? kVerifyFailed : kOk;
}

int cmd_serve(const ServeOptions& o) {
  const auto config = load(o.config, o.seed_override);
  if (o.tick_ms <= 0) throw ConfigError("tick period must be positive");
  Session session(config, {o.cadence});
  ServerOptions so;
  so.address = o.address;
  so.port = o.port;
  so.tick_period = std::chrono::milliseconds(o.tick_ms);
  so.handle_signals = true;
  SessionServer server(session, so);
  std::cout << fmt::format("listening on {}:{}\n", o.address, server.port()) << std::flush;
  server.run();
  return kOk;
}

}  // namespace cyclic_swarm::cli
