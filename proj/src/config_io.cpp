#include "cyclic_swarm/config_io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "cyclic_swarm/errors.hpp"

namespace cyclic_swarm {
namespace {

using nlohmann::json;

Vec2 vec_from_json(const json& j, const char* what) {
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object()) return {j.at("x").get<double>(), j.at("y").get<double>()};
  throw ConfigError(fmt::format("{}: expected [x, y] or {{\"x\":..,\"y\":..}}", what));
}

LeaderSet leaders_from_json(const json& j) {
  if (j.is_string()) return LeaderSet::from_string(j.get<std::string>());
  if (!j.is_array()) throw ConfigError("leaders: expected an array of flags or a bit string");
  std::vector<std::uint8_t> flags;
  for (const auto& f : j) {
    if (f.is_boolean()) {
      flags.push_back(f.get<bool>() ? 1 : 0);
    } else if (f.is_number_integer() && (f.get<int>() == 0 || f.get<int>() == 1)) {
      flags.push_back(static_cast<std::uint8_t>(f.get<int>()));
    } else {
      throw ConfigError("leaders: flags must be 0/1 or booleans");
    }
  }
  return LeaderSet(std::move(flags));
}

}  // namespace

ScenarioConfig config_from_json(const json& j) {
  try {
    ScenarioConfig c;
    c.model = model_from_string(j.at("model").get<std::string>());
    const auto n = j.at("n").get<long long>();
    if (n < 2) throw ConfigError(fmt::format("n must be >= 2 (got {})", n));
    c.n = static_cast<std::size_t>(n);
    if (j.contains("initial_positions")) {
      std::vector<Vec2> pos;
      for (const auto& p : j.at("initial_positions")) pos.push_back(vec_from_json(p, "initial_positions"));
      c.initial_positions = std::move(pos);
    }
    if (j.contains("prng_seed")) c.prng_seed = j.at("prng_seed").get<std::uint64_t>();
    if (j.contains("sampling_box")) {
      const auto& b = j.at("sampling_box");
      c.sampling_box = {b.at("xmin").get<double>(), b.at("xmax").get<double>(),
                        b.at("ymin").get<double>(), b.at("ymax").get<double>()};
    }
    const auto& s = j.at("schedule");
    std::vector<ControlInterval> intervals;
    for (const auto& iv : s.at("intervals")) {
      intervals.push_back({iv.at("t_start").get<double>(), vec_from_json(iv.at("u_c"), "u_c"),
                           leaders_from_json(iv.at("leaders"))});
    }
    c.schedule = ControlSchedule(std::move(intervals), s.at("t_end").get<double>());
    c.dt = j.value("dt", 1e-3);
    c.capture_epsilon = j.value("capture_epsilon", 1e-3);
    const auto stride = j.value("output_stride", 1LL);
    if (stride <= 0) throw ConfigError("output_stride must be positive");
    c.output_stride = static_cast<std::size_t>(stride);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("invalid scenario config: {}", e.what()));
  }
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["model"] = std::string(to_string(c.model));
  j["n"] = c.n;
  if (c.initial_positions) {
    json pos = json::array();
    for (const auto& p : *c.initial_positions) pos.push_back({p.x, p.y});
    j["initial_positions"] = pos;
  }
  if (c.prng_seed) j["prng_seed"] = *c.prng_seed;
  j["sampling_box"] = {{"xmin", c.sampling_box.xmin},
                       {"xmax", c.sampling_box.xmax},
                       {"ymin", c.sampling_box.ymin},
                       {"ymax", c.sampling_box.ymax}};
  json ivs = json::array();
  for (const auto& iv : c.schedule.intervals()) {
    json flags = json::array();
    for (std::size_t i = 0; i < iv.leaders.size(); ++i) flags.push_back(iv.leaders[i] ? 1 : 0);
    ivs.push_back({{"t_start", iv.t_start}, {"u_c", {iv.u_c.x, iv.u_c.y}}, {"leaders", flags}});
  }
  j["schedule"] = {{"intervals", ivs}, {"t_end", c.schedule.t_end()}};
  j["dt"] = c.dt;
  j["capture_epsilon"] = c.capture_epsilon;
  j["output_stride"] = c.output_stride;
  return j;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return config_from_json(j);
}

}  // namespace cyclic_swarm
