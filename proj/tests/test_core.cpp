#include <doctest.h>

#include <nlohmann/json.hpp>

#include "cyclic_swarm/config_io.hpp"
#include "cyclic_swarm/core.hpp"
#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/prng.hpp"

using namespace cyclic_swarm;

namespace {

ControlSchedule three_intervals() {
  const auto b = LeaderSet::from_string("010000");
  return ControlSchedule({{0.0, {1, 0}, b}, {10.0, {2, 0}, b}, {20.0, {3, 0}, b}}, 30.0);
}

ScenarioConfig seeded(std::size_t n, std::uint64_t seed) {
  ScenarioConfig c;
  c.model = Model::Linear;
  c.n = n;
  c.prng_seed = seed;
  c.schedule = ControlSchedule({{0.0, {0, 0}, LeaderSet(n)}}, 1.0);
  return c;
}

}  // namespace

TEST_CASE("pcg32 matches the reference generator") {
  // pcg32_srandom_r(42, 54) from the reference C implementation.
  Pcg32 rng(42u, 54u);
  const std::uint32_t expect[] = {0xa15c02b7, 0x7b47f409, 0xba1d3330, 0x83d2f293, 0xbfa4784b, 0xcbed606e};
  for (auto e : expect) CHECK(rng.next_u32() == e);
}

TEST_CASE("pcg32 doubles stay in [0, 1) and bounded ints in range") {
  Pcg32 rng(1);
  for (int k = 0; k < 10000; ++k) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7u);
  }
}

TEST_CASE("leader set parsing and counting") {
  const auto b = LeaderSet::from_string("010000");
  CHECK(b.size() == 6);
  CHECK(b.count() == 1);
  CHECK(b[1]);
  CHECK_FALSE(b[0]);
  CHECK(b.to_string() == "010000");
  CHECK(LeaderSet::all(4).all_set());
  CHECK(LeaderSet(3).none_set());
  CHECK_THROWS_AS(LeaderSet::from_string("01x"), ConfigError);
}

TEST_CASE("schedule lookup") {
  const auto b = LeaderSet::from_string("010000");
  const ControlSchedule single({{0.0, {5, 1}, b}}, 50.0);
  const auto [u, leaders] = evaluate_schedule(single, 37.0);
  CHECK(u == Vec2{5, 1});
  CHECK(leaders == b);

  const auto s = three_intervals();
  CHECK(evaluate_schedule(s, 10.0).first.x == 2.0);
  CHECK(evaluate_schedule(s, 9.999).first.x == 1.0);
  CHECK(evaluate_schedule(s, 0.0).first.x == 1.0);
  CHECK(evaluate_schedule(s, 29.999).first.x == 3.0);
  CHECK_THROWS_AS(evaluate_schedule(s, 30.0), std::out_of_range);
  CHECK_THROWS_AS(evaluate_schedule(s, -0.1), std::out_of_range);
  CHECK(s.index_at_or_last(30.0) == 2);
  CHECK(s.interval_end(0) == 10.0);
  CHECK(s.interval_end(2) == 30.0);
}

TEST_CASE("schedule construction rejects bad input") {
  const auto b = LeaderSet(3);
  CHECK_THROWS_AS(ControlSchedule({}, 1.0), ConfigError);
  CHECK_THROWS_AS(ControlSchedule({{0, {}, b}, {0, {}, b}}, 1.0), ConfigError);
  CHECK_THROWS_AS(ControlSchedule({{0, {}, b}, {1, {}, LeaderSet(4)}}, 2.0), ConfigError);
  CHECK_THROWS_AS(ControlSchedule({{0, {}, b}}, 0.0), ConfigError);
  CHECK_THROWS_AS(ControlSchedule({{0, {std::nan(""), 0}, b}}, 1.0), ConfigError);
}

TEST_CASE("explicit initial positions pass through") {
  ScenarioConfig c;
  c.n = 3;
  c.initial_positions = std::vector<Vec2>{{0, 0}, {1, 0}, {0, 1}};
  c.schedule = ControlSchedule({{0.0, {}, LeaderSet::from_string("100")}}, 1.0);
  const auto s = sample_initial_state(c);
  CHECK(s.positions == *c.initial_positions);
  CHECK(s.t == 0.0);
  CHECK(s.detect == LeaderSet::from_string("100"));
  CHECK(s.active_count() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.cluster_of[i] == i);
  s.check_invariants();
}

TEST_CASE("seeded sampling is deterministic and inside the box") {
  const auto a = sample_initial_state(seeded(6, 99));
  const auto b = sample_initial_state(seeded(6, 99));
  CHECK(a.positions == b.positions);
  CHECK(sample_initial_state(seeded(6, 100)).positions != a.positions);
  for (const auto& p : a.positions) {
    CHECK(p.x >= -5.0);
    CHECK(p.x < 5.0);
    CHECK(p.y >= -5.0);
    CHECK(p.y < 5.0);
  }
}

TEST_CASE("scenario validation") {
  auto c = seeded(6, 1);
  c.validate();
  SUBCASE("n") {
    c.n = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("dt") {
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("epsilon") {
    c.capture_epsilon = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("positions length") {
    c.initial_positions = std::vector<Vec2>(5);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("no positions and no seed") {
    c.prng_seed.reset();
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("bugs magnitude limit with partial leaders") {
    c.model = Model::Bugs;
    c.schedule = ControlSchedule({{0.0, {2, 0}, LeaderSet::from_string("010000")}}, 1.0);
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.schedule = ControlSchedule({{0.0, {2, 0}, LeaderSet::all(6)}}, 1.0);
    CHECK_NOTHROW(c.validate());
    c.model = Model::Linear;
    c.schedule = ControlSchedule({{0.0, {200, 0}, LeaderSet::from_string("010000")}}, 1.0);
    CHECK_NOTHROW(c.validate());
  }
}

TEST_CASE("leader changes re-seed cluster flags as the OR of members") {
  auto s = SwarmState::fresh(0.0, {{0, 0}, {0, 0}, {1, 0}}, LeaderSet(3));
  // agent 0 merged into agent 1
  s.cluster_of[0] = 1;
  s.active[0] = 0;
  s.apply_leaders(LeaderSet::from_string("100"));
  CHECK(s.detect == LeaderSet::from_string("110"));
  s.check_invariants();
  s.apply_leaders(LeaderSet::from_string("001"));
  CHECK(s.detect == LeaderSet::from_string("001"));
}

TEST_CASE("cluster invariant checks") {
  auto s = SwarmState::fresh(0.0, {{0, 0}, {1, 0}, {2, 0}}, LeaderSet(3));
  s.check_invariants();
  s.cluster_of[0] = 1;
  CHECK_THROWS_AS(s.check_invariants(), ConsistencyError);
  s.active[0] = 0;
  CHECK_THROWS_AS(s.check_invariants(), ConsistencyError);  // not snapped
  s.positions[0] = s.positions[1];
  s.check_invariants();
  CHECK(s.next_active(2) == 1);
}

TEST_CASE("config json round trip") {
  const auto j = nlohmann::json::parse(R"({
    "model": "bugs", "n": 3,
    "initial_positions": [[0, 0], [1, 0], {"x": 0.5, "y": 0.25}],
    "schedule": {"intervals": [{"t_start": 0, "u_c": [0.1, 0], "leaders": "010"},
                               {"t_start": 2.5, "u_c": [0, 0.1], "leaders": [1, 1, 0]}],
                 "t_end": 5},
    "dt": 0.002, "capture_epsilon": 0.0005, "output_stride": 10})");
  const auto c = config_from_json(j);
  CHECK(c.model == Model::Bugs);
  CHECK(c.n == 3);
  CHECK((*c.initial_positions)[2] == Vec2{0.5, 0.25});
  CHECK(c.schedule.size() == 2);
  CHECK(c.schedule.interval(1).leaders == LeaderSet::from_string("110"));
  CHECK(c.dt == 0.002);
  CHECK(c.output_stride == 10);
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
}

TEST_CASE("config json errors are validation errors") {
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"model": "linear"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(
                      R"({"model": "swarm", "n": 3, "prng_seed": 1,
                          "schedule": {"intervals": [{"t_start": 0, "u_c": [0, 0], "leaders": "000"}], "t_end": 1}})")),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/scenario.json"), IoError);
}
