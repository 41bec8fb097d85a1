#include <doctest.h>

#include <cmath>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/linear_sim.hpp"
#include "cyclic_swarm/prng.hpp"
#include "cyclic_swarm/spectral.hpp"
#include "oracles.hpp"

using namespace cyclic_swarm;

namespace {

ScenarioConfig linear_config(std::size_t n, std::vector<ControlInterval> ivs, double t_end,
                             std::uint64_t seed = 21) {
  ScenarioConfig c;
  c.model = Model::Linear;
  c.n = n;
  c.prng_seed = seed;
  c.schedule = ControlSchedule(std::move(ivs), t_end);
  c.dt = 1e-3;
  c.output_stride = 1000;
  return c;
}

double max_gap(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    g = std::max({g, std::abs(a[i].x - b[i].x), std::abs(a[i].y - b[i].y)});
  return g;
}

Vec2 mean(const std::vector<Vec2>& v) {
  Vec2 m;
  for (const auto& q : v) m += q;
  return m / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("linear rhs examples") {
  SUBCASE("consensus is an equilibrium") {
    const auto s = SwarmState::fresh(0.0, std::vector<Vec2>(5, {2, 3}), LeaderSet(5));
    for (const auto& v : linear_rhs(s, {4, 4}, LeaderSet(5))) CHECK(v == Vec2{0, 0});
  }
  SUBCASE("two agents") {
    const auto s = SwarmState::fresh(0.0, {{0, 0}, {1, 0}}, LeaderSet(2));
    const auto v = linear_rhs(s, {}, LeaderSet(2));
    CHECK(v[0] == Vec2{1, 0});
    CHECK(v[1] == Vec2{-1, 0});
  }
  SUBCASE("matches M X + B U") {
    const auto c = linear_config(6, {{0.0, {6, 3}, LeaderSet::from_string("110111")}}, 1.0);
    const auto s = sample_initial_state(c);
    const auto v = linear_rhs(s, {6, 3}, LeaderSet::from_string("110111"));
    Eigen::MatrixXd x(6, 2);
    for (Eigen::Index i = 0; i < 6; ++i) x.row(i) << s.positions[i].x, s.positions[i].y;
    Eigen::MatrixXd bu = oracle::flags(LeaderSet::from_string("110111")) * Eigen::RowVector2d(6, 3);
    const Eigen::MatrixXd ref = oracle::pursuit_matrix(6) * x + bu;
    for (Eigen::Index i = 0; i < 6; ++i) {
      CHECK(std::abs(v[i].x - ref(i, 0)) < 1e-12);
      CHECK(std::abs(v[i].y - ref(i, 1)) < 1e-12);
    }
  }
}

TEST_CASE("integrated runs track the exact solution") {
  Pcg32 rng(31);
  for (std::size_t n : {2u, 6u, 13u, 40u}) {
    LeaderSet b(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i, rng.below(2) == 1);
    const Vec2 u{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const auto c = linear_config(n, {{0.0, u, b}}, 20.0, rng.next_u32());
    const auto recs = simulate_linear(c);
    const auto basis = build_basis(n);
    const auto p0 = recs.front().positions;
    double worst = 0.0;
    for (const auto& r : recs) worst = std::max(worst, max_gap(r.positions, exact_state(basis, p0, b, u, r.t)));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("records: t0, every stride, t_end") {
  auto c = linear_config(4, {{0.0, {1, 0}, LeaderSet::from_string("1000")}}, 1.0);
  c.output_stride = 300;
  const auto recs = simulate_linear(c);
  REQUIRE(recs.size() == 5);
  CHECK(recs[0].t == 0.0);
  CHECK(recs[1].t == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(recs.back().t == 1.0);
  for (const auto& r : recs) {
    CHECK(r.n_l == 1);
    CHECK(r.u_c == Vec2{1, 0});
    CHECK(r.distances.empty());
  }
}

TEST_CASE("recorded velocities are the rhs at the recorded state") {
  const auto c = linear_config(6, {{0.0, {5, 1}, LeaderSet::from_string("010000")}}, 3.0);
  for (const auto& r : simulate_linear(c)) {
    const auto s = SwarmState::fresh(r.t, r.positions, LeaderSet::from_string("010000"));
    CHECK(linear_rhs(s, {5, 1}, LeaderSet::from_string("010000")) == r.velocities);
  }
}

TEST_CASE("example 1 and 2 terminal velocities") {
  struct Case {
    const char* leaders;
    Vec2 u;
    Vec2 v;
  };
  for (const auto& k : {Case{"010000", {5, 1}, {5.0 / 6.0, 1.0 / 6.0}}, Case{"110111", {6, 3}, {5, 2.5}}}) {
    const auto recs = simulate_linear(linear_config(6, {{0.0, k.u, LeaderSet::from_string(k.leaders)}}, 50.0));
    for (const auto& v : recs.back().velocities) {
      CHECK(std::abs(v.x - k.v.x) < 2e-3);
      CHECK(std::abs(v.y - k.v.y) < 2e-3);
    }
    CHECK(std::abs(fitted_slope(recs.back().positions) - k.u.y / k.u.x) < 1e-4);
  }
}

TEST_CASE("no control: agents meet at the initial centroid") {
  const auto recs = simulate_linear(linear_config(6, {{0.0, {0, 0}, LeaderSet::from_string("101000")}}, 50.0));
  const Vec2 c0 = mean(recs.front().positions);
  for (const auto& p : recs.back().positions) CHECK(norm(p - c0) < 1e-4);
}

TEST_CASE("centroid drift law holds for large inputs") {
  for (double scale : {1.0, 100.0}) {
    const Vec2 u = scale * Vec2{6, 3};
    const auto b = LeaderSet::from_string("100100");
    const auto recs = simulate_linear(linear_config(6, {{0.0, u, b}}, 50.0));
    Vec2 s0;
    for (const auto& p : recs.front().positions) s0 += p;
    for (const auto& r : recs) {
      Vec2 s;
      for (const auto& p : r.positions) s += p;
      const Vec2 expect = s0 + 2.0 * r.t * u;
      CHECK(std::abs(s.x - expect.x) < 1e-6 * scale);
      CHECK(std::abs(s.y - expect.y) < 1e-6 * scale);
    }
    if (scale > 1.0) {
      const auto basis = build_basis(6);
      CHECK(max_gap(recs.back().positions, exact_state(basis, recs.front().positions, b, u, 50.0)) < 1e-6 * scale);
    }
  }
}

TEST_CASE("multi-interval schedule lands on every boundary") {
  const auto b = LeaderSet::from_string("110111");
  std::vector<ControlInterval> ivs = {{0.0, {6, 3}, b}, {10.0, {-2, 4}, b}, {20.0, {3, -1}, b},
                                      {30.0, {0, -5}, b}, {40.0, {4, 2}, b}};
  auto c = linear_config(6, ivs, 50.0);
  c.output_stride = 1;
  const auto recs = simulate_linear(c);
  const auto basis = build_basis(6);
  // Chain exact solutions interval by interval.
  auto p = recs.front().positions;
  for (std::size_t k = 0; k < ivs.size(); ++k) {
    const double t_end = c.schedule.interval_end(k);
    p = exact_state(basis, p, b, ivs[k].u_c, t_end - ivs[k].t_start);
    const auto it = std::find_if(recs.begin(), recs.end(), [&](const TrajectoryRecord& r) { return r.t == t_end; });
    REQUIRE(it != recs.end());
    CHECK(max_gap(it->positions, p) < 1e-6);
    // Interval changes apply before the boundary record is taken.
    if (k + 1 < ivs.size()) CHECK(it->u_c == ivs[k + 1].u_c);
    // Before the boundary the mean velocity has settled on (n_l/n) U_c.
    const auto before = std::prev(it);
    CHECK(norm(mean(before->velocities) - (5.0 / 6.0) * ivs[k].u_c) < 1e-9);
  }
}

TEST_CASE("non-dividing boundaries shorten one step") {
  const auto b = LeaderSet::from_string("01");
  auto c = linear_config(2, {{0.0, {1, 0}, b}, {0.0105, {0, 1}, b}}, 0.02);
  c.output_stride = 1;
  const auto recs = simulate_linear(c);
  CHECK(std::any_of(recs.begin(), recs.end(), [](const TrajectoryRecord& r) { return r.t == 0.0105; }));
  CHECK(recs.back().t == 0.02);
  const auto basis = build_basis(2);
  auto p = exact_state(basis, recs.front().positions, b, {1, 0}, 0.0105);
  p = exact_state(basis, p, b, {0, 1}, 0.02 - 0.0105);
  CHECK(max_gap(recs.back().positions, p) < 1e-12);
}

TEST_CASE("simulate_linear rejects bugs scenarios") {
  auto c = linear_config(3, {{0.0, {0, 0}, LeaderSet(3)}}, 1.0);
  c.model = Model::Bugs;
  CHECK_THROWS_AS(simulate_linear(c), ConfigError);
}
