#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/prng.hpp"
#include "cyclic_swarm/spectral.hpp"
#include "oracles.hpp"

using namespace cyclic_swarm;

namespace {

LeaderSet random_leaders(Pcg32& rng, std::size_t n) {
  LeaderSet b(n);
  for (std::size_t i = 0; i < n; ++i) b.set(i, rng.below(2) == 1);
  return b;
}

std::vector<double> random_axis(Pcg32& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-5.0, 5.0);
  return x;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST_CASE("n = 4 eigenvalues") {
  const auto b = build_basis(4);
  const Complex expect[] = {{0, 0}, {-1, -1}, {-2, 0}, {-1, 1}};
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(b.eigenvalue(k) - expect[k]) < 1e-15);
}

TEST_CASE("n = 2 eigenvalues") {
  const auto b = build_basis(2);
  CHECK(b.eigenvalue(0) == Complex(0, 0));
  CHECK(std::abs(b.eigenvalue(1) - Complex(-2, 0)) < 1e-15);
}

TEST_CASE("lambda_0 is exactly zero and v_0 is uniform") {
  for (std::size_t n : {2u, 3u, 5u, 6u, 17u, 64u}) {
    const auto b = build_basis(n);
    CHECK(b.eigenvalue(0) == Complex(0.0, 0.0));
    const double c = 1.0 / std::sqrt(static_cast<double>(n));
    for (const auto& z : b.eigenvector(0)) CHECK(std::abs(z - Complex(c, 0.0)) < 1e-15);
  }
}

TEST_CASE("n < 2 is a domain error") {
  CHECK_THROWS_AS(build_basis(1), std::domain_error);
  CHECK_THROWS_AS(build_basis(0), std::domain_error);
}

TEST_CASE("eigenvalues lie on the unit circle around -1") {
  for (std::size_t n : {2u, 3u, 4u, 6u, 17u, 64u, 512u}) {
    const auto b = build_basis(n);
    for (std::size_t k = 1; k < n; ++k) {
      CHECK(b.eigenvalue(k).real() < 0.0);
      CHECK(std::abs(std::abs(b.eigenvalue(k) + 1.0) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("eigenvectors are orthonormal up to n = 512") {
  for (std::size_t n : {2u, 7u, 64u, 512u}) {
    const auto b = build_basis(n);
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto vj = b.eigenvector(j);
      for (std::size_t k = j; k < n; ++k) {
        const auto vk = b.eigenvector(k);
        Complex s = 0.0;
        for (std::size_t m = 0; m < n; ++m) s += std::conj(vj[m]) * vk[m];
        worst = std::max(worst, std::abs(s - (j == k ? 1.0 : 0.0)));
      }
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("eigen relation against the dense pursuit matrix") {
  for (std::size_t n : {2u, 3u, 4u, 6u, 17u, 64u}) {
    const auto b = build_basis(n);
    const Eigen::MatrixXcd m = oracle::pursuit_matrix(n).cast<std::complex<double>>();
    for (std::size_t k = 0; k < n; ++k) {
      const auto v = b.eigenvector(k);
      Eigen::VectorXcd vk(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) vk(static_cast<Eigen::Index>(i)) = v[i];
      CHECK((m * vk - b.eigenvalue(k) * vk).norm() < 1e-10);
    }
  }
}

TEST_CASE("columns of the pursuit matrix sum to zero") {
  for (std::size_t n : {2u, 6u, 33u}) {
    const auto m = oracle::pursuit_matrix(n);
    CHECK(m.colwise().sum().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("exact solution at t = 0 returns x0") {
  Pcg32 rng(3);
  const auto b = build_basis(6);
  const auto x0 = random_axis(rng, 6);
  CHECK(exact_axis_state(b, x0, LeaderSet::from_string("010000"), 5.0, 0.0) == x0);
}

TEST_CASE("exact solution matches the matrix exponential") {
  Pcg32 rng(4);
  for (std::size_t n : {2u, 3u, 6u, 11u, 32u}) {
    const auto basis = build_basis(n);
    for (int trial = 0; trial < 5; ++trial) {
      const auto x0 = random_axis(rng, n);
      const auto leaders = random_leaders(rng, n);
      const double u = rng.uniform(-5.0, 5.0);
      const double t = rng.uniform(0.0, 20.0);
      const auto x = exact_axis_state(basis, x0, leaders, u, t);
      const auto ref = oracle::propagate(to_eigen(x0), leaders, u, t);
      CHECK((to_eigen(x) - ref).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("free motion converges to the centroid") {
  Pcg32 rng(5);
  const auto b = build_basis(6);
  const auto x0 = random_axis(rng, 6);
  const double mean = std::accumulate(x0.begin(), x0.end(), 0.0) / 6.0;
  for (double v : exact_axis_state(b, x0, LeaderSet::from_string("010010"), 0.0, 50.0))
    CHECK(std::abs(v - mean) < 1e-6);
}

TEST_CASE("all leaders move as one point") {
  const auto b = build_basis(6);
  const std::vector<double> x0(6, 0.0);
  const auto x = exact_axis_state(b, x0, LeaderSet::all(6), 1.0, 50.0);
  for (double v : x) CHECK(std::abs(v - 50.0) < 1e-6);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  CHECK(*hi - *lo < 1e-6);
}

TEST_CASE("sum of positions grows by n_l u t") {
  Pcg32 rng(6);
  for (std::size_t n : {3u, 6u, 20u}) {
    const auto basis = build_basis(n);
    const auto x0 = random_axis(rng, n);
    const auto leaders = random_leaders(rng, n);
    const double u = rng.uniform(-3.0, 3.0);
    const double s0 = std::accumulate(x0.begin(), x0.end(), 0.0);
    for (double t : {0.5, 7.0, 40.0}) {
      const auto x = exact_axis_state(basis, x0, leaders, u, t);
      const double s = std::accumulate(x.begin(), x.end(), 0.0);
      CHECK(std::abs(s - s0 - static_cast<double>(leaders.count()) * u * t) < 1e-8);
    }
  }
}

TEST_CASE("deviation vector") {
  const auto b6 = build_basis(6);
  SUBCASE("all ones and all zeros give zero") {
    for (double v : deviation_vector(b6, LeaderSet::all(6), 3.0)) CHECK(std::abs(v) < 1e-12);
    for (double v : deviation_vector(b6, LeaderSet(6), 3.0)) CHECK(v == 0.0);
  }
  SUBCASE("single leader, u = 5, sums to zero") {
    const auto xi = deviation_vector(b6, LeaderSet::from_string("010000"), 5.0);
    CHECK(std::abs(std::accumulate(xi.begin(), xi.end(), 0.0)) < 1e-9);
  }
  SUBCASE("matches the dense least-squares solution") {
    Pcg32 rng(7);
    for (std::size_t n : {2u, 3u, 6u, 17u, 64u}) {
      const auto basis = build_basis(n);
      for (int trial = 0; trial < 4; ++trial) {
        const auto leaders = random_leaders(rng, n);
        const double u = rng.uniform(-5.0, 5.0);
        const auto xi = deviation_vector(basis, leaders, u);
        CHECK(std::abs(std::accumulate(xi.begin(), xi.end(), 0.0)) < 1e-9);
        CHECK((to_eigen(xi) - oracle::deviation(leaders, u)).cwiseAbs().maxCoeff() < 1e-9);
      }
    }
  }
  SUBCASE("long-time offset from the moving centroid equals xi") {
    const auto leaders = LeaderSet::from_string("010000");
    const std::vector<double> x0 = {1, -2, 3, 0.5, -1, 4};
    const double t = 60.0;
    const auto ref = oracle::propagate(to_eigen(x0), leaders, 5.0, t);
    const double shift = std::accumulate(x0.begin(), x0.end(), 0.0) / 6.0 + 5.0 / 6.0 * t;
    const auto xi = deviation_vector(b6, leaders, 5.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(ref(static_cast<Eigen::Index>(i)) - shift - xi[i]) < 1e-6);
  }
}

TEST_CASE("agreement velocity") {
  CHECK(agreement_velocity(LeaderSet::from_string("010000"), {5, 1}).x == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(agreement_velocity(LeaderSet::from_string("010000"), {5, 1}).y == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  const auto v = agreement_velocity(LeaderSet::from_string("110111"), {6, 3});
  CHECK(v.x == doctest::Approx(5.0));
  CHECK(v.y == doctest::Approx(2.5));
  CHECK(agreement_velocity(LeaderSet(6), {6, 3}) == Vec2{0, 0});
}

TEST_CASE("formation prediction") {
  const auto b = build_basis(6);
  const std::vector<Vec2> p0 = {{-3, 1}, {2, 4}, {0, -1}, {4, -3}, {-1, 2}, {1, 0}};
  SUBCASE("slope follows U_c") {
    for (auto [u, slope] : {std::pair{Vec2{5, 1}, 0.2}, std::pair{Vec2{6, 3}, 0.5}}) {
      const auto f = predict_formation(b, p0, LeaderSet::from_string("010000"), u);
      CHECK(std::abs(fitted_slope(f.positions(50.0)) - slope) < 1e-6);
    }
  }
  SUBCASE("all leaders coincide") {
    const auto f = predict_formation(b, p0, LeaderSet::all(6), {2, -1});
    const auto ps = f.positions(10.0);
    const Vec2 expect = f.alpha + 10.0 * Vec2{2, -1};
    for (const auto& p : ps) CHECK(norm(p - expect) < 1e-12);
  }
  SUBCASE("prediction matches the exact solution late in time") {
    const auto leaders = LeaderSet::from_string("110111");
    const auto f = predict_formation(b, p0, leaders, {6, 3});
    const auto exact = exact_state(b, p0, leaders, {6, 3}, 50.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(norm(exact[i] - f.position(i, 50.0)) < 1e-6);
  }
}

TEST_CASE("fitted slope") {
  CHECK(fitted_slope(std::vector<Vec2>{{0, 1}, {1, 3}, {2, 5}}) == doctest::Approx(2.0));
  CHECK(std::isnan(fitted_slope(std::vector<Vec2>{{1, 0}, {1, 3}})));
}
