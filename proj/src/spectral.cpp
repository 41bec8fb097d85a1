#include "cyclic_swarm/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "cyclic_swarm/errors.hpp"
#include "cyclic_swarm/kernels.hpp"

namespace cyclic_swarm {
namespace {

// e^z - 1 without cancellation for small |z|.
Complex expm1(Complex z) {
  const double a = z.real();
  const double b = z.imag();
  const double s = std::sin(0.5 * b);
  const double re = std::expm1(a) * std::cos(b) - 2.0 * s * s;
  const double im = std::exp(a) * std::sin(b);
  return {re, im};
}

std::vector<double> to_doubles(const LeaderSet& leaders) {
  std::vector<double> b(leaders.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = leaders[i] ? 1.0 : 0.0;
  return b;
}

std::vector<double> synthesize_real(const SpectralBasis& basis, std::span<const Complex> coef,
                                    const char* what) {
  const std::size_t n = basis.n();
  std::vector<double> out(n);
  std::vector<double> residue(n);
  kernels::omp::spectral_synthesize(basis.matrix(), coef, out, residue);
  for (std::size_t m = 0; m < n; ++m) {
    if (!(std::abs(residue[m]) <= kImagResidueTolerance))
      throw ConsistencyError(fmt::format("{}: imaginary residue {} at component {}", what,
                                         residue[m], m));
  }
  return out;
}

}  // namespace

SpectralBasis build_basis(std::size_t n) {
  if (n < 2) throw std::domain_error(fmt::format("spectral basis needs n >= 2 (got {})", n));
  SpectralBasis b;
  b.n_ = n;
  // Twiddles rho^r for r = 0..n-1; every power is reduced mod n before lookup.
  std::vector<Complex> rho(n);
  rho[0] = {1.0, 0.0};
  for (std::size_t r = 1; r < n; ++r) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
    rho[r] = {std::cos(angle), std::sin(angle)};
  }
  b.eigenvalues_.resize(n);
  b.eigenvalues_[0] = {0.0, 0.0};
  for (std::size_t k = 1; k < n; ++k) b.eigenvalues_[k] = rho[k] - 1.0;

  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  b.vectors_.resize(n * n);
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t k = 0; k < n; ++k) b.vectors_[m * n + k] = rho[(m * k) % n] * scale;
  return b;
}

std::vector<double> exact_axis_state(const SpectralBasis& basis, std::span<const double> x0,
                                     const LeaderSet& leaders, double u, double t) {
  const std::size_t n = basis.n();
  if (x0.size() != n || leaders.size() != n)
    throw std::invalid_argument("exact_axis_state: length mismatch");
  if (!(t >= 0.0)) throw std::invalid_argument("exact_axis_state: t must be >= 0");
  if (t == 0.0) return {x0.begin(), x0.end()};

  const auto b = to_doubles(leaders);
  std::vector<Complex> cx(n);
  std::vector<Complex> cb(n);
  kernels::omp::spectral_project(basis.matrix(), x0, cx);
  kernels::omp::spectral_project(basis.matrix(), b, cb);

  std::vector<Complex> coef(n);
  coef[0] = cx[0] + t * u * cb[0];
  for (std::size_t k = 1; k < n; ++k) {
    const Complex lt = basis.eigenvalue(k) * t;
    const Complex decay = std::exp(lt);
    const Complex gain = expm1(lt) / basis.eigenvalue(k);
    coef[k] = decay * cx[k] + gain * (u * cb[k]);
  }
  return synthesize_real(basis, coef, "exact_axis_state");
}

std::vector<Vec2> exact_state(const SpectralBasis& basis, std::span<const Vec2> p0,
                              const LeaderSet& leaders, Vec2 u_c, double t) {
  const std::size_t n = p0.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = p0[i].x;
    y[i] = p0[i].y;
  }
  const auto xt = exact_axis_state(basis, x, leaders, u_c.x, t);
  const auto yt = exact_axis_state(basis, y, leaders, u_c.y, t);
  std::vector<Vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {xt[i], yt[i]};
  return out;
}

std::vector<double> deviation_vector(const SpectralBasis& basis, const LeaderSet& leaders,
                                     double u) {
  const std::size_t n = basis.n();
  if (leaders.size() != n) throw std::invalid_argument("deviation_vector: length mismatch");
  const auto b = to_doubles(leaders);
  std::vector<Complex> cb(n);
  kernels::omp::spectral_project(basis.matrix(), b, cb);
  std::vector<Complex> coef(n);
  coef[0] = {0.0, 0.0};
  for (std::size_t k = 1; k < n; ++k) coef[k] = -(u * cb[k]) / basis.eigenvalue(k);
  return synthesize_real(basis, coef, "deviation_vector");
}

Vec2 agreement_velocity(const LeaderSet& leaders, Vec2 u_c) {
  if (leaders.size() == 0) throw std::invalid_argument("agreement_velocity: empty leader set");
  const double beta = static_cast<double>(leaders.count()) / static_cast<double>(leaders.size());
  return beta * u_c;
}

std::vector<Vec2> FormationPrediction::positions(double t) const {
  std::vector<Vec2> out(gamma.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = position(i, t);
  return out;
}

FormationPrediction predict_formation(const SpectralBasis& basis, std::span<const Vec2> initial,
                                      const LeaderSet& leaders, Vec2 u_c) {
  const std::size_t n = basis.n();
  if (initial.size() != n || leaders.size() != n)
    throw std::invalid_argument("predict_formation: length mismatch");
  FormationPrediction f;
  for (const auto& p : initial) f.alpha += p;
  f.alpha = f.alpha / static_cast<double>(n);
  f.beta = static_cast<double>(leaders.count()) / static_cast<double>(n);
  f.gamma = deviation_vector(basis, leaders, 1.0);
  f.u_c = u_c;
  return f;
}

double fitted_slope(std::span<const Vec2> points) {
  const double count = static_cast<double>(points.size());
  Vec2 mean;
  for (const auto& p : points) mean += p;
  mean = mean / count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mean.x) * (p.x - mean.x);
    sxy += (p.x - mean.x) * (p.y - mean.y);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

}  // namespace cyclic_swarm
