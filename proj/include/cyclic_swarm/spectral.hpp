#pragma once

// Closed-form eigenstructure of the cyclic-pursuit matrix M = circ[-1, 1, 0, ..., 0]
// and the exact piecewise solution of  x' = M x + B u  built from it.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cyclic_swarm/core.hpp"

namespace cyclic_swarm {

using Complex = std::complex<double>;

/// Imaginary residue tolerated when projecting a complex modal sum onto the reals.
inline constexpr double kImagResidueTolerance = 1e-9;

/// Eigenpairs of M for a given n:
///   lambda_k = rho^k - 1,  v_k(m) = rho^{km} / sqrt(n),  rho = exp(-2 pi j / n).
/// The basis matrix is symmetric, so column k and row k hold the same numbers.
class SpectralBasis {
 public:
  std::size_t n() const { return n_; }
  const Complex& eigenvalue(std::size_t k) const { return eigenvalues_[k]; }
  std::span<const Complex> eigenvalues() const { return eigenvalues_; }
  /// v_k as a contiguous span of length n.
  std::span<const Complex> eigenvector(std::size_t k) const {
    return {vectors_.data() + k * n_, n_};
  }
  /// Row-major n x n, entry (m, k) = v_k(m).
  std::span<const Complex> matrix() const { return vectors_; }

 private:
  friend SpectralBasis build_basis(std::size_t n);
  std::size_t n_{0};
  std::vector<Complex> eigenvalues_;
  std::vector<Complex> vectors_;
};

/// Throws std::domain_error for n < 2.
SpectralBasis build_basis(std::size_t n);

/// One axis of the exact solution after relative time t inside a constant
/// interval (B, u):
///   x(t) = sum_k e^{lambda_k t} v_k v_k^* x0
///          + [ t v_0 v_0^T + sum_{k>=1} (e^{lambda_k t} - 1)/lambda_k v_k v_k^* ] B u.
/// Throws ConsistencyError if any component keeps an imaginary part above
/// kImagResidueTolerance.
std::vector<double> exact_axis_state(const SpectralBasis& basis, std::span<const double> x0,
                                     const LeaderSet& leaders, double u, double t);

/// Both axes at once, on positions.
std::vector<Vec2> exact_state(const SpectralBasis& basis, std::span<const Vec2> p0,
                              const LeaderSet& leaders, Vec2 u_c, double t);

/// Limit of the non-agreement input response for one axis:
///   xi = -Re{ [ sum_{k>=1} (1/lambda_k) v_k v_k^* ] B } u.
/// Zero-sum; zero when B is all ones or all zeros.
std::vector<double> deviation_vector(const SpectralBasis& basis, const LeaderSet& leaders,
                                     double u);

/// (n_l / n) u_c
Vec2 agreement_velocity(const LeaderSet& leaders, Vec2 u_c);

/// Asymptotic formation  p_i(t) ~ alpha + beta u_c t + gamma_i u_c.
struct FormationPrediction {
  Vec2 alpha;                 // centroid of the initial positions
  double beta{0.0};           // n_l / n
  std::vector<double> gamma;  // per-agent deviation coefficient (deviation_vector with u = 1)
  Vec2 u_c;

  Vec2 velocity() const { return beta * u_c; }
  Vec2 deviation(std::size_t i) const { return gamma[i] * u_c; }
  /// t is relative to the start of the interval that produced the prediction.
  Vec2 position(std::size_t i, double t) const { return alpha + beta * t * u_c + deviation(i); }
  std::vector<Vec2> positions(double t) const;
};

FormationPrediction predict_formation(const SpectralBasis& basis, std::span<const Vec2> initial,
                                      const LeaderSet& leaders, Vec2 u_c);

/// Least-squares slope dy/dx of a point set; NaN when the x-spread is zero.
double fitted_slope(std::span<const Vec2> points);

}  // namespace cyclic_swarm
