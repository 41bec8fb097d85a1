#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the
// reference kept for testing and `omp` is the production path. Each output
// element is produced by the same arithmetic in the same order in both
// versions, so their results are bitwise identical.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>

#include "cyclic_swarm/vec2.hpp"

namespace cyclic_swarm::kernels {

using Complex = std::complex<double>;

/// Below this many agents the OpenMP kernels run single-threaded.
inline constexpr std::size_t kParallelThreshold = 256;

/// Read-only view of the bugs-model swarm topology.
struct BugsView {
  std::span<const Vec2> positions;
  std::span<const std::size_t> prey;        // next active agent; valid for active agents
  std::span<const std::size_t> cluster_of;
  std::span<const std::uint8_t> active;
  std::span<const std::uint8_t> detect;
};

namespace serial {

/// out_i = p_{i+1} - p_i + b_i u  (indices mod n)
void linear_rhs(std::span<const Vec2> p, std::span<const std::uint8_t> leaders, Vec2 u,
                std::span<Vec2> out);

/// Active i: out_i = (p_prey - p_i)/d_i + b_i u, dist_i = d_i. Inactive i copies
/// its leader's velocity and gets dist_i = 0. A zero d_i leaves out_i = b_i u.
void bugs_rhs(const BugsView& s, Vec2 u, std::span<Vec2> out, std::span<double> dist);

/// coef_k = sum_m conj(V[k*n+m]) x_m for a symmetric n x n basis V.
void spectral_project(std::span<const Complex> basis, std::span<const double> x,
                      std::span<Complex> coef);

/// out_m = Re sum_k V[m*n+k] coef_k; residue_m = Im of the same sum.
void spectral_synthesize(std::span<const Complex> basis, std::span<const Complex> coef,
                         std::span<double> out, std::span<double> residue);

}  // namespace serial

namespace omp {

void linear_rhs(std::span<const Vec2> p, std::span<const std::uint8_t> leaders, Vec2 u,
                std::span<Vec2> out);
void bugs_rhs(const BugsView& s, Vec2 u, std::span<Vec2> out, std::span<double> dist);
void spectral_project(std::span<const Complex> basis, std::span<const double> x,
                      std::span<Complex> coef);
void spectral_synthesize(std::span<const Complex> basis, std::span<const Complex> coef,
                         std::span<double> out, std::span<double> residue);

}  // namespace omp

}  // namespace cyclic_swarm::kernels
