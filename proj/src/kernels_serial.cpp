#include "cyclic_swarm/kernels.hpp"

namespace cyclic_swarm::kernels::serial {

void linear_rhs(std::span<const Vec2> p, std::span<const std::uint8_t> leaders, Vec2 u,
                std::span<Vec2> out) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t next = i + 1 == n ? 0 : i + 1;
    Vec2 v = p[next] - p[i];
    if (leaders[i]) v += u;
    out[i] = v;
  }
}

void bugs_rhs(const BugsView& s, Vec2 u, std::span<Vec2> out, std::span<double> dist) {
  const std::size_t n = s.positions.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.active[i]) continue;
    const Vec2 r = s.positions[s.prey[i]] - s.positions[i];
    const double d = norm(r);
    Vec2 v = d > 0.0 ? r / d : Vec2{};
    if (s.detect[i]) v += u;
    out[i] = v;
    dist[i] = d;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (s.active[i]) continue;
    out[i] = out[s.cluster_of[i]];
    dist[i] = 0.0;
  }
}

void spectral_project(std::span<const Complex> basis, std::span<const double> x,
                      std::span<Complex> coef) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Complex* col = basis.data() + k * n;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      re += col[m].real() * x[m];
      im -= col[m].imag() * x[m];
    }
    coef[k] = {re, im};
  }
}

void spectral_synthesize(std::span<const Complex> basis, std::span<const Complex> coef,
                         std::span<double> out, std::span<double> residue) {
  const std::size_t n = coef.size();
  for (std::size_t m = 0; m < n; ++m) {
    const Complex* row = basis.data() + m * n;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      re += row[k].real() * coef[k].real() - row[k].imag() * coef[k].imag();
      im += row[k].real() * coef[k].imag() + row[k].imag() * coef[k].real();
    }
    out[m] = re;
    residue[m] = im;
  }
}

}  // namespace cyclic_swarm::kernels::serial
