#pragma once

// Shared fixtures and independent reference formulas for the test suites.

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "polarmig/scene.hpp"

namespace testsupport {

using polarmig::cd;
using polarmig::CMat2d;
using polarmig::CMat3d;
using polarmig::Vec3d;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double c0 = 3e8;
inline constexpr double f0 = 2.4e9;
inline constexpr double lambda0 = c0 / f0;
inline constexpr double omega0 = 2 * pi * f0;
inline constexpr double k0 = omega0 / c0;
inline constexpr double L = 100 * lambda0;
inline constexpr double aperture = 20 * lambda0;

inline Vec3d source_position() { return {L / 2, 0, L * (1 - std::sqrt(0.75))}; }
inline Vec3d reference() { return {0, 0, L}; }

inline CMat3d alpha1() {
  const cd i(0, 1);
  CMat3d a;
  a << 2. + i, -i, 1., -i, 1. + 2. * i, i, 1., i, 1. + i;
  return a;
}
inline CMat3d alpha2() {
  const cd i(0, 1);
  CMat3d a;
  a << 2. + 2. * i, -1. + i, i / 2., -1. + i, 1. + 2. * i, 0., i / 2., 0., 1.;
  return a;
}
inline CMat3d alpha3() {
  const cd i(0, 1);
  CMat3d a;
  a << 2. - 2. * i, 1. + i, 0., 1. + i, 1. + 2. * i, (1. - i) / 2., 0., (1. - i) / 2., i;
  return a;
}
inline std::array<Vec3d, 3> dipole_positions() {
  return {Vec3d(-6, -5, 100) * lambda0, Vec3d(7, -5, 100) * lambda0, Vec3d(5, 8, 106) * lambda0};
}

inline polarmig::Scene paper_scene(int receivers = 31, bool with_dipoles = true) {
  polarmig::Scene s;
  s.source.position = source_position();
  s.source.reference = reference();
  s.array.side = aperture;
  s.array.n1 = s.array.n2 = receivers;
  s.window.center = reference();
  s.window.cross = 30 * lambda0;
  s.window.range = 30 * lambda0;
  s.window.n_cross = s.window.n_range = 31;
  if (with_dipoles) {
    const auto p = dipole_positions();
    s.scatterers = {{p[0], alpha1()}, {p[1], alpha2()}, {p[2], alpha3()}};
  }
  return s;
}

inline polarmig::FrequencyBand paper_band(int samples) {
  polarmig::FrequencyBand b;
  b.omega0 = omega0;
  b.bandwidth = omega0;  // 1.2 to 3.6 GHz
  b.samples = samples;
  b.wave_speed = c0;
  return b;
}

inline polarmig::FrequencyBand single(double k) {
  polarmig::FrequencyBand b;
  b.omega0 = k * c0;
  b.bandwidth = 0;
  b.samples = 1;
  b.wave_speed = c0;
  return b;
}

// Written out entry by entry from exp(ikr)/(4 pi r) [(1+m) delta_ij - (1+3m) u_i u_j].
inline CMat3d green_oracle(const Vec3d& x, const Vec3d& y, double k) {
  const double d[3] = {x(0) - y(0), x(1) - y(1), x(2) - y(2)};
  const double r = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  const cd g = std::exp(cd(0, k * r)) / (4 * pi * r);
  const cd m = (cd(0, k * r) - 1.0) / (k * r * k * r);
  CMat3d G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G(i, j) = g * ((i == j ? 1.0 + m : cd(0)) - (1.0 + 3.0 * m) * d[i] * d[j] / (r * r));
  return G;
}

inline CMat3d random_symmetric(std::mt19937_64& rng, double scale = 1) {
  std::normal_distribution<double> n;
  CMat3d a;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) a(i, j) = a(j, i) = scale * cd(n(rng), n(rng));
  return a;
}

inline double rel(const CMat3d& a, const CMat3d& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }
inline double rel(const CMat2d& a, const CMat2d& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace testsupport
