#pragma once

#include <vector>

#include "polarmig/em_core.hpp"

namespace polarmig {

struct Scatterer {
  Vec3d position;
  CMat3d alpha;  // rescaled polarizability, frequency independent
};

struct SourceSpec {
  Vec3d position = Vec3d::Zero();
  Vec3d reference = Vec3d::Zero();  // y0, fixes the source basis
  // One entry broadcasts over the band, otherwise one per frequency sample.
  std::vector<CMat2d> coherency{CMat2d::Identity()};

  const CMat2d& coherency_at(std::size_t f) const { return coherency.size() == 1 ? coherency[0] : coherency.at(f); }
  Basis32d basis() const { return source_basis<double>(position, reference); }
};

// Square or rectangular receiver grid in the x3 = 0 plane, endpoints included.
struct ArrayGeom {
  double side = 0;
  int n1 = 0, n2 = 0;

  double spacing1() const { return side / (n1 - 1); }
  double spacing2() const { return side / (n2 - 1); }
  double cell_weight() const { return spacing1() * spacing2(); }
  std::size_t count() const { return std::size_t(n1) * std::size_t(n2); }
  Vec3d receiver(int i, int j) const { return {-side / 2 + i * spacing1(), -side / 2 + j * spacing2(), 0.0}; }
  Vec3d receiver(std::size_t flat) const { return receiver(int(flat / n2), int(flat % n2)); }
  void validate() const;
};

struct ImagingWindow {
  Vec3d center = Vec3d::Zero();
  double cross = 0;  // b
  double range = 0;  // h
  int n_cross = 0, n_range = 0;

  bool contains(const Vec3d& y, double tol = 1e-12) const;
};

struct FrequencyBand {
  double omega0 = 0;     // rad/s
  double bandwidth = 0;  // rad/s
  int samples = 1;
  double wave_speed = 3e8;

  double omega(int i) const {
    if (samples == 1) return omega0;
    return omega0 - bandwidth / 2 + bandwidth * double(i) / double(samples - 1);
  }
  double wavenumber(int i) const { return omega(i) / wave_speed; }
  std::vector<double> omegas() const;
  void validate() const;
};

struct Scene {
  SourceSpec source;
  ArrayGeom array;
  ImagingWindow window;
  std::vector<Scatterer> scatterers;

  void validate() const;
};

// Per-receiver 3x3 field, receivers flattened row-major.
using MatField3 = std::vector<CMat3d>;
using MatField2 = std::vector<CMat2d>;

MatField3 born_response(const Scene& scene, Wavenumberd k);
MatField3 second_born_response(const Scene& scene, Wavenumberd k);

// Coherency of the cross-range field at every receiver for one wavenumber.
MatField2 coherency_at(const Scene& scene, Wavenumberd k, const CMat2d& source_coherency, bool include_second_born);

std::vector<Scatterer> build_cube_scene(const Vec3d& center, double side, double spacing, const CMat3d& alpha0);

}  // namespace polarmig
