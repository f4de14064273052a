#pragma once

#include <array>
#include <optional>

#include "polarmig/dataset.hpp"

namespace polarmig {

// Regular grid of imaging points: origin + i*axis[0] + j*axis[1] + l*axis[2].
struct ImageGrid {
  Vec3d origin = Vec3d::Zero();
  std::array<Vec3d, 3> axis{Vec3d::Zero(), Vec3d::Zero(), Vec3d::Zero()};
  std::array<int, 3> count{1, 1, 1};

  std::size_t size() const { return std::size_t(count[0]) * count[1] * count[2]; }
  Vec3d point(std::size_t flat) const;
  std::vector<Vec3d> points() const;

  static ImageGrid line(const Vec3d& start, const Vec3d& step, int n);
  static ImageGrid plane(const Vec3d& origin, const Vec3d& du, int nu, const Vec3d& dv, int nv);
  // Full volume; refuses more than max_points points.
  static ImageGrid volume(const Vec3d& origin, const Vec3d& d1, int n1, const Vec3d& d2, int n2, const Vec3d& d3, int n3,
                          std::size_t max_points = 2'000'000);
  // Cross-range plane at fixed x3 and range plane at fixed x2, centered on the window.
  static ImageGrid cross_range_slice(const ImagingWindow& w, double x3);
  static ImageGrid range_slice(const ImagingWindow& w, double x2);
};

struct ImageField {
  ImageGrid grid;
  std::vector<CMat3d> raw;    // I_KM per point (band integrated when multi-frequency)
  std::vector<CMat2d> alpha;  // recovered projected tensor, empty when not requested
  std::vector<double> raw_norm, alpha_norm;

  void refresh_norms();
  std::size_t peak(bool use_alpha) const;  // lowest index wins ties
};

enum class RecoveryMode { exact, fraunhofer };

struct MigrateOptions {
  bool recover = true;
  RecoveryMode mode = RecoveryMode::exact;
};

// Riemann-weighted single-frequency image at y for dataset frequency index f.
CMat3d kirchhoff_single(const ArrayDataSet& ds, int f, const Vec3d& y);
// Trapezoid over the dataset band.
CMat3d kirchhoff_band(const ArrayDataSet& ds, const Vec3d& y);

CMat3d h_r(const Vec3d& y, const Vec3d& yp, Wavenumberd k, const ArrayGeom& array);
CMat3d h_s(const Vec3d& y, const Vec3d& yp, Wavenumberd k, const Vec3d& xs);
// Square-array closed form; L is the array-to-window range.
CMat3d h_r_fraunhofer(const Vec3d& y, const Vec3d& yp, Wavenumberd k, const ArrayGeom& array, double L);
CMat3d h_s_fraunhofer(const Vec3d& y, const Vec3d& yp, Wavenumberd k, const Vec3d& xs, const Vec3d& y0);

// Projected tensor from one image value. Throws NumericalError on a singular 2x2 factor.
CMat2d recover_alpha_single(const CMat3d& image, const Vec3d& y, Wavenumberd k, const ArrayGeom& array,
                            const SourceSpec& source, RecoveryMode mode);
// (1/B) trapezoid average over a uniform grid.
CMat2d recover_alpha_band(const std::vector<CMat2d>& per_frequency, const std::vector<double>& omegas);

std::vector<CMat2d> phase_correct(const std::vector<CMat2d>& field, double delta_rel = 1e-6);

// Fused kernel: band image and per-frequency recovery at every grid point.
ImageField migrate(const ArrayDataSet& ds, const ImageGrid& grid, const MigrateOptions& opt = {});
ImageField migrate_points(const ArrayDataSet& ds, const std::vector<Vec3d>& points, const MigrateOptions& opt = {});

struct RegionReport {
  double slope = 0;   // c
  double gamma = 1;
  double margin = 0;  // min over receivers of |x_par offset| / (gamma c |x_r - x_s|) minus one
  bool admissible = false;
};
double region_slope(double a, double b, double h, double L);
RegionReport region_check(const ArrayGeom& array, const ImagingWindow& window, const Vec3d& xs, double gamma);

void image_write(const std::string& path, const ImageField& img, bool alpha_kind);
ImageField image_read(const std::string& path);
void image_write_csv(const std::string& path, const ImageField& img);

}  // namespace polarmig
