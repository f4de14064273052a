#include "polarmig/migrate.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "polarmig/parallel.hpp"
#include "polarmig/serialize.hpp"

namespace polarmig {

using nlohmann::json;

Vec3d ImageGrid::point(std::size_t flat) const {
  const std::size_t l = flat % count[2];
  const std::size_t j = (flat / count[2]) % count[1];
  const std::size_t i = flat / (std::size_t(count[2]) * count[1]);
  return origin + double(i) * axis[0] + double(j) * axis[1] + double(l) * axis[2];
}

std::vector<Vec3d> ImageGrid::points() const {
  std::vector<Vec3d> p(size());
  for (std::size_t n = 0; n < p.size(); ++n) p[n] = point(n);
  return p;
}

ImageGrid ImageGrid::line(const Vec3d& start, const Vec3d& step, int n) {
  if (n < 1) throw ValidationError("image line needs at least one point");
  ImageGrid g;
  g.origin = start;
  g.axis[0] = step;
  g.count = {n, 1, 1};
  return g;
}

ImageGrid ImageGrid::plane(const Vec3d& origin, const Vec3d& du, int nu, const Vec3d& dv, int nv) {
  if (nu < 1 || nv < 1) throw ValidationError("image plane needs at least one point per axis");
  ImageGrid g;
  g.origin = origin;
  g.axis[0] = du;
  g.axis[1] = dv;
  g.count = {nu, nv, 1};
  return g;
}

ImageGrid ImageGrid::volume(const Vec3d& origin, const Vec3d& d1, int n1, const Vec3d& d2, int n2, const Vec3d& d3, int n3,
                            std::size_t max_points) {
  if (n1 < 1 || n2 < 1 || n3 < 1) throw ValidationError("image volume needs at least one point per axis");
  if (std::size_t(n1) * n2 * n3 > max_points)
    throw ValidationError("image volume of " + std::to_string(std::size_t(n1) * n2 * n3) + " points exceeds the limit " +
                          std::to_string(max_points));
  ImageGrid g;
  g.origin = origin;
  g.axis = {d1, d2, d3};
  g.count = {n1, n2, n3};
  return g;
}

namespace {
double step_of(double extent, int n) { return n > 1 ? extent / (n - 1) : 0.0; }
}  // namespace

ImageGrid ImageGrid::cross_range_slice(const ImagingWindow& w, double x3) {
  const double s = step_of(w.cross, w.n_cross);
  const Vec3d o(w.center.x() - w.cross / 2, w.center.y() - w.cross / 2, x3);
  return plane(o, Vec3d(s, 0, 0), w.n_cross, Vec3d(0, s, 0), w.n_cross);
}

ImageGrid ImageGrid::range_slice(const ImagingWindow& w, double x2) {
  const double s = step_of(w.cross, w.n_cross);
  const double t = step_of(w.range, w.n_range);
  const Vec3d o(w.center.x() - w.cross / 2, x2, w.center.z() - w.range / 2);
  return plane(o, Vec3d(s, 0, 0), w.n_cross, Vec3d(0, 0, t), w.n_range);
}

void ImageField::refresh_norms() {
  raw_norm.resize(raw.size());
  for (std::size_t n = 0; n < raw.size(); ++n) raw_norm[n] = raw[n].norm();
  alpha_norm.resize(alpha.size());
  for (std::size_t n = 0; n < alpha.size(); ++n) alpha_norm[n] = alpha[n].norm();
}

std::size_t ImageField::peak(bool use_alpha) const {
  const auto& v = use_alpha ? alpha_norm : raw_norm;
  if (v.empty()) throw ValidationError("peak of an empty image");
  std::size_t best = 0;
  for (std::size_t n = 1; n < v.size(); ++n)
    if (v[n] > v[best]) best = n;
  return best;
}

namespace {

void check_point(const Vec3d& y, const ArrayDataSet& ds) {
  if (std::abs(y.z()) < 1e-12 * std::max(1.0, y.norm())) {
    for (std::size_t r = 0; r < ds.array().count(); ++r)
      if (coincident<double>(y, ds.array().receiver(r))) throw DomainError("imaging point coincides with a receiver");
    throw DomainError("imaging point lies on the array plane");
  }
  if (coincident<double>(y, ds.source().position)) throw DomainError("imaging point coincides with the source");
}

void check_data(const ArrayDataSet& ds) {
  if (ds.kind() == DataKind::coherency2x2)
    throw ValidationError("migration needs 3x3 data; preprocess the coherency dataset first");
}

std::vector<double> trapezoid_weights(const std::vector<double>& x) {
  std::vector<double> w(x.size(), 0.0);
  if (x.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

CMat2d inverse_checked(const CMat2d& M, const char* what) {
  const double c = cond2<double>(M);
  if (!(c < 1e12)) throw NumericalError(std::string(what) + " is singular (cond " + std::to_string(c) + ")");
  return M.inverse();
}

// Exact-mode recovery from the 3x3 image and spreading matrices.
CMat2d recover_exact(const CMat3d& I, const CMat3d& Hr, const CMat3d& Hs, const Basis32d& Up, const Basis32d& Us) {
  const CMat2d Ar = inverse_checked(compress<double>(Up, Hr, Up), "receiver spreading factor");
  const CMat2d As = inverse_checked(compress<double>(Us, Hs, Us), "source spreading factor");
  return Ar * compress<double>(Up, I, Us) * As;
}

CMat2d recover_fraunhofer(const CMat3d& I, double L, double area, const Basis32d& Up, const Basis32d& Us) {
  if (!(area > 0)) throw NumericalError("array area must be positive");
  const double s = std::pow(4 * kPi * L, 4) / area;
  return s * compress<double>(Up, I, Us);
}

}  // namespace

CMat3d kirchhoff_single(const ArrayDataSet& ds, int f, const Vec3d& y) {
  check_data(ds);
  check_point(y, ds);
  const double k = ds.band().wavenumber(f);
  CMat3d A = CMat3d::Zero();
  for (std::size_t r = 0; r < ds.array().count(); ++r)
    A.noalias() += dyadic_green_unchecked<double>(ds.array().receiver(r) - y, k).conjugate() * ds.mat3(r, f);
  const CMat3d Gs = dyadic_green_unchecked<double>(ds.source().position - y, k);
  return ds.array().cell_weight() * A * Gs.conjugate();
}

CMat3d kirchhoff_band(const ArrayDataSet& ds, const Vec3d& y) {
  if (ds.frequencies() < 2) throw ValidationError("band image needs at least two frequencies");
  const auto w = trapezoid_weights(ds.band().omegas());
  CMat3d I = CMat3d::Zero();
  for (int f = 0; f < ds.frequencies(); ++f) I += w[f] * kirchhoff_single(ds, f, y);
  return I;
}

CMat3d h_r(const Vec3d& y, const Vec3d& yp, Wavenumberd k, const ArrayGeom& array) {
  CMat3d H = CMat3d::Zero();
  for (std::size_t r = 0; r < array.count(); ++r) {
    const Vec3d xr = array.receiver(r);
    H.noalias() += dyadic_green<double>(xr, y, k).conjugate() * dyadic_green<double>(xr, yp, k);
  }
  return array.cell_weight() * H;
}

CMat3d h_s(const Vec3d& y, const Vec3d& yp, Wavenumberd k, const Vec3d& xs) {
  return dyadic_green<double>(xs, y, k).conjugate() * dyadic_green<double>(xs, yp, k);
}

namespace {
double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6 : std::sin(x) / x; }
}  // namespace

CMat3d h_r_fraunhofer(const Vec3d& y, const Vec3d& yp, Wavenumberd k, const ArrayGeom& array, double L) {
  const double a = array.side;
  const double kk = k.value();
  const Vec3d d = yp - y;
  const cd phase = std::polar(1.0, kk * d.z());
  const double s = sinc(kk * a * d.x() / (2 * L)) * sinc(kk * a * d.y() / (2 * L));
  const Mat3d Pp = array_basis<double>() * array_basis<double>().transpose();
  return (a * a / std::pow(4 * kPi * L, 2) * s * phase) * Pp.cast<cd>();
}

CMat3d h_s_fraunhofer(const Vec3d& y, const Vec3d& yp, Wavenumberd k, const Vec3d& xs, const Vec3d& y0) {
  const cd phase = std::polar(1.0, k.value() * ((xs - yp).norm() - (xs - y).norm()));
  return phase * projector<double>(xs, y0).cast<cd>();
}

CMat2d recover_alpha_single(const CMat3d& image, const Vec3d& y, Wavenumberd k, const ArrayGeom& array,
                            const SourceSpec& source, RecoveryMode mode) {
  const Basis32d Up = array_basis<double>();
  const Basis32d Us = source.basis();
  if (mode == RecoveryMode::fraunhofer) return recover_fraunhofer(image, source.reference.z(), array.side * array.side, Up, Us);
  return recover_exact(image, h_r(y, y, k, array), h_s(y, y, k, source.position), Up, Us);
}

CMat2d recover_alpha_band(const std::vector<CMat2d>& a, const std::vector<double>& omegas) {
  if (a.size() < 2 || a.size() != omegas.size()) throw ValidationError("band recovery needs matching samples, at least two");
  const auto w = trapezoid_weights(omegas);
  CMat2d acc = CMat2d::Zero();
  for (std::size_t f = 0; f < a.size(); ++f) acc += w[f] * a[f];
  return acc / (omegas.back() - omegas.front());
}

std::vector<CMat2d> phase_correct(const std::vector<CMat2d>& field, double delta_rel) {
  if (delta_rel < 0) throw ValidationError("phase correction delta must be non-negative");
  double peak = 0;
  for (const auto& a : field) peak = std::max(peak, std::abs(a(0, 0)));
  const double delta = delta_rel * peak;
  std::vector<CMat2d> out(field.size());
  for (std::size_t n = 0; n < field.size(); ++n) {
    const cd a11 = field[n](0, 0);
    const double den = std::abs(a11) + delta;
    out[n] = den > 0 ? CMat2d(field[n] * (std::conj(a11) / den)) : CMat2d::Zero();
  }
  return out;
}

ImageField migrate_points(const ArrayDataSet& ds, const std::vector<Vec3d>& points, const MigrateOptions& opt) {
  check_data(ds);
  for (const auto& y : points) check_point(y, ds);
  const int nf = ds.frequencies();
  const std::size_t nr = ds.array().count();
  const std::vector<double> omegas = ds.band().omegas();
  const std::vector<double> wf = trapezoid_weights(omegas);
  const double span = nf > 1 ? omegas.back() - omegas.front() : 1.0;
  const double cell = ds.array().cell_weight();
  const Basis32d Up = array_basis<double>();
  const Basis32d Us = ds.source().basis();
  const Vec3d xs = ds.source().position;
  const bool exact = opt.mode == RecoveryMode::exact;
  std::vector<Vec3d> receivers(nr);
  for (std::size_t r = 0; r < nr; ++r) receivers[r] = ds.array().receiver(r);

  ImageField img;
  img.raw.assign(points.size(), CMat3d::Zero());
  if (opt.recover) img.alpha.assign(points.size(), CMat2d::Zero());
  const long np = long(points.size());

#pragma omp parallel num_threads(threads())
  {
    std::vector<CMat3d> A(nf), H(nf);
#pragma omp for schedule(dynamic, 1)
    for (long p = 0; p < np; ++p) {
      const Vec3d y = points[p];
      std::fill(A.begin(), A.end(), CMat3d::Zero());
      if (opt.recover && exact) std::fill(H.begin(), H.end(), CMat3d::Zero());
      // Receiver-major so the dataset is streamed contiguously.
      for (std::size_t r = 0; r < nr; ++r) {
        const Vec3d d = receivers[r] - y;
        for (int f = 0; f < nf; ++f) {
          const CMat3d Gc = dyadic_green_unchecked<double>(d, ds.band().wavenumber(f)).conjugate();
          A[f].noalias() += Gc * ds.mat3(r, f);
          if (opt.recover && exact) H[f].noalias() += Gc * Gc.conjugate();
        }
      }
      CMat3d I = CMat3d::Zero();
      CMat2d alpha = CMat2d::Zero();
      for (int f = 0; f < nf; ++f) {
        const CMat3d Gs = dyadic_green_unchecked<double>(xs - y, ds.band().wavenumber(f));
        const CMat3d If = cell * A[f] * Gs.conjugate();
        I += wf[f] * If;
        if (opt.recover) {
          const CMat2d af = exact ? recover_exact(If, cell * H[f], Gs.conjugate() * Gs, Up, Us)
                                  : recover_fraunhofer(If, ds.source().reference.z(), ds.array().side * ds.array().side, Up, Us);
          alpha += wf[f] * af;
        }
      }
      img.raw[p] = I;
      if (opt.recover) img.alpha[p] = nf > 1 ? CMat2d(alpha / span) : alpha;
    }
  }
  img.refresh_norms();
  return img;
}

ImageField migrate(const ArrayDataSet& ds, const ImageGrid& grid, const MigrateOptions& opt) {
  ImageField img = migrate_points(ds, grid.points(), opt);
  img.grid = grid;
  return img;
}

double region_slope(double a, double b, double h, double L) {
  return (a + b) / std::sqrt(std::pow(2 * L - h, 2) + std::pow(a + b, 2));
}

RegionReport region_check(const ArrayGeom& array, const ImagingWindow& window, const Vec3d& xs, double gamma) {
  if (gamma != 1.0 && gamma != 3.0) throw ValidationError("region gamma must be 1 or 3");
  RegionReport rep;
  rep.gamma = gamma;
  rep.slope = region_slope(array.side, window.cross, window.range, window.center.z());
  double worst = std::numeric_limits<double>::infinity();
  auto visit = [&](const Vec3d& xr) {
    const double par = (xr.head<2>() - xs.head<2>()).norm();
    const double full = (xr - xs).norm();
    worst = std::min(worst, full > 0 ? par / (gamma * rep.slope * full) : 0.0);
  };
  for (std::size_t r = 0; r < array.count(); ++r) visit(array.receiver(r));
  const double h = array.side / 2;
  for (double sx : {-h, h})
    for (double sy : {-h, h}) visit(Vec3d(sx, sy, 0));
  rep.margin = worst - 1.0;
  rep.admissible = rep.margin > 0;
  return rep;
}

namespace {

json grid_json(const ImageGrid& g) {
  return {{"origin", to_json(g.origin)},
          {"axes", {to_json(g.axis[0]), to_json(g.axis[1]), to_json(g.axis[2])}},
          {"counts", {g.count[0], g.count[1], g.count[2]}}};
}

ImageGrid grid_from(const json& j) {
  ImageGrid g;
  g.origin = vec3_from_json(j.at("origin"));
  for (int i = 0; i < 3; ++i) g.axis[i] = vec3_from_json(j.at("axes").at(i));
  for (int i = 0; i < 3; ++i) g.count[i] = j.at("counts").at(i).get<int>();
  return g;
}

}  // namespace

void image_write(const std::string& path, const ImageField& img, bool alpha_kind) {
  const std::size_t n = img.grid.size();
  const int d = alpha_kind ? 2 : 3;
  if ((alpha_kind ? img.alpha.size() : img.raw.size()) != n) throw ValidationError("image values do not match the grid");
  std::vector<double> payload;
  payload.reserve(n * d * d * 2);
  for (std::size_t p = 0; p < n; ++p)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const cd z = alpha_kind ? img.alpha[p](i, j) : img.raw[p](i, j);
        payload.push_back(z.real());
        payload.push_back(z.imag());
      }
  json h;
  h["kind"] = alpha_kind ? "image2x2" : "image3x3";
  h["grid"] = grid_json(img.grid);
  h["payload_doubles"] = payload.size();
  container_write(path, h.dump(), payload);
}

ImageField image_read(const std::string& path) {
  const Container c = container_read(path);
  const json h = json::parse(c.header);
  ImageField img;
  try {
    const std::string kind = h.at("kind").get<std::string>();
    if (kind != "image2x2" && kind != "image3x3") throw FormatError("not an image file: kind '" + kind + "'");
    img.grid = grid_from(h.at("grid"));
    const int d = kind == "image2x2" ? 2 : 3;
    const std::size_t n = img.grid.size();
    if (c.payload.size() != n * d * d * 2) throw FormatError("dimension mismatch between image grid and payload");
    std::size_t at = 0;
    for (std::size_t p = 0; p < n; ++p) {
      CMat3d M3 = CMat3d::Zero();
      CMat2d M2 = CMat2d::Zero();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j, at += 2) (d == 2 ? M2(i, j) : M3(i, j)) = cd(c.payload[at], c.payload[at + 1]);
      if (d == 2)
        img.alpha.push_back(M2);
      else
        img.raw.push_back(M3);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed image header: ") + e.what());
  }
  img.refresh_norms();
  return img;
}

void image_write_csv(const std::string& path, const ImageField& img) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw FormatError("cannot open '" + path + "' for writing");
  std::fprintf(f, "x1,x2,x3,raw_norm");
  const bool a = !img.alpha.empty();
  if (a && img.alpha_norm.size() != img.alpha.size()) throw ValidationError("image norms are stale; call refresh_norms");
  if (a) std::fprintf(f, ",alpha_norm,re11,im11,re12,im12,re21,im21,re22,im22");
  std::fprintf(f, "\n");
  for (std::size_t p = 0; p < img.grid.size(); ++p) {
    const Vec3d y = img.grid.point(p);
    // Alpha-only images read back from disk carry no raw values.
    const double rn = p < img.raw_norm.size() ? img.raw_norm[p] : std::nan("");
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g", y.x(), y.y(), y.z(), rn);
    if (a) {
      std::fprintf(f, ",%.17g", img.alpha_norm[p]);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) std::fprintf(f, ",%.17g,%.17g", img.alpha[p](i, j).real(), img.alpha[p](i, j).imag());
    }
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace polarmig
