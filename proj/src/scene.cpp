#include "polarmig/scene.hpp"

#include <cmath>

#include "polarmig/parallel.hpp"

namespace polarmig {

void ArrayGeom::validate() const {
  if (!(side > 0)) throw ValidationError("array.side must be positive");
  if (n1 < 2 || n2 < 2) throw ValidationError("array needs at least 2 receivers per axis");
}

bool ImagingWindow::contains(const Vec3d& y, double tol) const {
  const Vec3d d = y - center;
  const double s = std::max(1.0, center.norm()) * tol;
  return std::abs(d.x()) <= cross / 2 + s && std::abs(d.y()) <= cross / 2 + s && std::abs(d.z()) <= range / 2 + s;
}

std::vector<double> FrequencyBand::omegas() const {
  std::vector<double> w(samples);
  for (int i = 0; i < samples; ++i) w[i] = omega(i);
  return w;
}

void FrequencyBand::validate() const {
  if (samples < 1) throw ValidationError("band.samples must be at least 1");
  if (!(wave_speed > 0)) throw ValidationError("band.wave_speed must be positive");
  if (!(omega0 - bandwidth / 2 > 0)) throw ValidationError("band must stay above zero frequency");
  if (bandwidth < 0) throw ValidationError("band.bandwidth must be non-negative");
}

void Scene::validate() const {
  array.validate();
  if (coincident<double>(source.position, source.reference))
    throw ValidationError("source position coincides with the reference point");
  for (const auto& c : source.coherency) {
    if (!is_hermitian<double>(c, 1e-10)) throw ValidationError("source coherency must be Hermitian");
  }
  for (std::size_t n = 0; n < scatterers.size(); ++n) {
    const auto& s = scatterers[n];
    if ((s.alpha - s.alpha.transpose()).norm() > 1e-12 * std::max(1.0, s.alpha.norm()))
      throw ValidationError("scatterer " + std::to_string(n) + ": polarizability must be symmetric");
    if (coincident<double>(s.position, source.position))
      throw ValidationError("scatterer " + std::to_string(n) + " coincides with the source");
    if (std::abs(s.position.z()) < 1e-12 * std::max(1.0, s.position.norm()))
      throw ValidationError("scatterer " + std::to_string(n) + " lies on the array plane");
  }
}

namespace {

void check_receivers(const Scene& scene) {
  for (std::size_t n = 0; n < scene.scatterers.size(); ++n) {
    const Vec3d& y = scene.scatterers[n].position;
    if (coincident<double>(y, scene.source.position))
      throw DomainError("scatterer " + std::to_string(n) + " coincides with the source");
    // Receivers live in x3 = 0, so only a scatterer in that plane can hit one.
    if (std::abs(y.z()) < 1e-12 * std::max(1.0, y.norm())) {
      for (std::size_t r = 0; r < scene.array.count(); ++r)
        if (coincident<double>(y, scene.array.receiver(r)))
          throw DomainError("scatterer " + std::to_string(n) + " coincides with a receiver");
    }
  }
}

}  // namespace

MatField3 born_response(const Scene& scene, Wavenumberd k) {
  check_receivers(scene);
  const auto& sc = scene.scatterers;
  // alpha_n G(y_n, x_s) does not depend on the receiver.
  std::vector<CMat3d> right(sc.size());
  for (std::size_t n = 0; n < sc.size(); ++n)
    right[n] = sc[n].alpha * dyadic_green<double>(sc[n].position, scene.source.position, k);

  MatField3 out(scene.array.count());
  const long nr = long(out.size());
#pragma omp parallel for schedule(static) num_threads(threads())
  for (long r = 0; r < nr; ++r) {
    const Vec3d xr = scene.array.receiver(std::size_t(r));
    CMat3d acc = CMat3d::Zero();
    for (std::size_t n = 0; n < sc.size(); ++n)
      acc.noalias() += dyadic_green_unchecked<double>(xr - sc[n].position, k.value()) * right[n];
    out[r] = acc;
  }
  return out;
}

MatField3 second_born_response(const Scene& scene, Wavenumberd k) {
  check_receivers(scene);
  const auto& sc = scene.scatterers;
  const std::size_t ns = sc.size();
  for (std::size_t n = 0; n < ns; ++n)
    for (std::size_t m = n + 1; m < ns; ++m)
      if (coincident<double>(sc[n].position, sc[m].position))
        throw DomainError("scatterers " + std::to_string(n) + " and " + std::to_string(m) + " coincide");

  // inner[n] = alpha_n sum_{m != n} G(y_n, y_m) alpha_m G(y_m, x_s)
  std::vector<CMat3d> inner(ns, CMat3d::Zero());
  std::vector<CMat3d> tail(ns);
  for (std::size_t m = 0; m < ns; ++m)
    tail[m] = sc[m].alpha * dyadic_green<double>(sc[m].position, scene.source.position, k);
  for (std::size_t n = 0; n < ns; ++n) {
    for (std::size_t m = 0; m < ns; ++m) {
      if (m == n) continue;
      inner[n] += dyadic_green<double>(sc[n].position, sc[m].position, k) * tail[m];
    }
    inner[n] = sc[n].alpha * inner[n];
  }

  MatField3 out(scene.array.count());
  const long nr = long(out.size());
#pragma omp parallel for schedule(static) num_threads(threads())
  for (long r = 0; r < nr; ++r) {
    const Vec3d xr = scene.array.receiver(std::size_t(r));
    CMat3d acc = CMat3d::Zero();
    if (ns >= 2)
      for (std::size_t n = 0; n < ns; ++n)
        acc.noalias() += dyadic_green_unchecked<double>(xr - sc[n].position, k.value()) * inner[n];
    out[r] = acc;
  }
  return out;
}

MatField2 coherency_at(const Scene& scene, Wavenumberd k, const CMat2d& J, bool include_second_born) {
  MatField3 Pi = born_response(scene, k);
  if (include_second_born) {
    MatField3 Pi2 = second_born_response(scene, k);
    for (std::size_t r = 0; r < Pi.size(); ++r) Pi[r] += Pi2[r];
  }
  const Basis32d Us = scene.source.basis();
  const Basis32d Up = array_basis<double>();
  MatField2 out(Pi.size());
  const long nr = long(out.size());
#pragma omp parallel for schedule(static) num_threads(threads())
  for (long r = 0; r < nr; ++r) {
    const Vec3d xr = scene.array.receiver(std::size_t(r));
    const CMat2d Gt = compress<double>(Up, dyadic_green<double>(xr, scene.source.position, k), Us);
    const CMat2d Pt = compress<double>(Up, Pi[r], Us);
    const CMat2d T = Gt + Pt;
    // Expanding T J T* gives the four incident/scattered cross terms.
    CMat2d Psi = T * J * T.adjoint();
    out[r] = (Psi + Psi.adjoint()) * 0.5;
  }
  return out;
}

std::vector<Scatterer> build_cube_scene(const Vec3d& center, double side, double spacing, const CMat3d& alpha0) {
  if (!(spacing > 0)) throw ValidationError("cube spacing must be positive");
  if (side < spacing) throw ValidationError("cube side must be at least the spacing");
  const int n = int(std::floor(side / spacing * (1 + 1e-12))) + 1;
  const double extent = spacing * (n - 1);
  const Vec3d origin = center - Vec3d::Constant(extent / 2);
  std::vector<Scatterer> out;
  out.reserve(std::size_t(n) * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) out.push_back({origin + spacing * Vec3d(i, j, l), alpha0});
  return out;
}

}  // namespace polarmig
