#pragma once

#include <Eigen/SVD>
#include <limits>

#include "polarmig/types.hpp"

namespace polarmig {

namespace detail {
template <typename Real> void require_distinct(const Vec3<Real>& x, const Vec3<Real>& y, const char* what) {
  if (coincident<Real>(x, y)) throw DomainError(std::string(what) + ": coincident points");
}
}  // namespace detail

// exp(ikr)/(4 pi r)
template <typename Real>
std::complex<Real> scalar_green(const Vec3<Real>& x, const Vec3<Real>& y, Wavenumber<Real> k) {
  detail::require_distinct<Real>(x, y, "scalar_green");
  const Real r = (x - y).norm();
  return std::polar(Real(1) / (Real(4 * kPi) * r), k.value() * r);
}

// Unchecked kernel used inside hot loops; caller guarantees r > 0.
template <typename Real>
inline CMat3<Real> dyadic_green_unchecked(const Vec3<Real>& d, Real k) {
  using C = std::complex<Real>;
  const Real r = d.norm();
  const Real kr = k * r;
  const C g = std::polar(Real(1) / (Real(4 * kPi) * r), kr);
  const C m = C(Real(-1), kr) / (kr * kr);
  const Vec3<Real> u = d / r;
  const C a = g * (Real(1) + m);
  const C b = g * (Real(1) + Real(3) * m);
  CMat3<Real> G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G(i, j) = (i == j ? a : C(0)) - b * (u(i) * u(j));
  return G;
}

template <typename Real>
CMat3<Real> dyadic_green(const Vec3<Real>& x, const Vec3<Real>& y, Wavenumber<Real> k) {
  detail::require_distinct<Real>(x, y, "dyadic_green");
  return dyadic_green_unchecked<Real>(x - y, k.value());
}

template <typename Real> Mat3<Real> projector(const Vec3<Real>& x, const Vec3<Real>& y) {
  detail::require_distinct<Real>(x, y, "projector");
  const Vec3<Real> u = (x - y).normalized();
  return Mat3<Real>::Identity() - u * u.transpose();
}

// Orthonormal basis of the plane normal to y0 - xs.
template <typename Real> Basis32<Real> source_basis(const Vec3<Real>& xs, const Vec3<Real>& y0) {
  detail::require_distinct<Real>(xs, y0, "source_basis");
  const Vec3<Real> r = (y0 - xs).normalized();
  Vec3<Real> w = std::abs(r.z()) < Real(0.9) ? Vec3<Real>::UnitZ() : Vec3<Real>::UnitX();
  const Vec3<Real> u1 = (w - w.dot(r) * r).normalized();
  const Vec3<Real> u2 = r.cross(u1);
  Basis32<Real> U;
  U << u1, u2;
  return U;
}

// Cross-range basis [e1, e2] of the array plane.
template <typename Real> Basis32<Real> array_basis() {
  Basis32<Real> U = Basis32<Real>::Zero();
  U(0, 0) = Real(1);
  U(1, 1) = Real(1);
  return U;
}

template <typename Real> CMat2<Real> coherency_from_stokes(const StokesVec<Real>& s) {
  using C = std::complex<Real>;
  CMat2<Real> P;
  P << C(s.I + s.Q, 0), C(s.U, s.V), C(s.U, -s.V), C(s.I - s.Q, 0);
  return P * Real(0.5);
}

template <typename Real>
bool is_hermitian(const CMat2<Real>& P, Real rel_tol = Real(1e-12)) {
  const Real scale = std::max(P.norm(), std::numeric_limits<Real>::min());
  return (P - P.adjoint()).norm() <= rel_tol * scale;
}

template <typename Real> StokesVec<Real> stokes_from_coherency(const CMat2<Real>& P) {
  if (!is_hermitian<Real>(P)) throw DomainError("stokes_from_coherency: matrix is not Hermitian");
  StokesVec<Real> s;
  s.I = (P(0, 0) + P(1, 1)).real();
  s.Q = (P(0, 0) - P(1, 1)).real();
  s.U = (P(0, 1) + P(1, 0)).real();
  s.V = (P(0, 1) - P(1, 0)).imag();
  return s;
}

// sigma_1/sigma_2 of P(xr,y0) P(xs,xr) P(y0,xs). Infinite at right angles.
template <typename Real>
Real projected_green_condition(const Vec3<Real>& xr, const Vec3<Real>& xs, const Vec3<Real>& y0) {
  const Vec3<Real> e1 = xs - xr, e2 = y0 - xr;
  const Real area2 = e1.cross(e2).norm();
  const Real scale = std::max(e1.norm(), e2.norm());
  if (!(area2 > Real(1e-12) * scale * scale))
    throw DomainError("projected_green_condition: collinear or coincident points");
  const Mat3<Real> M = projector<Real>(xr, y0) * projector<Real>(xs, xr) * projector<Real>(y0, xs);
  Eigen::JacobiSVD<Mat3<Real>> svd(M);
  const auto s = svd.singularValues();
  if (s(1) == Real(0)) return std::numeric_limits<Real>::infinity();
  return s(0) / s(1);
}

// 2x2 condition number via singular values.
template <typename Real> Real cond2(const CMat2<Real>& A) {
  Eigen::JacobiSVD<CMat2<Real>> svd(A);
  const auto s = svd.singularValues();
  if (s(1) == Real(0)) return std::numeric_limits<Real>::infinity();
  return s(0) / s(1);
}

// Compress a 3x3 operator to the (left, right) planes: Ul^T M Ur.
template <typename Real>
CMat2<Real> compress(const Basis32<Real>& Ul, const CMat3<Real>& M, const Basis32<Real>& Ur) {
  return Ul.transpose().template cast<std::complex<Real>>() * M * Ur.template cast<std::complex<Real>>();
}

// Lift a 2x2 matrix back: Ul M Ur^T.
template <typename Real>
CMat3<Real> lift(const Basis32<Real>& Ul, const CMat2<Real>& M, const Basis32<Real>& Ur) {
  return Ul.template cast<std::complex<Real>>() * M * Ur.transpose().template cast<std::complex<Real>>();
}

}  // namespace polarmig
