#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace polarmig {

template <typename Real> using Vec3 = Eigen::Matrix<Real, 3, 1>;
template <typename Real> using Mat3 = Eigen::Matrix<Real, 3, 3>;
template <typename Real> using CMat3 = Eigen::Matrix<std::complex<Real>, 3, 3>;
template <typename Real> using CMat2 = Eigen::Matrix<std::complex<Real>, 2, 2>;
template <typename Real> using CVec3 = Eigen::Matrix<std::complex<Real>, 3, 1>;
// Two orthonormal columns spanning a plane in R^3.
template <typename Real> using Basis32 = Eigen::Matrix<Real, 3, 2>;

using cd = std::complex<double>;
using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using CMat3d = CMat3<double>;
using CMat2d = CMat2<double>;
using CVec3d = CVec3<double>;
using Basis32d = Basis32<double>;

inline constexpr double kPi = 3.14159265358979323846;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Bad user input: config fields, dimensions, preconditions.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Real> class Wavenumber {
 public:
  explicit Wavenumber(Real k) : k_(k) {
    if (!(k > Real(0)) || !std::isfinite(k))
      throw DomainError("wavenumber must be positive and finite");
  }
  static Wavenumber from_omega(Real omega, Real wave_speed) { return Wavenumber(omega / wave_speed); }
  Real value() const { return k_; }
  operator Real() const { return k_; }

 private:
  Real k_;
};
using Wavenumberd = Wavenumber<double>;

template <typename Real> struct StokesVec {
  Real I{}, Q{}, U{}, V{};
  bool physical(Real rel_tol = Real(1e-12)) const {
    return I >= Real(0) && Q * Q + U * U + V * V <= I * I * (Real(1) + rel_tol);
  }
};
using Stokesd = StokesVec<double>;

template <typename Real> bool coincident(const Vec3<Real>& x, const Vec3<Real>& y) {
  Real scale = std::max({Real(1), x.norm(), y.norm()});
  return (x - y).norm() < Real(1e-12) * scale;
}

}  // namespace polarmig
