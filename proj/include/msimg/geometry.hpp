#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "msimg/numeric.hpp"

namespace msimg {

/// A point or vector in R^2 or R^3. Two-dimensional values keep the third
/// component at zero so that dot products need no dimension branch.
template <class Real>
struct Vec {
  std::array<Real, 3> c{Real(0), Real(0), Real(0)};

  Vec() = default;
  Vec(Real x, Real y) : c{x, y, Real(0)} {}
  Vec(Real x, Real y, Real z) : c{x, y, z} {}

  Real& operator[](std::size_t i) { return c[i]; }
  const Real& operator[](std::size_t i) const { return c[i]; }

  friend Vec operator+(const Vec& a, const Vec& b) {
    return Vec(a[0] + b[0], a[1] + b[1], a[2] + b[2]);
  }
  friend Vec operator-(const Vec& a, const Vec& b) {
    return Vec(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  }
  friend Vec operator*(const Real& s, const Vec& a) {
    return Vec(s * a[0], s * a[1], s * a[2]);
  }
  friend bool operator==(const Vec& a, const Vec& b) { return a.c == b.c; }

  template <class To>
  Vec<To> cast() const {
    return Vec<To>(real_cast<To>(c[0]), real_cast<To>(c[1]), real_cast<To>(c[2]));
  }
};

template <class Real>
inline Real dot(const Vec<Real>& a, const Vec<Real>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class Real>
inline Real norm(const Vec<Real>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

/// Observation direction on the unit circle (dim 2) or unit sphere (dim 3).
/// The angles are kept in double for reporting; the unit vector is evaluated
/// in the working precision.
template <class Real>
class Direction {
 public:
  /// x = (cos theta, sin theta)
  static Direction polar(double theta) {
    return polar_exact(Real(theta), theta);
  }

  /// Same as polar() but takes the angle in working precision, so that
  /// quad-precision callers do not lose digits of e.g. 9*pi/8.
  static Direction polar_exact(const Real& theta, double theta_report) {
    using std::cos;
    using std::sin;
    Direction d;
    d.dim_ = 2;
    d.theta_ = theta_report;
    d.unit_ = Vec<Real>(cos(theta), sin(theta));
    return d;
  }

  /// x = (sin theta cos phi, sin theta sin phi, cos theta)
  static Direction spherical(double theta, double phi) {
    return spherical_exact(Real(theta), Real(phi), theta, phi);
  }

  static Direction spherical_exact(const Real& theta, const Real& phi, double theta_report,
                                   double phi_report) {
    using std::cos;
    using std::sin;
    Direction d;
    d.dim_ = 3;
    d.theta_ = theta_report;
    d.phi_ = phi_report;
    d.unit_ = Vec<Real>(sin(theta) * cos(phi), sin(theta) * sin(phi), cos(theta));
    return d;
  }

  const Vec<Real>& unit() const { return unit_; }
  int dim() const { return dim_; }
  double theta() const { return theta_; }
  double phi() const { return phi_; }

  /// Re-evaluates the unit vector from the stored angles in another precision.
  template <class To>
  Direction<To> cast() const {
    return dim_ == 2 ? Direction<To>::polar(theta_) : Direction<To>::spherical(theta_, phi_);
  }

 private:
  Vec<Real> unit_{};
  int dim_ = 2;
  double theta_ = 0.0;
  double phi_ = 0.0;
};

}  // namespace msimg
