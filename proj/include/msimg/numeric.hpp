#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>

#if defined(MSIMG_HAVE_QUAD)
#include <boost/multiprecision/float128.hpp>
#endif

namespace msimg {

#if defined(MSIMG_HAVE_QUAD)
/// 113-bit binary floating point (libquadmath).
using quad = boost::multiprecision::float128;
#endif

template <class Real>
using Complex = std::complex<Real>;

/// Raised when an argument lies outside the documented domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by iterative numerics that fail to reach their tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Raised for inputs that are well formed but not supported by a closed-form path.
class UnsupportedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when files or configurations fail consistency checks.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class Real>
inline Real pi() {
  if constexpr (std::is_floating_point_v<Real>) {
    return std::numbers::pi_v<Real>;
  } else {
    return Real("3.14159265358979323846264338327950288419716939937510");
  }
}

template <class Real>
inline Real two_pi() {
  return Real(2) * pi<Real>();
}

template <class Real>
inline double to_double(const Real& x) {
  return static_cast<double>(x);
}

template <class To, class From>
inline To real_cast(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else {
    return static_cast<To>(x);
  }
}

template <class To, class From>
inline Complex<To> complex_cast(const Complex<From>& z) {
  return Complex<To>(real_cast<To>(z.real()), real_cast<To>(z.imag()));
}

/// Parses a decimal literal in the working precision.
template <class Real>
inline Real from_string(const std::string& text) {
  if constexpr (std::is_floating_point_v<Real>) {
    std::size_t used = 0;
    const Real x = Real(std::stold(text, &used));
    if (used != text.size()) throw std::invalid_argument("trailing characters in '" + text + "'");
    return x;
  } else {
    return Real(text);
  }
}

/// e^{i x}
template <class Real>
inline Complex<Real> cis(const Real& x) {
  using std::cos;
  using std::sin;
  return Complex<Real>(cos(x), sin(x));
}

/// Reduces an angle to [0, 2pi).
template <class Real>
inline Real wrap_angle(Real theta) {
  using std::floor;
  const Real period = two_pi<Real>();
  theta -= period * floor(theta / period);
  if (theta >= period) theta -= period;
  if (theta < Real(0)) theta = Real(0);
  return theta;
}

/// Relative eigenvalue floor used by the Picard sums for each scalar type.
template <class Real>
inline Real default_eigenvalue_floor() {
  if constexpr (std::is_same_v<Real, double>) {
    return 1e-14;
  } else {
    return Real(100) * std::numeric_limits<Real>::epsilon();
  }
}

/// Absolute quadrature tolerance for each scalar type.
template <class Real>
inline Real default_quadrature_tolerance() {
  if constexpr (std::is_same_v<Real, double>) {
    return 1e-10;
  } else {
    return Real(1e-28);
  }
}

}  // namespace msimg
