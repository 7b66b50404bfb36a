#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "msimg/geometry.hpp"
#include "msimg/numeric.hpp"
#include "msimg/quadrature.hpp"
#include "msimg/trajectory.hpp"

namespace msimg {

/// Positive frequency band (0, k_max] split into N cells of width dk.
/// Samples sit at the midpoints k_n = (n - 1/2) dk, the operator acts on
/// the nodes tau_n = n dk.
template <class Real>
struct FrequencyBand {
  Real k_max{0};
  std::size_t count = 0;

  static FrequencyBand make(Real k_max, std::size_t count) {
    if (!(k_max > Real(0))) throw DomainError("k_max must be positive");
    if (count < 1) throw DomainError("band needs at least one frequency");
    return FrequencyBand{k_max, count};
  }

  Real dk() const { return k_max / Real(count); }
  /// n is 1-based
  Real midpoint(std::size_t n) const { return (Real(n) - Real(0.5)) * dk(); }
  Real node(std::size_t n) const { return Real(n) * dk(); }

  template <class To>
  FrequencyBand<To> cast() const {
    return FrequencyBand<To>{real_cast<To>(k_max), count};
  }
};

/// Far-field values w(x, k_n), n = 1..N, for one observation direction.
template <class Real>
struct FarFieldSamples {
  Direction<Real> direction{};
  FrequencyBand<Real> band{};
  std::vector<Complex<Real>> values;
};

struct NoiseSpec {
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// w(x, k) = int_{t_min}^{t_max} exp(-i k (t + x.a(t))) dt by composite
/// Gauss-Legendre panels on each smooth piece of the orbit. Panels are sized
/// so that each covers at most one oscillation of the integrand (>= 20 nodes
/// per oscillation) and are doubled until successive estimates agree.
template <class Real>
Complex<Real> far_field_value(const Trajectory<Real>& traj, const Direction<Real>& dir,
                              const Real& k,
                              const Real& tolerance = default_quadrature_tolerance<Real>()) {
  using std::abs;
  using std::ceil;
  const auto& rule = GaussLegendre<Real>::standard();
  const Real T = traj.interval().duration();
  const Real rate = abs(k) * (Real(1) + traj.max_speed());
  auto integrand = [&](const Real& t) {
    const Real phase = -k * (t + dot(dir.unit(), traj.position(t)));
    return cis(phase);
  };

  Complex<Real> total{};
  for (const auto& [a, b] : traj.smooth_pieces()) {
    const Real len = b - a;
    std::size_t panels = static_cast<std::size_t>(
        std::max(1.0, std::ceil(to_double(rate * len / two_pi<Real>()))));
    const Real piece_tol = tolerance * len / T;
    Complex<Real> coarse =
        composite_gauss_legendre<Real, Complex<Real>>(integrand, a, b, panels, rule);
    Real residual(0);
    bool converged = false;
    for (int level = 0; level < 14; ++level) {
      panels *= 2;
      const Complex<Real> fine =
          composite_gauss_legendre<Real, Complex<Real>>(integrand, a, b, panels, rule);
      residual = abs(fine - coarse);
      coarse = fine;
      if (residual <= piece_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "far-field quadrature did not converge at k=" << to_double(k)
          << " (residual " << to_double(residual) << ")";
      throw NumericalError(msg.str(), to_double(residual));
    }
    total += coarse;
  }
  return total;
}

/// Closed form for a(t) = offset + speed * t * axis:
/// e^{-ik x.offset} (i/(k beta)) (e^{-ik beta t_max} - e^{-ik beta t_min}),
/// beta = 1 + speed x.axis.
template <class Real>
Complex<Real> far_field_line_closed_form(const Real& speed, const Vec<Real>& axis,
                                         const Vec<Real>& offset, const Direction<Real>& dir,
                                         const TimeInterval<Real>& interval, const Real& k) {
  const Real beta = Real(1) + speed * dot(dir.unit(), axis);
  const Complex<Real> shift = cis(-k * dot(dir.unit(), offset));
  const Real kb = k * beta;
  if (kb == Real(0)) return shift * Complex<Real>(interval.duration(), Real(0));
  const Complex<Real> i(Real(0), Real(1));
  return shift * (i / Complex<Real>(kb, Real(0))) *
         (cis(-kb * interval.t_max) - cis(-kb * interval.t_min));
}

template <class Real>
Complex<Real> far_field_line_closed_form(const Real& speed, double alpha, const Vec<Real>& offset,
                                         const Direction<Real>& dir,
                                         const TimeInterval<Real>& interval, const Real& k) {
  using std::cos;
  using std::sin;
  const Real a(alpha);
  return far_field_line_closed_form(speed, Vec<Real>(cos(a), sin(a)), offset, dir, interval, k);
}

template <class Real>
FarFieldSamples<Real> sample_band(const Trajectory<Real>& traj, const Direction<Real>& dir,
                                  const FrequencyBand<Real>& band) {
  FarFieldSamples<Real> out{dir, band, {}};
  out.values.reserve(band.count);
  for (std::size_t n = 1; n <= band.count; ++n) {
    out.values.push_back(far_field_value(traj, dir, band.midpoint(n)));
  }
  return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Standard normal draw clamped to [-1, 1].
inline double clamped_gaussian(std::mt19937_64& gen) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return std::clamp(normal(gen), -1.0, 1.0);
}

}  // namespace detail

/// Re(w)(1 + delta g1) + i Im(w)(1 + delta g2), with g1, g2 drawn per sample
/// from a generator keyed on (seed, direction index, sample index).
template <class Real>
FarFieldSamples<Real> add_noise(const FarFieldSamples<Real>& samples, const NoiseSpec& noise,
                                std::size_t direction_index = 0) {
  if (!(noise.delta >= 0.0)) throw DomainError("noise level must be nonnegative");
  if (noise.delta == 0.0) return samples;
  FarFieldSamples<Real> out = samples;
  const Real delta(noise.delta);
  for (std::size_t n = 0; n < out.values.size(); ++n) {
    const std::uint64_t key = detail::splitmix64(
        noise.seed ^ detail::splitmix64((std::uint64_t(direction_index) << 32) ^ n));
    std::mt19937_64 gen(key);
    const double g1 = detail::clamped_gaussian(gen);
    const double g2 = detail::clamped_gaussian(gen);
    const auto& w = samples.values[n];
    out.values[n] = Complex<Real>(w.real() * (Real(1) + delta * Real(g1)),
                                  w.imag() * (Real(1) + delta * Real(g2)));
  }
  return out;
}

}  // namespace msimg
