#pragma once

#include <numbers>

#include "msimg/msimg.hpp"

namespace msimg::testing {

inline constexpr double kPi = std::numbers::pi;

/// x1 = 0, 1 <= x2 <= 3 traced at unit speed for t in [1, 3].
template <class Real>
Trajectory<Real> vertical_segment() {
  return Trajectory<Real>::line_exact(Real(1), pi<Real>() / Real(2), kPi / 2, Vec<Real>(),
                                      TimeInterval<Real>::make(Real(1), Real(3)));
}

template <class Real>
FrequencyBand<Real> default_band() {
  return FrequencyBand<Real>::make(Real(3) * pi<Real>(), 18);
}

template <class Real>
Spectrum<Real> spectrum_of(const Trajectory<Real>& traj, const Direction<Real>& dir,
                           SpectralMode mode = SpectralMode::Rigorous) {
  return f_sharp_spectrum(build_operator(sample_band(traj, dir, default_band<Real>())), mode);
}

/// Picard sums of one direction over a 2D grid.
template <class Real>
ScalarField sum_field(const Spectrum<Real>& s, const Trajectory<Real>& traj,
                      const Direction<Real>& dir, const SearchGrid& grid, unsigned threads = 0) {
  const auto band = default_band<Real>();
  auto f = [&](const Vec<double>& y) {
    const auto phi = test_vector(dir, y.template cast<Real>(), traj.interval(), band);
    return to_double(picard_sum(s, phi).sum);
  };
  return evaluate_field(f, grid, threads == 0 ? default_thread_count() : threads);
}

inline ScalarField reciprocal(ScalarField f) {
  for (auto& v : f.values) v = 1.0 / v;
  return f;
}

inline ScalarField add(ScalarField a, const ScalarField& b) {
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
  return a;
}

inline SearchGrid segment_grid(std::size_t res = 201) {
  return make_grid({{-2.0, 2.0}, {0.0, 4.0}}, {res, res});
}

}  // namespace msimg::testing
