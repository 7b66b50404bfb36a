#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "msimg/forward.hpp"
#include "msimg/geometry.hpp"
#include "msimg/spectral.hpp"
#include "msimg/trajectory.hpp"

namespace msimg {

/// Discretized test function of a probe point y at the band nodes.
template <class Real>
struct TestVector {
  std::vector<Complex<Real>> entries;
  Direction<Real> direction{};
  Vec<Real> probe{};
  TimeInterval<Real> interval{};
};

template <class Real>
struct PicardResult {
  Real sum{0};
  std::vector<Real> terms;
};

/// Options for the Picard sums. `cutoff_rel` drops eigenpairs with
/// lambda < cutoff_rel * lambda_max (0 keeps all of them).
template <class Real>
struct PicardOptions {
  Real floor_rel = default_eigenvalue_floor<Real>();
  Real cutoff_rel{0};
};

/// phi_n = (i/(T tau)) (e^{-i tau t_max} - e^{-i tau t_min}) e^{-i tau x.y}
template <class Real>
Complex<Real> test_entry(const Real& tau, const Real& projection, const TimeInterval<Real>& iv) {
  if (tau == Real(0)) return Complex<Real>(Real(1), Real(0));
  const Complex<Real> i(Real(0), Real(1));
  const Real T = iv.duration();
  return (i / Complex<Real>(T * tau, Real(0))) * (cis(-tau * iv.t_max) - cis(-tau * iv.t_min)) *
         cis(-tau * projection);
}

template <class Real>
TestVector<Real> test_vector(const Direction<Real>& dir, const Vec<Real>& y,
                             const TimeInterval<Real>& interval, const FrequencyBand<Real>& band) {
  TestVector<Real> out{{}, dir, y, interval};
  out.entries.reserve(band.count);
  const Real projection = dot(dir.unit(), y);
  for (std::size_t n = 1; n <= band.count; ++n) {
    out.entries.push_back(test_entry(band.node(n), projection, interval));
  }
  return out;
}

/// sum_n |<phi, psi_n>|^2 / lambda_n with <u, v> = sum u_m conj(v_m).
template <class Real>
PicardResult<Real> picard_sum(const Spectrum<Real>& spectrum,
                              const std::vector<Complex<Real>>& phi,
                              const PicardOptions<Real>& opts = {}) {
  const std::size_t n = spectrum.size();
  if (phi.size() != spectrum.eigenvectors.rows()) {
    throw DomainError("test vector and spectrum sizes differ");
  }
  const std::vector<Real> lambda = floored_eigenvalues(spectrum, opts.floor_rel);
  const Real top = lambda.empty() ? Real(0) : lambda.front();
  PicardResult<Real> out;
  out.terms.assign(n, Real(0));
  for (std::size_t c = 0; c < n; ++c) {
    if (opts.cutoff_rel > Real(0) && spectrum.eigenvalues[c] < opts.cutoff_rel * top) continue;
    Complex<Real> ip{};
    for (std::size_t m = 0; m < phi.size(); ++m) ip += phi[m] * std::conj(spectrum.eigenvectors(m, c));
    const Real num = std::norm(ip);
    if (num == Real(0)) continue;
    out.terms[c] = lambda[c] > Real(0) ? num / lambda[c] : std::numeric_limits<Real>::infinity();
    out.sum += out.terms[c];
  }
  return out;
}

template <class Real>
PicardResult<Real> picard_sum(const Spectrum<Real>& spectrum, const TestVector<Real>& phi,
                              const PicardOptions<Real>& opts = {}) {
  return picard_sum(spectrum, phi.entries, opts);
}

/// W = 1 / picard sum, +inf when the sum vanishes.
template <class Real>
Real indicator_from_sum(const Real& sum) {
  if (sum == Real(0)) return std::numeric_limits<Real>::infinity();
  return Real(1) / sum;
}

template <class Real>
Real indicator_single(const Spectrum<Real>& spectrum, const Direction<Real>& dir,
                      const Vec<Real>& y, const TimeInterval<Real>& interval,
                      const FrequencyBand<Real>& band, const PicardOptions<Real>& opts = {}) {
  return indicator_from_sum(picard_sum(spectrum, test_vector(dir, y, interval, band), opts).sum);
}

inline constexpr double kDefaultFilterThreshold = 3.5e3;

struct FilterResult {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> dropped;
  std::vector<double> minima;

  bool empty() const { return kept.empty(); }
};

/// Keeps direction j unless the minimum of its Picard sums over the grid
/// exceeds the threshold.
template <class Real>
FilterResult direction_filter(const std::vector<std::vector<Real>>& grid_sums,
                              double threshold = kDefaultFilterThreshold) {
  FilterResult out;
  for (std::size_t j = 0; j < grid_sums.size(); ++j) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& s : grid_sums[j]) lowest = std::min(lowest, to_double(s));
    out.minima.push_back(lowest);
    if (lowest > threshold) {
      out.dropped.push_back(j);
    } else {
      out.kept.push_back(j);
    }
  }
  return out;
}

/// W(y) = 1 / sum over kept directions of their Picard sums at y.
template <class Real>
Real indicator_multi_from_sums(const std::vector<Real>& sums, const FilterResult& filter) {
  if (filter.empty()) throw DomainError("no direction survived the filter");
  Real total(0);
  for (std::size_t j : filter.kept) total += sums.at(j);
  return indicator_from_sum(total);
}

template <class Real>
Real indicator_multi(const std::vector<Spectrum<Real>>& spectra,
                     const std::vector<Direction<Real>>& dirs, const FilterResult& filter,
                     const Vec<Real>& y, const TimeInterval<Real>& interval,
                     const FrequencyBand<Real>& band, const PicardOptions<Real>& opts = {}) {
  if (filter.empty()) throw DomainError("no direction survived the filter");
  Real total(0);
  for (std::size_t j : filter.kept) {
    total += picard_sum(spectra.at(j), test_vector(dirs.at(j), y, interval, band), opts).sum;
  }
  return indicator_from_sum(total);
}

}  // namespace msimg
