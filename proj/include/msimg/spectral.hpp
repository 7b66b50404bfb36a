#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "msimg/forward.hpp"
#include "msimg/hermitian.hpp"
#include "msimg/matrix.hpp"

namespace msimg {

enum class SpectralMode { Rigorous, PaperShortcut };

inline std::string to_string(SpectralMode mode) {
  return mode == SpectralMode::Rigorous ? "rigorous" : "paper";
}

inline SpectralMode parse_mode(const std::string& name) {
  if (name == "rigorous") return SpectralMode::Rigorous;
  if (name == "paper") return SpectralMode::PaperShortcut;
  throw ValidationError("unknown spectral mode '" + name + "'");
}

/// Discretized far-field operator for one observation direction.
template <class Real>
struct FarFieldOperator {
  CMatrix<Real> matrix;
  FrequencyBand<Real> band{};
  Direction<Real> direction{};
};

/// Eigenpairs sorted by descending eigenvalue. Eigenvectors are the columns
/// of `eigenvectors`. In paper mode `raw` keeps the complex eigenvalues of F.
template <class Real>
struct Spectrum {
  std::vector<Real> eigenvalues;
  CMatrix<Real> eigenvectors;
  SpectralMode mode = SpectralMode::Rigorous;
  std::vector<Complex<Real>> raw;

  std::size_t size() const { return eigenvalues.size(); }
};

/// Toeplitz matrix with entry(n, m) = w(k_{n-m+1}) dk below and on the
/// diagonal and conj(w(k_{m-n})) dk above it.
template <class Real>
FarFieldOperator<Real> build_operator(const FarFieldSamples<Real>& samples) {
  const std::size_t n = samples.band.count;
  if (samples.values.size() != n) {
    throw DomainError("far-field samples do not match the band size");
  }
  const Real dk = samples.band.dk();
  std::vector<Complex<Real>> lower(n), upper(n);
  for (std::size_t d = 0; d < n; ++d) {
    lower[d] = samples.values[d] * dk;
    if (d > 0) upper[d] = std::conj(samples.values[d - 1]) * dk;
  }
  FarFieldOperator<Real> op{CMatrix<Real>(n, n), samples.band, samples.direction};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) op.matrix(i, j) = i >= j ? lower[i - j] : upper[j - i];
  }
  return op;
}

template <class Real>
std::pair<CMatrix<Real>, CMatrix<Real>> hermitian_parts(const FarFieldOperator<Real>& op) {
  return hermitian_parts(op.matrix);
}

/// F# = |Re F| + |Im F|
template <class Real>
CMatrix<Real> f_sharp(const CMatrix<Real>& f) {
  const auto [re, im] = hermitian_parts(f);
  return hermitian_abs(re) + hermitian_abs(im);
}

namespace detail {

/// Rotates v so that its first nonzero component is real and positive.
template <class Real>
void normalize_phase(CMatrix<Real>& vectors, std::size_t col) {
  using std::abs;
  Real scale(0);
  for (std::size_t r = 0; r < vectors.rows(); ++r) scale = std::max(scale, Real(abs(vectors(r, col))));
  if (scale == Real(0)) return;
  const Real cut = scale * Real(1e-8);
  for (std::size_t r = 0; r < vectors.rows(); ++r) {
    const Real mag = abs(vectors(r, col));
    if (mag > cut) {
      const Complex<Real> rot = std::conj(vectors(r, col)) / mag;
      for (std::size_t k = 0; k < vectors.rows(); ++k) vectors(k, col) *= rot;
      vectors(r, col) = Complex<Real>(mag, Real(0));
      return;
    }
  }
}

template <class Real>
bool lexicographic_less(const CMatrix<Real>& v, std::size_t a, std::size_t b) {
  for (std::size_t r = 0; r < v.rows(); ++r) {
    if (v(r, a).real() != v(r, b).real()) return v(r, a).real() < v(r, b).real();
    if (v(r, a).imag() != v(r, b).imag()) return v(r, a).imag() < v(r, b).imag();
  }
  return false;
}

/// Sorts columns by descending eigenvalue with a lexicographic tie-break.
template <class Real>
Spectrum<Real> sorted_spectrum(std::vector<Real> values, CMatrix<Real> vectors,
                               std::vector<Complex<Real>> raw, SpectralMode mode) {
  const std::size_t n = values.size();
  for (std::size_t c = 0; c < n; ++c) normalize_phase(vectors, c);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return lexicographic_less(vectors, a, b);
  });
  Spectrum<Real> out;
  out.mode = mode;
  out.eigenvalues.resize(n);
  out.eigenvectors = CMatrix<Real>(vectors.rows(), n);
  if (!raw.empty()) out.raw.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    out.eigenvalues[c] = values[order[c]];
    if (!raw.empty()) out.raw[c] = raw[order[c]];
    for (std::size_t r = 0; r < vectors.rows(); ++r) out.eigenvectors(r, c) = vectors(r, order[c]);
  }
  return out;
}

/// Eigen-decomposition of F itself. Double precision only.
inline Spectrum<double> paper_shortcut_spectrum(const CMatrix<double>& f) {
  const Eigen::Index n = static_cast<Eigen::Index>(f.rows());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = f(std::size_t(i), std::size_t(j));
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, true);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("paper mode: eigen-decomposition of F failed");
  }
  Eigen::MatrixXcd vecs = solver.eigenvectors();
  for (Eigen::Index c = 0; c < n; ++c) vecs.col(c).normalize();
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vecs);
  const auto& sv = svd.singularValues();
  const double cond = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : HUGE_VAL;
  if (!(cond < 1e12)) {
    throw NumericalError("paper mode: F is not diagonalizable to working precision "
                         "(eigenvector condition number " + std::to_string(cond) + ")",
                         cond);
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  std::vector<Complex<double>> raw(static_cast<std::size_t>(n));
  CMatrix<double> vectors(f.rows(), f.rows());
  for (Eigen::Index c = 0; c < n; ++c) {
    const Complex<double> lam = solver.eigenvalues()(c);
    raw[std::size_t(c)] = lam;
    values[std::size_t(c)] = std::abs(lam.real()) + std::abs(lam.imag());
    for (Eigen::Index r = 0; r < n; ++r) vectors(std::size_t(r), std::size_t(c)) = vecs(r, c);
  }
  return sorted_spectrum(std::move(values), std::move(vectors), std::move(raw),
                         SpectralMode::PaperShortcut);
}

}  // namespace detail

/// Eigensystem used by the Picard sums. Rigorous mode diagonalizes
/// |Re F| + |Im F|; paper mode diagonalizes F and takes |Re l| + |Im l|.
template <class Real>
Spectrum<Real> f_sharp_spectrum(const CMatrix<Real>& f, SpectralMode mode = SpectralMode::Rigorous) {
  if (mode == SpectralMode::PaperShortcut) {
    if constexpr (std::is_same_v<Real, double>) {
      return detail::paper_shortcut_spectrum(f);
    } else {
      throw UnsupportedError("paper mode is only available in double precision");
    }
  }
  auto es = hermitian_eigen(f_sharp(f));
  return detail::sorted_spectrum(std::move(es.values), std::move(es.vectors), {},
                                 SpectralMode::Rigorous);
}

template <class Real>
Spectrum<Real> f_sharp_spectrum(const FarFieldOperator<Real>& op,
                                SpectralMode mode = SpectralMode::Rigorous) {
  return f_sharp_spectrum(op.matrix, mode);
}

/// Eigenvalues raised to at least floor_rel * lambda_max.
template <class Real>
std::vector<Real> floored_eigenvalues(const Spectrum<Real>& s,
                                      const Real& floor_rel = default_eigenvalue_floor<Real>()) {
  std::vector<Real> out = s.eigenvalues;
  if (out.empty()) return out;
  const Real top = *std::max_element(out.begin(), out.end());
  const Real floor = top * floor_rel;
  for (auto& l : out) l = std::max(l, floor);
  return out;
}

}  // namespace msimg
