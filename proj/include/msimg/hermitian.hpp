#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "msimg/matrix.hpp"
#include "msimg/numeric.hpp"

namespace msimg {

/// Eigenvalues (ascending, as produced) and orthonormal eigenvectors in the
/// columns of `vectors`.
template <class Real>
struct HermitianEigensystem {
  std::vector<Real> values;
  CMatrix<Real> vectors;
};

/// Largest |H - H^*| entry relative to max |H|.
template <class Real>
Real hermitian_defect(const CMatrix<Real>& h) {
  using std::abs;
  Real worst(0), scale(0);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (std::size_t j = 0; j < h.cols(); ++j) {
      worst = std::max(worst, Real(abs(h(i, j) - std::conj(h(j, i)))));
      scale = std::max(scale, Real(abs(h(i, j))));
    }
  }
  return scale > Real(0) ? worst / scale : worst;
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of h_pq and
/// then applies the real symmetric Jacobi rotation, so the iteration only
/// ever touches unitary 2x2 blocks. The stopping rule
/// |h_pq| <= eps sqrt(|h_pp h_qq|) keeps small eigenvalues of definite
/// matrices accurate to working precision relative to themselves.
template <class Real>
HermitianEigensystem<Real> hermitian_eigen(CMatrix<Real> a, int max_sweeps = 60) {
  using std::abs;
  using std::sqrt;
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DomainError("hermitian_eigen needs a square matrix");
  CMatrix<Real> v = CMatrix<Real>::identity(n);
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real tiny = std::numeric_limits<Real>::min();
  for (std::size_t i = 0; i < n; ++i) a(i, i) = Complex<Real>(a(i, i).real(), Real(0));

  bool converged = n <= 1;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex<Real> apq = a(p, q);
        const Real mag = abs(apq);
        const Real app = a(p, p).real();
        const Real aqq = a(q, q).real();
        if (mag <= eps * sqrt(abs(app * aqq)) || mag <= tiny) {
          a(p, q) = a(q, p) = Complex<Real>(0);
          continue;
        }
        rotated = true;
        const Complex<Real> phase = apq / mag;  // e^{i phi}
        const Real theta = (aqq - app) / (Real(2) * mag);
        const Real t = (theta >= Real(0) ? Real(1) : Real(-1)) /
                       (abs(theta) + sqrt(theta * theta + Real(1)));
        const Real c = Real(1) / sqrt(t * t + Real(1));
        const Real s = t * c;
        // U = diag(1, e^{-i phi}) [[c, s], [-s, c]]
        const Complex<Real> upp(c), upq(s);
        const Complex<Real> uqp = -s * std::conj(phase);
        const Complex<Real> uqq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {  // A <- A U
          const Complex<Real> akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- U^* A
          const Complex<Real> apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = a(q, p) = Complex<Real>(0);
        a(p, p) = Complex<Real>(a(p, p).real(), Real(0));
        a(q, q) = Complex<Real>(a(q, q).real(), Real(0));
        for (std::size_t k = 0; k < n; ++k) {  // V <- V U
          const Complex<Real> vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    Real off(0);
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        if (p != q) off += std::norm(a(p, q));
      }
    }
    throw NumericalError("Jacobi eigensolver did not converge", to_double(sqrt(off)));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
  HermitianEigensystem<Real> out;
  out.values.resize(n);
  out.vectors = CMatrix<Real>(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    out.values[c] = a(order[c], order[c]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
  }
  return out;
}

/// Re F = (F + F^*)/2 and Im F = (F - F^*)/(2i).
template <class Real>
std::pair<CMatrix<Real>, CMatrix<Real>> hermitian_parts(const CMatrix<Real>& f) {
  const std::size_t n = f.rows();
  CMatrix<Real> re(n, n), im(n, n);
  const Real half(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Complex<Real> fij = f(i, j);
      const Complex<Real> fji_c = std::conj(f(j, i));
      re(i, j) = half * (fij + fji_c);
      const Complex<Real> d = half * (fij - fji_c);  // (F - F^*)/2 = i Im F
      im(i, j) = Complex<Real>(d.imag(), -d.real());
    }
  }
  return {re, im};
}

/// |H| = Q |Lambda| Q^* for Hermitian H.
template <class Real>
CMatrix<Real> hermitian_abs(const CMatrix<Real>& h) {
  using std::abs;
  if (h.rows() != h.cols()) throw DomainError("hermitian_abs needs a square matrix");
  if (hermitian_defect(h) > Real(1e-12)) throw DomainError("hermitian_abs input is not Hermitian");
  const auto es = hermitian_eigen(h);
  const std::size_t n = h.rows();
  CMatrix<Real> out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const Real lam = abs(es.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex<Real> qi = lam * es.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += qi * std::conj(es.vectors(j, k));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = Complex<Real>(out(i, i).real(), Real(0));
    for (std::size_t j = i + 1; j < n; ++j) out(j, i) = std::conj(out(i, j));
  }
  return out;
}

}  // namespace msimg
