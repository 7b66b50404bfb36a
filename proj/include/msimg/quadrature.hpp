#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "msimg/numeric.hpp"

namespace msimg {

/// Gauss-Legendre rule on [-1, 1].
template <class Real>
struct GaussLegendre {
  std::vector<Real> nodes;
  std::vector<Real> weights;

  /// Newton iteration on P_n from the Chebyshev initial guesses.
  static GaussLegendre make(std::size_t order) {
    using std::abs;
    using std::cos;
    GaussLegendre rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const std::size_t half = (order + 1) / 2;
    const Real eps = std::numeric_limits<Real>::epsilon();
    for (std::size_t i = 0; i < half; ++i) {
      Real x = cos(pi<Real>() * (Real(i) + Real(0.75)) / (Real(order) + Real(0.5)));
      Real dp(0);
      for (int it = 0; it < 100; ++it) {
        Real p0(1), p1 = x;
        for (std::size_t k = 2; k <= order; ++k) {
          const Real p2 = ((Real(2 * k - 1)) * x * p1 - Real(k - 1) * p0) / Real(k);
          p0 = p1;
          p1 = p2;
        }
        dp = Real(order) * (x * p1 - p0) / (x * x - Real(1));
        const Real dx = p1 / dp;
        x -= dx;
        if (abs(dx) <= Real(4) * eps) break;
      }
      // refresh derivative at the converged node
      Real p0(1), p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const Real p2 = ((Real(2 * k - 1)) * x * p1 - Real(k - 1) * p0) / Real(k);
        p0 = p1;
        p1 = p2;
      }
      dp = Real(order) * (x * p1 - p0) / (x * x - Real(1));
      const Real w = Real(2) / ((Real(1) - x * x) * dp * dp);
      rule.nodes[i] = -x;
      rule.weights[i] = w;
      rule.nodes[order - 1 - i] = x;
      rule.weights[order - 1 - i] = w;
    }
    return rule;
  }

  /// Shared 20-point rule per scalar type.
  static const GaussLegendre& standard() {
    static const GaussLegendre rule = make(20);
    return rule;
  }
};

/// Composite Gauss-Legendre over `panels` equal panels of [a, b].
template <class Real, class Value, class F>
Value composite_gauss_legendre(const F& f, const Real& a, const Real& b, std::size_t panels,
                               const GaussLegendre<Real>& rule) {
  Value total{};
  const Real width = (b - a) / Real(panels);
  const Real half = width / Real(2);
  for (std::size_t p = 0; p < panels; ++p) {
    const Real mid = a + width * (Real(p) + Real(0.5));
    Value panel{};
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    total += half * panel;
  }
  return total;
}

}  // namespace msimg
