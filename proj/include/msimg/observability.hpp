#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "msimg/geometry.hpp"
#include "msimg/numeric.hpp"
#include "msimg/trajectory.hpp"

namespace msimg {

enum class Observability { Observable, NonObservable };

inline const char* to_string(Observability o) {
  return o == Observability::Observable ? "observable" : "non-observable";
}

inline constexpr double kClassificationTolerance = 1e-9;
inline constexpr double kPlateauThreshold = 1e-10;

/// Range [xi_min, xi_max] of h(t) = t + x.a(t) and the resulting class.
template <class Real>
struct ObservabilityReport {
  Real xi_min{0};
  Real xi_max{0};
  Real width{0};
  Real duration{0};
  Observability cls = Observability::NonObservable;
};

/// Closed interval of reals.
template <class Real>
struct Interval {
  Real lo{0};
  Real hi{0};
  Real length() const { return hi - lo; }
};

/// Union of closed angle intervals in canonical form: every piece lies in
/// [0, 2pi], pieces are sorted and disjoint.
class AngleSet {
 public:
  /// Adds [lo, hi] (hi - lo < 2pi); wraparound is split in two.
  void add(double lo, double hi) {
    const double period = two_pi<double>();
    if (hi - lo >= period) {
      pieces_.emplace_back(0.0, period);
      normalize();
      return;
    }
    const double a = wrap_angle(lo);
    const double b = a + (hi - lo);
    if (b <= period) {
      pieces_.emplace_back(a, b);
    } else {
      pieces_.emplace_back(a, period);
      pieces_.emplace_back(0.0, b - period);
    }
    normalize();
  }

  bool contains(double theta) const {
    const double t = wrap_angle(theta);
    for (const auto& [lo, hi] : pieces_) {
      if (t >= lo && t <= hi) return true;
    }
    // 2pi and 0 are the same angle
    if (t == 0.0 && !pieces_.empty() && pieces_.back().second >= two_pi<double>()) return true;
    return false;
  }

  /// Distance from theta to the nearest piece endpoint (mod 2pi).
  double distance_to_boundary(double theta) const {
    const double t = wrap_angle(theta);
    double best = two_pi<double>();
    for (const auto& [lo, hi] : pieces_) {
      for (double e : {lo, hi}) {
        double d = std::abs(t - e);
        d = std::min(d, two_pi<double>() - d);
        best = std::min(best, d);
      }
    }
    return best;
  }

  const std::vector<std::pair<double, double>>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

 private:
  void normalize() {
    std::sort(pieces_.begin(), pieces_.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& p : pieces_) {
      if (!merged.empty() && p.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, p.second);
      } else {
        merged.push_back(p);
      }
    }
    pieces_ = std::move(merged);
  }

  std::vector<std::pair<double, double>> pieces_;
};

/// K = { y : lo <= x.y <= hi }. Non-observable directions give an empty strip.
template <class Real>
struct Strip {
  Direction<Real> direction{};
  Real lo{0};
  Real hi{0};
  bool empty = true;

  bool contains(const Vec<Real>& y, const Real& tol = Real(1e-9)) const {
    if (empty) return false;
    const Real s = dot(direction.unit(), y);
    return s >= lo - tol && s <= hi + tol;
  }
};

/// Intersection of the strips of the observable directions.
template <class Real>
struct ThetaDomain {
  std::vector<Strip<Real>> strips;

  bool empty() const { return strips.empty(); }

  bool contains(const Vec<Real>& y, const Real& tol = Real(1e-9)) const {
    if (strips.empty()) return false;
    return std::all_of(strips.begin(), strips.end(),
                       [&](const Strip<Real>& s) { return s.contains(y, tol); });
  }
};

namespace detail {

/// Dense sampling plus ternary refinement around the best sample. The
/// candidate list is evaluated exactly and merged in.
template <class Real, class F>
Interval<Real> sampled_extrema(const F& f, const Real& a, const Real& b, std::size_t samples,
                               const std::vector<Real>& exact_candidates) {
  Interval<Real> out{f(a), f(a)};
  auto take = [&](const Real& v) {
    out.lo = std::min(out.lo, v);
    out.hi = std::max(out.hi, v);
  };
  take(f(b));
  for (const auto& t : exact_candidates) take(f(t));

  const Real step = (b - a) / Real(samples);
  std::size_t i_min = 0, i_max = 0;
  Real v_min = f(a), v_max = v_min;
  for (std::size_t i = 1; i <= samples; ++i) {
    const Real t = i == samples ? b : a + step * Real(i);
    const Real v = f(t);
    if (v < v_min) v_min = v, i_min = i;
    if (v > v_max) v_max = v, i_max = i;
  }
  auto refine = [&](std::size_t i, bool minimize) {
    Real lo = i == 0 ? a : a + step * Real(i - 1);
    Real hi = i >= samples ? b : a + step * Real(i + 1);
    for (int it = 0; it < 200 && hi - lo > Real(1e-13); ++it) {
      const Real m1 = lo + (hi - lo) / Real(3);
      const Real m2 = hi - (hi - lo) / Real(3);
      const bool left = minimize ? f(m1) < f(m2) : f(m1) > f(m2);
      if (left) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    return f((lo + hi) / Real(2));
  };
  take(v_min);
  take(v_max);
  take(refine(i_min, true));
  take(refine(i_max, false));
  return out;
}

/// Extrema of g(t) = w*t + x.a(t) over the emission interval. w = 1 gives
/// the range of h, w = 0 the projection of the orbit onto x.
template <class Real>
Interval<Real> affine_extrema(const Trajectory<Real>& traj, const Direction<Real>& dir,
                              const Real& w) {
  const auto& iv = traj.interval();
  auto g = [&](const Real& t) { return w * t + dot(dir.unit(), traj.position(t)); };

  if (std::holds_alternative<LineOrbit<Real>>(traj.shape())) {
    const Real a = g(iv.t_min), b = g(iv.t_max);
    return {std::min(a, b), std::max(a, b)};
  }
  if (const auto* arc = std::get_if<ArcOrbit<Real>>(&traj.shape())) {
    using std::abs;
    using std::acos;
    using std::atan2;
    using std::ceil;
    using std::floor;
    // g'(t) = w + r cos(t - gamma)
    const Real s = arc->clockwise ? Real(-1) : Real(1);
    const auto& x = dir.unit();
    const Real gamma = atan2(-x[0], s * x[1]);
    std::vector<Real> cand{iv.t_min, iv.t_max};
    const Real level = -w / arc->radius;
    if (abs(level) <= Real(1)) {
      const Real base = acos(level);
      const Real period = two_pi<Real>();
      for (const Real& root : {gamma + base, gamma - base}) {
        const Real n0 = ceil((iv.t_min - root) / period);
        const Real n1 = floor((iv.t_max - root) / period);
        for (Real n = n0; n <= n1; n += Real(1)) cand.push_back(root + n * period);
      }
    }
    Interval<Real> out{g(cand[0]), g(cand[0])};
    for (const auto& t : cand) {
      if (!iv.contains(t)) continue;
      const Real v = g(t);
      out.lo = std::min(out.lo, v);
      out.hi = std::max(out.hi, v);
    }
    return out;
  }
  return sampled_extrema<Real>(g, iv.t_min, iv.t_max, 10000, traj.breakpoints());
}

}  // namespace detail

/// xi_min / xi_max of h over the interval, and the observability class.
template <class Real>
ObservabilityReport<Real> xi_extrema(const Trajectory<Real>& traj, const Direction<Real>& dir,
                                     double tolerance = kClassificationTolerance) {
  const auto range = detail::affine_extrema(traj, dir, Real(1));
  ObservabilityReport<Real> r;
  r.xi_min = range.lo;
  r.xi_max = range.hi;
  r.width = range.hi - range.lo;
  r.duration = traj.interval().duration();
  r.cls = r.width >= r.duration - Real(tolerance) ? Observability::Observable
                                                  : Observability::NonObservable;
  return r;
}

template <class Real>
Observability classify(const Trajectory<Real>& traj, const Direction<Real>& dir,
                       double tolerance = kClassificationTolerance) {
  return xi_extrema(traj, dir, tolerance).cls;
}

/// [inf x.Gamma, sup x.Gamma]
template <class Real>
Interval<Real> projection_hull(const Trajectory<Real>& traj, const Direction<Real>& dir) {
  return detail::affine_extrema(traj, dir, Real(0));
}

template <class Real>
Strip<Real> strip(const Trajectory<Real>& traj, const Direction<Real>& dir,
                  double tolerance = kClassificationTolerance) {
  const auto rep = xi_extrema(traj, dir, tolerance);
  Strip<Real> s;
  s.direction = dir;
  s.lo = rep.xi_min - traj.interval().t_min;
  s.hi = rep.xi_max - traj.interval().t_max;
  s.empty = rep.cls == Observability::NonObservable;
  // width == T up to the tolerance: collapse to the midpoint hyperplane
  if (!s.empty && s.hi < s.lo) s.lo = s.hi = (s.lo + s.hi) / Real(2);
  return s;
}

template <class Real>
ThetaDomain<Real> theta_domain(const Trajectory<Real>& traj,
                               const std::vector<Direction<Real>>& dirs) {
  if (dirs.empty()) throw DomainError("theta_domain needs at least one direction");
  ThetaDomain<Real> dom;
  for (const auto& d : dirs) {
    auto s = strip(traj, d);
    if (!s.empty) dom.strips.push_back(std::move(s));
  }
  return dom;
}

/// Interior times where h' changes sign or enters/leaves a zero plateau.
/// Breakpoints whose one-sided signs of h' differ are included.
template <class Real>
std::vector<Real> division_points(const Trajectory<Real>& traj, const Direction<Real>& dir,
                                  std::size_t sampling_density = 4000) {
  using std::abs;
  sampling_density = std::max<std::size_t>(sampling_density, 1000);
  const Real threshold(kPlateauThreshold);
  const Real T = traj.interval().duration();
  auto hp = [&](const Real& t) { return h_derivative(traj, dir, t); };
  auto sign_of = [&](const Real& v) { return abs(v) < threshold ? 0 : (v > Real(0) ? 1 : -1); };

  // bisection on a predicate that is false at lo and true at hi
  auto bisect = [&](Real lo, Real hi, const std::function<bool(const Real&)>& pred) {
    for (int it = 0; it < 200 && hi - lo > Real(1e-10) * Real(0.5); ++it) {
      const Real mid = (lo + hi) / Real(2);
      if (pred(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return (lo + hi) / Real(2);
  };

  struct Run {
    int sign;
    std::size_t first, last;
  };

  std::vector<Real> out;
  std::vector<std::pair<int, int>> edge_signs;  // (first sample sign, last sample sign) per piece
  const auto pieces = traj.smooth_pieces();
  for (const auto& [a, b] : pieces) {
    const auto n = std::max<std::size_t>(
        16, static_cast<std::size_t>(std::ceil(to_double((b - a) / T) * double(sampling_density))));
    const Real step = (b - a) / Real(n);
    std::vector<Real> ts(n);
    std::vector<int> sg(n);
    for (std::size_t i = 0; i < n; ++i) {
      ts[i] = a + step * (Real(i) + Real(0.5));
      sg[i] = sign_of(hp(ts[i]));
    }
    edge_signs.emplace_back(sg.front(), sg.back());

    std::vector<Run> runs;
    for (std::size_t i = 0; i < n; ++i) {
      if (!runs.empty() && runs.back().sign == sg[i]) {
        runs.back().last = i;
      } else {
        runs.push_back({sg[i], i, i});
      }
    }
    for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
      const Run& L = runs[r];
      const Run& R = runs[r + 1];
      if (L.sign != 0 && R.sign != 0) {
        const int s0 = L.sign;
        out.push_back(bisect(ts[L.last], ts[R.first],
                             [&](const Real& t) { return sign_of(hp(t)) != s0; }));
        continue;
      }
      if (R.sign == 0) {
        const bool plateau = R.last > R.first;
        const bool crossing = r + 2 < runs.size() && runs[r + 2].sign == -L.sign;
        if (plateau) {
          out.push_back(bisect(ts[L.last], ts[R.first],
                               [&](const Real& t) { return sign_of(hp(t)) == 0; }));
        } else if (crossing) {
          const int s0 = L.sign;
          out.push_back(bisect(ts[L.last], ts[runs[r + 2].first],
                               [&](const Real& t) { return hp(t) * Real(s0) <= Real(0); }));
        }
      } else if (L.last > L.first) {  // leaving a plateau
        out.push_back(bisect(ts[L.last], ts[R.first],
                             [&](const Real& t) { return sign_of(hp(t)) != 0; }));
      }
    }
  }
  const auto bps = traj.breakpoints();
  for (std::size_t i = 0; i < bps.size(); ++i) {
    if (edge_signs[i].second != edge_signs[i + 1].first) out.push_back(bps[i]);
  }
  std::sort(out.begin(), out.end());
  const auto& iv = traj.interval();
  std::vector<Real> interior;
  for (const auto& t : out) {
    if (t > iv.t_min && t < iv.t_max &&
        (interior.empty() || abs(t - interior.back()) > Real(1e-9))) {
      interior.push_back(t);
    }
  }
  return interior;
}

/// Observable polar angles of a straight line with speed c and heading alpha.
inline AngleSet observable_set_line(double c, double alpha) {
  if (!(c > 0.0)) throw DomainError("line speed must be positive");
  const double half_pi = pi<double>() / 2;
  AngleSet set;
  set.add(alpha - half_pi, alpha + half_pi);
  if (c > 2.0) {
    const double beta = std::acos(-2.0 / c);
    set.add(alpha + beta, alpha + two_pi<double>() - beta);
  }
  return set;
}

/// Observable polar angles of a unit-radius counterclockwise arc.
inline AngleSet observable_set_arc(double t_min, double t_max) {
  if (!(t_max - t_min < two_pi<double>())) {
    throw UnsupportedError("closed-form arc observability requires T < 2pi");
  }
  const double mid = 0.5 * (t_max + t_min);
  AngleSet set;
  set.add(mid, mid + pi<double>());
  return set;
}

}  // namespace msimg
