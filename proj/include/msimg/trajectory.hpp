#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "msimg/geometry.hpp"
#include "msimg/numeric.hpp"

namespace msimg {

/// Emission interval [t_min, t_max] of the moving source.
template <class Real>
struct TimeInterval {
  Real t_min{0};
  Real t_max{1};

  static TimeInterval make(Real t_min, Real t_max) {
    if (!(t_min >= Real(0)) || !(t_max > t_min)) {
      throw DomainError("time interval requires 0 <= t_min < t_max");
    }
    return TimeInterval{t_min, t_max};
  }

  Real duration() const { return t_max - t_min; }
  bool contains(const Real& t) const { return t >= t_min && t <= t_max; }

  template <class To>
  TimeInterval<To> cast() const {
    return TimeInterval<To>{real_cast<To>(t_min), real_cast<To>(t_max)};
  }
};

/// a(t) = offset + speed * t * axis
template <class Real>
struct LineOrbit {
  Real speed{1};
  Vec<Real> axis{};
  Vec<Real> offset{};
  double angle = 0.0;  // polar angle of the axis in 2D, reporting only
};

/// a(t) = center + radius * (cos t, +-sin t); the minus sign when clockwise.
template <class Real>
struct ArcOrbit {
  Vec<Real> center{};
  Real radius{1};
  bool clockwise = false;
};

/// Linear interpolation through (time, point) breakpoints.
template <class Real>
struct PolylineOrbit {
  std::vector<Real> times;
  std::vector<Vec<Real>> points;
  bool dense_table = false;  // Sampled variant when true
};

template <class Real>
struct Velocity {
  Vec<Real> value{};
  bool discontinuous = false;  // t is a breakpoint with a slope jump
};

/// Orbit function of a moving point source over its emission interval.
template <class Real>
class Trajectory {
 public:
  using Shape = std::variant<LineOrbit<Real>, ArcOrbit<Real>, PolylineOrbit<Real>>;

  Trajectory() = default;

  static Trajectory line(Real speed, double alpha, Vec<Real> offset, TimeInterval<Real> interval) {
    using std::cos;
    using std::sin;
    const Real a(alpha);
    return line_along(speed, Vec<Real>(cos(a), sin(a)), offset, interval, 2, alpha);
  }

  /// Same as line() with the heading in working precision.
  static Trajectory line_exact(Real speed, const Real& alpha, double alpha_report, Vec<Real> offset,
                               TimeInterval<Real> interval) {
    using std::cos;
    using std::sin;
    return line_along(speed, Vec<Real>(cos(alpha), sin(alpha)), offset, interval, 2, alpha_report);
  }

  static Trajectory line3d(Real speed, Vec<Real> axis, Vec<Real> offset,
                           TimeInterval<Real> interval) {
    const Real n = norm(axis);
    if (!(n > Real(0))) throw DomainError("line axis must be nonzero");
    return line_along(speed, (Real(1) / n) * axis, offset, interval, 3, 0.0);
  }

  static Trajectory arc(Vec<Real> center, Real radius, TimeInterval<Real> interval,
                        bool clockwise = false) {
    if (!(radius > Real(0))) throw DomainError("arc radius must be positive");
    Trajectory tr;
    tr.shape_ = ArcOrbit<Real>{center, radius, clockwise};
    tr.interval_ = interval;
    tr.dim_ = 2;
    return tr;
  }

  static Trajectory piecewise_linear(std::vector<Real> times, std::vector<Vec<Real>> points,
                                     int dim) {
    return polyline(std::move(times), std::move(points), dim, false);
  }

  static Trajectory sampled(std::vector<Real> times, std::vector<Vec<Real>> points, int dim) {
    return polyline(std::move(times), std::move(points), dim, true);
  }

  const Shape& shape() const { return shape_; }
  const TimeInterval<Real>& interval() const { return interval_; }
  int dim() const { return dim_; }

  std::string variant_name() const {
    switch (shape_.index()) {
      case 0:
        return "line";
      case 1:
        return "arc";
      default:
        return std::get<2>(shape_).dense_table ? "sampled" : "piecewise_linear";
    }
  }

  /// Interior breakpoint times (velocity may jump there).
  std::vector<Real> breakpoints() const {
    if (const auto* p = std::get_if<PolylineOrbit<Real>>(&shape_)) {
      if (p->times.size() <= 2) return {};
      return std::vector<Real>(p->times.begin() + 1, p->times.end() - 1);
    }
    return {};
  }

  /// Subintervals on which a(t) is smooth, in increasing order.
  std::vector<std::pair<Real, Real>> smooth_pieces() const {
    std::vector<std::pair<Real, Real>> out;
    if (const auto* p = std::get_if<PolylineOrbit<Real>>(&shape_)) {
      for (std::size_t i = 0; i + 1 < p->times.size(); ++i) {
        out.emplace_back(p->times[i], p->times[i + 1]);
      }
    } else {
      out.emplace_back(interval_.t_min, interval_.t_max);
    }
    return out;
  }

  /// Upper bound of |a'(t)| over the interval.
  Real max_speed() const {
    using std::abs;
    if (const auto* l = std::get_if<LineOrbit<Real>>(&shape_)) return abs(l->speed);
    if (const auto* a = std::get_if<ArcOrbit<Real>>(&shape_)) return a->radius;
    const auto& p = std::get<PolylineOrbit<Real>>(shape_);
    Real best(0);
    for (std::size_t i = 0; i + 1 < p.times.size(); ++i) {
      best = std::max(best, norm(p.points[i + 1] - p.points[i]) / (p.times[i + 1] - p.times[i]));
    }
    return best;
  }

  Vec<Real> position(const Real& t) const {
    check_time(t);
    if (const auto* l = std::get_if<LineOrbit<Real>>(&shape_)) {
      return l->offset + (l->speed * t) * l->axis;
    }
    if (const auto* a = std::get_if<ArcOrbit<Real>>(&shape_)) {
      using std::cos;
      using std::sin;
      const Real s = a->clockwise ? -sin(t) : sin(t);
      return a->center + a->radius * Vec<Real>(cos(t), s);
    }
    const auto& p = std::get<PolylineOrbit<Real>>(shape_);
    const std::size_t k = segment_index(p, t);
    const Real w = (t - p.times[k]) / (p.times[k + 1] - p.times[k]);
    return p.points[k] + w * (p.points[k + 1] - p.points[k]);
  }

  /// Right derivative (left derivative at t_max).
  Velocity<Real> velocity(const Real& t) const {
    check_time(t);
    if (const auto* l = std::get_if<LineOrbit<Real>>(&shape_)) {
      return {l->speed * l->axis, false};
    }
    if (const auto* a = std::get_if<ArcOrbit<Real>>(&shape_)) {
      using std::cos;
      using std::sin;
      const Real s = a->clockwise ? -cos(t) : cos(t);
      return {a->radius * Vec<Real>(-sin(t), s), false};
    }
    const auto& p = std::get<PolylineOrbit<Real>>(shape_);
    const std::size_t k = segment_index(p, t);
    const Vec<Real> right = slope(p, k);
    bool jump = false;
    if (k > 0 && t == p.times[k]) jump = !(slope(p, k - 1) == right);
    return {right, jump};
  }

  template <class To>
  Trajectory<To> cast() const {
    Trajectory<To> out;
    out.interval_ = interval_.template cast<To>();
    out.dim_ = dim_;
    if (const auto* l = std::get_if<LineOrbit<Real>>(&shape_)) {
      LineOrbit<To> m{real_cast<To>(l->speed), l->axis.template cast<To>(),
                      l->offset.template cast<To>(), l->angle};
      if (dim_ == 2) {
        using std::cos;
        using std::sin;
        m.axis = Vec<To>(cos(To(l->angle)), sin(To(l->angle)));
      }
      out.shape_ = m;
    } else if (const auto* a = std::get_if<ArcOrbit<Real>>(&shape_)) {
      out.shape_ = ArcOrbit<To>{a->center.template cast<To>(), real_cast<To>(a->radius),
                                a->clockwise};
    } else {
      const auto& p = std::get<PolylineOrbit<Real>>(shape_);
      PolylineOrbit<To> q;
      q.dense_table = p.dense_table;
      for (const auto& t : p.times) q.times.push_back(real_cast<To>(t));
      for (const auto& x : p.points) q.points.push_back(x.template cast<To>());
      out.shape_ = std::move(q);
    }
    return out;
  }

 private:
  template <class>
  friend class Trajectory;

  static Trajectory line_along(Real speed, Vec<Real> axis, Vec<Real> offset,
                               TimeInterval<Real> interval, int dim, double alpha) {
    if (!(speed >= Real(0))) throw DomainError("line speed must be nonnegative");
    Trajectory tr;
    tr.shape_ = LineOrbit<Real>{speed, axis, offset, alpha};
    tr.interval_ = interval;
    tr.dim_ = dim;
    return tr;
  }

  static Trajectory polyline(std::vector<Real> times, std::vector<Vec<Real>> points, int dim,
                             bool dense) {
    if (times.size() < 2 || times.size() != points.size()) {
      throw DomainError("polyline needs at least two (time, point) breakpoints");
    }
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      if (!(times[i + 1] > times[i])) {
        throw DomainError("breakpoint times must be strictly increasing");
      }
    }
    if (dim != 2 && dim != 3) throw DomainError("dimension must be 2 or 3");
    Trajectory tr;
    tr.interval_ = TimeInterval<Real>::make(times.front(), times.back());
    tr.shape_ = PolylineOrbit<Real>{std::move(times), std::move(points), dense};
    tr.dim_ = dim;
    return tr;
  }

  static std::size_t segment_index(const PolylineOrbit<Real>& p, const Real& t) {
    auto it = std::upper_bound(p.times.begin(), p.times.end(), t);
    std::size_t k = static_cast<std::size_t>(std::distance(p.times.begin(), it));
    k = k == 0 ? 0 : k - 1;
    return std::min(k, p.times.size() - 2);
  }

  static Vec<Real> slope(const PolylineOrbit<Real>& p, std::size_t k) {
    return (Real(1) / (p.times[k + 1] - p.times[k])) * (p.points[k + 1] - p.points[k]);
  }

  void check_time(const Real& t) const {
    if (!interval_.contains(t)) throw DomainError("time outside the emission interval");
  }

  Shape shape_{};
  TimeInterval<Real> interval_{};
  int dim_ = 2;
};

template <class Real>
inline Vec<Real> eval_position(const Trajectory<Real>& traj, const Real& t) {
  return traj.position(t);
}

template <class Real>
inline Velocity<Real> eval_velocity(const Trajectory<Real>& traj, const Real& t) {
  return traj.velocity(t);
}

/// h(t) = t + x.a(t)
template <class Real>
inline Real h_value(const Trajectory<Real>& traj, const Direction<Real>& dir, const Real& t) {
  return t + dot(dir.unit(), traj.position(t));
}

/// h'(t) = 1 + x.a'(t), right derivative at breakpoints.
template <class Real>
inline Real h_derivative(const Trajectory<Real>& traj, const Direction<Real>& dir,
                         const Real& t) {
  return Real(1) + dot(dir.unit(), traj.velocity(t).value);
}

}  // namespace msimg
