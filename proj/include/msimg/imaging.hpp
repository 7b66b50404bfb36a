#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "msimg/geometry.hpp"
#include "msimg/observability.hpp"
#include "msimg/parallel.hpp"

namespace msimg {

/// Uniform lattice including both endpoints on every axis. Points are
/// enumerated row-major with x1 as the slowest index.
struct SearchGrid {
  int dim = 2;
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{0, 0, 0};
  std::array<std::size_t, 3> resolution{1, 1, 1};

  std::size_t size() const {
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= resolution[a];
    return n;
  }

  double spacing(int axis) const {
    return (hi[axis] - lo[axis]) / double(resolution[axis] - 1);
  }

  double coordinate(int axis, std::size_t i) const {
    if (i + 1 == resolution[axis]) return hi[axis];
    return lo[axis] + double(i) * spacing(axis);
  }

  std::array<std::size_t, 3> indices(std::size_t flat) const {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = flat % resolution[a];
      flat /= resolution[a];
    }
    return idx;
  }

  std::size_t flat(const std::array<std::size_t, 3>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim; ++a) f = f * resolution[a] + idx[a];
    return f;
  }

  Vec<double> point(std::size_t flat_index) const {
    const auto idx = indices(flat_index);
    Vec<double> p;
    for (int a = 0; a < dim; ++a) p[a] = coordinate(a, idx[a]);
    return p;
  }

  friend bool operator==(const SearchGrid& a, const SearchGrid& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i) {
      if (a.lo[i] != b.lo[i] || a.hi[i] != b.hi[i] || a.resolution[i] != b.resolution[i]) {
        return false;
      }
    }
    return true;
  }
};

inline SearchGrid make_grid(const std::vector<std::pair<double, double>>& bounds,
                            const std::vector<std::size_t>& resolution) {
  if (bounds.size() != resolution.size() || bounds.size() < 2 || bounds.size() > 3) {
    throw DomainError("grid needs 2 or 3 axes with one resolution each");
  }
  SearchGrid g;
  g.dim = int(bounds.size());
  for (int a = 0; a < g.dim; ++a) {
    if (!(bounds[a].first < bounds[a].second)) throw DomainError("grid bounds must satisfy lo < hi");
    if (resolution[a] < 2) throw DomainError("grid resolution must be at least 2 per axis");
    g.lo[a] = bounds[a].first;
    g.hi[a] = bounds[a].second;
    g.resolution[a] = resolution[a];
  }
  return g;
}

/// Plane x_axis = offset inside a 3D grid.
struct SliceSpec {
  int axis = 0;
  double offset = 0.0;
};

struct FieldMetadata {
  std::vector<double> thetas;
  std::vector<double> phis;
  std::string mode;
  double k_max = 0.0;
  std::size_t count = 0;
  double scale = 1.0;
  bool zero_scale = false;
  int slice_axis = -1;
  double slice_offset = 0.0;
  std::string warning;
};

struct ScalarField {
  SearchGrid grid;
  std::vector<double> values;
  FieldMetadata meta;

  double max() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
  }

  std::size_t argmax() const {
    return std::size_t(std::max_element(values.begin(), values.end()) - values.begin());
  }
};

/// values[i] = f(points[i]). Each worker owns a contiguous block, so the
/// result does not depend on the thread count.
template <class F>
ScalarField evaluate_field(const F& f, const SearchGrid& grid, unsigned threads = 1) {
  ScalarField out{grid, std::vector<double>(grid.size(), 0.0), {}};
  parallel_for(grid.size(), threads, [&](std::size_t i) { out.values[i] = double(f(grid.point(i))); });
  return out;
}

/// Evaluates f on the lattice plane nearest to slice.offset. The returned
/// field lives on the two remaining axes in their original order; f still
/// receives 3D points.
template <class F>
ScalarField slice_field_3d(const F& f, const SearchGrid& grid3d, const SliceSpec& slice,
                           unsigned threads = 1) {
  if (grid3d.dim != 3) throw DomainError("slice_field_3d needs a 3D grid");
  if (slice.axis < 0 || slice.axis > 2) throw DomainError("slice axis must be 0, 1 or 2");
  const int ax = slice.axis;
  if (slice.offset < grid3d.lo[ax] || slice.offset > grid3d.hi[ax]) {
    throw DomainError("slice offset outside the grid bounds");
  }
  const double h = grid3d.spacing(ax);
  const auto plane = std::size_t(std::llround((slice.offset - grid3d.lo[ax]) / h));
  const double snapped = grid3d.coordinate(ax, plane);

  SearchGrid g2;
  g2.dim = 2;
  int k = 0;
  std::array<int, 2> axes{};
  for (int a = 0; a < 3; ++a) {
    if (a == ax) continue;
    axes[k] = a;
    g2.lo[k] = grid3d.lo[a];
    g2.hi[k] = grid3d.hi[a];
    g2.resolution[k] = grid3d.resolution[a];
    ++k;
  }
  ScalarField out{g2, std::vector<double>(g2.size(), 0.0), {}};
  out.meta.slice_axis = ax;
  out.meta.slice_offset = snapped;
  if (std::abs(snapped - slice.offset) > 1e-9 * std::max(1.0, std::abs(slice.offset))) {
    out.meta.warning = "slice offset " + std::to_string(slice.offset) +
                       " snapped to lattice plane " + std::to_string(snapped);
  }
  parallel_for(g2.size(), threads, [&](std::size_t i) {
    const auto idx = g2.indices(i);
    Vec<double> p;
    p[ax] = snapped;
    p[axes[0]] = grid3d.coordinate(axes[0], idx[0]);
    p[axes[1]] = grid3d.coordinate(axes[1], idx[1]);
    out.values[i] = double(f(p));
  });
  return out;
}

using Mask = std::vector<std::uint8_t>;

template <class Real>
Mask mask_strip(const SearchGrid& grid, const Strip<Real>& s) {
  Mask m(grid.size(), 0);
  if (s.empty) return m;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    m[i] = s.contains(grid.point(i).template cast<Real>()) ? 1 : 0;
  }
  return m;
}

template <class Real>
Mask mask_theta(const SearchGrid& grid, const ThetaDomain<Real>& theta) {
  Mask m(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    m[i] = theta.contains(grid.point(i).template cast<Real>()) ? 1 : 0;
  }
  return m;
}

/// Marks every point within `cells` lattice steps (per axis) of a set point.
inline Mask dilate(const SearchGrid& grid, const Mask& mask, std::size_t cells) {
  Mask out(mask.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const auto c = grid.indices(i);
    std::array<std::size_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < grid.dim; ++a) {
      lo[a] = c[a] >= cells ? c[a] - cells : 0;
      hi[a] = std::min(grid.resolution[a] - 1, c[a] + cells);
    }
    std::array<std::size_t, 3> idx = lo;
    while (true) {
      out[grid.flat(idx)] = 1;
      int a = grid.dim - 1;
      while (a >= 0 && idx[a] == hi[a]) {
        idx[a] = lo[a];
        --a;
      }
      if (a < 0) break;
      ++idx[a];
    }
  }
  return out;
}

struct ContrastMetric {
  double inside_median = 0.0;
  double outside_median = 0.0;
  double ratio = 0.0;
  std::size_t inside_count = 0;
  std::size_t outside_count = 0;
};

namespace detail {

inline double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double upper = v[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lower + upper);
}

/// True if some masked point lies within Euclidean distance r of point i.
inline bool near_mask(const SearchGrid& grid, const Mask& mask, std::size_t i, double r) {
  const auto c = grid.indices(i);
  const Vec<double> p = grid.point(i);
  std::array<std::size_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < grid.dim; ++a) {
    const auto w = std::size_t(std::ceil(r / grid.spacing(a)));
    lo[a] = c[a] >= w ? c[a] - w : 0;
    hi[a] = std::min(grid.resolution[a] - 1, c[a] + w);
  }
  std::array<std::size_t, 3> idx = lo;
  while (true) {
    const std::size_t f = grid.flat(idx);
    if (mask[f] && norm(grid.point(f) - p) <= r) return true;
    int a = grid.dim - 1;
    while (a >= 0 && idx[a] == hi[a]) {
      idx[a] = lo[a];
      --a;
    }
    if (a < 0) return false;
    ++idx[a];
  }
}

}  // namespace detail

/// Median of the field inside the mask against the median outside it, with
/// outside points closer than `margin` to the mask left out.
inline ContrastMetric contrast_metric(const ScalarField& field, const Mask& mask, double margin) {
  if (mask.size() != field.values.size()) throw DomainError("mask and field sizes differ");
  std::vector<double> inside, outside;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      inside.push_back(field.values[i]);
    } else if (margin <= 0.0 || !detail::near_mask(field.grid, mask, i, margin)) {
      outside.push_back(field.values[i]);
    }
  }
  if (inside.empty() || outside.empty()) {
    throw DomainError("contrast metric needs points both inside and outside the mask");
  }
  ContrastMetric m;
  m.inside_count = inside.size();
  m.outside_count = outside.size();
  m.inside_median = detail::median(std::move(inside));
  m.outside_median = detail::median(std::move(outside));
  m.ratio = m.outside_median > 0.0 ? m.inside_median / m.outside_median
                                   : std::numeric_limits<double>::infinity();
  return m;
}

inline ScalarField normalize_field(ScalarField field) {
  const double top = field.max();
  if (!(top > 0.0)) {
    field.meta.zero_scale = true;
    return field;
  }
  for (auto& v : field.values) v /= top;
  field.meta.scale *= top;
  return field;
}

/// Points where the field reaches at least half of its maximum.
inline Mask half_max_mask(const ScalarField& field) {
  const double half = 0.5 * field.max();
  Mask m(field.values.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = field.values[i] >= half ? 1 : 0;
  return m;
}

/// Range of u.y over the half-maximum set of the field.
inline std::pair<double, double> half_max_extent(const ScalarField& field, const Vec<double>& u) {
  const Mask m = half_max_mask(field);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    const double s = dot(u, field.grid.point(i));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

}  // namespace msimg
