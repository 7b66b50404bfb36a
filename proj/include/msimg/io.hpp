#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "msimg/forward.hpp"
#include "msimg/imaging.hpp"
#include "msimg/spectral.hpp"

namespace msimg {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

template <class Real>
void set_precision(std::ostream& out) {
  out << std::setprecision(std::max(17, std::numeric_limits<Real>::max_digits10));
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

inline void expect_header(std::istream& in, const std::string& header, const std::string& path) {
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw ValidationError("'" + path + "': expected header '" + header + "', found '" + line + "'");
  }
}

}  // namespace detail

/// `k,re,im`, one row per band midpoint.
template <class Real>
void write_farfield_csv(const std::string& path, const FarFieldSamples<Real>& samples) {
  auto out = detail::open_out(path);
  detail::set_precision<Real>(out);
  out << "k,re,im\n";
  for (std::size_t n = 0; n < samples.values.size(); ++n) {
    out << samples.band.midpoint(n + 1) << ',' << samples.values[n].real() << ','
        << samples.values[n].imag() << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

/// Reads a far-field CSV and checks that its frequencies are the band
/// midpoints.
template <class Real>
FarFieldSamples<Real> read_farfield_csv(const std::string& path, const Direction<Real>& dir,
                                        const FrequencyBand<Real>& band) {
  using std::abs;
  auto in = detail::open_in(path);
  detail::expect_header(in, "k,re,im", path);
  FarFieldSamples<Real> out{dir, band, {}};
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    ++row;
    if (cells.size() != 3) {
      throw ValidationError("'" + path + "' row " + std::to_string(row) + ": expected 3 columns");
    }
    Real k, re, im;
    try {
      k = from_string<Real>(cells[0]);
      re = from_string<Real>(cells[1]);
      im = from_string<Real>(cells[2]);
    } catch (const std::exception&) {
      throw ValidationError("'" + path + "' row " + std::to_string(row) + ": not a number");
    }
    if (row > band.count || abs(k - band.midpoint(row)) > Real(1e-9) * band.k_max) {
      throw ValidationError("'" + path + "' row " + std::to_string(row) +
                            ": frequency does not match the configured band");
    }
    out.values.emplace_back(re, im);
  }
  if (out.values.size() != band.count) {
    throw ValidationError("'" + path + "' has " + std::to_string(out.values.size()) +
                          " rows, band has " + std::to_string(band.count));
  }
  return out;
}

namespace detail {

inline void write_point(std::ostream& out, const ScalarField& field, std::size_t i) {
  const auto idx = field.grid.indices(i);
  const int fixed = field.meta.slice_axis;
  int k = 0;
  const int dims = fixed >= 0 ? 3 : field.grid.dim;
  for (int a = 0; a < dims; ++a) {
    if (a == fixed) {
      out << field.meta.slice_offset << ',';
    } else {
      out << field.grid.coordinate(k, idx[k]) << ',';
      ++k;
    }
  }
}

inline std::string point_header(const ScalarField& field) {
  const int dims = field.meta.slice_axis >= 0 ? 3 : field.grid.dim;
  return dims == 3 ? "x1,x2,x3" : "x1,x2";
}

}  // namespace detail

/// `x1,x2[,x3],w` in grid order. Slice fields carry their fixed coordinate.
inline void write_field_csv(const std::string& path, const ScalarField& field) {
  auto out = detail::open_out(path);
  out << std::setprecision(17);
  out << detail::point_header(field) << ",w\n";
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    detail::write_point(out, field, i);
    out << field.values[i] << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline void write_mask_csv(const std::string& path, const ScalarField& layout, const Mask& mask) {
  auto out = detail::open_out(path);
  out << std::setprecision(17);
  out << detail::point_header(layout) << ",mask\n";
  for (std::size_t i = 0; i < mask.size(); ++i) {
    detail::write_point(out, layout, i);
    out << int(mask[i]) << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

/// Reads a 2D field CSV and checks it against `grid` point by point.
inline ScalarField read_field_csv(const std::string& path, const SearchGrid& grid) {
  auto in = detail::open_in(path);
  const std::string header = grid.dim == 3 ? "x1,x2,x3,w" : "x1,x2,w";
  detail::expect_header(in, header, path);
  ScalarField field{grid, {}, {}};
  field.values.reserve(grid.size());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    const std::size_t i = field.values.size();
    if (cells.size() != std::size_t(grid.dim + 1) || i >= grid.size()) {
      throw ValidationError("'" + path + "' does not match the configured grid");
    }
    const Vec<double> p = grid.point(i);
    for (int a = 0; a < grid.dim; ++a) {
      const double x = std::stod(cells[a]);
      if (std::abs(x - p[a]) > 1e-9 * std::max(1.0, std::abs(p[a]))) {
        throw ValidationError("'" + path + "' row " + std::to_string(i + 1) +
                              " does not match the configured grid");
      }
    }
    field.values.push_back(std::stod(cells[grid.dim]));
  }
  if (field.values.size() != grid.size()) {
    throw ValidationError("'" + path + "' does not match the configured grid");
  }
  return field;
}

/// Plain (P2) 8-bit PGM scaled to the field maximum. Columns run along the
/// first axis, rows along the second with the largest value on top.
inline void write_pgm(const std::string& path, const ScalarField& field) {
  if (field.grid.dim != 2) throw DomainError("PGM output needs a 2D field");
  const std::size_t nx = field.grid.resolution[0];
  const std::size_t ny = field.grid.resolution[1];
  const double top = field.max();
  auto out = detail::open_out(path);
  out << "P2\n" << nx << ' ' << ny << "\n255\n";
  for (std::size_t r = 0; r < ny; ++r) {
    const std::size_t j = ny - 1 - r;
    for (std::size_t i = 0; i < nx; ++i) {
      const double v = field.values[field.grid.flat({i, j, 0})];
      const int level = top > 0.0 && std::isfinite(v) ? int(std::lround(255.0 * v / top)) : 0;
      out << level << (i + 1 == nx ? '\n' : ' ');
    }
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

/// `n,lambda` plus a companion `n,m,re,im` file for the eigenvectors.
template <class Real>
void write_spectrum_csv(const std::string& values_path, const std::string& vectors_path,
                        const Spectrum<Real>& s) {
  auto out = detail::open_out(values_path);
  detail::set_precision<Real>(out);
  out << "n,lambda\n";
  for (std::size_t n = 0; n < s.size(); ++n) out << n + 1 << ',' << s.eigenvalues[n] << '\n';
  auto vec = detail::open_out(vectors_path);
  detail::set_precision<Real>(vec);
  vec << "n,m,re,im\n";
  for (std::size_t n = 0; n < s.size(); ++n) {
    for (std::size_t m = 0; m < s.eigenvectors.rows(); ++m) {
      vec << n + 1 << ',' << m + 1 << ',' << s.eigenvectors(m, n).real() << ','
          << s.eigenvectors(m, n).imag() << '\n';
    }
  }
  if (!out || !vec) throw IoError("spectrum write failed");
}

}  // namespace msimg
