#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msimg/forward.hpp"
#include "msimg/imaging.hpp"
#include "msimg/indicator.hpp"
#include "msimg/spectral.hpp"
#include "msimg/trajectory.hpp"

namespace msimg {

/// Arithmetic on literals with pi, inf, sqrt, sin, cos and acos, evaluated
/// in the working precision so that "9*pi/8" keeps all quad digits.
template <class Real>
class Expression {
 public:
  static Real evaluate(const std::string& text) {
    Expression e(text);
    const Real v = e.expr();
    e.skip_space();
    if (e.pos_ != text.size()) e.fail("unexpected '" + std::string(1, text[e.pos_]) + "'");
    return v;
  }

 private:
  explicit Expression(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError("bad expression '" + text_ + "': " + why);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Real expr() {
    Real v = term();
    while (true) {
      if (accept('+')) {
        v += term();
      } else if (accept('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  Real term() {
    Real v = factor();
    while (true) {
      if (accept('*')) {
        v *= factor();
      } else if (accept('/')) {
        v /= factor();
      } else {
        return v;
      }
    }
  }

  Real factor() {
    if (accept('-')) return -factor();
    if (accept('+')) return factor();
    return primary();
  }

  Real primary() {
    using std::acos;
    using std::cos;
    using std::sin;
    using std::sqrt;
    skip_space();
    if (accept('(')) {
      const Real v = expr();
      if (!accept(')')) fail("missing ')'");
      return v;
    }
    if (pos_ >= text_.size()) fail("unexpected end");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
        ++pos_;
      }
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
      try {
        return from_string<Real>(text_.substr(start, pos_ - start));
      } catch (const std::exception&) {
        fail("bad number");
      }
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (name == "pi") return pi<Real>();
      if (name == "inf") return std::numeric_limits<Real>::infinity();
      if (!accept('(')) fail("unknown name '" + name + "'");
      const Real arg = expr();
      if (!accept(')')) fail("missing ')'");
      if (name == "sqrt") return sqrt(arg);
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      if (name == "acos") return acos(arg);
      fail("unknown function '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

/// A number given either as a JSON number or as an expression string.
struct Scalar {
  double value = 0.0;
  std::string text;

  Scalar() = default;
  Scalar(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
  explicit Scalar(std::string t) : value(Expression<double>::evaluate(t)), text(std::move(t)) {}

  template <class Real>
  Real as() const {
    return text.empty() ? Real(value) : Expression<Real>::evaluate(text);
  }

  friend bool operator==(const Scalar&, const Scalar&) = default;
};

struct TrajectoryConfig {
  std::string type = "line";
  Scalar speed{1.0};
  Scalar angle{0.0};
  std::vector<Scalar> axis;
  std::vector<Scalar> offset;
  std::vector<Scalar> center;
  Scalar radius{1.0};
  bool clockwise = false;
  Scalar t_min{0.0};
  Scalar t_max{1.0};
  std::vector<Scalar> times;
  std::vector<std::vector<Scalar>> points;

  int dim() const {
    if (type == "line3d") return 3;
    if (type == "piecewise_linear" || type == "sampled") {
      return points.empty() ? 2 : int(points.front().size());
    }
    return 2;
  }

  friend bool operator==(const TrajectoryConfig&, const TrajectoryConfig&) = default;
};

struct DirectionConfig {
  Scalar theta{0.0};
  Scalar phi{0.0};
  friend bool operator==(const DirectionConfig&, const DirectionConfig&) = default;
};

/// Either `count` equally spaced polar angles, or an explicit list (polar
/// angles in 2D, (theta, phi) pairs in 3D).
struct DirectionsConfig {
  std::size_t count = 0;
  std::vector<DirectionConfig> list;
  bool spherical = false;

  std::size_t size() const { return count > 0 ? count : list.size(); }
  int dim() const { return spherical ? 3 : 2; }
  friend bool operator==(const DirectionsConfig&, const DirectionsConfig&) = default;
};

struct GridConfig {
  std::vector<std::pair<Scalar, Scalar>> bounds;
  std::vector<std::size_t> resolution;
  std::vector<SliceSpec> slices;

  friend bool operator==(const GridConfig& a, const GridConfig& b) {
    if (a.bounds != b.bounds || a.resolution != b.resolution || a.slices.size() != b.slices.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.slices.size(); ++i) {
      if (a.slices[i].axis != b.slices[i].axis || a.slices[i].offset != b.slices[i].offset) {
        return false;
      }
    }
    return true;
  }
};

struct ExperimentConfig {
  std::string name;
  TrajectoryConfig trajectory;
  Scalar k_max{std::string("3*pi")};
  std::size_t count = 18;
  DirectionsConfig directions;
  std::string mode = "rigorous";
  std::string precision = "double";
  GridConfig grid;
  double noise_delta = 0.0;
  std::uint64_t noise_seed = 0;
  Scalar threshold{kDefaultFilterThreshold};
  double eigenvalue_floor = 0.0;  // 0 selects the per-precision default
  double cutoff = 0.0;
  std::string output_dir = "out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

using nlohmann::json;

inline Scalar scalar_from(const json& j, const std::string& where) {
  if (j.is_number()) return Scalar(j.get<double>());
  if (j.is_string()) {
    try {
      return Scalar(j.get<std::string>());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  throw ValidationError(where + ": expected a number or an expression string");
}

inline json scalar_to(const Scalar& s) {
  if (!s.text.empty()) return s.text;
  return s.value;
}

inline std::vector<Scalar> vector_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<Scalar> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(scalar_from(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline json vector_to(const std::vector<Scalar>& v) {
  json out = json::array();
  for (const auto& s : v) out.push_back(scalar_to(s));
  return out;
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(where + ": missing '" + key + "'");
  }
  return j.at(key);
}

inline void interval_from(const json& j, TrajectoryConfig& t, const std::string& where) {
  const auto iv = vector_from(require(j, "interval", where), where + ".interval");
  if (iv.size() != 2) throw ValidationError(where + ".interval: expected [t_min, t_max]");
  t.t_min = iv[0];
  t.t_max = iv[1];
}

inline TrajectoryConfig trajectory_from(const json& j) {
  const std::string where = "trajectory";
  TrajectoryConfig t;
  t.type = require(j, "type", where).get<std::string>();
  if (t.type == "line") {
    t.speed = scalar_from(require(j, "speed", where), where + ".speed");
    t.angle = scalar_from(require(j, "angle", where), where + ".angle");
    t.offset = j.contains("offset") ? vector_from(j["offset"], where + ".offset")
                                    : std::vector<Scalar>{0.0, 0.0};
    if (t.offset.size() != 2) throw ValidationError(where + ".offset: expected 2 components");
    interval_from(j, t, where);
  } else if (t.type == "line3d") {
    t.speed = scalar_from(require(j, "speed", where), where + ".speed");
    t.axis = vector_from(require(j, "axis", where), where + ".axis");
    t.offset = j.contains("offset") ? vector_from(j["offset"], where + ".offset")
                                    : std::vector<Scalar>{0.0, 0.0, 0.0};
    if (t.axis.size() != 3 || t.offset.size() != 3) {
      throw ValidationError(where + ": line3d axis and offset need 3 components");
    }
    interval_from(j, t, where);
  } else if (t.type == "arc") {
    t.center = j.contains("center") ? vector_from(j["center"], where + ".center")
                                    : std::vector<Scalar>{0.0, 0.0};
    if (t.center.size() != 2) throw ValidationError(where + ".center: expected 2 components");
    t.radius = scalar_from(require(j, "radius", where), where + ".radius");
    t.clockwise = j.value("clockwise", false);
    interval_from(j, t, where);
  } else if (t.type == "piecewise_linear" || t.type == "sampled") {
    t.times = vector_from(require(j, "times", where), where + ".times");
    const json& pts = require(j, "points", where);
    if (!pts.is_array()) throw ValidationError(where + ".points: expected an array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      t.points.push_back(vector_from(pts[i], where + ".points[" + std::to_string(i) + "]"));
    }
    if (t.points.size() != t.times.size() || t.times.size() < 2) {
      throw ValidationError(where + ": need matching times and points (at least 2)");
    }
    for (const auto& p : t.points) {
      if (p.size() != t.points.front().size() || p.size() < 2 || p.size() > 3) {
        throw ValidationError(where + ".points: all points need 2 or 3 components");
      }
    }
    t.t_min = t.times.front();
    t.t_max = t.times.back();
  } else {
    throw ValidationError(where + ".type: unknown trajectory type '" + t.type + "'");
  }
  return t;
}

inline json trajectory_to(const TrajectoryConfig& t) {
  json j;
  j["type"] = t.type;
  if (t.type == "line") {
    j["speed"] = scalar_to(t.speed);
    j["angle"] = scalar_to(t.angle);
    j["offset"] = vector_to(t.offset);
    j["interval"] = vector_to({t.t_min, t.t_max});
  } else if (t.type == "line3d") {
    j["speed"] = scalar_to(t.speed);
    j["axis"] = vector_to(t.axis);
    j["offset"] = vector_to(t.offset);
    j["interval"] = vector_to({t.t_min, t.t_max});
  } else if (t.type == "arc") {
    j["center"] = vector_to(t.center);
    j["radius"] = scalar_to(t.radius);
    j["clockwise"] = t.clockwise;
    j["interval"] = vector_to({t.t_min, t.t_max});
  } else {
    j["times"] = vector_to(t.times);
    json pts = json::array();
    for (const auto& p : t.points) pts.push_back(vector_to(p));
    j["points"] = pts;
  }
  return j;
}

inline DirectionsConfig directions_from(const json& j) {
  const std::string where = "directions";
  DirectionsConfig d;
  if (j.contains("count")) {
    d.count = j["count"].get<std::size_t>();
    if (d.count == 0) throw ValidationError(where + ".count: must be positive");
  } else if (j.contains("angles")) {
    for (const auto& s : vector_from(j["angles"], where + ".angles")) d.list.push_back({s, 0.0});
  } else if (j.contains("pairs")) {
    d.spherical = true;
    const json& pairs = j["pairs"];
    if (!pairs.is_array()) throw ValidationError(where + ".pairs: expected an array");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string w = where + ".pairs[" + std::to_string(i) + "]";
      d.list.push_back({scalar_from(require(pairs[i], "theta", w), w + ".theta"),
                        scalar_from(require(pairs[i], "phi", w), w + ".phi")});
    }
  } else {
    throw ValidationError(where + ": expected 'count', 'angles' or 'pairs'");
  }
  if (d.size() == 0) throw ValidationError(where + ": no directions given");
  return d;
}

inline json directions_to(const DirectionsConfig& d) {
  json j;
  if (d.count > 0) {
    j["count"] = d.count;
  } else if (d.spherical) {
    json pairs = json::array();
    for (const auto& p : d.list) {
      pairs.push_back({{"theta", scalar_to(p.theta)}, {"phi", scalar_to(p.phi)}});
    }
    j["pairs"] = pairs;
  } else {
    json angles = json::array();
    for (const auto& p : d.list) angles.push_back(scalar_to(p.theta));
    j["angles"] = angles;
  }
  return j;
}

inline GridConfig grid_from(const json& j) {
  const std::string where = "grid";
  GridConfig g;
  const json& bounds = require(j, "bounds", where);
  if (!bounds.is_array()) throw ValidationError(where + ".bounds: expected an array");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const auto b = vector_from(bounds[i], where + ".bounds[" + std::to_string(i) + "]");
    if (b.size() != 2) throw ValidationError(where + ".bounds: expected [lo, hi] pairs");
    g.bounds.emplace_back(b[0], b[1]);
  }
  if (j.contains("resolution")) {
    const json& r = j["resolution"];
    if (r.is_number()) {
      g.resolution.assign(g.bounds.size(), r.get<std::size_t>());
    } else {
      g.resolution = r.get<std::vector<std::size_t>>();
    }
  } else {
    g.resolution.assign(g.bounds.size(), g.bounds.size() == 3 ? 81 : 201);
  }
  if (j.contains("slices")) {
    for (const auto& s : j["slices"]) {
      g.slices.push_back({require(s, "axis", where + ".slices").get<int>(),
                          scalar_from(require(s, "offset", where + ".slices"),
                                      where + ".slices.offset")
                              .value});
    }
  }
  return g;
}

inline json grid_to(const GridConfig& g) {
  json j;
  json bounds = json::array();
  for (const auto& [lo, hi] : g.bounds) bounds.push_back(vector_to({lo, hi}));
  j["bounds"] = bounds;
  j["resolution"] = g.resolution;
  if (!g.slices.empty()) {
    json slices = json::array();
    for (const auto& s : g.slices) slices.push_back({{"axis", s.axis}, {"offset", s.offset}});
    j["slices"] = slices;
  }
  return j;
}

inline std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  const int dim = c.trajectory.dim();
  if (c.directions.dim() != dim) {
    throw ValidationError("directions are " + std::to_string(c.directions.dim()) +
                          "D but the trajectory is " + std::to_string(dim) + "D");
  }
  if (c.directions.count > 0 && dim != 2) {
    throw ValidationError("directions.count is only defined in 2D");
  }
  if (!c.grid.bounds.empty() && int(c.grid.bounds.size()) != dim) {
    throw ValidationError("grid is " + std::to_string(c.grid.bounds.size()) +
                          "D but the trajectory is " + std::to_string(dim) + "D");
  }
  if (c.grid.resolution.size() != c.grid.bounds.size()) {
    throw ValidationError("grid.resolution needs one entry per axis");
  }
  for (const auto& s : c.grid.slices) {
    if (dim != 3) throw ValidationError("grid.slices need a 3D grid");
    if (s.axis < 0 || s.axis > 2) throw ValidationError("grid.slices: axis must be 0, 1 or 2");
    const auto& [lo, hi] = c.grid.bounds[std::size_t(s.axis)];
    if (s.offset < lo.value || s.offset > hi.value) {
      throw ValidationError("grid.slices: offset outside the grid bounds");
    }
  }
  if (c.mode != "rigorous" && c.mode != "paper") {
    throw ValidationError("mode must be 'rigorous' or 'paper'");
  }
  if (c.precision != "double" && c.precision != "quad") {
    throw ValidationError("precision must be 'double' or 'quad'");
  }
  if (!(c.noise_delta >= 0.0)) throw ValidationError("noise.delta must be nonnegative");
  if (c.count < 1) throw ValidationError("band.count must be at least 1");
  if (!(c.k_max.value > 0.0)) throw ValidationError("band.k_max must be positive");
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::require;
  ExperimentConfig c;
  if (!j.is_object()) throw ValidationError("configuration must be a JSON object");
  try {
    c.name = j.value("name", std::string());
    c.trajectory = detail::trajectory_from(require(j, "trajectory", "config"));
    if (j.contains("band")) {
      const auto& b = j["band"];
      if (b.contains("k_max")) c.k_max = detail::scalar_from(b["k_max"], "band.k_max");
      c.count = b.value("count", std::size_t(18));
    }
    c.directions = detail::directions_from(require(j, "directions", "config"));
    c.mode = j.value("mode", std::string("rigorous"));
    c.precision = j.value("precision", std::string("double"));
    if (j.contains("grid")) c.grid = detail::grid_from(j["grid"]);
    if (j.contains("noise")) {
      c.noise_delta = j["noise"].value("delta", 0.0);
      c.noise_seed = j["noise"].value("seed", std::uint64_t(0));
    }
    if (j.contains("threshold")) c.threshold = detail::scalar_from(j["threshold"], "threshold");
    c.eigenvalue_floor = j.value("eigenvalue_floor", 0.0);
    c.cutoff = j.value("cutoff", 0.0);
    c.output_dir = j.value("output_dir", std::string("out"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("configuration: ") + e.what());
  }
  validate(c);
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  if (!c.name.empty()) j["name"] = c.name;
  j["trajectory"] = detail::trajectory_to(c.trajectory);
  j["band"] = {{"k_max", detail::scalar_to(c.k_max)}, {"count", c.count}};
  j["directions"] = detail::directions_to(c.directions);
  j["mode"] = c.mode;
  j["precision"] = c.precision;
  if (!c.grid.bounds.empty()) j["grid"] = detail::grid_to(c.grid);
  j["noise"] = {{"delta", c.noise_delta}, {"seed", c.noise_seed}};
  j["threshold"] = detail::scalar_to(c.threshold);
  if (c.eigenvalue_floor > 0.0) j["eigenvalue_floor"] = c.eigenvalue_floor;
  if (c.cutoff > 0.0) j["cutoff"] = c.cutoff;
  j["output_dir"] = c.output_dir;
  return j;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("configuration parse error at " + detail::line_context(text, e.byte) +
                          ": " + e.what());
  }
  return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read configuration '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& c) {
  return config_to_json(c).dump(2) + "\n";
}

template <class Real>
Vec<Real> vec_from(const std::vector<Scalar>& v) {
  Vec<Real> out;
  for (std::size_t i = 0; i < v.size() && i < 3; ++i) out[i] = v[i].as<Real>();
  return out;
}

template <class Real>
Trajectory<Real> make_trajectory(const TrajectoryConfig& t) {
  const auto iv = TimeInterval<Real>::make(t.t_min.as<Real>(), t.t_max.as<Real>());
  if (t.type == "line") {
    return Trajectory<Real>::line_exact(t.speed.as<Real>(), t.angle.as<Real>(), t.angle.value,
                                        vec_from<Real>(t.offset), iv);
  }
  if (t.type == "line3d") {
    return Trajectory<Real>::line3d(t.speed.as<Real>(), vec_from<Real>(t.axis),
                                    vec_from<Real>(t.offset), iv);
  }
  if (t.type == "arc") {
    return Trajectory<Real>::arc(vec_from<Real>(t.center), t.radius.as<Real>(), iv, t.clockwise);
  }
  std::vector<Real> times;
  std::vector<Vec<Real>> points;
  for (const auto& s : t.times) times.push_back(s.as<Real>());
  for (const auto& p : t.points) points.push_back(vec_from<Real>(p));
  if (t.type == "piecewise_linear") return Trajectory<Real>::piecewise_linear(times, points, t.dim());
  return Trajectory<Real>::sampled(times, points, t.dim());
}

template <class Real>
std::vector<Direction<Real>> make_directions(const DirectionsConfig& d) {
  std::vector<Direction<Real>> out;
  if (d.count > 0) {
    for (std::size_t j = 0; j < d.count; ++j) {
      const Real theta = Real(j) * two_pi<Real>() / Real(d.count);
      out.push_back(Direction<Real>::polar_exact(theta, to_double(theta)));
    }
    return out;
  }
  for (const auto& e : d.list) {
    if (d.spherical) {
      out.push_back(Direction<Real>::spherical_exact(e.theta.as<Real>(), e.phi.as<Real>(),
                                                     e.theta.value, e.phi.value));
    } else {
      out.push_back(Direction<Real>::polar_exact(e.theta.as<Real>(), e.theta.value));
    }
  }
  return out;
}

template <class Real>
FrequencyBand<Real> make_band(const ExperimentConfig& c) {
  return FrequencyBand<Real>::make(c.k_max.as<Real>(), c.count);
}

inline SearchGrid make_grid(const GridConfig& g) {
  std::vector<std::pair<double, double>> bounds;
  for (const auto& [lo, hi] : g.bounds) bounds.emplace_back(lo.value, hi.value);
  return make_grid(bounds, g.resolution);
}

template <class Real>
PicardOptions<Real> make_picard_options(const ExperimentConfig& c) {
  PicardOptions<Real> opts;
  if (c.eigenvalue_floor > 0.0) opts.floor_rel = Real(c.eigenvalue_floor);
  opts.cutoff_rel = Real(c.cutoff);
  return opts;
}

}  // namespace msimg
