// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "msimg/commands.hpp"
#include "msimg/msimg.hpp"

namespace {

namespace fs = std::filesystem;
using namespace msimg;
using std::numbers::pi;
using V = Vec<double>;
using Dir = Direction<double>;
using Traj = Trajectory<double>;
using I = TimeInterval<double>;
using C = std::complex<double>;

// tolerances
constexpr double kAnchorTol = 1e-12;
constexpr int kSweepAngles = 3600;
constexpr double kSweepExclusion = 1e-6;
constexpr double kForwardTol = 1e-8;
constexpr double kConjugateTol = 1e-10;
constexpr double kMinEigenRel = -1e-12;
constexpr double kContrastMin = 10.0;
constexpr double kMargin = 0.25;
constexpr double kNonObservableMax = 1e-3;
constexpr double kSliceRatioMax = 1e-2;
constexpr double kWidthCells = 2.0;
constexpr std::size_t kDilationCells = 2;
constexpr double kNoiseDistance = 0.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

fs::path g_root;

std::string config_path(const std::string& name) {
  return std::string(MSIMG_CONFIG_DIR) + "/" + name + ".json";
}

std::ostringstream g_sink;

RunOptions quiet() {
  RunOptions o;
  o.threads = default_thread_count();
  o.out = &g_sink;
  o.log = &g_sink;
  return o;
}

/// synth + image for a shipped config into a fresh directory.
ExperimentConfig pipeline(const std::string& name, const std::string& tag,
                          const std::function<void(ExperimentConfig&)>& tweak = {}) {
  ExperimentConfig cfg = load_config(config_path(name));
  if (tweak) tweak(cfg);
  cfg.output_dir = (g_root / tag).string();
  validate(cfg);
  if (cfg.precision == "quad") {
#if defined(MSIMG_HAVE_QUAD)
    cmd_synth<quad>(cfg, quiet());
    cmd_image<quad>(cfg, quiet());
#else
    throw UnsupportedError("quad precision not available in this build");
#endif
  } else {
    cmd_synth<double>(cfg, quiet());
    cmd_image<double>(cfg, quiet());
  }
  return cfg;
}

ScalarField read_field(const ExperimentConfig& cfg, const std::string& file) {
  return read_field_csv((fs::path(cfg.output_dir) / file).string(), make_grid(cfg.grid));
}

/// Last column of a field CSV.
std::vector<double> read_values(const fs::path& path) {
  std::ifstream in(path);
  std::vector<double> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(std::stod(line.substr(line.rfind(',') + 1)));
  }
  return out;
}

double wrap(double t) {
  t = std::fmod(t, 2 * pi);
  return t < 0 ? t + 2 * pi : t;
}

double angle_distance(double a, double b) {
  const double d = std::abs(wrap(a) - wrap(b));
  return std::min(d, 2 * pi - d);
}

// 1. strip and hull of the clockwise arc of radius 2 sqrt 2
Outcome strip_anchor() {
  const auto arc = Traj::arc(V(0, 0), 2 * std::sqrt(2.0), I::make(pi / 4, 3 * pi / 4), true);
  const Dir d = Dir::polar(0.0);
  const auto s = strip(arc, d);
  const auto h = projection_hull(arc, d);
  const double err = std::max({std::abs(s.lo - (pi / 2 - 2)), std::abs(s.hi - (2 - pi / 2)),
                               std::abs(h.lo + 2), std::abs(h.hi - 2)});
  return {!s.empty && err <= kAnchorTol,
          "strip [" + fmt(s.lo) + ", " + fmt(s.hi) + "], hull [" + fmt(h.lo) + ", " + fmt(h.hi) +
              "], max error " + fmt(err) + " (tol " + fmt(kAnchorTol) + ")"};
}

// 2. classification sweeps against closed-form rules
Outcome observability_sweeps() {
  std::size_t checked = 0, mismatches = 0;
  std::string first;
  auto check = [&](const std::string& label, const Traj& tr, const Dir& d, bool expected) {
    ++checked;
    const bool got = classify(tr, d) == Observability::Observable;
    if (got != expected) {
      ++mismatches;
      if (first.empty()) first = label + " theta=" + fmt(d.theta());
    }
  };
  std::vector<double> thetas;
  for (int k = 0; k < kSweepAngles; ++k) thetas.push_back(2 * pi * k / kSweepAngles);

  for (auto [c, alpha] : {std::pair{1.0, pi / 2}, std::pair{4.0, pi / 4}}) {
    const auto tr = Traj::line(c, alpha, V(0, 0), I::make(1, 3));
    // h' = 1 + c cos(theta - alpha) is constant; width = T |h'|
    std::vector<double> ends{alpha + pi / 2, alpha - pi / 2};
    if (c > 2) ends.push_back(alpha + std::acos(-2 / c)), ends.push_back(alpha - std::acos(-2 / c));
    for (double t : thetas) {
      if (std::any_of(ends.begin(), ends.end(),
                      [&](double e) { return angle_distance(t, e) < kSweepExclusion; }))
        continue;
      const double g = c * std::cos(t - alpha);
      check("line c=" + fmt(c), tr, Dir::polar(t), g >= 0 || g <= -2);
    }
  }
  for (auto [a, b] : {std::pair{0.0, pi}, std::pair{pi, 2 * pi}}) {
    const auto tr = Traj::arc(V(0, 0), 1.0, I::make(a, b));
    const double mid = 0.5 * (a + b);
    for (double t : thetas) {
      if (angle_distance(t, mid) < kSweepExclusion || angle_distance(t, mid + pi) < kSweepExclusion)
        continue;
      check("arc", tr, Dir::polar(t), wrap(t - mid) <= pi);
    }
  }
  {
    const auto tr = Traj::piecewise_linear({0.0, 1.0, 2.0}, {V(3, 3), V(2, 2), V(3, 1)}, 2);
    // theta = 0 and [pi, 2pi) observable, (0, pi) not
    check("polyline", tr, Dir::polar(0.0), true);
    check("polyline", tr, Dir::polar(pi), true);
    for (double t : thetas) {
      if (angle_distance(t, 0.0) < kSweepExclusion || angle_distance(t, pi) < kSweepExclusion)
        continue;
      check("polyline", tr, Dir::polar(t), t > pi);
    }
  }
  {
    const auto tr = Traj::line3d(1.0, V(0, 0, 1), V(0, 0, 0), I::make(0, 1));
    for (double phi : {0.0, pi / 2, 5 * pi / 4}) {
      for (int k = 0; k <= kSweepAngles / 2; ++k) {
        const double t = pi * k / (kSweepAngles / 2);
        if (std::abs(t - pi / 2) < kSweepExclusion) continue;
        check("3D line", tr, Dir::spherical(t, phi), std::cos(t) >= 0);
      }
    }
  }
  return {mismatches == 0, std::to_string(checked) + " directions, " + std::to_string(mismatches) +
                               " disagreements" + (first.empty() ? "" : " (first: " + first + ")") +
                               " (tol 0)"};
}

// 3. far-field quadrature against the closed form, conjugate symmetry
Outcome forward_oracle() {
  std::mt19937 gen(20240601);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0, worst_conj = 0;
  for (int i = 0; i < 100; ++i) {
    const double c = 4 * u(gen), alpha = 2 * pi * u(gen);
    const V offset(2 * u(gen) - 1, 2 * u(gen) - 1);
    const auto iv = I::make(2 * u(gen), 2.5 + 2 * u(gen));
    const Dir d = Dir::polar(2 * pi * u(gen));
    const double k = 3 * pi * u(gen);
    const auto tr = Traj::line(c, alpha, offset, iv);
    worst = std::max(worst, std::abs(far_field_value(tr, d, k) -
                                     far_field_line_closed_form(c, alpha, offset, d, iv, k)));
    const auto arc = Traj::arc(offset, 0.5 + u(gen), iv, u(gen) < 0.5);
    worst_conj = std::max(worst_conj, std::abs(far_field_value(arc, d, -k) -
                                               std::conj(far_field_value(arc, d, k))));
  }
  return {worst <= kForwardTol && worst_conj <= kConjugateTol,
          "max |quadrature - closed form| " + fmt(worst) + " (tol " + fmt(kForwardTol) +
              "), max conjugate defect " + fmt(worst_conj) + " (tol " + fmt(kConjugateTol) + ")"};
}

// 4. Toeplitz structure and positivity of F#
Outcome operator_structure() {
  const auto band = FrequencyBand<double>::make(3 * pi, 18);
  std::vector<std::pair<Traj, Dir>> cases;
  const auto seg = Traj::line(1.0, pi / 2, V(0, 0), I::make(1, 3));
  const auto fast = Traj::line(4.0, pi / 4, V(0, 0), I::make(1, 2));
  const auto arc = Traj::arc(V(0, 0), 1.0, I::make(0, pi));
  for (double t : {0.0, pi / 2, 5 * pi / 4}) cases.emplace_back(seg, Dir::polar(t));
  for (double t : {pi / 4, 9 * pi / 8, 20 * pi / 24}) cases.emplace_back(fast, Dir::polar(t));
  for (double t : {0.0, pi}) cases.emplace_back(arc, Dir::polar(t));
  cases.emplace_back(Traj::line3d(1.0, V(0, 0, 1), V(0, 0, 0), I::make(0, 1)),
                     Dir::spherical(6 * pi / 8, 5 * pi / 4));
  bool toeplitz = true;
  double worst_rel = 0, worst_defect = 0;
  for (const auto& [tr, d] : cases) {
    const auto op = build_operator(sample_band(tr, d, band));
    const std::size_t n = op.matrix.rows();
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 1; j < n; ++j) toeplitz &= op.matrix(i, j) == op.matrix(i - 1, j - 1);
    const auto fs_mat = f_sharp(op.matrix);
    worst_defect = std::max(worst_defect, hermitian_defect(fs_mat));
    Eigen::MatrixXcd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e(i, j) = fs_mat(i, j);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> oracle(e);
    const auto s = f_sharp_spectrum(op);
    const double top = s.eigenvalues.front();
    const double low = std::min(s.eigenvalues.back(), oracle.eigenvalues()(0));
    worst_rel = std::min(worst_rel, low / top);
  }
  return {toeplitz && worst_defect == 0.0 && worst_rel >= kMinEigenRel,
          std::to_string(cases.size()) + " operators, Toeplitz " + (toeplitz ? "exact" : "broken") +
              ", Hermitian defect " + fmt(worst_defect) + ", min lambda/lambda_max " +
              fmt(worst_rel) + " (tol >= " + fmt(kMinEigenRel) + ")"};
}

struct ModeMeasure {
  double ratio = 0;
  double nonobs_max = 0;
  ScalarField obs;
};

ModeMeasure measure_mode(const std::string& mode) {
  auto set_mode = [&](ExperimentConfig& c) { c.mode = mode; };
  const auto obs = pipeline("line_observable", "obs_" + mode, set_mode);
  const auto non = pipeline("line_nonobservable", "non_" + mode, set_mode);
  ModeMeasure m;
  m.obs = read_field(obs, "field_1.csv");
  const auto traj = make_trajectory<double>(obs.trajectory);
  const auto dir = make_directions<double>(obs.directions).front();
  m.ratio = contrast_metric(m.obs, mask_strip(m.obs.grid, strip(traj, dir)), kMargin).ratio;
  m.nonobs_max = read_field(non, "field_1.csv").max();
  return m;
}

ModeMeasure g_rigorous;

// 5. contrast inside/outside the strip
Outcome dichotomy() {
  g_rigorous = measure_mode("rigorous");
  return {g_rigorous.ratio >= kContrastMin,
          "median inside/outside " + fmt(g_rigorous.ratio) + " (tol >= " + fmt(kContrastMin) + ")"};
}

// 6. suppression for non-observable directions, 2D and 3D slices
Outcome suppression() {
  const auto cfg = pipeline("line3d_slices", "line3d");
  const auto traj = make_trajectory<double>(cfg.trajectory);
  const auto dirs = make_directions<double>(cfg.directions);
  double worst = 0;
  for (std::size_t s = 1; s <= cfg.grid.slices.size(); ++s) {
    double obs_max = 0, non_max = 0;
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      const auto v = read_values(fs::path(cfg.output_dir) /
                                 ("field_" + std::to_string(j + 1) + "_slice" + std::to_string(s) + ".csv"));
      const double top = *std::max_element(v.begin(), v.end());
      if (classify(traj, dirs[j]) == Observability::Observable) {
        obs_max = std::max(obs_max, top);
      } else {
        non_max = std::max(non_max, top);
      }
    }
    worst = std::max(worst, non_max / obs_max);
  }
  const bool pass = g_rigorous.nonobs_max <= kNonObservableMax && worst <= kSliceRatioMax;
  return {pass, "2D max W " + fmt(g_rigorous.nonobs_max) + " (tol <= " + fmt(kNonObservableMax) +
                    "), 3D slice max ratio " + fmt(worst) + " (tol <= " + fmt(kSliceRatioMax) + ")"};
}

double half_max_width(const ExperimentConfig& cfg, const Dir& d) {
  const auto f = read_field(cfg, "field_1.csv");
  const auto [lo, hi] = half_max_extent(f, d.unit());
  return hi - lo;
}

// 7. narrowing for an observable direction with decreasing h
Outcome narrowing() {
  const auto quad_cfg = pipeline("fast_line_narrow", "narrow_quad");
  const auto dbl_cfg = pipeline("fast_line_narrow", "narrow_double",
                                [](ExperimentConfig& c) { c.precision = "double"; });
  const auto traj = make_trajectory<double>(quad_cfg.trajectory);
  const Dir d = make_directions<double>(quad_cfg.directions).front();
  const auto s = strip(traj, d);
  const auto hull = projection_hull(traj, d);
  const double cell = make_grid(quad_cfg.grid).spacing(0);
  const double w = half_max_width(quad_cfg, d);
  const double w_double = half_max_width(dbl_cfg, d);
  const double strip_w = s.hi - s.lo, hull_w = hull.hi - hull.lo;
  const bool pass = w < hull_w && std::abs(w - strip_w) <= kWidthCells * cell;
  return {pass, "half-max width " + fmt(w) + " (quad; double gives " + fmt(w_double) +
                    "), strip " + fmt(strip_w) + ", hull " + fmt(hull_w) + " (tol |w - strip| <= " +
                    fmt(kWidthCells * cell) + ", w < hull)"};
}

// 8. two-direction field against the Theta domain
struct ThetaMeasure {
  std::size_t outside = 0;
  std::size_t missing = 0;
  double worst_outside = 0;
  double far = 0;
};

ThetaMeasure measure_theta(const ExperimentConfig& cfg) {
  const auto f = read_field(cfg, "field_multi.csv");
  const auto traj = make_trajectory<double>(cfg.trajectory);
  const auto theta = mask_theta(f.grid, theta_domain(traj, make_directions<double>(cfg.directions)));
  const auto allowed = dilate(f.grid, theta, kDilationCells);
  const auto half = half_max_mask(f);
  const double hm = 0.5 * f.max();
  ThetaMeasure m;
  for (std::size_t i = 0; i < half.size(); ++i) {
    if (half[i] && !allowed[i]) {
      ++m.outside;
      m.worst_outside = std::max(m.worst_outside, f.values[i] / f.max());
      const V p = f.grid.point(i);
      m.far = std::max(m.far, std::max({std::abs(p[0]), 1.0 - p[1], p[1] - 3.0, 0.0}));
    }
    if (theta[i] && !(f.values[i] >= hm)) ++m.missing;
  }
  return m;
}

Outcome theta_domain_check() {
  const auto q = measure_theta(pipeline("multi_two", "multi_two_quad",
                                        [](ExperimentConfig& c) { c.precision = "quad"; }));
  const auto d = measure_theta(pipeline("multi_two", "multi_two"));
  return {q.outside == 0 && q.missing == 0,
          std::to_string(q.outside) + " half-max points outside the 2-cell dilation (quad; double gives " +
              std::to_string(d.outside) + "), largest W/max there " + fmt(q.worst_outside) +
              ", farthest " + fmt(q.far) + " from the segment, " + std::to_string(q.missing) +
              " Theta points below half-max (tol 0 and 0)"};
}

// 9. direction filter in a mixed run
Outcome filter_check() {
  const auto cfg = pipeline("mixed_filter", "mixed");
  std::ifstream in(fs::path(cfg.output_dir) / "image_summary.json");
  const auto j = nlohmann::json::parse(in);
  const bool keep_first = j["directions"][0]["kept"].get<bool>();
  const bool keep_second = j["directions"][1]["kept"].get<bool>();
  return {keep_first && !keep_second,
          "min sums " + fmt(j["directions"][0]["min_sum"].get<double>()) + " and " +
              fmt(j["directions"][1]["min_sum"].get<double>()) + " against threshold " +
              fmt(j["threshold"].get<double>()) + "; kept " + std::to_string(j["kept"].get<int>())};
}

// 10. both spectral modes satisfy 5 and 6
Outcome modes() {
  const auto paper = measure_mode("paper");
  const auto& a = g_rigorous.obs.values;
  const auto& b = paper.obs.values;
  std::vector<double> rel(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) rel[i] = std::abs(a[i] - b[i]) / a[i];
  std::sort(rel.begin(), rel.end());
  const bool pass = g_rigorous.ratio >= kContrastMin && g_rigorous.nonobs_max <= kNonObservableMax &&
                    paper.ratio >= kContrastMin && paper.nonobs_max <= kNonObservableMax;
  return {pass, "rigorous ratio " + fmt(g_rigorous.ratio) + " / max " + fmt(g_rigorous.nonobs_max) +
                    ", paper ratio " + fmt(paper.ratio) + " / max " + fmt(paper.nonobs_max) +
                    "; |W diff|/W median " + fmt(rel[rel.size() / 2]) + ", max " +
                    fmt(rel.back()) + " (reported only)"};
}

// 11. noisy four-direction run
Outcome noise_smoke() {
  const auto cfg = pipeline("noise_four", "noise_a");
  const auto f = read_field(cfg, "field_multi.csv");
  const bool finite = std::all_of(f.values.begin(), f.values.end(),
                                  [](double v) { return std::isfinite(v); });
  const V p = f.grid.point(f.argmax());
  const double dy = std::max({1.0 - p[1], p[1] - 3.0, 0.0});
  const double dist = std::hypot(p[0], dy);
  return {finite && dist <= kNoiseDistance,
          std::string(finite ? "all finite" : "non-finite values") + ", argmax (" + fmt(p[0]) +
              ", " + fmt(p[1]) + ") at distance " + fmt(dist) + " (tol <= " + fmt(kNoiseDistance) + ")"};
}

// 12. byte-identical reruns
Outcome determinism() {
  const auto a = fs::path(g_root / "noise_a");
  const auto b = fs::path(pipeline("noise_four", "noise_b").output_dir);
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    std::ifstream fa(e.path(), std::ios::binary), fb(b / e.path().filename(), std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    if (!fb || sa.str() != sb.str()) ++differ;
  }
  return {files > 0 && differ == 0,
          std::to_string(files) + " files compared, " + std::to_string(differ) + " differ (tol 0)"};
}

}  // namespace

int main() {
  g_root = fs::temp_directory_path() / ("msimg_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(g_root);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"strip anchor", strip_anchor},
      {"observability sweeps", observability_sweeps},
      {"forward oracle", forward_oracle},
      {"operator structure", operator_structure},
      {"dichotomy contrast", dichotomy},
      {"non-observable suppression", suppression},
      {"narrowing for decreasing h", narrowing},
      {"Theta domain", theta_domain_check},
      {"direction filter", filter_check},
      {"mode comparison", modes},
      {"noise smoke test", noise_smoke},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << i + 1 << " " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  fs::remove_all(g_root);
  std::cout << criteria.size() - std::size_t(failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
