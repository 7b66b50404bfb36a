#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msimg/config.hpp"
#include "msimg/forward.hpp"
#include "msimg/imaging.hpp"
#include "msimg/indicator.hpp"
#include "msimg/io.hpp"
#include "msimg/observability.hpp"
#include "msimg/spectral.hpp"

namespace msimg {

enum ExitCode : int {
  kExitOk = 0,
  kExitEmptyResult = 1,
  kExitValidation = 2,
  kExitNumerical = 3,
  kExitIo = 4,
};

struct RunOptions {
  unsigned threads = 1;
  std::string field_path;
  std::ostream* out = &std::cout;
  std::ostream* log = &std::cerr;
};

namespace detail {

inline std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir + "'");
  }
}

inline std::string indexed(const std::string& stem, std::size_t j, const std::string& ext) {
  return stem + "_" + std::to_string(j + 1) + ext;
}

inline void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

template <class Real>
nlohmann::json direction_json(const Direction<Real>& d, std::size_t j) {
  nlohmann::json e{{"index", j + 1}, {"theta", d.theta()}};
  if (d.dim() == 3) e["phi"] = d.phi();
  return e;
}

/// Verdict of the closed-form observability rules, when one applies.
template <class Real>
std::optional<bool> closed_form_verdict(const TrajectoryConfig& t, const Direction<Real>& d) {
  if (t.type == "line") {
    const double c = t.speed.value;
    if (c == 0.0) return true;
    return observable_set_line(c, t.angle.value).contains(d.theta());
  }
  if (t.type == "arc" && t.radius.value == 1.0 && !t.clockwise &&
      t.t_max.value - t.t_min.value < two_pi<double>()) {
    return observable_set_arc(t.t_min.value, t.t_max.value).contains(d.theta());
  }
  if (t.type == "line3d") {
    const Vec<double> u = vec_from<double>(t.axis);
    const double s = t.speed.value * dot(Direction<double>::spherical(d.theta(), d.phi()).unit(),
                                         (1.0 / norm(u)) * u);
    return s >= 0.0 || s <= -2.0;
  }
  return std::nullopt;
}

}  // namespace detail

/// Writes farfield_<j>.csv per direction; noisy runs also keep the clean
/// data in farfield_<j>_clean.csv.
template <class Real>
int cmd_synth(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  detail::ensure_dir(cfg.output_dir);
  const auto traj = make_trajectory<Real>(cfg.trajectory);
  const auto band = make_band<Real>(cfg);
  const auto dirs = make_directions<Real>(cfg.directions);
  const NoiseSpec noise{cfg.noise_delta, cfg.noise_seed};
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const auto clean = sample_band(traj, dirs[j], band);
    if (noise.delta > 0.0) {
      write_farfield_csv(detail::join(cfg.output_dir, detail::indexed("farfield", j, "_clean.csv")),
                         clean);
      write_farfield_csv(detail::join(cfg.output_dir, detail::indexed("farfield", j, ".csv")),
                         add_noise(clean, noise, j));
    } else {
      write_farfield_csv(detail::join(cfg.output_dir, detail::indexed("farfield", j, ".csv")),
                         clean);
    }
  }
  *opts.out << "wrote " << dirs.size() << " far-field file(s) to " << cfg.output_dir << "\n";
  return kExitOk;
}

/// Per-direction observability table, printed and written to classify.csv.
template <class Real>
int cmd_classify(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  detail::ensure_dir(cfg.output_dir);
  const auto traj = make_trajectory<Real>(cfg.trajectory);
  const auto dirs = make_directions<Real>(cfg.directions);
  std::ostringstream csv;
  csv << std::setprecision(17);
  csv << "index,theta,phi,xi_min,xi_max,width,T,class,closed_form,agree\n";
  std::ostream& out = *opts.out;
  out << std::left << std::setw(6) << "j" << std::setw(12) << "theta" << std::setw(12) << "phi"
      << std::setw(12) << "xi_min" << std::setw(12) << "xi_max" << std::setw(12) << "width"
      << std::setw(8) << "T" << std::setw(16) << "class" << "closed form\n";
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const auto r = xi_extrema(traj, dirs[j]);
    const auto verdict = detail::closed_form_verdict(cfg.trajectory, dirs[j]);
    const bool observable = r.cls == Observability::Observable;
    const std::string closed_form =
        verdict ? (*verdict ? to_string(Observability::Observable)
                            : to_string(Observability::NonObservable))
                : "";
    const std::string agree = verdict ? (*verdict == observable ? "yes" : "no") : "";
    csv << j + 1 << ',' << dirs[j].theta() << ',' << dirs[j].phi() << ',' << to_double(r.xi_min)
        << ',' << to_double(r.xi_max) << ',' << to_double(r.width) << ','
        << to_double(r.duration) << ',' << to_string(r.cls) << ',' << closed_form << ',' << agree
        << '\n';
    std::ostringstream row;
    row << std::fixed << std::setprecision(6) << std::left << std::setw(6) << j + 1
        << std::setw(12) << dirs[j].theta() << std::setw(12) << dirs[j].phi() << std::setw(12)
        << to_double(r.xi_min) << std::setw(12) << to_double(r.xi_max) << std::setw(12)
        << to_double(r.width) << std::setw(8) << std::setprecision(3) << to_double(r.duration)
        << std::setw(16) << to_string(r.cls) << (verdict ? closed_form + " (" + agree + ")" : "-");
    out << row.str() << '\n';
  }
  detail::write_text(detail::join(cfg.output_dir, "classify.csv"), csv.str());
  return kExitOk;
}

namespace detail {

/// One 2D layout the indicator is evaluated on: the whole 2D grid or one
/// slice plane of the 3D grid.
struct Layout {
  std::string suffix;
  std::optional<SliceSpec> slice;
};

template <class Real, class F>
ScalarField evaluate_on(const F& f, const SearchGrid& grid, const Layout& layout, unsigned threads) {
  if (layout.slice) return slice_field_3d(f, grid, *layout.slice, threads);
  return evaluate_field(f, grid, threads);
}

}  // namespace detail

/// Reads farfield_<j>.csv, evaluates single-direction fields and the
/// filtered multi-direction field, and writes CSV and PGM outputs plus
/// image_summary.json. Returns kExitEmptyResult if every direction is
/// dropped by the filter.
template <class Real>
int cmd_image(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  if (cfg.grid.bounds.empty()) throw ValidationError("image needs a grid");
  detail::ensure_dir(cfg.output_dir);
  const auto traj = make_trajectory<Real>(cfg.trajectory);
  const auto band = make_band<Real>(cfg);
  const auto dirs = make_directions<Real>(cfg.directions);
  const auto iv = traj.interval();
  const SpectralMode mode = parse_mode(cfg.mode);
  const auto picard = make_picard_options<Real>(cfg);
  const SearchGrid grid = make_grid(cfg.grid);

  std::vector<Spectrum<Real>> spectra;
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const std::string path = detail::join(cfg.output_dir, detail::indexed("farfield", j, ".csv"));
    if (!std::filesystem::exists(path)) {
      throw ValidationError("missing far-field data '" + path + "' (run synth first)");
    }
    const auto samples = read_farfield_csv(path, dirs[j], band);
    spectra.push_back(f_sharp_spectrum(build_operator(samples), mode));
    write_spectrum_csv(detail::join(cfg.output_dir, detail::indexed("spectrum", j, ".csv")),
                       detail::join(cfg.output_dir, detail::indexed("spectrum", j, "_vectors.csv")),
                       spectra.back());
  }

  std::vector<detail::Layout> layouts;
  if (grid.dim == 3 && !cfg.grid.slices.empty()) {
    for (std::size_t s = 0; s < cfg.grid.slices.size(); ++s) {
      layouts.push_back({"_slice" + std::to_string(s + 1), cfg.grid.slices[s]});
    }
  } else {
    layouts.push_back({"", std::nullopt});
  }

  // sums[layout][direction]
  std::vector<std::vector<ScalarField>> sums(layouts.size());
  std::vector<std::vector<double>> pooled(dirs.size());
  for (std::size_t l = 0; l < layouts.size(); ++l) {
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      *opts.log << "evaluating direction " << j + 1 << "/" << dirs.size()
                << (layouts[l].suffix.empty() ? "" : " on" + layouts[l].suffix) << "\n";
      auto f = [&](const Vec<double>& y) {
        const auto phi = test_vector(dirs[j], y.template cast<Real>(), iv, band);
        return to_double(picard_sum(spectra[j], phi, picard).sum);
      };
      ScalarField s = detail::evaluate_on<Real>(f, grid, layouts[l], opts.threads);
      if (!s.meta.warning.empty()) *opts.log << "warning: " << s.meta.warning << "\n";
      pooled[j].insert(pooled[j].end(), s.values.begin(), s.values.end());
      sums[l].push_back(std::move(s));
    }
  }

  const double threshold = cfg.threshold.value;
  const FilterResult filter = direction_filter(pooled, threshold);

  auto emit = [&](const ScalarField& field, const std::string& stem) {
    write_field_csv(detail::join(cfg.output_dir, stem + ".csv"), field);
    if (field.grid.dim == 2) write_pgm(detail::join(cfg.output_dir, stem + ".pgm"), field);
  };
  auto to_indicator = [&](ScalarField s) {
    for (auto& v : s.values) v = v > 0.0 ? 1.0 / v : std::numeric_limits<double>::infinity();
    s.meta.mode = to_string(mode);
    s.meta.k_max = to_double(band.k_max);
    s.meta.count = band.count;
    return s;
  };

  for (std::size_t l = 0; l < layouts.size(); ++l) {
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      ScalarField w = to_indicator(sums[l][j]);
      w.meta.thetas = {dirs[j].theta()};
      emit(w, detail::indexed("field", j, layouts[l].suffix));
    }
    if (!filter.empty()) {
      ScalarField total = sums[l].front();
      std::fill(total.values.begin(), total.values.end(), 0.0);
      for (std::size_t j : filter.kept) {
        for (std::size_t i = 0; i < total.values.size(); ++i) total.values[i] += sums[l][j].values[i];
      }
      ScalarField w = to_indicator(std::move(total));
      for (std::size_t j : filter.kept) w.meta.thetas.push_back(dirs[j].theta());
      emit(w, "field_multi" + layouts[l].suffix);
    }
  }

  nlohmann::json summary;
  summary["mode"] = to_string(mode);
  summary["precision"] = cfg.precision;
  summary["threshold"] = threshold;
  summary["kept"] = filter.kept.size();
  summary["dropped"] = filter.dropped.size();
  summary["directions"] = nlohmann::json::array();
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    auto e = detail::direction_json(dirs[j], j);
    e["min_sum"] = filter.minima[j];
    e["kept"] = std::find(filter.kept.begin(), filter.kept.end(), j) != filter.kept.end();
    summary["directions"].push_back(e);
  }
  detail::write_text(detail::join(cfg.output_dir, "image_summary.json"), summary.dump(2) + "\n");

  *opts.out << "kept " << filter.kept.size() << " of " << dirs.size() << " direction(s), dropped "
            << filter.dropped.size() << "\n";
  if (filter.empty()) {
    *opts.log << "warning: every direction exceeded the threshold; no multi-direction field\n";
    return kExitEmptyResult;
  }
  return kExitOk;
}

namespace detail {

inline void add_metrics(nlohmann::json& e, const ScalarField& field, const Mask& mask,
                        double margin) {
  const std::size_t inside = std::size_t(std::count(mask.begin(), mask.end(), 1));
  if (inside == 0 || inside == mask.size()) {
    e["note"] = inside == 0 ? "empty mask" : "mask covers the grid";
    return;
  }
  try {
    const auto m = contrast_metric(field, mask, margin);
    e["inside_median"] = m.inside_median;
    e["outside_median"] = m.outside_median;
    e["ratio"] = m.ratio;
  } catch (const DomainError& err) {
    e["note"] = err.what();
  }
  e["argmax_in_mask"] = bool(dilate(field.grid, mask, 1)[field.argmax()]);
}

}  // namespace detail

/// Compares a field CSV with the analytic strips of every direction and
/// with the Theta domain; writes metrics.json.
template <class Real>
int cmd_compare(const ExperimentConfig& cfg, const RunOptions& opts = {}, double margin = 0.25) {
  if (cfg.grid.bounds.size() != 2) throw ValidationError("compare needs a 2D grid");
  const auto traj = make_trajectory<Real>(cfg.trajectory);
  const auto dirs = make_directions<Real>(cfg.directions);
  const SearchGrid grid = make_grid(cfg.grid);
  std::string path = opts.field_path;
  if (path.empty()) path = detail::join(cfg.output_dir, "field_multi.csv");
  const ScalarField field = read_field_csv(path, grid);

  nlohmann::json report;
  report["field"] = path;
  report["margin"] = margin;
  report["directions"] = nlohmann::json::array();
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    auto e = detail::direction_json(dirs[j], j);
    const auto s = strip(traj, dirs[j]);
    e["empty"] = s.empty;
    if (!s.empty) {
      e["strip_lo"] = to_double(s.lo);
      e["strip_hi"] = to_double(s.hi);
      detail::add_metrics(e, field, mask_strip(grid, s), margin);
    }
    report["directions"].push_back(e);
  }
  const auto theta = theta_domain(traj, dirs);
  nlohmann::json t;
  t["empty"] = theta.empty();
  t["strips"] = theta.strips.size();
  if (!theta.empty()) detail::add_metrics(t, field, mask_theta(grid, theta), margin);
  report["theta"] = t;

  detail::ensure_dir(cfg.output_dir);
  detail::write_text(detail::join(cfg.output_dir, "metrics.json"), report.dump(2) + "\n");
  *opts.out << report.dump(2) << "\n";
  return kExitOk;
}

}  // namespace msimg
