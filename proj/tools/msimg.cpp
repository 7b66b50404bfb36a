#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "msimg/commands.hpp"

namespace {

template <class Real>
int dispatch(const std::string& command, const msimg::ExperimentConfig& cfg,
             const msimg::RunOptions& opts) {
  if (command == "synth") return msimg::cmd_synth<Real>(cfg, opts);
  if (command == "classify") return msimg::cmd_classify<Real>(cfg, opts);
  if (command == "image") return msimg::cmd_image<Real>(cfg, opts);
  return msimg::cmd_compare<Real>(cfg, opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving point source imaging from multi-frequency far-field data"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode, precision, field_path;
  unsigned threads = 1;
  for (const char* name : {"synth", "classify", "image", "compare"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--mode", mode, "Spectral mode")->check(CLI::IsMember({"rigorous", "paper"}));
    sub->add_option("--threads", threads, "Worker threads for grid evaluation (0 = all cores)");
    sub->add_option("--precision", precision, "Working precision")
        ->check(CLI::IsMember({"double", "quad"}));
    if (std::string(name) == "compare") {
      sub->add_option("--field", field_path, "Field CSV (default <out>/field_multi.csv)");
    }
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    msimg::ExperimentConfig cfg = msimg::load_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!mode.empty()) cfg.mode = mode;
    if (!precision.empty()) cfg.precision = precision;
    if (const char* seed = std::getenv("MSIMG_SEED")) {
      try {
        cfg.noise_seed = std::stoull(seed);
      } catch (const std::exception&) {
        throw msimg::ValidationError(std::string("MSIMG_SEED is not an integer: ") + seed);
      }
    }
    msimg::validate(cfg);
    msimg::RunOptions opts;
    opts.threads = threads;
    opts.field_path = field_path;
    if (cfg.precision == "quad") {
#if defined(MSIMG_HAVE_QUAD)
      return dispatch<msimg::quad>(command, cfg, opts);
#else
      throw msimg::ValidationError("this build has no quad precision support");
#endif
    }
    return dispatch<double>(command, cfg, opts);
  } catch (const msimg::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return msimg::kExitValidation;
  } catch (const msimg::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return msimg::kExitValidation;
  } catch (const msimg::UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return msimg::kExitValidation;
  } catch (const msimg::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return msimg::kExitNumerical;
  } catch (const msimg::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return msimg::kExitIo;
  }
}
