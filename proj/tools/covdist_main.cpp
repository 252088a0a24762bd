// covdist: deterministic equivalents of plug-in distances between sample
// covariance matrices, their Monte Carlo counterparts, and the numerical
// validation suites.  Exit codes: 0 ok, 1 usage/config/runtime error,
// 2 validation failure.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "covdist/error.hpp"
#include "covdist/experiment.hpp"

namespace {

int write_output(const std::string& csv, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << csv;
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "covdist error: ConfigError: cannot open output file '" << out_path << "'\n";
    return 1;
  }
  out << csv;
  return out.good() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "covdist: deterministic equivalents and Monte Carlo estimates of plug-in "
      "distances between sample covariance matrices"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  int trials_override = 0;
  std::uint64_t seed_override = 0;
  std::string param = "rho2";
  double from = 0.0, to = 0.95;
  int steps = 0;
  bool fast = false;

  CLI::App* det = app.add_subcommand(
      "det-equiv", "Closed-form deterministic equivalents for every (M, ratio, metric)");
  det->add_option("--config", config_path, "JSON experiment config")->required();
  det->add_option("--out", out_path, "Output CSV path (default: stdout)");

  CLI::App* conv = app.add_subcommand(
      "convergence", "Monte Carlo mean/std next to the deterministic equivalent and their gap");
  conv->add_option("--config", config_path, "JSON experiment config")->required();
  conv->add_option("--trials", trials_override, "Override the config's trial count");
  conv->add_option("--seed", seed_override, "Override the config's base seed");
  conv->add_option("--out", out_path, "Output CSV path (default: stdout)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Deterministic equivalents over a grid of model_b Toeplitz correlations");
  sweep->add_option("--config", config_path, "JSON experiment config")->required();
  sweep->add_option("--param", param, "Swept parameter (only 'rho2' is supported)");
  sweep->add_option("--from", from, "Grid start (inside [0, 1))")->required();
  sweep->add_option("--to", to, "Grid end (inside [0, 1))")->required();
  sweep->add_option("--steps", steps, "Number of grid points (>= 2)")->required();
  sweep->add_option("--out", out_path, "Output CSV path (default: stdout)");

  CLI::App* validate = app.add_subcommand(
      "validate", "Run the numerical self-checks (root identities, resolvent identity, "
                  "closed-form vs quadrature agreement)");
  validate->add_flag("--fast", fast, "Smaller randomized suites for quick checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (det->parsed()) {
      return write_output(covdist::cli::run_det_equiv(covdist::cli::load_config(config_path)),
                          out_path);
    }
    if (conv->parsed()) {
      covdist::cli::ExperimentConfig config = covdist::cli::load_config(config_path);
      if (conv->count("--trials") > 0) {
        if (trials_override < 2) {
          throw covdist::Error("ConfigError", "--trials must be >= 2");
        }
        config.trials = trials_override;
      }
      if (conv->count("--seed") > 0) config.seed = seed_override;
      return write_output(covdist::cli::run_convergence(config), out_path);
    }
    if (sweep->parsed()) {
      if (param != "rho2") {
        throw covdist::Error("ConfigError", "unsupported sweep parameter '" + param +
                                                "' (only 'rho2' is available)");
      }
      return write_output(
          covdist::cli::run_sweep(covdist::cli::load_config(config_path), from, to, steps),
          out_path);
    }
    return covdist::cli::run_validate(fast, std::cout);
  } catch (const covdist::Error& e) {
    std::cerr << "covdist error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "covdist error: " << e.what() << '\n';
    return 1;
  }
}
