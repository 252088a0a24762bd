#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "covdist/det_equiv.hpp"
#include "covdist/empirical.hpp"
#include "covdist/spectrum.hpp"

namespace covdist::cli {

// One population covariance in a config file: either an explicit spectrum
// (eigenvalues + multiplicity fractions summing to 1, so the model scales
// with M) or an exponential-decay Toeplitz matrix.  An optional basis_seed
// attaches a Haar eigenbasis (drawn per dimension); spectrum models default
// to the identity basis, Toeplitz models always use their own eigenbasis.
struct ModelSpec {
  enum class Kind { spectrum, toeplitz };
  Kind kind = Kind::spectrum;
  std::vector<double> eigenvalues;
  std::vector<double> multiplicity_fractions;
  double rho = 0.0;
  bool has_basis_seed = false;
  std::uint64_t basis_seed = 0;
};

struct ExperimentConfig {
  ModelSpec model_a, model_b;
  std::vector<int> dims;                          // M values
  std::vector<std::pair<double, double>> ratios;  // (N1/M, N2/M)
  std::vector<Metric> metrics;
  int trials = 10000;
  std::uint64_t seed = 1;
  OverlapMode overlap_mode = OverlapMode::explicit_bases;
  Field field = Field::complex;
};

// Strict JSON config: unknown keys anywhere, non-integral fraction * M or
// ratio * M, or an empty metric list raise "ConfigError" naming the
// offender.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

// Instantiate one side of a config at dimension M and sample count N.
CovarianceModel build_model(const ModelSpec& spec, int dim, int sample_size, Field field);

// CSV emitters.  All share the header
//   experiment,metric,M,N1,N2,mode,value,std,trials,seed
// with value/std printed to 17 significant digits; non-Monte-Carlo rows
// leave std empty and set trials to 0.  Output is byte-identical across
// reruns of the same config.
std::string run_det_equiv(const ExperimentConfig& config);
std::string run_convergence(const ExperimentConfig& config);
std::string run_sweep(const ExperimentConfig& config, double rho_from, double rho_to, int steps);

// Self-check suites (secular-equation identities, resolvent identity plus
// its undersampled negative control, closed-form vs quadrature agreement).
// Prints one line per suite to `out`; returns 0 if all pass, 2 otherwise.
int run_validate(bool fast, std::ostream& out);

// Deterministic random admissible spectrum used by the validation suites
// and tests: up to max_clusters distinct eigenvalues spread over a couple of
// decades, M/N in [0.05, 0.95] or [1.05, 8].  When dim > 0 the multiplicity
// composition is drawn to total exactly dim.
SpectralModel random_spectral_model(RngStream& stream, int max_clusters, bool undersampled,
                                    int dim = 0);

}  // namespace covdist::cli
