#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "covdist/det_equiv.hpp"
#include "covdist/rng.hpp"
#include "covdist/spectrum.hpp"

namespace covdist {

// Sample covariance (1/n) Y Y^H from n independent Gaussian samples
// Y = R^(1/2) X with the model's covariance.  field selects real or
// circularly-symmetric complex entries of unit variance; a real-field draw
// on a complex-basis model is rejected ("FieldMismatch").
Eigen::MatrixXcd sample_scm(const CovarianceModel& model, int n_samples, Field field,
                            RngStream& stream);

// Rank-restricted matrix logarithm: eigendecompose a Hermitian matrix, apply
// log to the expected_rank largest eigenvalues, and map the rest (the
// sampling null space) to zero.  A retained eigenvalue <= 0 raises
// "NonPositiveRetainedEigenvalue".
Eigen::MatrixXcd matrix_log_extended(const Eigen::MatrixXcd& matrix, int expected_rank);
Eigen::MatrixXd matrix_log_extended(const Eigen::MatrixXd& matrix, int expected_rank);

// Plug-in distance between two sample covariances: the matrix functions are
// applied to the estimates themselves.  log_euclidean uses the
// rank-restricted logarithm with expected rank min(M, n_j); symmetrized_kl
// needs both estimates invertible, i.e. n_j >= M ("SingularKL").
double plugin_distance(const Eigen::MatrixXcd& scm1, int n1, const Eigen::MatrixXcd& scm2, int n2,
                       Metric metric);
double plugin_distance(const Eigen::MatrixXd& scm1, int n1, const Eigen::MatrixXd& scm2, int n2,
                       Metric metric);

struct MonteCarloStats {
  double mean = 0.0;
  double stddev = 0.0;  // population-style: divides by the trial count
  int trials = 0;
  std::uint64_t seed = 0;
  std::string config_id;
};

enum class BasisMode {
  fixed,           // use the models' eigenbases in every trial
  haar_each_trial  // redraw an independent Haar eigenbasis per model per trial
};

// Monte Carlo over independent trials of the plug-in distance between the
// sample covariances of the two models at sample counts n1 and n2.  Every
// trial draws from its own (seed, trial-index) stream, and trial values are
// reduced pairwise in index order, so results are bit-identical for any
// thread count (parallelism is capped by the COVDIST_THREADS environment
// variable).  Within a trial the draw order is: basis 1, basis 2 (only in
// haar_each_trial mode), samples 1, samples 2.
MonteCarloStats monte_carlo(const CovarianceModel& a, int n1, const CovarianceModel& b, int n2,
                            Metric metric, int trials, std::uint64_t seed,
                            BasisMode basis_mode = BasisMode::fixed,
                            const std::string& config_id = "");

}  // namespace covdist
