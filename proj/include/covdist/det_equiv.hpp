#pragma once

#include <Eigen/Dense>

#include "covdist/rmt.hpp"
#include "covdist/spectrum.hpp"

namespace covdist {

enum class Metric { log_euclidean, euclidean, symmetrized_kl };

// Coefficients beta_k of the deterministic equivalent of the sample log
// moment: Theta = sum_k beta_k P_k satisfies (1/M) tr[Theta A] ->
// (1/M) E tr[f(R_hat) A] for the rank-restricted matrix logarithm f and any
// bounded-norm deterministic A.  One coefficient per distinct eigenvalue.
Eigen::VectorXd beta_coefficients(const SpectralModel& model);

// Theta as a dense Hermitian matrix in the model's eigenbasis.
Eigen::MatrixXcd theta_matrix(const CovarianceModel& model);

// The quadratic self term alpha: the deterministic equivalent of
// (1/M) E tr[f(R_hat)^2], with f as above.  Splits into a common core plus
// an oversampled- or undersampled-specific tail.
double alpha_coefficient(const SpectralModel& model);

struct DetEquivBreakdown {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double cross = 0.0;  // (1/M) tr[Theta_1 Theta_2] = (1/M) beta_1^T W beta_2
  double total = 0.0;  // alpha1 - 2 * cross + alpha2
  Eigen::VectorXd beta1, beta2;
  bool undersampled1 = false, undersampled2 = false;
};

// Deterministic equivalent of the plug-in log-Euclidean distance
// (1/M) tr[(f(R1_hat) - f(R2_hat))^2] between two independent sample
// covariances with population spectra a and b and eigenprojector overlaps W.
// Exactly symmetric under (a, b, W) -> (b, a, W^T), bit for bit: both call
// orders evaluate the bilinear form in one canonical orientation.
DetEquivBreakdown le_det_equiv(const SpectralModel& a, const SpectralModel& b,
                               const OverlapMatrix& overlaps);

// Deterministic equivalents of the plug-in Euclidean distance and the
// plug-in symmetrized Kullback-Leibler divergence (the latter requires both
// models oversampled, error "UndersampledKL").  Metric::log_euclidean
// delegates to le_det_equiv with explicit overlaps.
double comparison_det_equiv(const CovarianceModel& a, const CovarianceModel& b, Metric metric);

// Population (infinite-sample) distances between the two covariances; the
// classical limits of the deterministic equivalents as N -> infinity.
double population_distance(const CovarianceModel& a, const CovarianceModel& b, Metric metric);

}  // namespace covdist
