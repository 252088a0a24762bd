#pragma once

#include <Eigen/Dense>
#include <complex>

#include "covdist/spectrum.hpp"

namespace covdist {

// Roots of the polynomial secular equation
//
//     mu * (1 - (1/N) sum_m K_m gamma_m / (gamma_m - mu)) = 0,
//
// which has exactly Mbar + 1 real roots: mu_0 <= 0 <= mu_1 < gamma_1 and one
// root strictly inside each gap (gamma_{m-1}, gamma_m).  Oversampled
// (M < N): mu_0 = 0; undersampled (M > N): mu_1 = 0 and mu_0 < 0.  The
// shifted quantities gamma_m - mu_0 and mu_m - mu_0 and the curvature value
// gamma0 = Gamma(mu_0) in (0, 1) appear throughout the closed forms.
struct MuRoots {
  Eigen::VectorXd mu;           // ascending, size mbar + 1 (index 0 is mu_0)
  Eigen::VectorXd mu_shift;     // mu_m - mu_0,     m = 0..mbar
  Eigen::VectorXd gamma_shift;  // gamma_m - mu_0,  m = 1..mbar (size mbar)
  double gamma0 = 0.0;          // Gamma(mu_0)
  bool undersampled = false;

  double mu0() const { return mu[0]; }
};

MuRoots mu_roots(const SpectralModel& model);

// The defining map of the deterministic-equivalent resolvent,
//     z(omega) = omega * (1 - (1/N) sum_m K_m gamma_m / (gamma_m - omega)),
// and its curvature functional
//     Gamma(omega) = (1/N) sum_m K_m (gamma_m / (gamma_m - omega))^2,
// with z'(omega) = 1 - Gamma(omega).  Evaluation within relative distance
// 1e-14 of a pole gamma_m raises "PoleEvaluation".
std::complex<double> z_of_omega(const SpectralModel& model, std::complex<double> omega);
double z_of_omega(const SpectralModel& model, double omega);
std::complex<double> gamma_fn(const SpectralModel& model, std::complex<double> omega);
double gamma_fn(const SpectralModel& model, double omega);

// Functional inverse omega(z) of z_of_omega for z outside the support of the
// sample-eigenvalue distribution.  All Mbar + 1 candidate roots come from a
// companion-matrix eigensolve of the cleared-denominator polynomial and are
// Newton-polished; the branch is selected by sign(Im omega) == sign(Im z)
// for complex z, and for real z by realness plus Gamma(omega) < 1.  Errors:
// "NoRootSatisfiesSelection", "AmbiguousSelection".
std::complex<double> solve_omega(const SpectralModel& model, std::complex<double> z);

// Conservative enclosure of the positive support of the sample-eigenvalue
// distribution: lower = (1 - sqrt(M/N))^2 gamma_1, upper =
// (1 + sqrt(M/N))^2 gamma_Mbar, margin = epsilon_frac * lower.
struct SupportEdges {
  double lower = 0.0;
  double upper = 0.0;
  double margin = 0.0;
};

SupportEdges support_edges(const SpectralModel& model, double epsilon_frac = 0.25);

}  // namespace covdist
