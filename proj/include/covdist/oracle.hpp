#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "covdist/det_equiv.hpp"
#include "covdist/rmt.hpp"
#include "covdist/spectrum.hpp"

namespace covdist {

// Closed rectangular contour in the complex plane, traversed clockwise
// (top-left -> top-right -> bottom-right -> bottom-left), discretized with
// composite Gauss-Legendre panels.  Panels are graded adaptively: each edge
// is bisected until a panel is no longer than its distance to the singular
// set (the support interval, the origin, and for n_type the whole branch cut
// (-inf, 0]), which keeps the integrand analytic on a neighborhood of every
// panel and makes the quadrature converge geometrically.
//
//   n_type: encloses only the positive support [lower - margin, upper + margin];
//           every node keeps Re z > 0, so log z is single-valued.
//   z_type: additionally encloses the origin (left edge at
//           min(-lower/2, 1.5 * mu0)), picking up the rank-deficiency atom
//           of undersampled models.  Only resolvent (log-free) integrands
//           may be used on it.
struct Contour {
  enum class Kind { n_type, z_type };
  Kind kind = Kind::n_type;
  std::vector<std::complex<double>> nodes;
  std::vector<std::complex<double>> weights;  // complex dz weights, clockwise
  double left = 0.0, right = 0.0, half_height = 0.0;
};

// n_nodes is the total node budget (>= 64, multiple of 4); the per-panel
// Gauss-Legendre order is budget / panel-count clamped to [4, 48].  mu0 is
// only read for z_type.  Error: "DegenerateContour".
Contour make_contour(const SupportEdges& edges, Contour::Kind kind, int n_nodes,
                     double mu0 = 0.0);

// Deterministic equivalent of the resolvent (1/N-weighted): per distinct
// eigenvalue, qbar_kernel returns q_m(z) = (omega(z)/z) / (gamma_m - omega(z)),
// so that Qbar(z) = sum_m q_m(z) P_m; qbar assembles the dense matrix in the
// given basis.
Eigen::VectorXcd qbar_kernel(const SpectralModel& model, std::complex<double> z);
Eigen::MatrixXcd qbar(const SpectralModel& model, const Eigen::MatrixXcd& basis,
                      std::complex<double> z);

// Frobenius deviation || (1/(2 pi j)) contour-sum Qbar dz - I ||_F.  On a
// z_type contour this must vanish for every model; on an n_type contour it
// stays O(1) for undersampled models, whose Qbar keeps an atom at z = 0
// outside the contour (the standard negative control).
double resolvent_identity_check(const SpectralModel& model, const Contour& contour);

// Per-eigenvalue contour moments (1/(2 pi j)) sum_i w_i f(z_i) q_m(z_i) for
// f in {1, log z, log^2 z}.  Requires an n_type contour; a node with
// Re z <= 0 raises "BranchCutCrossed".
struct EigContourSums {
  Eigen::VectorXcd resolvent;  // f = 1
  Eigen::VectorXcd log_once;   // f = log z
  Eigen::VectorXcd log_twice;  // f = log^2 z
};
EigContourSums contour_sums(const SpectralModel& model, const Contour& contour);

// Per-eigenvalue resolvent moments (1/(2 pi j)) sum_i w_i q_m(z_i) on any
// contour kind (log-free, so z_type is allowed).  On a z_type contour each
// moment equals 1; on an n_type contour an undersampled model's moments fall
// short of 1 by the rank-deficiency mass left outside.
Eigen::VectorXcd resolvent_moments(const SpectralModel& model, const Contour& contour);

// Quadrature versions of the closed forms, built solely from contour_sums:
// beta_numeric[m] ~ beta_coefficients, alpha_numeric ~ alpha_coefficient,
// theta_numeric ~ theta_matrix (Hermitian part; imaginary residue must stay
// below 1e-9), dle_numeric ~ le_det_equiv(...).total.
Eigen::VectorXd beta_numeric(const SpectralModel& model, const Contour& contour);
double alpha_numeric(const SpectralModel& model, const Contour& contour);
Eigen::MatrixXcd theta_numeric(const CovarianceModel& model, const Contour& contour);

// The defining three-term double contour integral of the distance: the
// squared-log factor of each model rides its n_type contour while the other
// model's log-free resolvent factor rides its z_type contour (which carries
// the full resolvent mass, zero atom included); the middle cross term pairs
// the two n_type log moments.
struct ContourFamily {
  Contour n_a, n_b;  // n_type, one per model
  Contour z_a, z_b;  // z_type, one per model
};
ContourFamily make_contour_family(const SpectralModel& a, const SpectralModel& b, int n_nodes);
double dle_numeric(const SpectralModel& a, const SpectralModel& b, const OverlapMatrix& overlaps,
                   const ContourFamily& contours);

}  // namespace covdist
