#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "covdist/rng.hpp"

namespace covdist {

enum class Field { real, complex };

// Population covariance spectrum: distinct eigenvalues gamma_1 < ... <
// gamma_Mbar with integer multiplicities K_m, total dimension M = sum K_m,
// and the sample count N of the covariance estimate the asymptotics refer
// to.  M == N is rejected (the deterministic equivalents have a genuine
// singularity there); |1 - M/N| < 1e-3 sets near_critical and emits a
// one-line conditioning warning on stderr.
struct SpectralModel {
  Eigen::ArrayXd gammas;   // ascending, strictly positive
  Eigen::VectorXi mults;   // K_m >= 1
  int dim = 0;             // M
  int sample_size = 0;     // N
  bool near_critical = false;

  int mbar() const { return static_cast<int>(gammas.size()); }
  double ratio() const { return static_cast<double>(dim) / sample_size; }  // M/N
  bool undersampled() const { return dim > sample_size; }

  // Eigenvalues repeated by multiplicity, ascending (length M).
  Eigen::VectorXd expanded() const;
};

SpectralModel make_spectral_model(const std::vector<double>& eigenvalues,
                                  const std::vector<int>& multiplicities,
                                  int sample_size,
                                  double cluster_tol = 1e-8);

// A spectrum together with an orthonormal eigenbasis (columns grouped by
// eigenvalue block, in spectrum order) and the sampling field.  For
// field == Field::real the basis must be real to 1e-12.
struct CovarianceModel {
  SpectralModel spectrum;
  Eigen::MatrixXcd basis;  // M x M unitary
  Field field = Field::complex;

  int block_start(int m) const;     // first basis column of eigenvalue block m
  Eigen::MatrixXcd dense() const;   // U diag(expanded) U^H
  Eigen::MatrixXcd dense_sqrt() const;
  Eigen::MatrixXcd dense_log() const;
};

// Attach an explicit eigenbasis (validated unitary to 1e-10) or default to
// the identity basis.
CovarianceModel covariance_model(SpectralModel spectrum, Eigen::MatrixXcd basis,
                                 Field field = Field::complex);
CovarianceModel covariance_model(SpectralModel spectrum, Field field = Field::complex);

// Eigendecompose a Hermitian positive definite matrix and cluster its
// eigenvalues at relative tolerance cluster_tol into a SpectralModel, with
// the eigenvectors as basis.  Errors: "NotHermitian", "NotPositiveDefinite".
CovarianceModel spectral_model_from_dense(const Eigen::MatrixXcd& matrix, int sample_size,
                                          double cluster_tol = 1e-8,
                                          Field field = Field::complex);

// Exponential-decay Toeplitz covariance, entry (i, j) = rho^|i-j| with
// rho in [0, 1) ("RhoOutOfRange" otherwise), eigendecomposed as above.
CovarianceModel toeplitz_covariance(double rho, int dim, int sample_size,
                                    Field field = Field::complex);

// Haar-distributed orthogonal (field == real) or unitary matrix, via QR of a
// Ginibre matrix with the phase-fix that makes the factorization unique.
Eigen::MatrixXcd haar_basis(int dim, Field field, std::uint64_t seed);
Eigen::MatrixXcd haar_basis(int dim, Field field, RngStream& stream);

enum class OverlapMode { explicit_bases, haar_average };

// W(k, m) = tr[P_k^(a) P_m^(b)]: Frobenius overlaps of the eigenprojectors
// of two models.  Row sums equal the multiplicities of a, column sums those
// of b.  haar_average replaces the bases by their Haar expectation,
// W(k, m) = K_k K_m / M.
struct OverlapMatrix {
  Eigen::MatrixXd w;
  OverlapMode mode = OverlapMode::explicit_bases;
};

OverlapMatrix projector_overlaps(const CovarianceModel& a, const CovarianceModel& b,
                                 OverlapMode mode);
// Spectrum-only overload: only the Haar average is available; asking for
// explicit overlaps without bases raises "MissingBasis".
OverlapMatrix projector_overlaps(const SpectralModel& a, const SpectralModel& b,
                                 OverlapMode mode = OverlapMode::haar_average);

}  // namespace covdist
