#include "covdist/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <string>

#include "covdist/error.hpp"

namespace covdist {
namespace {

SpectralModel finalize_model(Eigen::ArrayXd gammas, Eigen::VectorXi mults, int sample_size,
                             double cluster_tol) {
  const int mbar = static_cast<int>(gammas.size());
  if (mbar == 0) throw Error("NonPositiveEigenvalue", "empty spectrum");
  if (mults.size() != mbar) {
    throw Error("DimMismatch", "eigenvalues and multiplicities differ in length");
  }
  for (int m = 0; m < mbar; ++m) {
    if (!(gammas[m] > 0.0) || !std::isfinite(gammas[m])) {
      throw Error("NonPositiveEigenvalue",
                  "eigenvalue " + std::to_string(m + 1) + " = " + std::to_string(gammas[m]));
    }
    if (mults[m] < 1) {
      throw Error("NonPositiveMultiplicity",
                  "multiplicity " + std::to_string(m + 1) + " = " + std::to_string(mults[m]));
    }
  }
  for (int m = 0; m + 1 < mbar; ++m) {
    if (gammas[m + 1] - gammas[m] <= cluster_tol * gammas[m + 1]) {
      throw Error("UnsortedOrDuplicateEigenvalues",
                  "eigenvalues must be strictly ascending with relative separation > " +
                      std::to_string(cluster_tol));
    }
  }
  SpectralModel model;
  model.gammas = std::move(gammas);
  model.mults = std::move(mults);
  model.dim = model.mults.sum();
  if (sample_size < 1) throw Error("NonPositiveSampleSize", "sample_size must be >= 1");
  if (sample_size == model.dim) {
    throw Error("SampleSizeEqualsDim",
                "sample_size == dim = " + std::to_string(model.dim) +
                    "; the asymptotic formulas are singular at M == N");
  }
  model.sample_size = sample_size;
  model.near_critical = std::abs(1.0 - model.ratio()) < 1e-3;
  if (model.near_critical) {
    std::cerr << "covdist warning: |1 - M/N| = " << std::abs(1.0 - model.ratio())
              << " < 1e-3; deterministic equivalents are ill-conditioned near M == N\n";
  }
  return model;
}

bool basis_is_real(const Eigen::MatrixXcd& basis, double tol = 1e-12) {
  return basis.imag().cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

Eigen::VectorXd SpectralModel::expanded() const {
  Eigen::VectorXd out(dim);
  int pos = 0;
  for (int m = 0; m < mbar(); ++m) {
    out.segment(pos, mults[m]).setConstant(gammas[m]);
    pos += mults[m];
  }
  return out;
}

SpectralModel make_spectral_model(const std::vector<double>& eigenvalues,
                                  const std::vector<int>& multiplicities, int sample_size,
                                  double cluster_tol) {
  Eigen::ArrayXd g = Eigen::Map<const Eigen::ArrayXd>(eigenvalues.data(),
                                                      static_cast<Eigen::Index>(eigenvalues.size()));
  Eigen::VectorXi k(static_cast<Eigen::Index>(multiplicities.size()));
  for (std::size_t i = 0; i < multiplicities.size(); ++i) k[static_cast<Eigen::Index>(i)] = multiplicities[i];
  return finalize_model(std::move(g), std::move(k), sample_size, cluster_tol);
}

int CovarianceModel::block_start(int m) const {
  int pos = 0;
  for (int j = 0; j < m; ++j) pos += spectrum.mults[j];
  return pos;
}

Eigen::MatrixXcd CovarianceModel::dense() const {
  return basis * spectrum.expanded().asDiagonal() * basis.adjoint();
}

Eigen::MatrixXcd CovarianceModel::dense_sqrt() const {
  return basis * spectrum.expanded().cwiseSqrt().asDiagonal() * basis.adjoint();
}

Eigen::MatrixXcd CovarianceModel::dense_log() const {
  Eigen::VectorXd lg = spectrum.expanded().array().log().matrix();
  return basis * lg.asDiagonal() * basis.adjoint();
}

CovarianceModel covariance_model(SpectralModel spectrum, Eigen::MatrixXcd basis, Field field) {
  const int m = spectrum.dim;
  if (basis.rows() != m || basis.cols() != m) {
    throw Error("DimMismatch", "basis must be " + std::to_string(m) + " x " + std::to_string(m));
  }
  const double dev = (basis.adjoint() * basis - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (dev > 1e-10) {
    throw Error("NotUnitary", "basis deviates from unitary by " + std::to_string(dev));
  }
  if (field == Field::real && !basis_is_real(basis)) {
    throw Error("FieldMismatch", "real-field model requires a real eigenbasis");
  }
  CovarianceModel out;
  out.spectrum = std::move(spectrum);
  out.basis = std::move(basis);
  out.field = field;
  return out;
}

CovarianceModel covariance_model(SpectralModel spectrum, Field field) {
  const int m = spectrum.dim;
  return covariance_model(std::move(spectrum), Eigen::MatrixXcd::Identity(m, m), field);
}

CovarianceModel spectral_model_from_dense(const Eigen::MatrixXcd& matrix, int sample_size,
                                          double cluster_tol, Field field) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw Error("DimMismatch", "covariance matrix must be square and non-empty");
  }
  const double scale = matrix.cwiseAbs().maxCoeff();
  const double herm_dev = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > 1e-10 * std::max(1.0, scale)) {
    throw Error("NotHermitian", "matrix deviates from Hermitian by " + std::to_string(herm_dev));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (matrix + matrix.adjoint()));
  if (eig.info() != Eigen::Success) throw Error("EigFailure", "eigendecomposition did not converge");
  const Eigen::VectorXd lam = eig.eigenvalues();  // ascending
  const double lam_max = lam[lam.size() - 1];
  if (lam[0] <= 1e-10 * std::max(1.0, lam_max)) {
    throw Error("NotPositiveDefinite",
                "smallest eigenvalue " + std::to_string(lam[0]) + " is not positive at tolerance 1e-10");
  }

  // Cluster adjacent eigenvalues at relative tolerance cluster_tol; each
  // cluster's representative is its mean.
  std::vector<double> gam;
  std::vector<int> mult;
  double acc = lam[0];
  int count = 1;
  for (Eigen::Index i = 1; i < lam.size(); ++i) {
    if (lam[i] - lam[i - 1] <= cluster_tol * lam[i]) {
      acc += lam[i];
      ++count;
    } else {
      gam.push_back(acc / count);
      mult.push_back(count);
      acc = lam[i];
      count = 1;
    }
  }
  gam.push_back(acc / count);
  mult.push_back(count);

  Eigen::ArrayXd g = Eigen::Map<const Eigen::ArrayXd>(gam.data(), static_cast<Eigen::Index>(gam.size()));
  Eigen::VectorXi k(static_cast<Eigen::Index>(mult.size()));
  for (std::size_t i = 0; i < mult.size(); ++i) k[static_cast<Eigen::Index>(i)] = mult[i];
  // Separation between cluster means can be slightly below cluster_tol after
  // averaging, so the distinctness check runs at half that tolerance.
  SpectralModel model = finalize_model(std::move(g), std::move(k), sample_size, 0.49 * cluster_tol);
  return covariance_model(std::move(model), eig.eigenvectors(), field);
}

CovarianceModel toeplitz_covariance(double rho, int dim, int sample_size, Field field) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw Error("RhoOutOfRange", "rho must lie in [0, 1), got " + std::to_string(rho));
  }
  if (dim < 1) throw Error("DimMismatch", "dim must be >= 1");
  Eigen::MatrixXcd t(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) t(i, j) = std::pow(rho, std::abs(i - j));
  }
  return spectral_model_from_dense(t, sample_size, 1e-8, field);
}

Eigen::MatrixXcd haar_basis(int dim, Field field, RngStream& stream) {
  if (dim < 1) throw Error("DimMismatch", "dim must be >= 1");
  if (field == Field::real) {
    Eigen::MatrixXd g(dim, dim);
    for (int j = 0; j < dim; ++j) {
      for (int i = 0; i < dim; ++i) g(i, j) = stream.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q.cast<std::complex<double>>();
  }
  Eigen::MatrixXcd g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) g(i, j) = stream.normal_complex();
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const std::complex<double> d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= (a > 0.0) ? (d / a) : std::complex<double>(1.0, 0.0);
  }
  return q;
}

Eigen::MatrixXcd haar_basis(int dim, Field field, std::uint64_t seed) {
  RngStream stream(seed, 0);
  return haar_basis(dim, field, stream);
}

OverlapMatrix projector_overlaps(const CovarianceModel& a, const CovarianceModel& b,
                                 OverlapMode mode) {
  if (a.spectrum.dim != b.spectrum.dim) {
    throw Error("DimMismatch", "models must share the ambient dimension M");
  }
  if (mode == OverlapMode::haar_average) return projector_overlaps(a.spectrum, b.spectrum, mode);

  const int ma = a.spectrum.mbar();
  const int mb = b.spectrum.mbar();
  const Eigen::MatrixXcd g = a.basis.adjoint() * b.basis;
  OverlapMatrix out;
  out.mode = OverlapMode::explicit_bases;
  out.w.resize(ma, mb);
  int row = 0;
  for (int k = 0; k < ma; ++k) {
    int col = 0;
    for (int m = 0; m < mb; ++m) {
      out.w(k, m) = g.block(row, col, a.spectrum.mults[k], b.spectrum.mults[m]).squaredNorm();
      col += b.spectrum.mults[m];
    }
    row += a.spectrum.mults[k];
  }
  return out;
}

OverlapMatrix projector_overlaps(const SpectralModel& a, const SpectralModel& b, OverlapMode mode) {
  if (mode == OverlapMode::explicit_bases) {
    throw Error("MissingBasis", "explicit projector overlaps require eigenbases; "
                                "pass CovarianceModel arguments or use the Haar average");
  }
  if (a.dim != b.dim) throw Error("DimMismatch", "models must share the ambient dimension M");
  OverlapMatrix out;
  out.mode = OverlapMode::haar_average;
  out.w = a.mults.cast<double>() * b.mults.cast<double>().transpose() / static_cast<double>(a.dim);
  return out;
}

}  // namespace covdist
