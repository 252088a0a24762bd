#include "covdist/empirical.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "covdist/error.hpp"
#include "covdist/internal/reduction.hpp"

namespace covdist {
namespace {

constexpr double kTwoPi = 6.28318530717958647692;

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t substream) {
  std::uint64_t state = master_seed;
  const std::uint64_t a = splitmix64(state);
  state ^= 0x9E3779B97F4A7C15ULL * (substream + 1);
  const std::uint64_t b = splitmix64(state);
  const std::uint64_t c = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  gen_ = std::mt19937_64(seq);
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Box-Muller on the fixed 53-bit mapping; u1 shifted into (0, 1].
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = kTwoPi * u2;
  cached_ = r * std::sin(t);
  has_cached_ = true;
  return r * std::cos(t);
}

namespace {

Eigen::MatrixXd draw_real(int rows, int cols, RngStream& stream) {
  Eigen::MatrixXd x(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) x(i, j) = stream.normal();
  }
  return x;
}

Eigen::MatrixXcd draw_complex(int rows, int cols, RngStream& stream) {
  Eigen::MatrixXcd x(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) x(i, j) = stream.normal_complex();
  }
  return x;
}

template <typename Mat>
Mat scm_from_sqrt(const Mat& sqrt_cov, int n_samples, RngStream& stream) {
  Mat x;
  if constexpr (std::is_same_v<typename Mat::Scalar, double>) {
    x = draw_real(static_cast<int>(sqrt_cov.rows()), n_samples, stream);
  } else {
    x = draw_complex(static_cast<int>(sqrt_cov.rows()), n_samples, stream);
  }
  const Mat y = sqrt_cov * x;
  return (y * y.adjoint()) / static_cast<double>(n_samples);
}

template <typename Mat>
Mat log_extended_impl(const Mat& matrix, int expected_rank) {
  const int m = static_cast<int>(matrix.rows());
  if (matrix.cols() != m) throw Error("DimMismatch", "matrix must be square");
  if (expected_rank < 0 || expected_rank > m) {
    throw Error("DimMismatch", "expected_rank must lie in [0, M]");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(matrix);
  if (eig.info() != Eigen::Success) throw Error("EigFailure", "eigendecomposition did not converge");
  Eigen::VectorXd lam = eig.eigenvalues();  // ascending
  Eigen::VectorXd mapped = Eigen::VectorXd::Zero(m);
  for (int i = m - expected_rank; i < m; ++i) {
    if (!(lam[i] > 0.0)) {
      throw Error("NonPositiveRetainedEigenvalue",
                  "retained eigenvalue " + std::to_string(lam[i]) + " is not positive");
    }
    mapped[i] = std::log(lam[i]);
  }
  return eig.eigenvectors() * mapped.asDiagonal() * eig.eigenvectors().adjoint();
}

template <typename Mat>
double plugin_impl(const Mat& scm1, int n1, const Mat& scm2, int n2, Metric metric) {
  const int m = static_cast<int>(scm1.rows());
  if (scm1.cols() != m || scm2.rows() != m || scm2.cols() != m) {
    throw Error("DimMismatch", "sample covariances must be square and equal-sized");
  }
  switch (metric) {
    case Metric::log_euclidean: {
      const Mat l1 = log_extended_impl(scm1, std::min(m, n1));
      const Mat l2 = log_extended_impl(scm2, std::min(m, n2));
      return (l1 - l2).squaredNorm() / m;
    }
    case Metric::euclidean:
      return (scm1 - scm2).squaredNorm() / m;
    case Metric::symmetrized_kl: {
      if (n1 < m || n2 < m) {
        throw Error("SingularKL", "symmetrized KL needs invertible estimates (n >= M)");
      }
      Eigen::LLT<Mat> llt1(scm1);
      Eigen::LLT<Mat> llt2(scm2);
      if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success) {
        throw Error("SingularKL", "sample covariance is numerically singular");
      }
      const double t12 = std::real(llt1.solve(scm2).trace());
      const double t21 = std::real(llt2.solve(scm1).trace());
      return (t12 + t21) / (2.0 * m) - 1.0;
    }
  }
  throw Error("ConfigError", "unknown metric");
}

}  // namespace

Eigen::MatrixXcd sample_scm(const CovarianceModel& model, int n_samples, Field field,
                            RngStream& stream) {
  if (n_samples < 1) throw Error("DomainError", "n_samples must be >= 1");
  if (field == Field::real) {
    if (model.basis.imag().cwiseAbs().maxCoeff() > 1e-12) {
      throw Error("FieldMismatch", "real-field sampling requires a real eigenbasis");
    }
    const Eigen::MatrixXd basis = model.basis.real();
    const Eigen::MatrixXd sqrt_cov =
        basis * model.spectrum.expanded().cwiseSqrt().asDiagonal() * basis.transpose();
    return scm_from_sqrt(sqrt_cov, n_samples, stream).cast<std::complex<double>>();
  }
  return scm_from_sqrt(Eigen::MatrixXcd(model.dense_sqrt()), n_samples, stream);
}

Eigen::MatrixXcd matrix_log_extended(const Eigen::MatrixXcd& matrix, int expected_rank) {
  return log_extended_impl(matrix, expected_rank);
}

Eigen::MatrixXd matrix_log_extended(const Eigen::MatrixXd& matrix, int expected_rank) {
  return log_extended_impl(matrix, expected_rank);
}

double plugin_distance(const Eigen::MatrixXcd& scm1, int n1, const Eigen::MatrixXcd& scm2, int n2,
                       Metric metric) {
  return plugin_impl(scm1, n1, scm2, n2, metric);
}

double plugin_distance(const Eigen::MatrixXd& scm1, int n1, const Eigen::MatrixXd& scm2, int n2,
                       Metric metric) {
  return plugin_impl(scm1, n1, scm2, n2, metric);
}

MonteCarloStats monte_carlo(const CovarianceModel& a, int n1, const CovarianceModel& b, int n2,
                            Metric metric, int trials, std::uint64_t seed, BasisMode basis_mode,
                            const std::string& config_id) {
  if (trials < 2) throw Error("DomainError", "monte_carlo requires trials >= 2");
  if (a.spectrum.dim != b.spectrum.dim) {
    throw Error("DimMismatch", "models must share the ambient dimension M");
  }
  if (n1 < 1 || n2 < 1) throw Error("DomainError", "sample counts must be >= 1");
  if (a.field != b.field) throw Error("FieldMismatch", "both models must use the same field");
  const Field field = a.field;
  const int m = a.spectrum.dim;

  const Eigen::VectorXd root_a = a.spectrum.expanded().cwiseSqrt();
  const Eigen::VectorXd root_b = b.spectrum.expanded().cwiseSqrt();
  const bool real_path = (field == Field::real);

  // Fixed-basis square roots, precomputed once.
  Eigen::MatrixXd sqrt_a_r, sqrt_b_r;
  Eigen::MatrixXcd sqrt_a_c, sqrt_b_c;
  if (basis_mode == BasisMode::fixed) {
    if (real_path) {
      sqrt_a_r = a.basis.real() * root_a.asDiagonal() * a.basis.real().transpose();
      sqrt_b_r = b.basis.real() * root_b.asDiagonal() * b.basis.real().transpose();
    } else {
      sqrt_a_c = a.dense_sqrt();
      sqrt_b_c = b.dense_sqrt();
    }
  }

  std::vector<double> values(static_cast<std::size_t>(trials));
  internal::parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    RngStream stream(seed, static_cast<std::uint64_t>(t) + 1);
    double value = 0.0;
    if (real_path) {
      Eigen::MatrixXd s1, s2;
      if (basis_mode == BasisMode::haar_each_trial) {
        const Eigen::MatrixXd u1 = haar_basis(m, Field::real, stream).real();
        const Eigen::MatrixXd u2 = haar_basis(m, Field::real, stream).real();
        s1 = u1 * root_a.asDiagonal() * u1.transpose();
        s2 = u2 * root_b.asDiagonal() * u2.transpose();
      } else {
        s1 = sqrt_a_r;
        s2 = sqrt_b_r;
      }
      const Eigen::MatrixXd r1 = scm_from_sqrt(s1, n1, stream);
      const Eigen::MatrixXd r2 = scm_from_sqrt(s2, n2, stream);
      value = plugin_impl(r1, n1, r2, n2, metric);
    } else {
      Eigen::MatrixXcd s1, s2;
      if (basis_mode == BasisMode::haar_each_trial) {
        const Eigen::MatrixXcd u1 = haar_basis(m, Field::complex, stream);
        const Eigen::MatrixXcd u2 = haar_basis(m, Field::complex, stream);
        s1 = u1 * root_a.asDiagonal() * u1.adjoint();
        s2 = u2 * root_b.asDiagonal() * u2.adjoint();
      } else {
        s1 = sqrt_a_c;
        s2 = sqrt_b_c;
      }
      const Eigen::MatrixXcd r1 = scm_from_sqrt(s1, n1, stream);
      const Eigen::MatrixXcd r2 = scm_from_sqrt(s2, n2, stream);
      value = plugin_impl(r1, n1, r2, n2, metric);
    }
    values[t] = value;
  });

  const std::size_t n = values.size();
  MonteCarloStats stats;
  stats.trials = trials;
  stats.seed = seed;
  stats.mean = internal::pairwise_sum<double>(n, [&](std::size_t i) { return values[i]; }) /
               static_cast<double>(n);
  const double var = internal::pairwise_sum<double>(n, [&](std::size_t i) {
                       const double d = values[i] - stats.mean;
                       return d * d;
                     }) /
                     static_cast<double>(n);
  stats.stddev = std::sqrt(var > 0.0 ? var : 0.0);
  if (config_id.empty()) {
    stats.config_id = "M=" + std::to_string(m) + ",N1=" + std::to_string(n1) +
                      ",N2=" + std::to_string(n2);
  } else {
    stats.config_id = config_id;
  }
  return stats;
}

}  // namespace covdist
