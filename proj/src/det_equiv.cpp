#include "covdist/det_equiv.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "covdist/error.hpp"
#include "covdist/internal/reduction.hpp"
#include "covdist/special_functions.hpp"

namespace covdist {
namespace {

// Total order on spectra used to pick the canonical orientation of the
// bilinear cross term, so that d(a, b) and d(b, a) run bit-identical
// arithmetic.
int model_cmp(const SpectralModel& a, const SpectralModel& b) {
  if (a.dim != b.dim) return a.dim < b.dim ? -1 : 1;
  if (a.sample_size != b.sample_size) return a.sample_size < b.sample_size ? -1 : 1;
  if (a.mbar() != b.mbar()) return a.mbar() < b.mbar() ? -1 : 1;
  for (int m = 0; m < a.mbar(); ++m) {
    if (a.gammas[m] != b.gammas[m]) return a.gammas[m] < b.gammas[m] ? -1 : 1;
    if (a.mults[m] != b.mults[m]) return a.mults[m] < b.mults[m] ? -1 : 1;
  }
  return 0;
}

int matrix_cmp(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != b(i, j)) return a(i, j) < b(i, j) ? -1 : 1;
    }
  }
  return 0;
}

double bilinear_form(const Eigen::VectorXd& left, const Eigen::MatrixXd& w,
                     const Eigen::VectorXd& right) {
  return internal::pairwise_sum<double>(static_cast<std::size_t>(left.size()), [&](std::size_t k) {
    const double inner =
        internal::pairwise_sum<double>(static_cast<std::size_t>(right.size()),
                                       [&](std::size_t m) { return w(k, m) * right[m]; });
    return left[k] * inner;
  });
}

}  // namespace

Eigen::VectorXd beta_coefficients(const SpectralModel& model) {
  const MuRoots roots = mu_roots(model);
  const int mb = model.mbar();
  const double log1m_g0 = std::log1p(-roots.gamma0);
  Eigen::VectorXd beta(mb);
  for (int k = 0; k < mb; ++k) {
    const double gk = model.gammas[k];
    const double gk0 = roots.gamma_shift[k];
    double b = gk / gk0 * (std::log(gk0) + log1m_g0 - 1.0);
    for (int m = 0; m < mb; ++m) {
      if (m == k) continue;
      b += gk / (gk - model.gammas[m]) * std::log(roots.gamma_shift[m] / gk0);
    }
    for (int m = 1; m <= mb; ++m) {
      b -= gk / (gk - roots.mu[m]) * std::log(roots.mu_shift[m] / gk0);
    }
    beta[k] = b;
  }
  return beta;
}

Eigen::MatrixXcd theta_matrix(const CovarianceModel& model) {
  const Eigen::VectorXd beta = beta_coefficients(model.spectrum);
  Eigen::VectorXd expanded(model.spectrum.dim);
  int pos = 0;
  for (int m = 0; m < model.spectrum.mbar(); ++m) {
    expanded.segment(pos, model.spectrum.mults[m]).setConstant(beta[m]);
    pos += model.spectrum.mults[m];
  }
  const Eigen::MatrixXcd theta = model.basis * expanded.asDiagonal() * model.basis.adjoint();
  return 0.5 * (theta + theta.adjoint());
}

double alpha_coefficient(const SpectralModel& model) {
  const MuRoots roots = mu_roots(model);
  const int mb = model.mbar();
  const double m_dim = model.dim;
  const double n = model.sample_size;
  const double c = model.ratio();
  const Eigen::ArrayXd g = model.gammas;
  const Eigen::ArrayXd g0 = roots.gamma_shift.array();
  // Roots excluding mu_0, shifted and unshifted (1-based root indices 1..mb).
  const Eigen::ArrayXd mu = roots.mu.tail(mb).array();
  const Eigen::ArrayXd mu0s = roots.mu_shift.tail(mb).array();

  double alpha = 2.0 * std::min(n, m_dim) / m_dim;
  for (int m = 0; m < mb; ++m) {
    const double lg = std::log(g0[m]);
    alpha += model.mults[m] / m_dim * (lg * lg - 2.0 * lg);
  }
  for (int m = 0; m < mb; ++m) {
    for (int k = 0; k < mb; ++k) {
      if (k != m) {
        alpha += 2.0 * model.mults[m] / m_dim * std::log(g0[m] / g0[k]) *
                 std::log(g0[m] / std::abs(g[k] - g[m]));
      }
      alpha -= 2.0 * model.mults[m] / m_dim * std::log(g0[m] / mu0s[k]) *
               std::log(g0[m] / std::abs(mu[k] - g[m]));
      alpha += 2.0 * model.mults[k] / m_dim * (phi2(g0[m] / g0[k]) - phi2(mu0s[m] / g0[k]));
    }
  }

  if (!model.undersampled()) {
    const double r = n / m_dim - 1.0;
    const double lg = std::log1p(-c);
    double tail = -r * (lg * lg - 2.0 * lg);
    for (int m = 0; m < mb; ++m) {
      const double a = std::log(g[m]);
      const double b = std::log(mu[m]);
      tail += r * (a * a - b * b);
    }
    alpha += tail;
  } else {
    const double s = 1.0 - n / m_dim;
    const double a0 = -roots.mu0();
    const double la0 = std::log(a0);
    double tail = 2.0 * la0 - la0 * la0 - 2.0 * la0 * std::log(c - 1.0);
    for (int m = 0; m < mb; ++m) {
      tail -= 2.0 * (phi2(g0[m] / a0) - phi2(mu0s[m] / a0));
      tail += 2.0 * std::log(g0[m]) * std::log(a0 / g[m]);
      if (m >= 1) tail -= 2.0 * std::log(mu0s[m]) * std::log(a0 / mu[m]);
    }
    alpha += s * tail;
  }
  return alpha;
}

DetEquivBreakdown le_det_equiv(const SpectralModel& a, const SpectralModel& b,
                               const OverlapMatrix& overlaps) {
  if (a.dim != b.dim) throw Error("DimMismatch", "models must share the ambient dimension M");
  const Eigen::MatrixXd& w = overlaps.w;
  if (w.rows() != a.mbar() || w.cols() != b.mbar()) {
    throw Error("DimMismatch", "overlap matrix must be " + std::to_string(a.mbar()) + " x " +
                                   std::to_string(b.mbar()));
  }
  const double m_dim = a.dim;
  const double row_dev = (w.rowwise().sum() - a.mults.cast<double>()).cwiseAbs().maxCoeff();
  const double col_dev =
      (w.colwise().sum().transpose() - b.mults.cast<double>()).cwiseAbs().maxCoeff();
  if (std::max(row_dev, col_dev) > 1e-6 * m_dim) {
    throw Error("InvalidOverlaps",
                "overlap row/column sums must equal the multiplicities (deviation " +
                    std::to_string(std::max(row_dev, col_dev)) + ")");
  }

  DetEquivBreakdown out;
  out.alpha1 = alpha_coefficient(a);
  out.alpha2 = alpha_coefficient(b);
  out.beta1 = beta_coefficients(a);
  out.beta2 = beta_coefficients(b);
  out.undersampled1 = a.undersampled();
  out.undersampled2 = b.undersampled();

  // Canonical orientation: order the spectra (ties broken on the overlap
  // entries) so swapped calls evaluate the same sum in the same order.
  int cmp = model_cmp(a, b);
  if (cmp == 0) cmp = matrix_cmp(w, w.transpose());
  if (cmp <= 0) {
    out.cross = bilinear_form(out.beta1, w, out.beta2) / m_dim;
  } else {
    out.cross = bilinear_form(out.beta2, w.transpose(), out.beta1) / m_dim;
  }
  out.total = out.alpha1 + out.alpha2 - 2.0 * out.cross;
  return out;
}

double comparison_det_equiv(const CovarianceModel& a, const CovarianceModel& b, Metric metric) {
  if (a.spectrum.dim != b.spectrum.dim) {
    throw Error("DimMismatch", "models must share the ambient dimension M");
  }
  const double m_dim = a.spectrum.dim;
  const double n1 = a.spectrum.sample_size;
  const double n2 = b.spectrum.sample_size;
  switch (metric) {
    case Metric::log_euclidean: {
      const OverlapMatrix w = projector_overlaps(a, b, OverlapMode::explicit_bases);
      return le_det_equiv(a.spectrum, b.spectrum, w).total;
    }
    case Metric::euclidean: {
      const Eigen::MatrixXcd r1 = a.dense();
      const Eigen::MatrixXcd r2 = b.dense();
      const double t1 = r1.trace().real() / m_dim;
      const double t2 = r2.trace().real() / m_dim;
      return (r1 - r2).squaredNorm() / m_dim + (m_dim / n1) * t1 * t1 + (m_dim / n2) * t2 * t2;
    }
    case Metric::symmetrized_kl: {
      if (a.spectrum.undersampled() || b.spectrum.undersampled()) {
        throw Error("UndersampledKL",
                    "the symmetrized-KL deterministic equivalent requires N > M on both sides");
      }
      const Eigen::MatrixXcd r1 = a.dense();
      const Eigen::MatrixXcd r2 = b.dense();
      const double t12 = Eigen::LLT<Eigen::MatrixXcd>(r1).solve(r2).trace().real();
      const double t21 = Eigen::LLT<Eigen::MatrixXcd>(r2).solve(r1).trace().real();
      return t12 / (1.0 - m_dim / n1) / (2.0 * m_dim) + t21 / (1.0 - m_dim / n2) / (2.0 * m_dim) -
             1.0;
    }
  }
  throw Error("ConfigError", "unknown metric");
}

double population_distance(const CovarianceModel& a, const CovarianceModel& b, Metric metric) {
  if (a.spectrum.dim != b.spectrum.dim) {
    throw Error("DimMismatch", "models must share the ambient dimension M");
  }
  const double m_dim = a.spectrum.dim;
  switch (metric) {
    case Metric::log_euclidean:
      return (a.dense_log() - b.dense_log()).squaredNorm() / m_dim;
    case Metric::euclidean:
      return (a.dense() - b.dense()).squaredNorm() / m_dim;
    case Metric::symmetrized_kl: {
      const Eigen::MatrixXcd r1 = a.dense();
      const Eigen::MatrixXcd r2 = b.dense();
      const double t12 = Eigen::LLT<Eigen::MatrixXcd>(r1).solve(r2).trace().real();
      const double t21 = Eigen::LLT<Eigen::MatrixXcd>(r2).solve(r1).trace().real();
      return (t12 + t21) / (2.0 * m_dim) - 1.0;
    }
  }
  throw Error("ConfigError", "unknown metric");
}

}  // namespace covdist
