#include "covdist/rmt.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "covdist/error.hpp"

namespace covdist {
namespace {

using cplx = std::complex<double>;

double psi(const SpectralModel& mod, double mu) {
  double s = 0.0;
  for (int m = 0; m < mod.mbar(); ++m) s += mod.mults[m] * mod.gammas[m] / (mod.gammas[m] - mu);
  return s / mod.sample_size;
}

double psi_prime(const SpectralModel& mod, double mu) {
  double s = 0.0;
  for (int m = 0; m < mod.mbar(); ++m) {
    const double d = mod.gammas[m] - mu;
    s += mod.mults[m] * mod.gammas[m] / (d * d);
  }
  return s / mod.sample_size;
}

double psi_abs(const SpectralModel& mod, double mu) {
  double s = 0.0;
  for (int m = 0; m < mod.mbar(); ++m) s += mod.mults[m] * mod.gammas[m] / std::abs(mod.gammas[m] - mu);
  return s / mod.sample_size;
}

// Root of h(mu) = 1 - psi(mu) on a bracket where h is decreasing with
// h(lo) > 0 > h(hi): bisection to relative width 1e-13, then a few guarded
// Newton steps, then a residual check at 1e-10 relative.
double bisect_newton(const SpectralModel& mod, double lo, double hi) {
  const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * scale; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - psi(mod, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 5; ++it) {
    const double h = 1.0 - psi(mod, x);
    const double hp = -psi_prime(mod, x);
    if (!(std::abs(hp) > 0.0)) break;
    const double next = x - h / hp;
    if (!(next > lo && next < hi)) break;
    x = next;
  }
  const double residual = std::abs(1.0 - psi(mod, x));
  if (residual > 1e-10 * std::max(1.0, psi_abs(mod, x))) {
    throw Error("InternalInvariantViolation",
                "secular-equation root residual " + std::to_string(residual) + " exceeds 1e-10");
  }
  return x;
}

// Local pole-tolerant evaluators used by the Newton polish in solve_omega
// (the public ones throw on pole proximity, which is the wrong behavior for
// a transient iterate).
cplx z_eval(const SpectralModel& mod, cplx w) {
  cplx s = 0.0;
  for (int m = 0; m < mod.mbar(); ++m) s += mod.mults[m] * mod.gammas[m] / (mod.gammas[m] - w);
  return w * (1.0 - s / static_cast<double>(mod.sample_size));
}

cplx gamma_eval(const SpectralModel& mod, cplx w) {
  cplx s = 0.0;
  for (int m = 0; m < mod.mbar(); ++m) {
    const cplx r = mod.gammas[m] / (mod.gammas[m] - w);
    s += static_cast<double>(mod.mults[m]) * r * r;
  }
  return s / static_cast<double>(mod.sample_size);
}

void check_pole(const SpectralModel& mod, cplx omega) {
  for (int m = 0; m < mod.mbar(); ++m) {
    if (std::abs(omega - mod.gammas[m]) < 1e-14 * mod.gammas[m]) {
      throw Error("PoleEvaluation",
                  "omega collides with eigenvalue gamma_" + std::to_string(m + 1));
    }
  }
}

// Ascending-coefficient product of (gamma_r - w) over r != skip (skip < 0
// keeps every factor).
Eigen::VectorXd poly_gap_product(const SpectralModel& mod, int skip) {
  Eigen::VectorXd p(1);
  p[0] = 1.0;
  for (int m = 0; m < mod.mbar(); ++m) {
    if (m == skip) continue;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(p.size() + 1);
    q.head(p.size()) += mod.gammas[m] * p;
    q.tail(p.size()) -= p;
    p = std::move(q);
  }
  return p;
}

}  // namespace

MuRoots mu_roots(const SpectralModel& model) {
  const int mb = model.mbar();
  MuRoots out;
  out.undersampled = model.undersampled();
  out.mu.resize(mb + 1);

  constexpr double kInset = 1e-12;  // relative inward shrink keeping brackets off the poles
  if (!out.undersampled) {
    out.mu[0] = 0.0;
    out.mu[1] = bisect_newton(model, 0.0, model.gammas[0] * (1.0 - kInset));
  } else {
    out.mu[1] = 0.0;
    double lo = -model.gammas[0];
    int guard = 0;
    while (1.0 - psi(model, lo) <= 0.0) {
      lo *= 2.0;
      if (++guard > 2000) {
        throw Error("InternalInvariantViolation", "failed to bracket the negative root");
      }
    }
    out.mu[0] = bisect_newton(model, lo, 0.0);
  }
  for (int m = 2; m <= mb; ++m) {
    const double lo = model.gammas[m - 2] * (1.0 + kInset);
    const double hi = model.gammas[m - 1] * (1.0 - kInset);
    out.mu[m] = bisect_newton(model, lo, hi);
  }

  out.mu_shift = out.mu.array() - out.mu[0];
  out.gamma_shift = model.gammas - out.mu[0];
  out.gamma0 = gamma_fn(model, out.mu[0]);
  if (!(out.gamma0 > 0.0 && out.gamma0 < 1.0)) {
    throw Error("InternalInvariantViolation",
                "Gamma(mu_0) = " + std::to_string(out.gamma0) + " is outside (0, 1)");
  }
  return out;
}

std::complex<double> z_of_omega(const SpectralModel& model, std::complex<double> omega) {
  check_pole(model, omega);
  return z_eval(model, omega);
}

double z_of_omega(const SpectralModel& model, double omega) {
  return z_of_omega(model, cplx(omega, 0.0)).real();
}

std::complex<double> gamma_fn(const SpectralModel& model, std::complex<double> omega) {
  check_pole(model, omega);
  return gamma_eval(model, omega);
}

double gamma_fn(const SpectralModel& model, double omega) {
  return gamma_fn(model, cplx(omega, 0.0)).real();
}

std::complex<double> solve_omega(const SpectralModel& model, std::complex<double> z) {
  if (std::abs(z) == 0.0) throw Error("DomainError", "solve_omega requires z != 0");
  const int mb = model.mbar();
  const int deg = mb + 1;
  const double n = model.sample_size;

  // Clear denominators in z = z(omega): with p(w) = prod_m (gamma_m - w),
  //   P(w) = z p(w) - w p(w) + w (1/N) sum_m K_m gamma_m prod_{r != m} (gamma_r - w)
  // whose leading coefficient is -(-1)^mb, never zero.
  const Eigen::VectorXd p_all = poly_gap_product(model, -1);
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(mb);
  for (int m = 0; m < mb; ++m) {
    weighted += (model.mults[m] * model.gammas[m] / n) * poly_gap_product(model, m);
  }
  Eigen::VectorXcd coef = Eigen::VectorXcd::Zero(deg + 1);
  coef.head(mb + 1) += z * p_all.cast<cplx>();
  coef.segment(1, mb + 1) -= p_all.cast<cplx>();
  coef.segment(1, mb) += weighted.cast<cplx>();

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -coef[i] / coef[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error("EigFailure", "companion eigensolve did not converge");
  }
  const Eigen::VectorXcd roots = es.eigenvalues();

  const auto near_any_pole = [&](cplx w) {
    for (int m = 0; m < mb; ++m) {
      if (std::abs(w - model.gammas[m]) < 1e-13 * model.gammas[m]) return true;
    }
    return false;
  };
  const auto polish = [&](cplx w) {
    for (int it = 0; it < 6; ++it) {
      if (near_any_pole(w)) break;
      const cplx f = z_eval(model, w) - z;
      const cplx d = 1.0 - gamma_eval(model, w);
      if (!std::isfinite(std::abs(f)) || !(std::abs(d) > 0.0)) break;
      const cplx next = w - f / d;
      if (!std::isfinite(std::abs(next))) break;
      w = next;
      if (std::abs(f) < 1e-14 * std::abs(z)) break;
    }
    return w;
  };
  const auto residual_ok = [&](cplx w) {
    return !near_any_pole(w) && std::abs(z_eval(model, w) - z) <= 1e-9 * std::abs(z);
  };

  if (std::abs(z.imag()) > 1e-13 * std::abs(z)) {
    // Exactly one candidate lies in the same half-plane as z.
    const double sign = (z.imag() > 0.0) ? 1.0 : -1.0;
    int best = -1;
    double best_im = 0.0;
    for (int i = 0; i < deg; ++i) {
      const double s = sign * roots[i].imag();
      if (s > best_im) {
        best_im = s;
        best = i;
      }
    }
    if (best < 0) {
      throw Error("NoRootSatisfiesSelection", "no candidate root in the half-plane of z");
    }
    const cplx w = polish(roots[best]);
    if (!(sign * w.imag() > 0.0) || !residual_ok(w)) {
      throw Error("NoRootSatisfiesSelection", "half-plane candidate failed the residual check");
    }
    return w;
  }

  // Real z: keep real candidates with Gamma(omega) < 1; exactly one must
  // survive.
  std::vector<double> kept;
  for (int i = 0; i < deg; ++i) {
    if (std::abs(roots[i].imag()) > 1e-8 * std::max(1.0, std::abs(roots[i]))) continue;
    double w = polish(cplx(roots[i].real(), 0.0)).real();
    if (!residual_ok(cplx(w, 0.0))) continue;
    if (!(gamma_eval(model, cplx(w, 0.0)).real() < 1.0)) continue;
    bool dup = false;
    for (double u : kept) {
      if (std::abs(u - w) <= 1e-9 * std::max({1.0, std::abs(u), std::abs(w)})) dup = true;
    }
    if (!dup) kept.push_back(w);
  }
  if (kept.empty()) {
    throw Error("NoRootSatisfiesSelection",
                "no real candidate with Gamma(omega) < 1; z likely lies inside the support");
  }
  if (kept.size() > 1) {
    throw Error("AmbiguousSelection",
                std::to_string(kept.size()) + " real candidates with Gamma(omega) < 1");
  }
  return {kept.front(), 0.0};
}

SupportEdges support_edges(const SpectralModel& model, double epsilon_frac) {
  if (!(epsilon_frac > 0.0 && epsilon_frac < 1.0)) {
    throw Error("DomainError", "epsilon_frac must lie in (0, 1)");
  }
  const double root_c = std::sqrt(model.ratio());
  SupportEdges out;
  out.lower = (1.0 - root_c) * (1.0 - root_c) * model.gammas[0];
  out.upper = (1.0 + root_c) * (1.0 + root_c) * model.gammas[model.mbar() - 1];
  out.margin = epsilon_frac * out.lower;
  return out;
}

}  // namespace covdist
