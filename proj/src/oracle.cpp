#include "covdist/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "covdist/error.hpp"
#include "covdist/internal/reduction.hpp"

namespace covdist {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on the Legendre
// recurrence, cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double deriv = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      deriv = n * (t * p0 - p1) / (t * t - 1.0);
      const double dt = -p0 / deriv;
      t += dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * deriv * deriv);
  }
  return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

// Distance from z to the singular set: the support interval [lo, hi], the
// origin, and for n_type contours the branch cut (-inf, 0].
double singular_distance(cplx z, double lo, double hi, bool branch_cut) {
  const double re = z.real(), im = z.imag();
  double dx = 0.0;
  if (re < lo) {
    dx = lo - re;
  } else if (re > hi) {
    dx = re - hi;
  }
  double d = std::min(std::hypot(dx, im), std::abs(z));
  if (branch_cut && re <= 0.0) d = std::min(d, std::abs(im));
  return d;
}

}  // namespace

Contour make_contour(const SupportEdges& edges, Contour::Kind kind, int n_nodes, double mu0) {
  if (n_nodes < 64 || n_nodes % 4 != 0) {
    throw Error("DegenerateContour", "node budget must be >= 64 and a multiple of 4");
  }
  if (!(edges.lower > 0.0) || !(edges.upper > edges.lower) || !(edges.margin > 0.0)) {
    throw Error("DegenerateContour", "support edges are degenerate");
  }
  Contour out;
  out.kind = kind;
  out.right = edges.upper + edges.margin;
  if (kind == Contour::Kind::n_type) {
    out.left = edges.lower - edges.margin;
    if (!(out.left > 0.0)) {
      throw Error("DegenerateContour", "n_type left edge must stay right of the origin");
    }
  } else {
    out.left = std::min(-0.5 * edges.lower, 1.5 * mu0);
  }
  out.half_height = std::max(edges.lower, (out.right - out.left) / 8.0);

  const bool branch_cut = (kind == Contour::Kind::n_type);
  const double len_floor = 1e-9 * (out.right - out.left + 2.0 * out.half_height);
  const auto dist = [&](cplx z) { return singular_distance(z, edges.lower, edges.upper, branch_cut); };

  // Clockwise corners, panels graded by distance to the singular set.
  const cplx tl(out.left, out.half_height), tr(out.right, out.half_height);
  const cplx br(out.right, -out.half_height), bl(out.left, -out.half_height);
  std::vector<std::pair<cplx, cplx>> panels;
  const std::function<void(cplx, cplx, int)> subdivide = [&](cplx a, cplx b, int depth) {
    const double len = std::abs(b - a);
    const double reach = std::min({dist(a), dist(0.5 * (a + b)), dist(b)});
    if (depth >= 60 || len <= std::max(reach, len_floor)) {
      panels.emplace_back(a, b);
      return;
    }
    const cplx mid = 0.5 * (a + b);
    subdivide(a, mid, depth + 1);
    subdivide(mid, b, depth + 1);
  };
  subdivide(tl, tr, 0);
  subdivide(tr, br, 0);
  subdivide(br, bl, 0);
  subdivide(bl, tl, 0);

  const int order = std::clamp(n_nodes / static_cast<int>(panels.size()), 4, 48);
  const auto& [gx, gw] = gauss_legendre(order);
  out.nodes.reserve(panels.size() * order);
  out.weights.reserve(panels.size() * order);
  for (const auto& [a, b] : panels) {
    const cplx center = 0.5 * (a + b);
    const cplx half = 0.5 * (b - a);
    for (int j = 0; j < order; ++j) {
      out.nodes.push_back(center + half * gx[j]);
      out.weights.push_back(half * gw[j]);
    }
  }
  return out;
}

Eigen::VectorXcd qbar_kernel(const SpectralModel& model, std::complex<double> z) {
  const cplx omega = solve_omega(model, z);
  Eigen::VectorXcd q(model.mbar());
  for (int m = 0; m < model.mbar(); ++m) q[m] = (omega / z) / (model.gammas[m] - omega);
  return q;
}

Eigen::MatrixXcd qbar(const SpectralModel& model, const Eigen::MatrixXcd& basis,
                      std::complex<double> z) {
  if (basis.rows() != model.dim || basis.cols() != model.dim) {
    throw Error("DimMismatch", "basis must be M x M");
  }
  const Eigen::VectorXcd kernel = qbar_kernel(model, z);
  Eigen::VectorXcd expanded(model.dim);
  int pos = 0;
  for (int m = 0; m < model.mbar(); ++m) {
    expanded.segment(pos, model.mults[m]).setConstant(kernel[m]);
    pos += model.mults[m];
  }
  return basis * expanded.asDiagonal() * basis.adjoint();
}

double resolvent_identity_check(const SpectralModel& model, const Contour& contour) {
  const std::size_t n = contour.nodes.size();
  std::vector<Eigen::VectorXcd> kernels(n);
  internal::parallel_for(n, [&](std::size_t i) { kernels[i] = qbar_kernel(model, contour.nodes[i]); });
  const cplx scale = 1.0 / cplx(0.0, 2.0 * kPi);
  double dev2 = 0.0;
  for (int m = 0; m < model.mbar(); ++m) {
    const cplx c =
        scale * internal::pairwise_sum<cplx>(n, [&](std::size_t i) { return contour.weights[i] * kernels[i][m]; });
    dev2 += model.mults[m] * std::norm(c - 1.0);
  }
  return std::sqrt(dev2);
}

EigContourSums contour_sums(const SpectralModel& model, const Contour& contour) {
  if (contour.kind != Contour::Kind::n_type) {
    throw Error("BranchCutCrossed", "log-moment contour sums require an n_type contour");
  }
  const std::size_t n = contour.nodes.size();
  std::vector<Eigen::VectorXcd> kernels(n);
  std::vector<cplx> logs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(contour.nodes[i].real() > 0.0)) {
      throw Error("BranchCutCrossed", "contour node touches the branch cut Re z <= 0");
    }
  }
  internal::parallel_for(n, [&](std::size_t i) {
    kernels[i] = qbar_kernel(model, contour.nodes[i]);
    logs[i] = std::log(contour.nodes[i]);
  });
  const cplx scale = 1.0 / cplx(0.0, 2.0 * kPi);
  EigContourSums out;
  out.resolvent.resize(model.mbar());
  out.log_once.resize(model.mbar());
  out.log_twice.resize(model.mbar());
  for (int m = 0; m < model.mbar(); ++m) {
    out.resolvent[m] =
        scale * internal::pairwise_sum<cplx>(n, [&](std::size_t i) { return contour.weights[i] * kernels[i][m]; });
    out.log_once[m] = scale * internal::pairwise_sum<cplx>(n, [&](std::size_t i) {
                        return contour.weights[i] * logs[i] * kernels[i][m];
                      });
    out.log_twice[m] = scale * internal::pairwise_sum<cplx>(n, [&](std::size_t i) {
                         return contour.weights[i] * logs[i] * logs[i] * kernels[i][m];
                       });
  }
  return out;
}

Eigen::VectorXd beta_numeric(const SpectralModel& model, const Contour& contour) {
  const EigContourSums sums = contour_sums(model, contour);
  Eigen::VectorXd out(model.mbar());
  for (int m = 0; m < model.mbar(); ++m) {
    const cplx b = sums.log_once[m];
    if (std::abs(b.imag()) > 1e-9 * (1.0 + std::abs(b.real()))) {
      throw Error("InternalInvariantViolation",
                  "log-moment has imaginary residue " + std::to_string(b.imag()));
    }
    out[m] = b.real();
  }
  return out;
}

double alpha_numeric(const SpectralModel& model, const Contour& contour) {
  const EigContourSums sums = contour_sums(model, contour);
  cplx acc = 0.0;
  for (int m = 0; m < model.mbar(); ++m) {
    acc += static_cast<double>(model.mults[m]) * sums.log_twice[m];
  }
  acc /= static_cast<double>(model.dim);
  if (std::abs(acc.imag()) > 1e-9 * (1.0 + std::abs(acc.real()))) {
    throw Error("InternalInvariantViolation",
                "squared-log moment has imaginary residue " + std::to_string(acc.imag()));
  }
  return acc.real();
}

Eigen::MatrixXcd theta_numeric(const CovarianceModel& model, const Contour& contour) {
  const Eigen::VectorXd beta = beta_numeric(model.spectrum, contour);
  Eigen::VectorXd expanded(model.spectrum.dim);
  int pos = 0;
  for (int m = 0; m < model.spectrum.mbar(); ++m) {
    expanded.segment(pos, model.spectrum.mults[m]).setConstant(beta[m]);
    pos += model.spectrum.mults[m];
  }
  const Eigen::MatrixXcd theta = model.basis * expanded.asDiagonal() * model.basis.adjoint();
  return 0.5 * (theta + theta.adjoint());
}

Eigen::VectorXcd resolvent_moments(const SpectralModel& model, const Contour& contour) {
  const std::size_t n = contour.nodes.size();
  std::vector<Eigen::VectorXcd> kernels(n);
  internal::parallel_for(n, [&](std::size_t i) { kernels[i] = qbar_kernel(model, contour.nodes[i]); });
  const cplx scale = 1.0 / cplx(0.0, 2.0 * kPi);
  Eigen::VectorXcd out(model.mbar());
  for (int m = 0; m < model.mbar(); ++m) {
    out[m] = scale * internal::pairwise_sum<cplx>(
                         n, [&](std::size_t i) { return contour.weights[i] * kernels[i][m]; });
  }
  return out;
}

ContourFamily make_contour_family(const SpectralModel& a, const SpectralModel& b, int n_nodes) {
  const SupportEdges edges_a = support_edges(a);
  const SupportEdges edges_b = support_edges(b);
  ContourFamily family;
  family.n_a = make_contour(edges_a, Contour::Kind::n_type, n_nodes);
  family.n_b = make_contour(edges_b, Contour::Kind::n_type, n_nodes);
  family.z_a = make_contour(edges_a, Contour::Kind::z_type, n_nodes, mu_roots(a).mu0());
  family.z_b = make_contour(edges_b, Contour::Kind::z_type, n_nodes, mu_roots(b).mu0());
  return family;
}

double dle_numeric(const SpectralModel& a, const SpectralModel& b, const OverlapMatrix& overlaps,
                   const ContourFamily& contours) {
  if (a.dim != b.dim) throw Error("DimMismatch", "models must share the ambient dimension M");
  if (overlaps.w.rows() != a.mbar() || overlaps.w.cols() != b.mbar()) {
    throw Error("DimMismatch", "overlap matrix shape mismatch");
  }
  const EigContourSums sa = contour_sums(a, contours.n_a);
  const EigContourSums sb = contour_sums(b, contours.n_b);
  const Eigen::VectorXcd za = resolvent_moments(a, contours.z_a);
  const Eigen::VectorXcd zb = resolvent_moments(b, contours.z_b);
  // Tensor-product quadrature of the three bilinear blocks:
  // log^2(n) x resolvent(z), -2 log(n) x log(n), resolvent(z) x log^2(n).
  const cplx total = internal::pairwise_sum<cplx>(static_cast<std::size_t>(a.mbar()), [&](std::size_t k) {
    const cplx inner = internal::pairwise_sum<cplx>(static_cast<std::size_t>(b.mbar()), [&](std::size_t m) {
      const cplx block = sa.log_twice[k] * zb[m] - 2.0 * sa.log_once[k] * sb.log_once[m] +
                         za[k] * sb.log_twice[m];
      return overlaps.w(k, m) * block;
    });
    return inner;
  }) / static_cast<double>(a.dim);
  if (std::abs(total.imag()) > 1e-8 * (1.0 + std::abs(total.real()))) {
    throw Error("InternalInvariantViolation",
                "distance quadrature has imaginary residue " + std::to_string(total.imag()));
  }
  return total.real();
}

}  // namespace covdist
