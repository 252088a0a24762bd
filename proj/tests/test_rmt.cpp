#include <cmath>
#include <complex>

#include <doctest.h>

#include "covdist/experiment.hpp"
#include "covdist/rmt.hpp"
#include "test_util.hpp"

using namespace covdist;
using cplx = std::complex<double>;

TEST_CASE("secular roots: two-eigenvalue oversampled model in closed form") {
  // gamma = {1, 3}, K = {1, 1}, N = 4: mu(1 - Psi(mu)) = 0 factors to
  // mu (mu^2 - 3 mu + 3/2) = 0 -> roots {0, (3 - sqrt 3)/2, (3 + sqrt 3)/2}.
  const MuRoots r = mu_roots(make_spectral_model({1.0, 3.0}, {1, 1}, 4));
  REQUIRE(r.mu.size() == 3);
  CHECK_FALSE(r.undersampled);
  CHECK(r.mu[0] == 0.0);
  CHECK(r.mu[1] == doctest::Approx((3.0 - std::sqrt(3.0)) / 2.0).epsilon(1e-13));
  CHECK(r.mu[2] == doctest::Approx((3.0 + std::sqrt(3.0)) / 2.0).epsilon(1e-13));
}

TEST_CASE("secular roots: white undersampled model in closed form") {
  // gamma = {1}, K = {2}, N = 1: roots of mu(1 - 2/(1-mu)) = 0 with the
  // negative branch: mu_0 = -1, mu_1 = 0, and Gamma(mu_0) = 1/2.
  const MuRoots r = mu_roots(make_spectral_model({1.0}, {2}, 1));
  REQUIRE(r.mu.size() == 2);
  CHECK(r.undersampled);
  CHECK(r.mu[0] == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(r.mu[1] == 0.0);
  CHECK(r.gamma0 == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("secular roots: four-eigenvalue reference models") {
  const MuRoots over = mu_roots(make_spectral_model({1, 6, 15, 25}, {1, 2, 3, 4}, 30));
  const double want_over[5] = {0.0, 0.9506473758313998, 5.412561530352387, 13.076264067886557,
                               22.293860359262986};
  for (int i = 0; i < 5; ++i) CHECK(over.mu[i] == doctest::Approx(want_over[i]).epsilon(1e-12));

  const MuRoots under = mu_roots(make_spectral_model({1, 6, 15, 25}, {1, 2, 3, 4}, 3));
  const double want_under[5] = {-32.97832432160398, 0.0, 1.1446903226790655, 7.417393137158651,
                                18.749574195099594};
  for (int i = 0; i < 5; ++i) CHECK(under.mu[i] == doctest::Approx(want_under[i]).epsilon(1e-12));
  CHECK(under.gamma0 == doctest::Approx(0.36173610074868595).epsilon(1e-12));
  CHECK(under.gamma0 > 0.0);
  CHECK(under.gamma0 < 1.0);
}

TEST_CASE("secular roots: interlacing and shifts on randomized spectra") {
  RngStream stream(555, 0);
  for (int i = 0; i < 200; ++i) {
    const SpectralModel model = cli::random_spectral_model(stream, 6, i % 2 == 1);
    const MuRoots r = mu_roots(model);
    REQUIRE(r.mu.size() == model.mbar() + 1);
    if (model.undersampled()) {
      CHECK(r.mu[0] < 0.0);
      CHECK(r.mu[1] == 0.0);
    } else {
      CHECK(r.mu[0] == 0.0);
      CHECK(r.mu[1] > 0.0);
      CHECK(r.mu[1] < model.gammas[0]);
    }
    for (int m = 2; m <= model.mbar(); ++m) {
      CHECK(r.mu[m] > model.gammas[m - 2]);
      CHECK(r.mu[m] < model.gammas[m - 1]);
    }
    for (int m = 0; m <= model.mbar(); ++m) {
      CHECK(r.mu_shift[m] == doctest::Approx(r.mu[m] - r.mu[0]).epsilon(1e-14));
    }
    // Product identity ties the shifted roots to the curvature at mu_0.
    double prod = 1.0;
    for (int m = 1; m <= model.mbar(); ++m) prod *= r.mu_shift[m] / r.gamma_shift[m - 1];
    CHECK(prod == doctest::Approx(1.0 - r.gamma0).epsilon(1e-10));
  }
}

TEST_CASE("resolvent argument map: white-model value and functional inverse") {
  const SpectralModel w = make_spectral_model({1.0}, {10}, 20);
  // z = 4: omega solves omega^2 - 4.5 omega + 4 = 0, outer root
  // (4.5 + sqrt(4.25))/2.
  const cplx omega = solve_omega(w, cplx(4.0, 0.0));
  CHECK(omega.real() == doctest::Approx((4.5 + std::sqrt(4.25)) / 2.0).epsilon(1e-12));
  CHECK(std::abs(omega.imag()) < 1e-12);
  CHECK(std::abs(z_of_omega(w, omega) - cplx(4.0, 0.0)) < 1e-9);
}

TEST_CASE("resolvent argument map: inversion on both real tails") {
  RngStream stream(777, 0);
  for (int i = 0; i < 60; ++i) {
    const SpectralModel model = cli::random_spectral_model(stream, 5, i % 2 == 1);
    const double top = model.gammas[model.mbar() - 1];
    // Right tail: omega above every eigenvalue.
    const double wr = top * (1.1 + 9.0 * stream.uniform());
    if (gamma_fn(model, wr) < 1.0) {
      const double z = z_of_omega(model, wr);
      CHECK(std::abs(solve_omega(model, cplx(z, 0.0)).real() - wr) <=
            1e-9 * std::max(1.0, std::abs(wr)));
    }
    // Left tail: negative omega (below mu_0 when undersampled).
    double wl = -top * (0.1 + 5.0 * stream.uniform());
    if (model.undersampled()) wl += mu_roots(model).mu0() * 1.0001;
    if (gamma_fn(model, wl) < 1.0) {
      const double z = z_of_omega(model, wl);
      CHECK(std::abs(solve_omega(model, cplx(z, 0.0)).real() - wl) <=
            1e-9 * std::max(1.0, std::abs(wl)));
    }
  }
}

TEST_CASE("resolvent argument map: complex half-plane selection and conjugacy") {
  RngStream stream(999, 0);
  for (int i = 0; i < 60; ++i) {
    const SpectralModel model = cli::random_spectral_model(stream, 5, i % 2 == 1);
    const double top = model.gammas[model.mbar() - 1];
    const cplx z(top * (2.0 * stream.uniform() - 0.5), top * (0.05 + stream.uniform()));
    const cplx omega = solve_omega(model, z);
    CHECK(omega.imag() > 0.0);  // sign(Im omega) == sign(Im z)
    CHECK(std::abs(z_of_omega(model, omega) - z) <= 1e-9 * std::abs(z));
    const cplx conj_omega = solve_omega(model, std::conj(z));
    CHECK(std::abs(conj_omega - std::conj(omega)) <= 1e-9 * std::abs(omega));
  }
}

TEST_CASE("resolvent argument map: derivative equals one minus curvature") {
  const SpectralModel model = make_spectral_model({1, 6, 15, 25}, {1, 2, 3, 4}, 30);
  for (double w : {-3.0, -0.7, 27.0, 40.0, 90.0}) {
    const double h = 1e-6 * std::max(1.0, std::abs(w));
    const double fd = (z_of_omega(model, w + h) - z_of_omega(model, w - h)) / (2.0 * h);
    CHECK(fd == doctest::Approx(1.0 - gamma_fn(model, w)).epsilon(1e-6));
  }
}

TEST_CASE("resolvent argument map: errors") {
  const SpectralModel w = make_spectral_model({1.0}, {10}, 20);
  REQUIRE_ERROR_CODE("PoleEvaluation", (void)z_of_omega(w, 1.0));
  // z = 1 sits inside the support [~0.086, ~2.914]: no admissible branch.
  REQUIRE_ERROR_CODE("NoRootSatisfiesSelection", (void)solve_omega(w, cplx(1.0, 0.0)));
}

TEST_CASE("support enclosure: closed form and margin") {
  // gamma = {1,...,25}, M/N = 2/3: lower edge (1 - sqrt(2/3))^2 * 1.
  const SpectralModel model = make_spectral_model({1, 6, 15, 25}, {1, 2, 3, 4}, 15);
  const SupportEdges e = support_edges(model);
  CHECK(e.lower == doctest::Approx(0.0336735048112146).epsilon(1e-12));
  CHECK(e.upper ==
        doctest::Approx(std::pow(1.0 + std::sqrt(2.0 / 3.0), 2.0) * 25.0).epsilon(1e-14));
  CHECK(e.margin == doctest::Approx(0.25 * e.lower).epsilon(1e-14));
  const SupportEdges wide = support_edges(model, 0.5);
  CHECK(wide.margin == doctest::Approx(0.5 * e.lower).epsilon(1e-14));
  REQUIRE_ERROR_CODE("DomainError", support_edges(model, 0.0));
  REQUIRE_ERROR_CODE("DomainError", support_edges(model, 1.0));
}
