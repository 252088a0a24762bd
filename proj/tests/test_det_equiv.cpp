#include <cmath>
#include <vector>

#include <doctest.h>

#include "covdist/det_equiv.hpp"
#include "covdist/experiment.hpp"
#include "benchmark_series.hpp"
#include "test_util.hpp"

using namespace covdist;
using covdist_tests::rel_dev;

namespace {

// Benchmark spectra instantiated at dimension M (multiplicities scale with M).
SpectralModel bench_model(const std::array<double, 4>& fractions, int m_dim, double ratio) {
  std::vector<int> mults;
  for (double f : fractions) mults.push_back(static_cast<int>(std::lround(f * m_dim)));
  return make_spectral_model({1.0, 6.0, 15.0, 25.0}, mults,
                             static_cast<int>(std::lround(ratio * m_dim)));
}

OverlapMatrix identity_basis_overlaps(const SpectralModel& a, const SpectralModel& b) {
  return projector_overlaps(covariance_model(a), covariance_model(b),
                            OverlapMode::explicit_bases);
}

}  // namespace

TEST_CASE("log-moment coefficients: white models in closed form") {
  // c = M/N = 1/2: beta = log 2 - 1.  c = 2: beta = log 2 - 1/2.
  const Eigen::VectorXd b_half = beta_coefficients(make_spectral_model({1.0}, {10}, 20));
  REQUIRE(b_half.size() == 1);
  CHECK(b_half[0] == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-13));

  const Eigen::VectorXd b_two = beta_coefficients(make_spectral_model({1.0}, {10}, 5));
  REQUIRE(b_two.size() == 1);
  CHECK(b_two[0] == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-12));
}

TEST_CASE("log-moment coefficients: four-eigenvalue reference models") {
  const Eigen::VectorXd b3 = beta_coefficients(make_spectral_model({1, 6, 15, 25}, {1, 2, 3, 4}, 30));
  const double want3[4] = {-0.3244768865461356, 1.5601754466891382, 2.532941855401584,
                           3.0744438575904867};
  for (int i = 0; i < 4; ++i) CHECK(b3[i] == doctest::Approx(want3[i]).epsilon(1e-12));

  const Eigen::VectorXd b03 = beta_coefficients(make_spectral_model({1, 6, 15, 25}, {1, 2, 3, 4}, 3));
  const double want03[4] = {0.09662965627277624, 0.5281102841074657, 1.1424060506332754,
                            1.6633092929579791};
  for (int i = 0; i < 4; ++i) CHECK(b03[i] == doctest::Approx(want03[i]).epsilon(1e-12));
}

TEST_CASE("log-moment matrix: white model is a multiple of the identity") {
  const CovarianceModel white = covariance_model(make_spectral_model({1.0}, {10}, 20));
  const Eigen::MatrixXcd theta = theta_matrix(white);
  const Eigen::MatrixXcd want =
      (std::log(2.0) - 1.0) * Eigen::MatrixXcd::Identity(10, 10);
  CHECK((theta - want).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("quadratic self term: frozen reference values") {
  CHECK(alpha_coefficient(make_spectral_model({1.0}, {10}, 20)) ==
        doctest::Approx(0.8172806639737316).epsilon(1e-12));
  CHECK(alpha_coefficient(make_spectral_model({1.0}, {10}, 5)) ==
        doctest::Approx(0.43617267230422263).epsilon(1e-12));
  CHECK(alpha_coefficient(make_spectral_model({1, 6, 15, 25}, {1, 2, 3, 4}, 30)) ==
        doctest::Approx(6.568312603753204).epsilon(1e-12));
  CHECK(alpha_coefficient(make_spectral_model({1, 6, 15, 25}, {1, 2, 3, 4}, 3)) ==
        doctest::Approx(4.351606293319587).epsilon(1e-12));
}

TEST_CASE("squared-distance equivalent: white self-comparison frozen value") {
  const SpectralModel w = make_spectral_model({1.0}, {10}, 20);
  const DetEquivBreakdown d = le_det_equiv(w, w, identity_basis_overlaps(w, w));
  CHECK(d.total == doctest::Approx(1.4462440223508377).epsilon(1e-12));
  CHECK(d.alpha1 == d.alpha2);
  CHECK(d.total == doctest::Approx(d.alpha1 + d.alpha2 - 2.0 * d.cross).epsilon(1e-15));
}

TEST_CASE("squared-distance equivalent: benchmark asymptotes at M = 40") {
  struct Row {
    double r1, r2;
    bool same;
    double want;
  };
  const Row rows[3] = {{1.5, 3.0, true, 1.44312708035619},
                       {1.5, 3.0, false, 1.6975589049325},
                       {2.0, 8.0, false, 1.07332667748523}};
  for (const Row& row : rows) {
    const SpectralModel a = bench_model(covdist_tests::kFractionsA, 40, row.r1);
    const SpectralModel b = bench_model(
        row.same ? covdist_tests::kFractionsA : covdist_tests::kFractionsB, 40, row.r2);
    const DetEquivBreakdown d = le_det_equiv(a, b, identity_basis_overlaps(a, b));
    CHECK(rel_dev(d.total, row.want) < 1e-9);
  }
}

TEST_CASE("squared-distance equivalent: exact swap symmetry") {
  RngStream stream(31337, 0);
  for (int i = 0; i < 20; ++i) {
    const SpectralModel a = cli::random_spectral_model(stream, 5, i % 2 == 0, 12);
    const SpectralModel b = cli::random_spectral_model(stream, 5, i % 3 == 0, 12);
    const OverlapMatrix w = projector_overlaps(
        covariance_model(a, haar_basis(12, Field::complex, stream)),
        covariance_model(b, haar_basis(12, Field::complex, stream)), OverlapMode::explicit_bases);
    OverlapMatrix wt;
    wt.w = w.w.transpose();
    wt.mode = w.mode;
    const DetEquivBreakdown ab = le_det_equiv(a, b, w);
    const DetEquivBreakdown ba = le_det_equiv(b, a, wt);
    CHECK(ab.total == ba.total);  // bit-for-bit
    CHECK(ab.cross == ba.cross);
    CHECK(ab.alpha1 == ba.alpha2);
    CHECK((ab.beta1 - ba.beta2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ab.total >= -1e-9);
  }
}

TEST_CASE("squared-distance equivalent: scale behavior by sampling regime") {
  const double s = 3.7;
  // Oversampled pair: the distance only sees eigenvalue *ratios*, so a common
  // rescaling of both populations leaves it unchanged.
  const SpectralModel a = make_spectral_model({1, 4, 9}, {2, 2, 2}, 18);
  const SpectralModel b = make_spectral_model({0.5, 3, 9}, {3, 2, 1}, 12);
  const SpectralModel as = make_spectral_model({s, 4 * s, 9 * s}, {2, 2, 2}, 18);
  const SpectralModel bs = make_spectral_model({0.5 * s, 3 * s, 9 * s}, {3, 2, 1}, 12);
  const double base = le_det_equiv(a, b, identity_basis_overlaps(a, b)).total;
  const double scaled = le_det_equiv(as, bs, identity_basis_overlaps(as, bs)).total;
  CHECK(std::abs(scaled - base) <= 1e-8 * std::max(1.0, std::abs(base)));

  // Undersampled pair: the rank restriction of the sample logarithm breaks
  // scale invariance, and the difference is macroscopic.
  const SpectralModel ua = make_spectral_model({1, 4, 9}, {2, 2, 2}, 4);
  const SpectralModel uas = make_spectral_model({s, 4 * s, 9 * s}, {2, 2, 2}, 4);
  const double ubase = le_det_equiv(ua, ua, identity_basis_overlaps(ua, ua)).total;
  const double uscaled = le_det_equiv(uas, uas, identity_basis_overlaps(uas, uas)).total;
  CHECK(std::abs(uscaled - ubase) > 1e-3);
}

TEST_CASE("squared-distance equivalent: classical sample-rich limit") {
  // N = 10^4 M: the equivalent lands on the population distance.
  const SpectralModel a = make_spectral_model({1, 2, 5}, {2, 2, 2}, 60000);
  const SpectralModel b = make_spectral_model({0.5, 3, 9}, {3, 2, 1}, 60000);
  const CovarianceModel ca = covariance_model(a);
  const CovarianceModel cb = covariance_model(b);
  const double le = le_det_equiv(a, b, identity_basis_overlaps(a, b)).total;
  CHECK(std::abs(le - population_distance(ca, cb, Metric::log_euclidean)) < 1e-2);
  CHECK(std::abs(comparison_det_equiv(ca, cb, Metric::euclidean) -
                 population_distance(ca, cb, Metric::euclidean)) <
        1e-2 * std::max(1.0, population_distance(ca, cb, Metric::euclidean)));
  CHECK(std::abs(comparison_det_equiv(ca, cb, Metric::symmetrized_kl) -
                 population_distance(ca, cb, Metric::symmetrized_kl)) < 1e-2);
}

TEST_CASE("comparison metrics: identity populations at N = 2M give exactly one") {
  const CovarianceModel id = covariance_model(make_spectral_model({1.0}, {8}, 16));
  CHECK(comparison_det_equiv(id, id, Metric::euclidean) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(comparison_det_equiv(id, id, Metric::symmetrized_kl) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("comparison metrics: log-Euclidean delegates to the overlap form") {
  RngStream stream(4242, 0);
  const SpectralModel sa = cli::random_spectral_model(stream, 4, false, 10);
  const SpectralModel sb = cli::random_spectral_model(stream, 4, true, 10);
  const CovarianceModel a = covariance_model(sa, haar_basis(10, Field::complex, stream));
  const CovarianceModel b = covariance_model(sb, haar_basis(10, Field::complex, stream));
  const double via_comparison = comparison_det_equiv(a, b, Metric::log_euclidean);
  const double via_overlaps =
      le_det_equiv(sa, sb, projector_overlaps(a, b, OverlapMode::explicit_bases)).total;
  CHECK(via_comparison == via_overlaps);
}

TEST_CASE("comparison metrics: symmetrized KL requires oversampling") {
  const CovarianceModel over = covariance_model(make_spectral_model({1.0}, {8}, 16));
  const CovarianceModel under = covariance_model(make_spectral_model({1.0}, {8}, 4));
  REQUIRE_ERROR_CODE("UndersampledKL",
                     (void)comparison_det_equiv(over, under, Metric::symmetrized_kl));
  REQUIRE_ERROR_CODE("UndersampledKL",
                     (void)comparison_det_equiv(under, over, Metric::symmetrized_kl));
}

TEST_CASE("population distances: two-by-two closed forms") {
  const CovarianceModel eye2 = covariance_model(make_spectral_model({1.0}, {2}, 100));
  const CovarianceModel diag_e1 =
      covariance_model(make_spectral_model({1.0, std::exp(1.0)}, {1, 1}, 100));
  const CovarianceModel twice = covariance_model(make_spectral_model({2.0}, {2}, 100));
  // (1/2) tr[(log A - log B)^2] = 1/2 for A = diag(e, 1), B = I.
  CHECK(population_distance(diag_e1, eye2, Metric::log_euclidean) ==
        doctest::Approx(0.5).epsilon(1e-13));
  // (1/2) tr[(A - B)^2] = 1 for A = 2I, B = I.
  CHECK(population_distance(twice, eye2, Metric::euclidean) ==
        doctest::Approx(1.0).epsilon(1e-13));
  // (1/4) tr[(A - B)(B^{-1} - A^{-1})] = 1/4 for A = 2I, B = I.
  CHECK(population_distance(twice, eye2, Metric::symmetrized_kl) ==
        doctest::Approx(0.25).epsilon(1e-13));
  CHECK(population_distance(eye2, eye2, Metric::log_euclidean) == 0.0);
}

TEST_CASE("overlap validation: corrupted row sums are rejected") {
  const SpectralModel a = make_spectral_model({1.0, 3.0}, {2, 2}, 8);
  OverlapMatrix w = identity_basis_overlaps(a, a);
  w.w(0, 0) += 0.5;
  REQUIRE_ERROR_CODE("InvalidOverlaps", (void)le_det_equiv(a, a, w));
}
