#include "covdist/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "covdist/error.hpp"
#include "covdist/oracle.hpp"
#include "covdist/rmt.hpp"

namespace covdist::cli {
namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::log_euclidean:
      return "log-euclidean";
    case Metric::euclidean:
      return "euclidean";
    case Metric::symmetrized_kl:
      return "symmetrized-kl";
  }
  return "?";
}

Metric metric_from_name(const std::string& name) {
  if (name == "log-euclidean") return Metric::log_euclidean;
  if (name == "euclidean") return Metric::euclidean;
  if (name == "symmetrized-kl") return Metric::symmetrized_kl;
  throw Error("ConfigError", "unknown metric '" + name + "'");
}

std::string mode_name(OverlapMode mode) {
  return mode == OverlapMode::explicit_bases ? "explicit" : "haar-average";
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw Error("ConfigError", "unknown key '" + path + key + "'");
    }
  }
}

ModelSpec parse_model(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw Error("ConfigError", path + " must be an object");
  reject_unknown_keys(obj, {"spectrum", "toeplitz", "basis_seed"}, path + ".");
  ModelSpec spec;
  const bool has_spec = obj.contains("spectrum");
  const bool has_toe = obj.contains("toeplitz");
  if (has_spec == has_toe) {
    throw Error("ConfigError", path + " needs exactly one of 'spectrum' or 'toeplitz'");
  }
  if (has_spec) {
    const json& s = obj.at("spectrum");
    reject_unknown_keys(s, {"eigenvalues", "multiplicity_fractions"}, path + ".spectrum.");
    spec.kind = ModelSpec::Kind::spectrum;
    spec.eigenvalues = s.at("eigenvalues").get<std::vector<double>>();
    spec.multiplicity_fractions = s.at("multiplicity_fractions").get<std::vector<double>>();
    if (spec.eigenvalues.size() != spec.multiplicity_fractions.size() || spec.eigenvalues.empty()) {
      throw Error("ConfigError", path + ".spectrum lists must be non-empty and equal-length");
    }
    double total = 0.0;
    for (double f : spec.multiplicity_fractions) total += f;
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error("ConfigError", path + ".spectrum.multiplicity_fractions must sum to 1");
    }
  } else {
    const json& t = obj.at("toeplitz");
    reject_unknown_keys(t, {"rho"}, path + ".toeplitz.");
    spec.kind = ModelSpec::Kind::toeplitz;
    spec.rho = t.at("rho").get<double>();
  }
  if (obj.contains("basis_seed")) {
    if (spec.kind == ModelSpec::Kind::toeplitz) {
      throw Error("ConfigError", path + ".basis_seed only applies to spectrum models");
    }
    spec.has_basis_seed = true;
    spec.basis_seed = obj.at("basis_seed").get<std::uint64_t>();
  }
  return spec;
}

// Round x to the nearest integer, insisting it really is one.
int integral(double x, const std::string& what) {
  const long r = std::lround(x);
  if (std::abs(x - static_cast<double>(r)) > 1e-9 * std::max(1.0, std::abs(x))) {
    throw Error("ConfigError", what + " = " + fmt17(x) + " is not an integer");
  }
  return static_cast<int>(r);
}

struct CsvWriter {
  std::string text = "experiment,metric,M,N1,N2,mode,value,std,trials,seed\n";

  void row(const std::string& experiment, const std::string& metric, int m, int n1, int n2,
           const std::string& mode, double value, const std::string& stddev, int trials,
           std::uint64_t seed) {
    text += experiment + ',' + metric + ',' + std::to_string(m) + ',' + std::to_string(n1) + ',' +
            std::to_string(n2) + ',' + mode + ',' + fmt17(value) + ',' + stddev + ',' +
            std::to_string(trials) + ',' + std::to_string(seed) + '\n';
  }
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double closed_form_value(const CovarianceModel& a, const CovarianceModel& b, Metric metric,
                         OverlapMode mode) {
  if (metric == Metric::log_euclidean) {
    const OverlapMatrix w = projector_overlaps(a, b, mode);
    return le_det_equiv(a.spectrum, b.spectrum, w).total;
  }
  return comparison_det_equiv(a, b, metric);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error("ConfigError", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error("ConfigError", "config root must be an object");
  reject_unknown_keys(root,
                      {"model_a", "model_b", "dims", "ratios", "metrics", "trials", "seed",
                       "overlap_mode", "field"},
                      "");
  ExperimentConfig config;
  try {
    config.model_a = parse_model(root.at("model_a"), "model_a");
    config.model_b = parse_model(root.at("model_b"), "model_b");
    config.dims = root.at("dims").get<std::vector<int>>();
    for (const auto& r : root.at("ratios")) {
      if (!r.is_array() || r.size() != 2) {
        throw Error("ConfigError", "each ratio entry must be a [N1/M, N2/M] pair");
      }
      config.ratios.emplace_back(r[0].get<double>(), r[1].get<double>());
    }
    for (const auto& m : root.at("metrics")) config.metrics.push_back(metric_from_name(m.get<std::string>()));
    if (root.contains("trials")) config.trials = root.at("trials").get<int>();
    if (root.contains("seed")) config.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("overlap_mode")) {
      const std::string mode = root.at("overlap_mode").get<std::string>();
      if (mode == "explicit") {
        config.overlap_mode = OverlapMode::explicit_bases;
      } else if (mode == "haar-average") {
        config.overlap_mode = OverlapMode::haar_average;
      } else {
        throw Error("ConfigError", "overlap_mode must be 'explicit' or 'haar-average'");
      }
    }
    if (root.contains("field")) {
      const std::string field = root.at("field").get<std::string>();
      if (field == "real") {
        config.field = Field::real;
      } else if (field == "complex") {
        config.field = Field::complex;
      } else {
        throw Error("ConfigError", "field must be 'real' or 'complex'");
      }
    }
  } catch (const json::exception& e) {
    throw Error("ConfigError", std::string("malformed config: ") + e.what());
  }
  if (config.dims.empty()) throw Error("ConfigError", "dims must be non-empty");
  if (config.ratios.empty()) throw Error("ConfigError", "ratios must be non-empty");
  if (config.metrics.empty()) throw Error("ConfigError", "metrics must be non-empty");
  for (int m : config.dims) {
    if (m < 1) throw Error("ConfigError", "dims entries must be positive");
  }
  if (config.trials < 2) throw Error("ConfigError", "trials must be >= 2");
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ConfigError", "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

CovarianceModel build_model(const ModelSpec& spec, int dim, int sample_size, Field field) {
  if (spec.kind == ModelSpec::Kind::toeplitz) {
    return toeplitz_covariance(spec.rho, dim, sample_size, field);
  }
  std::vector<int> mults;
  int total = 0;
  for (std::size_t i = 0; i < spec.multiplicity_fractions.size(); ++i) {
    const int k = integral(spec.multiplicity_fractions[i] * dim,
                           "multiplicity_fraction[" + std::to_string(i) + "] * M");
    mults.push_back(k);
    total += k;
  }
  if (total != dim) throw Error("ConfigError", "multiplicity fractions do not tile M");
  SpectralModel model = make_spectral_model(spec.eigenvalues, mults, sample_size);
  if (spec.has_basis_seed) {
    RngStream stream(spec.basis_seed, static_cast<std::uint64_t>(dim));
    return covariance_model(std::move(model), haar_basis(dim, field, stream), field);
  }
  return covariance_model(std::move(model), field);
}

std::string run_det_equiv(const ExperimentConfig& config) {
  CsvWriter csv;
  for (int m : config.dims) {
    for (const auto& [r1, r2] : config.ratios) {
      const int n1 = integral(r1 * m, "ratio N1/M * M");
      const int n2 = integral(r2 * m, "ratio N2/M * M");
      const CovarianceModel a = build_model(config.model_a, m, n1, config.field);
      const CovarianceModel b = build_model(config.model_b, m, n2, config.field);
      for (Metric metric : config.metrics) {
        const double value = closed_form_value(a, b, metric, config.overlap_mode);
        csv.row("det-equiv", metric_name(metric), m, n1, n2, mode_name(config.overlap_mode), value,
                "", 0, config.seed);
      }
    }
  }
  return csv.text;
}

std::string run_convergence(const ExperimentConfig& config) {
  CsvWriter csv;
  std::uint64_t row_index = 0;
  const bool low_trials = config.trials < 100;
  if (low_trials) {
    std::cerr << "covdist warning: trials=" << config.trials
              << " is below 100; Monte Carlo statistics will be noisy\n";
  }
  for (int m : config.dims) {
    for (const auto& [r1, r2] : config.ratios) {
      const int n1 = integral(r1 * m, "ratio N1/M * M");
      const int n2 = integral(r2 * m, "ratio N2/M * M");
      const CovarianceModel a = build_model(config.model_a, m, n1, config.field);
      const CovarianceModel b = build_model(config.model_b, m, n2, config.field);
      for (Metric metric : config.metrics) {
        const BasisMode basis_mode =
            (config.overlap_mode == OverlapMode::haar_average && metric == Metric::log_euclidean)
                ? BasisMode::haar_each_trial
                : BasisMode::fixed;
        const std::uint64_t row_seed = mix_seed(config.seed, row_index++);
        const MonteCarloStats stats =
            monte_carlo(a, n1, b, n2, metric, config.trials, row_seed, basis_mode);
        const double closed = closed_form_value(a, b, metric, config.overlap_mode);
        const std::string mode =
            mode_name(config.overlap_mode) + (low_trials ? "+low-trials" : "");
        csv.row("convergence/empirical", metric_name(metric), m, n1, n2, mode, stats.mean,
                fmt17(stats.stddev), stats.trials, config.seed);
        csv.row("convergence/detequiv", metric_name(metric), m, n1, n2,
                mode_name(config.overlap_mode), closed, "", 0, config.seed);
        csv.row("convergence/gap", metric_name(metric), m, n1, n2, mode_name(config.overlap_mode),
                std::abs(stats.mean - closed), "", 0, config.seed);
      }
    }
  }
  return csv.text;
}

std::string run_sweep(const ExperimentConfig& config, double rho_from, double rho_to, int steps) {
  if (steps < 2) throw Error("ConfigError", "sweep needs at least 2 steps");
  if (!(rho_from >= 0.0 && rho_from < 1.0) || !(rho_to >= 0.0 && rho_to < 1.0)) {
    throw Error("ConfigError", "sweep range must stay inside [0, 1)");
  }
  if (config.model_b.kind != ModelSpec::Kind::toeplitz) {
    throw Error("ConfigError", "sweep varies model_b.toeplitz.rho; model_b must be a toeplitz model");
  }
  CsvWriter csv;
  for (int m : config.dims) {
    for (const auto& [r1, r2] : config.ratios) {
      const int n1 = integral(r1 * m, "ratio N1/M * M");
      const int n2 = integral(r2 * m, "ratio N2/M * M");
      const CovarianceModel a = build_model(config.model_a, m, n1, config.field);
      for (Metric metric : config.metrics) {
        double best_value = 0.0;
        double best_rho = rho_from;
        for (int i = 0; i < steps; ++i) {
          const double rho2 = rho_from + (rho_to - rho_from) * i / (steps - 1);
          ModelSpec spec_b = config.model_b;
          spec_b.rho = rho2;
          const CovarianceModel b = build_model(spec_b, m, n2, config.field);
          const double value = closed_form_value(a, b, metric, config.overlap_mode);
          if (i == 0 || value < best_value) {
            best_value = value;
            best_rho = rho2;
          }
          csv.row("sweep[rho2=" + fmt17(rho2) + "]", metric_name(metric), m, n1, n2,
                  mode_name(config.overlap_mode), value, "", 0, config.seed);
        }
        csv.row("sweep-argmin[rho2=" + fmt17(best_rho) + "]", metric_name(metric), m, n1, n2,
                mode_name(config.overlap_mode), best_value, "", 0, config.seed);
      }
    }
  }
  return csv.text;
}

SpectralModel random_spectral_model(RngStream& stream, int max_clusters, bool undersampled,
                                    int dim) {
  int mbar = 1 + static_cast<int>(stream.uniform() * max_clusters) % max_clusters;
  if (dim > 0) mbar = std::min(mbar, dim);
  std::vector<double> gammas(mbar);
  gammas[0] = 0.1 + 1.9 * stream.uniform();
  for (int m = 1; m < mbar; ++m) gammas[m] = gammas[m - 1] * (1.3 + 3.0 * stream.uniform());
  std::vector<int> mults(mbar, 1);
  if (dim > 0) {
    if (undersampled && dim < 2) {
      throw Error("DimMismatch", "the undersampled regime needs dim >= 2 (N must satisfy 1 <= N < M)");
    }
    for (int extra = dim - mbar; extra > 0; --extra) {
      mults[static_cast<int>(stream.uniform() * mbar) % mbar] += 1;
    }
  } else {
    for (int m = 0; m < mbar; ++m) mults[m] = 1 + static_cast<int>(stream.uniform() * 4.0) % 4;
  }
  int total = 0;
  for (int k : mults) total += k;
  if (undersampled && total < 2 && dim <= 0) {
    // N must satisfy 1 <= N < M, so the undersampled regime needs M >= 2.
    mults[0] += 1;
    total += 1;
  }
  const double c = undersampled ? (1.05 + 6.95 * stream.uniform()) : (0.05 + 0.9 * stream.uniform());
  int n = static_cast<int>(std::lround(total / c));
  if (undersampled) {
    n = std::max(std::min(n, total - 1), 1);
  } else {
    n = std::max(n, total + 1);
  }
  return make_spectral_model(gammas, mults, n);
}

namespace {

struct SuiteReport {
  bool ok = true;
  std::string line;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

SuiteReport secular_identity_suite(int count) {
  RngStream stream(0xC0FFEE, 0);
  double worst_product = 0.0, worst_sum = 0.0, worst_interlace = 0.0;
  for (int i = 0; i < count; ++i) {
    const SpectralModel model = random_spectral_model(stream, 8, i % 2 == 1);
    const MuRoots roots = mu_roots(model);
    const int mb = model.mbar();

    // Interlacing: gamma_{m-1} < mu_m < gamma_m, and the edge roots sit on
    // the expected sides.
    bool interlaced = roots.undersampled ? (roots.mu[0] < 0.0 && roots.mu[1] == 0.0)
                                         : (roots.mu[0] == 0.0 && roots.mu[1] > 0.0 &&
                                            roots.mu[1] < model.gammas[0]);
    for (int m = 2; m <= mb; ++m) {
      interlaced = interlaced && model.gammas[m - 2] < roots.mu[m] && roots.mu[m] < model.gammas[m - 1];
    }
    if (!interlaced) worst_interlace = 1.0;

    // Product identity: prod_m (mu_m - mu_0) / (gamma_m - mu_0) = 1 - Gamma(mu_0).
    double prod = 1.0;
    for (int m = 1; m <= mb; ++m) prod *= roots.mu_shift[m] / roots.gamma_shift[m - 1];
    worst_product = std::max(worst_product,
                             std::abs(prod - (1.0 - roots.gamma0)) / (1.0 - roots.gamma0));

    // Partial-fraction sum identity for the shifted multiplicities
    // K_{m,0} = K_m gamma_m / (gamma_m - mu_0): for every m,
    //   sum_{r != m} K_{r,0} g_r / (g_r - g_m) - sum_r K_{r,0} g_r / (g_r - mu_m)
    //     = sum_{k != m} K_{m,0} g_m / (g_m - g_k) - sum_r K_{m,0} g_m / (g_m - mu_r).
    Eigen::VectorXd k0(mb);
    for (int m = 0; m < mb; ++m) {
      k0[m] = model.mults[m] * model.gammas[m] / roots.gamma_shift[m];
    }
    for (int m = 0; m < mb; ++m) {
      double lhs = 0.0, rhs = 0.0, scale = 1.0;
      for (int r = 0; r < mb; ++r) {
        if (r != m) {
          const double term = k0[r] * model.gammas[r] / (model.gammas[r] - model.gammas[m]);
          lhs += term;
          scale += std::abs(term);
        }
        const double term = k0[r] * model.gammas[r] / (model.gammas[r] - roots.mu[m + 1]);
        lhs -= term;
        scale += std::abs(term);
      }
      for (int k = 0; k < mb; ++k) {
        if (k != m) rhs += k0[m] * model.gammas[m] / (model.gammas[m] - model.gammas[k]);
      }
      for (int r = 1; r <= mb; ++r) {
        rhs -= k0[m] * model.gammas[m] / (model.gammas[m] - roots.mu[r]);
      }
      worst_sum = std::max(worst_sum, std::abs(lhs - rhs) / scale);
    }
  }
  SuiteReport report;
  report.ok = worst_product < 1e-10 && worst_sum < 1e-8 && worst_interlace == 0.0;
  report.line = "secular-identities models=" + std::to_string(count) +
                " worst-product=" + sci(worst_product) + " worst-sum=" + sci(worst_sum) +
                std::string(worst_interlace == 0.0 ? "" : " INTERLACING-VIOLATION") +
                (report.ok ? " PASS" : " FAIL");
  return report;
}

SuiteReport resolvent_suite(int budget) {
  std::vector<SpectralModel> models;
  models.push_back(make_spectral_model({1.0}, {10}, 20));
  models.push_back(make_spectral_model({1.0}, {10}, 5));
  const std::vector<double> eigs{1.0, 6.0, 15.0, 25.0};
  const std::vector<int> mults{1, 2, 3, 4};
  for (int n : {1, 8, 15, 20, 30, 80}) models.push_back(make_spectral_model(eigs, mults, n));

  double worst = 0.0;
  for (const SpectralModel& model : models) {
    const SupportEdges edges = support_edges(model);
    const MuRoots roots = mu_roots(model);
    const Contour contour = make_contour(edges, Contour::Kind::z_type, budget, roots.mu0());
    worst = std::max(worst, resolvent_identity_check(model, contour));
  }
  SuiteReport report;
  report.ok = worst < 1e-8;
  report.line = "resolvent-identity models=" + std::to_string(models.size()) +
                " worst=" + sci(worst) + " limit=1e-08" + (report.ok ? " PASS" : " FAIL");
  return report;
}

SuiteReport negative_control_suite(int budget) {
  // An n_type contour misses the rank-deficiency atom at the origin, so on
  // an undersampled model the resolvent integral must NOT resolve to the
  // identity; a small deviation here would mean the check has no teeth.
  const SpectralModel model = make_spectral_model({1.0}, {10}, 5);
  const Contour contour = make_contour(support_edges(model), Contour::Kind::n_type, budget);
  const double dev = resolvent_identity_check(model, contour);
  SuiteReport report;
  report.ok = dev > 1e-2;
  report.line = "resolvent-negative-control n_type undersampled deviation=" + sci(dev) +
                " (must exceed 1e-02)" + (report.ok ? " PASS" : " FAIL");
  return report;
}

SuiteReport agreement_suite(int pairs, int budget) {
  RngStream stream(0xFACADE, 1);
  double worst_alpha = 0.0, worst_beta = 0.0, worst_dle = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const SpectralModel a = random_spectral_model(stream, 6, i % 2 == 1);
    const SpectralModel b = random_spectral_model(stream, 6, i % 3 == 1 && a.dim >= 2, a.dim);

    const ContourFamily contours = make_contour_family(a, b, budget);
    for (const SpectralModel* model : {&a, &b}) {
      const EigContourSums sums = contour_sums(*model, model == &a ? contours.n_a : contours.n_b);

      const Eigen::VectorXd beta = beta_coefficients(*model);
      const double alpha = alpha_coefficient(*model);
      double alpha_num = 0.0;
      for (int m = 0; m < model->mbar(); ++m) {
        alpha_num += model->mults[m] * sums.log_twice[m].real();
        worst_beta = std::max(worst_beta, std::abs(sums.log_once[m].real() - beta[m]) /
                                              std::max(1.0, std::abs(beta[m])));
      }
      alpha_num /= model->dim;
      worst_alpha =
          std::max(worst_alpha, std::abs(alpha_num - alpha) / std::max(1.0, std::abs(alpha)));
    }

    const OverlapMatrix w = projector_overlaps(a, b);
    const double dle_num = dle_numeric(a, b, w, contours);
    const double dle = le_det_equiv(a, b, w).total;
    worst_dle = std::max(worst_dle, std::abs(dle_num - dle) / std::max(1.0, std::abs(dle)));
  }
  SuiteReport report;
  report.ok = worst_alpha < 1e-6 && worst_beta < 1e-6 && worst_dle < 1e-6;
  report.line = "oracle-agreement pairs=" + std::to_string(pairs) + " worst-alpha=" +
                sci(worst_alpha) + " worst-beta=" + sci(worst_beta) + " worst-dle=" +
                sci(worst_dle) + " limit=1e-06" + (report.ok ? " PASS" : " FAIL");
  return report;
}

}  // namespace

int run_validate(bool fast, std::ostream& out) {
  bool ok = true;
  for (const SuiteReport& report :
       {secular_identity_suite(fast ? 200 : 1000), resolvent_suite(512),
        negative_control_suite(512), agreement_suite(fast ? 40 : 200, fast ? 1024 : 1536)}) {
    out << "validate: " << report.line << '\n';
    ok = ok && report.ok;
  }
  out << "validate: " << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 2;
}

}  // namespace covdist::cli
