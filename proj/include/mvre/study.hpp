#pragma once

// Simulation harness (coverage, R-hat and beta-curve studies) and the
// empirical pipeline that turns a fitted ChainSet into report tables.

#include "mvre/core.hpp"
#include "mvre/diagnostics.hpp"
#include "mvre/randgen.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mvre {

inline constexpr double kDefaultTau2Grid[] = {0.25, 0.5, 0.75, 1.0, 2.0};

struct SimScenario {
  int p = 2;
  int n = 10;
  double tau2 = 1.0;
  /// Family of the data-generating model and of the fitted model.
  ModelSpec spec;
  int reps = 500;
  SamplerConfig sampler{4, 2000, 1000};
  /// When false, mu, Xi and U_i are drawn once per tau2 and only the data vary.
  bool redraw_design = true;

  void validate() const;
};

/// True parameters and within-study covariances of one synthetic meta-analysis.
struct SimTruth {
  Vector mu;
  Matrix psi;
  std::vector<Matrix> u;
};

/// Q diag(lambda) Q^T with lambda_i ~ U[1, 4] and Q Haar-distributed.
Matrix random_spectrum_matrix(RngStream& rng, int p);

/// Psi = tau2 * Xi and U_1..U_n, each built by random_spectrum_matrix.
/// Returned truth has mu left empty.
SimTruth generate_psi_and_u(RngStream& rng, int p, int n, double tau2);

/// Full truth: generate_psi_and_u plus mu with iid U[1, 5] entries.
SimTruth draw_truth(RngStream& rng, const SimScenario& scenario);

/// Normal: x_i = mu + lambda_i + eps_i. t(d): one joint elliptical draw,
/// x_i = mu + sqrt(d / xi) L_i z_i with a shared xi ~ chi^2(d) and
/// L_i L_i^T = Psi + U_i.
Dataset simulate_dataset(RngStream& rng, const SimScenario& scenario, const SimTruth& truth);

struct SimulatedData {
  Dataset data;
  SimTruth truth;
};
SimulatedData simulate_dataset(RngStream& rng, const SimScenario& scenario);

/// Interval rule applied to sorted pooled draws.
using IntervalRule = std::function<Interval(std::span<const double> sorted)>;
/// [q_{alpha/2}, q_{1-alpha/2}]
IntervalRule symmetric_interval(double alpha = 0.05);

struct Proportion {
  double rate = 0.0;
  double mc_se = 0.0;
  long trials = 0;
};
/// Hit rate with binomial standard error sqrt(r(1-r)/N).
Proportion proportion(long hits, long trials);

struct StudyCell {
  double tau2 = 0.0;
  std::string parameter;
  std::string metric;
  double value = 0.0;
  double mc_se = 0.0;
};

struct StudyRequest {
  std::vector<double> tau2_grid{std::begin(kDefaultTau2Grid), std::end(kDefaultTau2Grid)};
  IntervalRule interval = symmetric_interval();
  /// beta values for the Psi_11 curve; empty skips it.
  std::vector<double> betas;
  double alpha = 0.05;
  std::uint64_t seed = 1;
};

/// Runs scenario.reps repetitions per tau2 and reports, per parameter,
/// "coverage" and "rhat" (mean rank_rhat), plus "coverage_beta=<b>" cells for
/// psi_11 when betas are requested. Repetition r at grid index g draws its
/// data and chains from derive_seed(derive_seed(seed, g), r), so the result
/// does not depend on the worker count.
std::vector<StudyCell> run_study(const SimScenario& scenario, const StudyRequest& request);

std::vector<StudyCell> coverage_study(const SimScenario& scenario, std::span<const double> tau2_grid,
                                      std::uint64_t seed, const IntervalRule& rule = symmetric_interval());

struct BetaPoint {
  double beta = 0.0;
  Proportion coverage;
};
/// Coverage of [q_beta, q_{1-alpha+beta}] for psi_11 at scenario.tau2.
std::vector<BetaPoint> beta_coverage_curve(const SimScenario& scenario, std::span<const double> betas,
                                           std::uint64_t seed, double alpha = 0.05);

std::vector<StudyCell> rhat_study(const SimScenario& scenario, std::span<const double> tau2_grid, std::uint64_t seed);

double silverman_bandwidth(std::span<const double> samples);
/// Gaussian kernel density with Silverman's bandwidth, evaluated on `grid`.
std::vector<double> kernel_density(std::span<const double> samples, std::span<const double> grid);
/// `points` equispaced values over [min - 3h, max + 3h].
std::vector<double> kde_grid(std::span<const double> samples, int points);

struct EmpiricalOptions {
  double alpha = 0.05;
  /// beta for mu intervals (symmetric) and for Psi intervals.
  double mu_beta = 0.025;
  double psi_beta = 0.0001;
  int rank_bins = 20;
  int kde_thin = 50;
  int kde_points = 512;
};

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
};

struct EmpiricalResult {
  ChainSet chains;
  std::vector<std::string> parameters;
  std::vector<SummaryRow> summary;
  std::vector<std::vector<std::vector<long>>> rank_histograms;
  std::vector<KdeCurve> kde;
  std::vector<double> acceptance;
};

/// Summaries, rank histograms and KDE curves computed from an existing ChainSet.
EmpiricalResult analyze_chains(ChainSet chains, const EmpiricalOptions& options = {});

EmpiricalResult empirical_analysis(const Dataset& data, const ModelSpec& spec, const SamplerConfig& config,
                                   const EmpiricalOptions& options = {});

}  // namespace mvre
