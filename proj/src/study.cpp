#include "mvre/study.hpp"

#include "mvre/model.hpp"
#include "mvre/parallel.hpp"
#include "mvre/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>

namespace mvre {

namespace {

constexpr std::uint64_t kDataStream = 0xda7aULL << 32;
constexpr std::uint64_t kDesignStream = 0xde51ULL << 32;

void symmetrize(Matrix& a) {
  a = 0.5 * (a + a.transpose()).eval();
}

double uniform_between(RngStream& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

struct RepOutcome {
  std::vector<bool> covered;
  std::vector<bool> beta_covered;
  std::vector<double> rhat;
};

RepOutcome run_repetition(const SimScenario& scenario, const SimTruth* fixed, std::uint64_t rep_seed,
                          const StudyRequest& request) {
  RngStream data_rng(rep_seed, kDataStream);
  const SimTruth truth = fixed ? *fixed : draw_truth(data_rng, scenario);
  const Dataset data = simulate_dataset(data_rng, scenario, truth);
  const PosteriorContext ctx(data, scenario.spec);
  SamplerConfig cfg = scenario.sampler;
  cfg.seed = rep_seed;
  const ChainSet set = run_chains(ctx, cfg, 1);

  RepOutcome out;
  const int count = parameter_count(scenario.p);
  for (int k = 0; k < count; ++k) {
    const ScalarTraceMatrix trace = extract_trace(set, k);
    std::vector<double> sorted = trace.pooled();
    std::sort(sorted.begin(), sorted.end());
    const double target = parameter_value(truth.mu, truth.psi, k);
    const Interval iv = request.interval(sorted);
    out.covered.push_back(iv.low <= target && target <= iv.high);
    out.rhat.push_back(rank_rhat(trace));
    if (k == scenario.p) {
      for (double b : request.betas) {
        const Interval bi = credible_interval_sorted(sorted, request.alpha, b);
        out.beta_covered.push_back(bi.low <= target && target <= bi.high);
      }
    }
  }
  return out;
}

}  // namespace

void SimScenario::validate() const {
  if (p < 1 || p > kMaxDim) throw Error(ErrorCode::InvalidConfig, "scenario dimension out of range");
  if (n < std::max(2, p)) throw Error(ErrorCode::TooFewStudies, "scenario needs n >= max(2, p)");
  if (!(tau2 > 0.0) || !std::isfinite(tau2)) throw Error(ErrorCode::InvalidConfig, "tau2 must be positive");
  if (reps < 1) throw Error(ErrorCode::InvalidConfig, "reps must be at least 1");
  spec.validate();
  sampler.validate();
  if (sampler.retained() < 2) throw Error(ErrorCode::InvalidConfig, "scenario chains retain too few draws");
}

Matrix random_spectrum_matrix(RngStream& rng, int p) {
  const Matrix q = sample_haar_orthogonal(rng, p);
  Vector lambda(p);
  for (int i = 0; i < p; ++i) lambda(i) = uniform_between(rng, 1.0, 4.0);
  Matrix m = q * lambda.asDiagonal() * q.transpose();
  symmetrize(m);
  return m;
}

SimTruth generate_psi_and_u(RngStream& rng, int p, int n, double tau2) {
  if (p < 1 || n < 1) throw Error(ErrorCode::InvalidParameter, "p and n must be positive");
  SimTruth t;
  t.psi = tau2 * random_spectrum_matrix(rng, p);
  t.u.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t.u.push_back(random_spectrum_matrix(rng, p));
  return t;
}

SimTruth draw_truth(RngStream& rng, const SimScenario& scenario) {
  SimTruth t = generate_psi_and_u(rng, scenario.p, scenario.n, scenario.tau2);
  t.mu.resize(scenario.p);
  for (int i = 0; i < scenario.p; ++i) t.mu(i) = uniform_between(rng, 1.0, 5.0);
  return t;
}

Dataset simulate_dataset(RngStream& rng, const SimScenario& scenario, const SimTruth& truth) {
  const int p = scenario.p;
  std::vector<StudyObservation> studies;
  studies.reserve(static_cast<std::size_t>(scenario.n));
  double scale = 1.0;
  if (scenario.spec.family == Family::StudentT) {
    const double d = scenario.spec.dof;
    scale = std::sqrt(d / sample_chi_square(rng, d));
  }
  const Vector zero = Vector::Zero(p);
  for (int i = 0; i < scenario.n; ++i) {
    const Matrix& u = truth.u[static_cast<std::size_t>(i)];
    Vector x;
    if (scenario.spec.family == Family::Normal) {
      x = truth.mu + sample_mvn(rng, zero, SpdMatrix(truth.psi)) + sample_mvn(rng, zero, SpdMatrix(u));
    } else {
      Matrix total = truth.psi + u;
      symmetrize(total);
      x = truth.mu + scale * sample_mvn(rng, zero, SpdMatrix(total));
    }
    studies.push_back(StudyObservation{std::to_string(i + 1), x, SpdMatrix(u)});
  }
  return Dataset(p, std::move(studies));
}

SimulatedData simulate_dataset(RngStream& rng, const SimScenario& scenario) {
  SimTruth truth = draw_truth(rng, scenario);
  Dataset data = simulate_dataset(rng, scenario, truth);
  return SimulatedData{std::move(data), std::move(truth)};
}

IntervalRule symmetric_interval(double alpha) {
  return [alpha](std::span<const double> sorted) { return credible_interval_sorted(sorted, alpha, 0.5 * alpha); };
}

Proportion proportion(long hits, long trials) {
  if (hits < 0 || hits > trials) throw Error(ErrorCode::InvalidParameter, "hit count outside [0, trials]");
  Proportion out;
  out.trials = trials;
  if (trials == 0) return out;
  out.rate = static_cast<double>(hits) / static_cast<double>(trials);
  out.mc_se = std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(out.trials));
  return out;
}

std::vector<StudyCell> run_study(const SimScenario& scenario, const StudyRequest& request) {
  scenario.validate();
  if (request.tau2_grid.empty()) throw Error(ErrorCode::InvalidConfig, "tau2 grid is empty");
  for (double b : request.betas) {
    if (!(b >= 0.0 && b <= request.alpha)) throw Error(ErrorCode::InvalidBeta, "beta outside [0, alpha]");
  }
  const std::vector<std::string> names = parameter_names(scenario.p);
  const int count = parameter_count(scenario.p);
  std::vector<StudyCell> cells;

  for (std::size_t g = 0; g < request.tau2_grid.size(); ++g) {
    SimScenario sc = scenario;
    sc.tau2 = request.tau2_grid[g];
    sc.validate();
    const std::uint64_t grid_seed = derive_seed(request.seed, g);
    std::optional<SimTruth> fixed;
    if (!sc.redraw_design) {
      RngStream design_rng(grid_seed, kDesignStream);
      fixed = draw_truth(design_rng, sc);
    }

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(sc.reps));
    parallel_for(sc.reps, hardware_pool_size(sc.reps), [&](int r) {
      outcomes[static_cast<std::size_t>(r)] =
          run_repetition(sc, fixed ? &*fixed : nullptr, derive_seed(grid_seed, static_cast<std::uint64_t>(r)), request);
    });

    for (int k = 0; k < count; ++k) {
      long hits = 0;
      std::vector<double> rhats;
      for (const RepOutcome& o : outcomes) {
        if (o.covered[static_cast<std::size_t>(k)]) ++hits;
        rhats.push_back(o.rhat[static_cast<std::size_t>(k)]);
      }
      const Proportion cov = proportion(hits, sc.reps);
      cells.push_back(StudyCell{sc.tau2, names[static_cast<std::size_t>(k)], "coverage", cov.rate, cov.mc_se});

      const double m = std::accumulate(rhats.begin(), rhats.end(), 0.0) / static_cast<double>(rhats.size());
      double ss = 0.0;
      for (double v : rhats) ss += (v - m) * (v - m);
      const double se =
          rhats.size() > 1 ? std::sqrt(ss / static_cast<double>(rhats.size() - 1) / static_cast<double>(rhats.size())) : 0.0;
      cells.push_back(StudyCell{sc.tau2, names[static_cast<std::size_t>(k)], "rhat", m, se});
    }
    for (std::size_t b = 0; b < request.betas.size(); ++b) {
      long hits = 0;
      for (const RepOutcome& o : outcomes) {
        if (o.beta_covered[b]) ++hits;
      }
      const Proportion cov = proportion(hits, sc.reps);
      cells.push_back(StudyCell{sc.tau2, names[static_cast<std::size_t>(scenario.p)],
                                "coverage_beta=" + format_number(request.betas[b]), cov.rate, cov.mc_se});
    }
  }
  return cells;
}

std::vector<StudyCell> coverage_study(const SimScenario& scenario, std::span<const double> tau2_grid,
                                      std::uint64_t seed, const IntervalRule& rule) {
  StudyRequest req;
  req.tau2_grid.assign(tau2_grid.begin(), tau2_grid.end());
  req.interval = rule;
  req.seed = seed;
  std::vector<StudyCell> cells = run_study(scenario, req);
  std::erase_if(cells, [](const StudyCell& c) { return c.metric != "coverage"; });
  return cells;
}

std::vector<BetaPoint> beta_coverage_curve(const SimScenario& scenario, std::span<const double> betas,
                                           std::uint64_t seed, double alpha) {
  StudyRequest req;
  req.tau2_grid = {scenario.tau2};
  req.betas.assign(betas.begin(), betas.end());
  req.alpha = alpha;
  req.seed = seed;
  const std::vector<StudyCell> cells = run_study(scenario, req);
  std::vector<BetaPoint> out;
  for (const StudyCell& c : cells) {
    if (!c.metric.starts_with("coverage_beta=")) continue;
    BetaPoint bp;
    bp.beta = betas[out.size()];
    bp.coverage = Proportion{c.value, c.mc_se, scenario.reps};
    out.push_back(bp);
  }
  return out;
}

std::vector<StudyCell> rhat_study(const SimScenario& scenario, std::span<const double> tau2_grid, std::uint64_t seed) {
  StudyRequest req;
  req.tau2_grid.assign(tau2_grid.begin(), tau2_grid.end());
  req.seed = seed;
  std::vector<StudyCell> cells = run_study(scenario, req);
  std::erase_if(cells, [](const StudyCell& c) { return c.metric != "rhat"; });
  return cells;
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptySample, "bandwidth of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double s = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / s;
  double ss = 0.0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = sorted.size() > 1 ? std::sqrt(ss / (s - 1.0)) : 0.0;
  const double iqr = (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  if (!(spread > 0.0)) spread = 1.0;
  return 0.9 * spread * std::pow(s, -0.2);
}

std::vector<double> kernel_density(std::span<const double> samples, std::span<const double> grid) {
  const double h = silverman_bandwidth(samples);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double x : samples) {
      const double z = (grid[g] - x) / h;
      acc += std::exp(-0.5 * z * z);
    }
    out[g] = acc * norm;
  }
  return out;
}

std::vector<double> kde_grid(std::span<const double> samples, int points) {
  if (points < 2) throw Error(ErrorCode::InvalidParameter, "KDE grid needs at least two points");
  const double h = silverman_bandwidth(samples);
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 3.0 * h;
  const double hi = *hi_it + 3.0 * h;
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

EmpiricalResult analyze_chains(ChainSet chains, const EmpiricalOptions& options) {
  EmpiricalResult out;
  out.chains = std::move(chains);
  const int p = out.chains.p;
  out.parameters = parameter_names(p);
  for (const Chain& c : out.chains.chains) out.acceptance.push_back(c.acceptance_rate);
  const int thin = std::max(options.kde_thin, 1);
  for (int k = 0; k < parameter_count(p); ++k) {
    const ScalarTraceMatrix trace = extract_trace(out.chains, k);
    out.summary.push_back(summarize(trace, options.alpha, k < p ? options.mu_beta : options.psi_beta));
    out.rank_histograms.push_back(rank_histogram(trace, options.rank_bins));
    std::vector<double> thinned;
    for (const auto& row : trace.values()) {
      for (std::size_t i = 0; i < row.size(); i += static_cast<std::size_t>(thin)) thinned.push_back(row[i]);
    }
    KdeCurve curve;
    curve.grid = kde_grid(thinned, options.kde_points);
    curve.density = kernel_density(thinned, curve.grid);
    out.kde.push_back(std::move(curve));
  }
  return out;
}

EmpiricalResult empirical_analysis(const Dataset& data, const ModelSpec& spec, const SamplerConfig& config,
                                   const EmpiricalOptions& options) {
  const PosteriorContext ctx(data, spec);
  return analyze_chains(run_chains(ctx, config), options);
}

}  // namespace mvre
