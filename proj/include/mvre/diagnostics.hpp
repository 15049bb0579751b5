#pragma once

// Posterior summaries and convergence diagnostics over stored draws.

#include "mvre/core.hpp"

#include <span>
#include <string>
#include <vector>

namespace mvre {

/// Draws of one scalar parameter: one row per chain, all rows the same length.
class ScalarTraceMatrix {
 public:
  ScalarTraceMatrix() = default;
  /// Throws Error(DimensionMismatch) for ragged rows, Error(InvalidParameter)
  /// for non-finite entries.
  explicit ScalarTraceMatrix(std::vector<std::vector<double>> values);

  int n_chains() const { return static_cast<int>(values_.size()); }
  long length() const { return values_.empty() ? 0 : static_cast<long>(values_.front().size()); }
  long total() const { return n_chains() * length(); }
  const std::vector<double>& chain(int k) const { return values_[static_cast<std::size_t>(k)]; }
  const std::vector<std::vector<double>>& values() const { return values_; }
  /// Chains concatenated in order.
  std::vector<double> pooled() const;

 private:
  std::vector<std::vector<double>> values_;
};

/// Parameter labels in trace order: mu_1..mu_p, then psi_ij in vech order.
std::vector<std::string> parameter_names(int p);
int parameter_count(int p);
/// Value of parameter `index` at (mu, psi).
double parameter_value(const Eigen::Ref<const DenseVector>& mu, const Eigen::Ref<const DenseMatrix>& psi, int index);
/// Trace of parameter `index` (as ordered by parameter_names) across all chains.
ScalarTraceMatrix extract_trace(const ChainSet& set, int index);

/// Type-7 quantile: linear interpolation at position 1 + q(S-1).
/// Throws Error(EmptySample), Error(InvalidParameter) for q outside [0, 1].
double quantile(std::span<const double> samples, double q);
/// Same on data already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double q);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// [q_beta, q_{1-alpha+beta}]. Requires 0 < alpha < 1 and 0 <= beta <= alpha,
/// else Error(InvalidBeta).
Interval credible_interval(std::span<const double> samples, double alpha, double beta);
Interval credible_interval_sorted(std::span<const double> sorted, double alpha, double beta);

/// Ranks 1..S; tied values share the mean of the ranks they cover.
std::vector<double> ranks_average_ties(std::span<const double> values);

/// Normal scores of the pooled ranks: Phi^{-1}((r - 3/8) / (S + 1/4)).
ScalarTraceMatrix rank_normalize(const ScalarTraceMatrix& traces);

/// Split-R-hat on the raw values. Odd-length chains lose their last draw.
/// Returns 1 when every split sequence has zero variance. Needs length >= 4.
double split_rhat(const ScalarTraceMatrix& traces);

/// max of the bulk (rank-normalized) and tail (folded) split-R-hat. Folding is
/// applied to the normal scores about their median, so the result depends on
/// the draws only through their pooled ordering.
double rank_rhat(const ScalarTraceMatrix& traces);

struct SummaryRow {
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double rhat = 1.0;
};

/// Pooled moments, the interval [q_beta, q_{1-alpha+beta}] and rank_rhat.
SummaryRow summarize(const ScalarTraceMatrix& traces, double alpha, double beta);

/// Per-chain counts of pooled ranks in `bins` equal-width bins over [1, S].
std::vector<std::vector<long>> rank_histogram(const ScalarTraceMatrix& traces, int bins);

}  // namespace mvre
