#include "mvre/diagnostics.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mvre {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

std::pair<int, int> vech_position(int p, int k) {
  for (int j = 0; j < p; ++j) {
    const int len = p - j;
    if (k < len) return {j + k, j};
    k -= len;
  }
  throw Error(ErrorCode::InvalidParameter, "vech index out of range");
}

ScalarTraceMatrix reshape_like(const ScalarTraceMatrix& shape, const std::vector<double>& flat) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(shape.n_chains()));
  const auto len = static_cast<std::size_t>(shape.length());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].assign(flat.begin() + static_cast<std::ptrdiff_t>(k * len),
                   flat.begin() + static_cast<std::ptrdiff_t>((k + 1) * len));
  }
  return ScalarTraceMatrix(std::move(rows));
}

}  // namespace

ScalarTraceMatrix::ScalarTraceMatrix(std::vector<std::vector<double>> values) : values_(std::move(values)) {
  for (const auto& row : values_) {
    if (row.size() != values_.front().size()) throw Error(ErrorCode::DimensionMismatch, "chains differ in length");
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParameter, "trace contains a non-finite value");
    }
  }
}

std::vector<double> ScalarTraceMatrix::pooled() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total()));
  for (const auto& row : values_) out.insert(out.end(), row.begin(), row.end());
  return out;
}

int parameter_count(int p) { return p + p * (p + 1) / 2; }

std::vector<std::string> parameter_names(int p) {
  std::vector<std::string> names;
  for (int i = 0; i < p; ++i) names.push_back("mu_" + std::to_string(i + 1));
  for (int k = 0; k < p * (p + 1) / 2; ++k) {
    const auto [i, j] = vech_position(p, k);
    names.push_back("psi_" + std::to_string(i + 1) + std::to_string(j + 1));
  }
  return names;
}

double parameter_value(const Eigen::Ref<const DenseVector>& mu, const Eigen::Ref<const DenseMatrix>& psi, int index) {
  const int p = static_cast<int>(mu.size());
  if (index < 0 || index >= parameter_count(p)) throw Error(ErrorCode::InvalidParameter, "parameter index out of range");
  if (index < p) return mu(index);
  const auto [i, j] = vech_position(p, index - p);
  return psi(i, j);
}

ScalarTraceMatrix extract_trace(const ChainSet& set, int index) {
  const int p = set.p;
  if (index < 0 || index >= parameter_count(p)) throw Error(ErrorCode::InvalidParameter, "parameter index out of range");
  std::vector<std::vector<double>> rows;
  rows.reserve(set.chains.size());
  for (const Chain& c : set.chains) {
    std::vector<double> row;
    row.reserve(c.draws.size());
    if (index < p) {
      for (const Draw& d : c.draws) row.push_back(d.mu(index));
    } else {
      const auto [i, j] = vech_position(p, index - p);
      for (const Draw& d : c.draws) row.push_back(d.psi(i, j));
    }
    rows.push_back(std::move(row));
  }
  return ScalarTraceMatrix(std::move(rows));
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptySample, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidParameter, "quantile level must lie in [0, 1]");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> samples, double q) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, q);
}

Interval credible_interval_sorted(std::span<const double> sorted, double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta >= 0.0 && beta <= alpha)) {
    throw Error(ErrorCode::InvalidBeta, "credible interval needs 0 < alpha < 1 and 0 <= beta <= alpha");
  }
  return Interval{quantile_sorted(sorted, beta), quantile_sorted(sorted, 1.0 - alpha + beta)};
}

Interval credible_interval(std::span<const double> samples, double alpha, double beta) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return credible_interval_sorted(sorted, alpha, beta);
}

std::vector<double> ranks_average_ties(std::span<const double> values) {
  const std::size_t s = values.size();
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(s);
  std::size_t i = 0;
  while (i < s) {
    std::size_t j = i + 1;
    while (j < s && values[order[j]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

ScalarTraceMatrix rank_normalize(const ScalarTraceMatrix& traces) {
  const std::vector<double> pooled = traces.pooled();
  if (pooled.empty()) throw Error(ErrorCode::EmptySample, "rank normalization of an empty trace");
  std::vector<double> z = ranks_average_ties(pooled);
  const double s = static_cast<double>(z.size());
  const boost::math::normal_distribution<double> std_normal;
  for (double& r : z) r = boost::math::quantile(std_normal, (r - 0.375) / (s + 0.25));
  return reshape_like(traces, z);
}

double split_rhat(const ScalarTraceMatrix& traces) {
  const long half = traces.length() / 2;
  if (traces.n_chains() < 1 || half < 2) {
    throw Error(ErrorCode::InvalidParameter, "split R-hat needs at least four draws per chain");
  }
  std::vector<double> means;
  std::vector<double> vars;
  for (const auto& row : traces.values()) {
    for (int part = 0; part < 2; ++part) {
      const std::span<const double> seq(row.data() + part * half, static_cast<std::size_t>(half));
      means.push_back(mean_of(seq));
      vars.push_back(variance_of(seq));
    }
  }
  const double l = static_cast<double>(half);
  const double w = mean_of(vars);
  const double b = l * variance_of(means);
  if (w == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (l - 1.0) / l * w + b / l;
  return std::sqrt(var_plus / w);
}

double rank_rhat(const ScalarTraceMatrix& traces) {
  const ScalarTraceMatrix z = rank_normalize(traces);
  std::vector<double> folded = z.pooled();
  const double med = quantile(folded, 0.5);
  for (double& v : folded) v = std::abs(v - med);
  const double bulk = split_rhat(z);
  const double tail = split_rhat(rank_normalize(reshape_like(traces, folded)));
  return std::max(bulk, tail);
}

SummaryRow summarize(const ScalarTraceMatrix& traces, double alpha, double beta) {
  std::vector<double> pooled = traces.pooled();
  if (pooled.empty()) throw Error(ErrorCode::EmptySample, "summary of an empty trace");
  SummaryRow row;
  row.mean = mean_of(pooled);
  row.sd = std::sqrt(variance_of(pooled));
  std::sort(pooled.begin(), pooled.end());
  row.median = quantile_sorted(pooled, 0.5);
  const Interval ci = credible_interval_sorted(pooled, alpha, beta);
  row.ci_low = ci.low;
  row.ci_high = ci.high;
  row.rhat = rank_rhat(traces);
  return row;
}

std::vector<std::vector<long>> rank_histogram(const ScalarTraceMatrix& traces, int bins) {
  if (bins < 2) throw Error(ErrorCode::InvalidParameter, "rank histogram needs at least two bins");
  const std::vector<double> ranks = ranks_average_ties(traces.pooled());
  const double s = static_cast<double>(ranks.size());
  std::vector<std::vector<long>> counts(static_cast<std::size_t>(traces.n_chains()),
                                        std::vector<long>(static_cast<std::size_t>(bins), 0));
  const auto len = static_cast<std::size_t>(traces.length());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    auto bin = static_cast<int>(std::floor((ranks[i] - 1.0) * bins / s));
    bin = std::clamp(bin, 0, bins - 1);
    ++counts[i / len][static_cast<std::size_t>(bin)];
  }
  return counts;
}

}  // namespace mvre
