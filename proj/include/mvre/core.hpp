#pragma once

// Domain types shared by every part of the library: matrices, study records,
// model and sampler configuration, and chain containers.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvre {

/// Largest dimension p supported by the small-matrix kernels.
inline constexpr int kMaxDim = 10;

/// Small dense matrices live on the stack (bounded dynamic size).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// Heap-backed matrices for the vectorized (p^2 x p^2) prior terms.
using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

enum class ErrorCode {
  NonPositiveDefinite,
  DimensionMismatch,
  TooFewStudies,
  NegativeArgument,
  UnsupportedGenerator,
  InvalidParameter,
  InvalidDof,
  QuadratureNonConvergence,
  EmptySample,
  InvalidBeta,
  InvalidConfig,
  ParseError,
};

const char* to_string(ErrorCode code);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), code_(code), index_(index) {}

  ErrorCode code() const { return code_; }
  /// Offending record (study, row, ...) when the error is tied to one.
  std::optional<std::size_t> index() const { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

/// Symmetric positive-definite matrix together with its lower Cholesky factor.
///
/// Construction validates exact symmetry and positive definiteness, so any
/// SpdMatrix in hand is usable without further checks. The factor is
/// computed up front; instances are immutable and safe to share.
class SpdMatrix {
 public:
  /// Throws Error(NonPositiveDefinite) for non-symmetric or non-PD input.
  explicit SpdMatrix(const Matrix& entries);

  static SpdMatrix identity(int p);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  const Matrix& chol() const { return chol_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  double log_det() const;
  Matrix inverse() const;
  Vector solve(const Vector& b) const;

 private:
  Matrix entries_;
  Matrix chol_;
};

struct StudyObservation {
  std::string label;
  Vector x;
  SpdMatrix u;
};

/// One study as read from a file, before validation.
struct RawStudy {
  std::string label;
  std::vector<double> x;
  /// Lower triangle of U, row-major: u11, u21, u22, u31, u32, u33, ...
  std::vector<double> cov_lower;
};

/// Builds a bivariate record from the (sd1, rho, sd2) convention; U12 = rho*sd1*sd2.
RawStudy raw_from_sd_corr(std::string label, double x1, double x2, double sd1, double rho, double sd2);

class Dataset {
 public:
  Dataset(int p, std::vector<StudyObservation> studies);

  int p() const { return p_; }
  int n() const { return static_cast<int>(studies_.size()); }
  const std::vector<StudyObservation>& studies() const { return studies_; }
  const StudyObservation& operator[](std::size_t i) const { return studies_[i]; }

 private:
  int p_;
  std::vector<StudyObservation> studies_;
};

/// Validates raw records into a Dataset.
/// Errors: NonPositiveDefinite (with study index), DimensionMismatch, TooFewStudies.
Dataset validate_dataset(const std::vector<RawStudy>& raw);

enum class Family { Normal, StudentT };
enum class Prior { Reference, Jeffreys };

struct ModelSpec {
  Family family = Family::Normal;
  /// Degrees of freedom of the t model; ignored for Normal.
  double dof = 4.0;
  Prior prior = Prior::Jeffreys;

  void validate() const;
};

const char* to_string(Family family);
const char* to_string(Prior prior);
Family parse_family(const std::string& s);
Prior parse_prior(const std::string& s);

/// What happens to the freshly drawn mu when the Psi proposal is rejected.
enum class MuRejectionMode {
  StandardMwG,  ///< keep mu^(b) together with Psi^(b-1)
  PaperLiteral, ///< revert to (mu^(b-1), Psi^(b-1))
};

/// Which implementation of a sampler step to run.
enum class SamplerPath {
  Specialized, ///< hand-written normal / t steps
  General,     ///< generator-dispatched elliptical step
};

const char* to_string(MuRejectionMode mode);
MuRejectionMode parse_mu_rejection_mode(const std::string& s);

struct SamplerConfig {
  int n_chains = 4;
  long length = 20000;
  long burn_in = 10000;
  std::uint64_t seed = 1;
  int thin = 1;
  MuRejectionMode mu_rejection_mode = MuRejectionMode::StandardMwG;
  SamplerPath path = SamplerPath::Specialized;

  /// Throws Error(InvalidConfig) unless n_chains >= 1, thin >= 1, length >= burn_in >= 0.
  void validate() const;
  /// Number of draws kept per chain after burn-in and thinning.
  long retained() const { return (length - burn_in + thin - 1) / thin; }
};

/// Retained state; heap-sized so long chains cost O(p^2) per draw.
struct Draw {
  DenseVector mu;
  DenseMatrix psi;
  bool accepted = false;
};

struct Chain {
  std::vector<Draw> draws;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// Fraction of accepted Psi steps after burn-in.
  double acceptance_rate = 0.0;
};

struct ChainSet {
  std::vector<Chain> chains;
  ModelSpec spec;
  SamplerConfig config;
  int p = 0;
};

}  // namespace mvre
