#include "mvre/core.hpp"

#include "mvre/linalg.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace mvre {

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general);
  return std::string(buf.data(), res.ptr);
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewStudies: return "TooFewStudies";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::UnsupportedGenerator: return "UnsupportedGenerator";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidDof: return "InvalidDof";
    case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InvalidBeta: return "InvalidBeta";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

SpdMatrix::SpdMatrix(const Matrix& entries) : entries_(entries) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw Error(ErrorCode::NonPositiveDefinite, "matrix is not square");
  }
  const int p = static_cast<int>(entries.rows());
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < i; ++j) {
      if (entries(i, j) != entries(j, i)) {
        throw Error(ErrorCode::NonPositiveDefinite, "matrix is not symmetric");
      }
    }
  }
  if (!try_cholesky(entries_, chol_)) {
    throw Error(ErrorCode::NonPositiveDefinite, "matrix is not positive definite");
  }
}

SpdMatrix SpdMatrix::identity(int p) { return SpdMatrix(Matrix::Identity(p, p)); }

double SpdMatrix::log_det() const { return log_det_from_chol(chol_); }

Matrix SpdMatrix::inverse() const { return inverse_from_chol(chol_); }

Vector SpdMatrix::solve(const Vector& b) const {
  Vector y = chol_.triangularView<Eigen::Lower>().solve(b);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

RawStudy raw_from_sd_corr(std::string label, double x1, double x2, double sd1, double rho, double sd2) {
  return RawStudy{std::move(label), {x1, x2}, {sd1 * sd1, rho * sd1 * sd2, sd2 * sd2}};
}

Dataset::Dataset(int p, std::vector<StudyObservation> studies) : p_(p), studies_(std::move(studies)) {
  if (p_ < 1 || p_ > kMaxDim) {
    throw Error(ErrorCode::DimensionMismatch, "dimension p must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  for (std::size_t i = 0; i < studies_.size(); ++i) {
    if (studies_[i].x.size() != p_ || studies_[i].u.dim() != p_) {
      throw Error(ErrorCode::DimensionMismatch, "study " + std::to_string(i + 1) + " has the wrong dimension", i);
    }
  }
  const int n = static_cast<int>(studies_.size());
  if (n < 2 || n < p_) {
    throw Error(ErrorCode::TooFewStudies,
                "need at least max(2, p) studies, got " + std::to_string(n));
  }
}

Dataset validate_dataset(const std::vector<RawStudy>& raw) {
  if (raw.empty()) {
    throw Error(ErrorCode::TooFewStudies, "no study records");
  }
  const std::size_t p = raw.front().x.size();
  if (p < 1 || p > static_cast<std::size_t>(kMaxDim)) {
    throw Error(ErrorCode::DimensionMismatch, "unsupported dimension " + std::to_string(p), 0);
  }
  std::vector<StudyObservation> studies;
  studies.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const RawStudy& r = raw[i];
    if (r.x.size() != p || r.cov_lower.size() != p * (p + 1) / 2) {
      throw Error(ErrorCode::DimensionMismatch, "study " + std::to_string(i + 1) + " has inconsistent dimension", i);
    }
    Vector x(static_cast<int>(p));
    for (std::size_t k = 0; k < p; ++k) {
      if (!std::isfinite(r.x[k])) {
        throw Error(ErrorCode::InvalidParameter, "study " + std::to_string(i + 1) + " has a non-finite effect", i);
      }
      x(static_cast<int>(k)) = r.x[k];
    }
    Matrix u(static_cast<int>(p), static_cast<int>(p));
    std::size_t k = 0;
    for (int row = 0; row < static_cast<int>(p); ++row) {
      for (int col = 0; col <= row; ++col) {
        u(row, col) = r.cov_lower[k];
        u(col, row) = r.cov_lower[k];
        ++k;
      }
    }
    try {
      studies.push_back(StudyObservation{r.label, x, SpdMatrix(u)});
    } catch (const Error&) {
      throw Error(ErrorCode::NonPositiveDefinite,
                  "within-study covariance of study " + std::to_string(i + 1) + " is not positive definite", i);
    }
  }
  return Dataset(static_cast<int>(p), std::move(studies));
}

void ModelSpec::validate() const {
  if (family == Family::StudentT && !(std::isfinite(dof) && dof > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "t degrees of freedom must be finite and positive");
  }
}

const char* to_string(Family family) { return family == Family::Normal ? "normal" : "t"; }

const char* to_string(Prior prior) { return prior == Prior::Reference ? "reference" : "jeffreys"; }

Family parse_family(const std::string& s) {
  if (s == "normal") return Family::Normal;
  if (s == "t" || s == "student-t") return Family::StudentT;
  throw Error(ErrorCode::InvalidConfig, "unknown family '" + s + "'");
}

Prior parse_prior(const std::string& s) {
  if (s == "reference" || s == "berger-bernardo") return Prior::Reference;
  if (s == "jeffreys") return Prior::Jeffreys;
  throw Error(ErrorCode::InvalidConfig, "unknown prior '" + s + "'");
}

const char* to_string(MuRejectionMode mode) {
  return mode == MuRejectionMode::StandardMwG ? "standard" : "literal";
}

MuRejectionMode parse_mu_rejection_mode(const std::string& s) {
  if (s == "standard") return MuRejectionMode::StandardMwG;
  if (s == "literal") return MuRejectionMode::PaperLiteral;
  throw Error(ErrorCode::InvalidConfig, "unknown rejection mode '" + s + "'");
}

void SamplerConfig::validate() const {
  if (n_chains < 1) throw Error(ErrorCode::InvalidConfig, "need at least one chain");
  if (thin < 1) throw Error(ErrorCode::InvalidConfig, "thin must be >= 1");
  if (burn_in < 0) throw Error(ErrorCode::InvalidConfig, "burn-in must be >= 0");
  if (length < burn_in) throw Error(ErrorCode::InvalidConfig, "chain length must be >= burn-in");
}

}  // namespace mvre
