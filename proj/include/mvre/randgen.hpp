#pragma once

// Seeded random sampling: scalar laws, multivariate normal / t, Wishart
// family via the Bartlett decomposition, and Haar orthogonal matrices.

#include "mvre/core.hpp"
#include "mvre/elliptical.hpp"

#include <cstdint>
#include <random>

namespace mvre {

/// Deterministic random stream identified by (seed, stream_id).
///
/// Streams with the same pair replay the same sequence; different stream ids
/// derived from one master seed are used for parallel chains and repetitions.
/// A stream is owned by one worker at a time.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on [0, 1).
  double uniform();
  double normal();
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Mixes (seed, index) into a child seed; used to derive per-repetition seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

double sample_std_normal(RngStream& rng);
/// chi^2(d) = gamma(d/2, 2); d may be non-integer. Throws Error(InvalidParameter).
double sample_chi_square(RngStream& rng, double d);
double sample_gamma(RngStream& rng, double shape, double scale);

/// mean + L z with L = chol(cov).
Vector sample_mvn(RngStream& rng, const Vector& mean, const SpdMatrix& cov);
/// location + sqrt(dof / chi^2(dof)) L z with L = chol(dispersion); z is drawn first.
Vector sample_mvt(RngStream& rng, double dof, const Vector& location, const SpdMatrix& dispersion);

/// Wishart(nu, scale) via Bartlett; nu > p - 1 need not be an integer.
Matrix sample_wishart(RngStream& rng, double nu, const SpdMatrix& scale);

/// Inverse Wishart indexed by the kernel exponent m:
/// density proportional to det(Psi)^{-m/2} exp(-tr(Psi^{-1} S)/2).
/// Drawn as the inverse of Wishart(m - p - 1, S^{-1}). Requires m > 2p.
/// Throws Error(InvalidDof).
Matrix sample_inverse_wishart(RngStream& rng, double m, const SpdMatrix& s);

/// Generalized inverse Wishart GIW_p(m, S, f): inverse Wishart for the normal
/// generator; (xi/d) Omega with Omega ~ IW(m, S), xi ~ chi^2(d) for t(d).
Matrix sample_giw(RngStream& rng, double m, const SpdMatrix& s, const Generator& gen);

/// Haar-distributed orthogonal p x p matrix (QR of a Gaussian matrix with
/// the diagonal of R made positive).
Matrix sample_haar_orthogonal(RngStream& rng, int p);

}  // namespace mvre
