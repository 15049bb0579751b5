#include "mvre/randgen.hpp"

#include "mvre/linalg.hpp"

#include <cmath>
#include <string>

namespace mvre {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(seed), hi(seed), lo(stream), hi(stream)};
}

void symmetrize(Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  }
}

// Lower-triangular Bartlett factor A with A A^T ~ Wishart(nu, I).
Matrix bartlett_factor(RngStream& rng, double nu, int p) {
  Matrix a = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(sample_chi_square(rng, nu - i));
    for (int j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  return a;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  auto seq = make_seed_seq(seed, stream_id);
  engine_.seed(seq);
}

double RngStream::uniform() { return std::generate_canonical<double, 53>(engine_); }

double RngStream::normal() { return normal_(engine_); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double sample_std_normal(RngStream& rng) { return rng.normal(); }

double sample_gamma(RngStream& rng, double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
    throw Error(ErrorCode::InvalidParameter, "gamma shape and scale must be positive");
  }
  std::gamma_distribution<double> dist(shape, scale);
  return dist(rng.engine());
}

double sample_chi_square(RngStream& rng, double d) {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw Error(ErrorCode::InvalidParameter, "chi-square degrees of freedom must be positive");
  }
  return sample_gamma(rng, 0.5 * d, 2.0);
}

Vector sample_mvn(RngStream& rng, const Vector& mean, const SpdMatrix& cov) {
  const int p = cov.dim();
  if (mean.size() != p) throw Error(ErrorCode::DimensionMismatch, "mean and covariance dimensions differ");
  Vector z(p);
  for (int i = 0; i < p; ++i) z(i) = rng.normal();
  return mean + cov.chol().triangularView<Eigen::Lower>() * z;
}

Vector sample_mvt(RngStream& rng, double dof, const Vector& location, const SpdMatrix& dispersion) {
  const int p = dispersion.dim();
  if (location.size() != p) throw Error(ErrorCode::DimensionMismatch, "location and dispersion dimensions differ");
  Vector z(p);
  for (int i = 0; i < p; ++i) z(i) = rng.normal();
  const double w = std::sqrt(dof / sample_chi_square(rng, dof));
  const Vector lz = dispersion.chol().triangularView<Eigen::Lower>() * z;
  return location + w * lz;
}

Matrix sample_wishart(RngStream& rng, double nu, const SpdMatrix& scale) {
  const int p = scale.dim();
  if (!(nu > p - 1)) throw Error(ErrorCode::InvalidDof, "Wishart degrees of freedom must exceed p - 1");
  const Matrix a = bartlett_factor(rng, nu, p);
  const Matrix la = scale.chol() * a;
  Matrix w = la * la.transpose();
  symmetrize(w);
  return w;
}

Matrix sample_inverse_wishart(RngStream& rng, double m, const SpdMatrix& s) {
  const int p = s.dim();
  const double nu = m - p - 1;
  if (!(m > 2.0 * p) || !std::isfinite(m)) {
    throw Error(ErrorCode::InvalidDof, "inverse Wishart kernel exponent must exceed 2p, got " + std::to_string(m));
  }
  // With S = C C^T and L = C^{-T} (L L^T = S^{-1}), W = L A A^T L^T and
  // W^{-1} = B B^T where B^T = A^{-1} C^T.
  const Matrix a = bartlett_factor(rng, nu, p);
  const Matrix bt = a.triangularView<Eigen::Lower>().solve(s.chol().transpose());
  Matrix psi = bt.transpose() * bt;
  symmetrize(psi);
  return psi;
}

Matrix sample_giw(RngStream& rng, double m, const SpdMatrix& s, const Generator& gen) {
  switch (gen.family) {
    case Family::Normal:
      return sample_inverse_wishart(rng, m, s);
    case Family::StudentT: {
      const Matrix omega = sample_inverse_wishart(rng, m, s);
      const double xi = sample_chi_square(rng, gen.dof);
      return (xi / gen.dof) * omega;
    }
  }
  throw Error(ErrorCode::UnsupportedGenerator, "no GIW sampler for this generator");
}

Matrix sample_haar_orthogonal(RngStream& rng, int p) {
  if (p < 1 || p > kMaxDim) throw Error(ErrorCode::InvalidParameter, "Haar dimension out of range");
  Matrix g(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace mvre
