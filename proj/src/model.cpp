#include "mvre/model.hpp"

#include "mvre/linalg.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace mvre {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void symmetrize(Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  }
}

}  // namespace

PosteriorContext::PosteriorContext(Dataset dataset, ModelSpec spec)
    : dataset_(std::move(dataset)),
      spec_(spec),
      gen_(Generator::from_spec(spec, dataset_.p(), dataset_.n())),
      coef_(j2_coefficients(gen_)),
      dup_(duplication_matrix(dataset_.p())) {}

int PosteriorContext::giw_dof() const {
  return n() + p() + (spec_.prior == Prior::Reference ? 1 : 2);
}

std::optional<PsiTerms> try_psi_terms(const PosteriorContext& ctx, const Matrix& psi) {
  const int p = ctx.p();
  PsiTerms t;
  t.inv.reserve(static_cast<std::size_t>(ctx.n()));
  t.precision = Matrix::Zero(p, p);
  Vector weighted = Vector::Zero(p);
  Matrix l;
  for (const StudyObservation& s : ctx.dataset().studies()) {
    const Matrix total = psi + s.u.matrix();
    if (!try_cholesky(total, l)) return std::nullopt;
    t.sum_log_det += log_det_from_chol(l);
    Matrix inv = inverse_from_chol(l);
    t.precision += inv;
    weighted.noalias() += inv * s.x;
    t.inv.push_back(std::move(inv));
  }
  if (!try_cholesky(t.precision, t.precision_chol)) return std::nullopt;
  Vector y = t.precision_chol.triangularView<Eigen::Lower>().solve(weighted);
  t.pooled_mean = t.precision_chol.transpose().triangularView<Eigen::Upper>().solve(y);
  return t;
}

PsiTerms psi_terms(const PosteriorContext& ctx, const Matrix& psi) {
  auto t = try_psi_terms(ctx, psi);
  if (!t) throw Error(ErrorCode::NonPositiveDefinite, "Psi + U_i is not positive definite");
  return std::move(*t);
}

Matrix precision_sum(const PosteriorContext& ctx, const Matrix& psi) { return psi_terms(ctx, psi).precision; }

Vector pooled_mean(const PosteriorContext& ctx, const Matrix& psi) { return psi_terms(ctx, psi).pooled_mean; }

double weighted_ssq(const PosteriorContext& ctx, const PsiTerms& terms, const Vector& mu) {
  double q = 0.0;
  const auto& studies = ctx.dataset().studies();
  for (std::size_t i = 0; i < studies.size(); ++i) {
    const Vector r = studies[i].x - mu;
    q += r.dot(terms.inv[i] * r);
  }
  return std::max(q, 0.0);
}

double weighted_ssq(const PosteriorContext& ctx, const Vector& mu, const Matrix& psi) {
  return weighted_ssq(ctx, psi_terms(ctx, psi), mu);
}

Matrix scatter_matrix(const PosteriorContext& ctx, const Vector& mu) {
  const int p = ctx.p();
  Matrix s = Matrix::Zero(p, p);
  for (const StudyObservation& st : ctx.dataset().studies()) {
    const Vector r = st.x - mu;
    for (int j = 0; j < p; ++j) {
      for (int i = j; i < p; ++i) s(i, j) += r(i) * r(j);
    }
  }
  for (int j = 0; j < p; ++j) {
    for (int i = j + 1; i < p; ++i) s(j, i) = s(i, j);
  }
  return s;
}

SpdMatrix scatter(const PosteriorContext& ctx, const Vector& mu) {
  try {
    return SpdMatrix(scatter_matrix(ctx, mu));
  } catch (const Error&) {
    throw Error(ErrorCode::NonPositiveDefinite, "scatter matrix S(mu) is degenerate");
  }
}

double log_prior_reference(const PosteriorContext& ctx, const PsiTerms& terms) {
  const int p = ctx.p();
  const int p2 = p * p;
  const J2Coefficients& c = ctx.coefficients();
  DenseMatrix info = DenseMatrix::Zero(p2, p2);
  for (const Matrix& a : terms.inv) {
    const DenseMatrix ad = a;
    info.noalias() += kronecker(ad, ad);
  }
  info *= c.a;
  const DenseVector vp = vec(DenseMatrix(terms.precision));
  info.noalias() += c.b * (vp * vp.transpose());
  const DenseMatrix& g = ctx.duplication();
  const DenseMatrix reduced = g.transpose() * info * g;
  DenseMatrix l;
  if (!try_cholesky(reduced, l)) return kNegInf;
  double s = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
  return s;  // (1/2) log det = sum log diag(L)
}

double log_prior_reference(const PosteriorContext& ctx, const Matrix& psi) {
  auto t = try_psi_terms(ctx, psi);
  return t ? log_prior_reference(ctx, *t) : kNegInf;
}

double log_prior_jeffreys(const PosteriorContext& ctx, const PsiTerms& terms) {
  return log_prior_reference(ctx, terms) + 0.5 * log_det_from_chol(terms.precision_chol);
}

double log_prior_jeffreys(const PosteriorContext& ctx, const Matrix& psi) {
  auto t = try_psi_terms(ctx, psi);
  return t ? log_prior_jeffreys(ctx, *t) : kNegInf;
}

double log_prior(const PosteriorContext& ctx, const PsiTerms& terms) {
  return ctx.spec().prior == Prior::Reference ? log_prior_reference(ctx, terms) : log_prior_jeffreys(ctx, terms);
}

double log_likelihood(const PosteriorContext& ctx, const PsiTerms& terms, const Vector& mu) {
  return -0.5 * terms.sum_log_det + log_f(ctx.generator(), weighted_ssq(ctx, terms, mu));
}

double log_likelihood(const PosteriorContext& ctx, const Vector& mu, const Matrix& psi) {
  auto t = try_psi_terms(ctx, psi);
  return t ? log_likelihood(ctx, *t, mu) : kNegInf;
}

double log_joint_posterior(const PosteriorContext& ctx, const PsiTerms& terms, const Vector& mu) {
  return log_prior(ctx, terms) + log_likelihood(ctx, terms, mu);
}

double log_joint_posterior(const PosteriorContext& ctx, const Vector& mu, const Matrix& psi) {
  Matrix l;
  if (!try_cholesky(psi, l)) return kNegInf;
  auto t = try_psi_terms(ctx, psi);
  return t ? log_joint_posterior(ctx, *t, mu) : kNegInf;
}

ConditionalMuLaw conditional_mu_law(const PosteriorContext& ctx, const PsiTerms& terms) {
  ConditionalMuLaw law;
  law.family = ctx.spec().family;
  law.location = terms.pooled_mean;
  Matrix cov = inverse_from_chol(terms.precision_chol);
  if (law.family == Family::StudentT) {
    const Generator& g = ctx.generator();
    const double q = weighted_ssq(ctx, terms, terms.pooled_mean);
    law.dof = static_cast<double>(g.p) * g.n + g.dof - g.p;
    law.scale_factor = (g.dof + q) / law.dof;
    cov *= law.scale_factor;
  }
  symmetrize(cov);
  law.dispersion = cov;
  return law;
}

ConditionalMuLaw conditional_mu_law(const PosteriorContext& ctx, const Matrix& psi) {
  return conditional_mu_law(ctx, psi_terms(ctx, psi));
}

double log_conditional_mu_density(const ConditionalMuLaw& law, const Vector& mu) {
  const Matrix l = cholesky(law.dispersion);
  const double p = static_cast<double>(mu.size());
  const Vector z = l.triangularView<Eigen::Lower>().solve(mu - law.location);
  const double delta = z.squaredNorm();
  const double half_log_det = 0.5 * log_det_from_chol(l);
  if (law.family == Family::Normal) {
    return -0.5 * p * std::log(2.0 * std::numbers::pi) - half_log_det - 0.5 * delta;
  }
  const double nu = law.dof;
  return std::lgamma(0.5 * (nu + p)) - std::lgamma(0.5 * nu) - 0.5 * p * std::log(nu * std::numbers::pi) -
         half_log_det - 0.5 * (nu + p) * std::log1p(delta / nu);
}

double trace_inv_psi_scatter(const PosteriorContext& ctx, const Matrix& psi_chol, const Vector& mu) {
  double t = 0.0;
  for (const StudyObservation& s : ctx.dataset().studies()) {
    const Vector z = psi_chol.triangularView<Eigen::Lower>().solve(s.x - mu);
    t += z.squaredNorm();
  }
  return t;
}

namespace {

double giw_log_kernel(const PosteriorContext& ctx, const Generator& gen, const Matrix& psi, const Vector& mu) {
  Matrix l;
  if (!try_cholesky(psi, l)) return kNegInf;
  const double m = static_cast<double>(ctx.giw_dof());
  return -0.5 * m * log_det_from_chol(l) + log_f(gen, trace_inv_psi_scatter(ctx, l, mu));
}

}  // namespace

double log_giw_kernel(const PosteriorContext& ctx, const Matrix& psi, const Vector& mu) {
  return giw_log_kernel(ctx, ctx.generator(), psi, mu);
}

double log_giw_proposal_density(const PosteriorContext& ctx, const Matrix& psi, const Vector& mu) {
  const Generator gen = ctx.generator().with_n(ctx.giw_dof() - ctx.p() - 1);
  return giw_log_kernel(ctx, gen, psi, mu);
}

namespace {

// log int_0^inf u^{p-1} f(u^2 + q) du in closed form.
double log_radial_integral_closed(const Generator& g, double q) {
  const double p = g.p;
  const double pn = static_cast<double>(g.p) * g.n;
  if (g.family == Family::Normal) {
    return log_f(g, q) + (0.5 * p - 1.0) * std::log(2.0) + std::lgamma(0.5 * p);
  }
  const double d = g.dof;
  const double k = 0.5 * (pn + d);
  const double log_half_beta = std::lgamma(0.5 * p) + std::lgamma(k - 0.5 * p) - std::lgamma(k) - std::log(2.0);
  return log_f(g, q) + 0.5 * p * std::log(d + q) + log_half_beta;
}

double log_radial_integral_quadrature(const Generator& g, double q) {
  const double base = log_f(g, q);
  const int p = g.p;
  auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    return std::pow(u, p - 1) * std::exp(log_f(g, q + u * u) - base);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(integrand, 1e-10, &error, &l1);
  if (!std::isfinite(value) || value <= 0.0 || error > 1e-6 * l1) {
    throw Error(ErrorCode::QuadratureNonConvergence, "radial integral of the marginal posterior did not converge");
  }
  return base + std::log(value);
}

}  // namespace

double log_marginal_psi(const PosteriorContext& ctx, const Matrix& psi, MarginalMethod method) {
  Matrix l;
  if (!try_cholesky(psi, l)) return kNegInf;
  auto t = try_psi_terms(ctx, psi);
  if (!t) return kNegInf;
  const double q = weighted_ssq(ctx, *t, t->pooled_mean);
  const double radial = method == MarginalMethod::ClosedForm ? log_radial_integral_closed(ctx.generator(), q)
                                                             : log_radial_integral_quadrature(ctx.generator(), q);
  return log_prior(ctx, *t) - 0.5 * log_det_from_chol(t->precision_chol) - 0.5 * t->sum_log_det + radial;
}

}  // namespace mvre
