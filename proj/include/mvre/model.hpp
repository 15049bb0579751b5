#pragma once

// Log-density evaluations of the multivariate random-effects model:
// objective priors, elliptical likelihood, joint / conditional / marginal
// posteriors, and the generalized inverse-Wishart kernels used as proposals.

#include "mvre/core.hpp"
#include "mvre/elliptical.hpp"

#include <optional>

namespace mvre {

/// Binds data, model choice and the generator sized to the data.
class PosteriorContext {
 public:
  PosteriorContext(Dataset dataset, ModelSpec spec);

  const Dataset& dataset() const { return dataset_; }
  const ModelSpec& spec() const { return spec_; }
  const Generator& generator() const { return gen_; }
  const J2Coefficients& coefficients() const { return coef_; }
  const DenseMatrix& duplication() const { return dup_; }
  int p() const { return dataset_.p(); }
  int n() const { return dataset_.n(); }

  /// Kernel exponent m of the GIW proposal: n+p+1 (reference) or n+p+2 (Jeffreys).
  int giw_dof() const;

 private:
  Dataset dataset_;
  ModelSpec spec_;
  Generator gen_;
  J2Coefficients coef_;
  DenseMatrix dup_;
};

/// Quantities that depend on Psi only, computed once per Psi.
struct PsiTerms {
  std::vector<Matrix> inv;   ///< (Psi + U_i)^{-1}
  Matrix precision;          ///< sum_i (Psi + U_i)^{-1}
  Matrix precision_chol;
  Vector pooled_mean;        ///< x~(Psi)
  double sum_log_det = 0.0;  ///< sum_i log det(Psi + U_i)
};

/// nullopt when Psi (or a derived matrix) fails to factorize.
std::optional<PsiTerms> try_psi_terms(const PosteriorContext& ctx, const Matrix& psi);
/// Throws Error(NonPositiveDefinite).
PsiTerms psi_terms(const PosteriorContext& ctx, const Matrix& psi);

Matrix precision_sum(const PosteriorContext& ctx, const Matrix& psi);
Vector pooled_mean(const PosteriorContext& ctx, const Matrix& psi);

/// sum_i (x_i - mu)^T (Psi + U_i)^{-1} (x_i - mu)
double weighted_ssq(const PosteriorContext& ctx, const Vector& mu, const Matrix& psi);
double weighted_ssq(const PosteriorContext& ctx, const PsiTerms& terms, const Vector& mu);

/// S(mu) = sum_i (x_i - mu)(x_i - mu)^T. Throws Error(NonPositiveDefinite) if degenerate.
SpdMatrix scatter(const PosteriorContext& ctx, const Vector& mu);
/// Unvalidated scatter matrix (symmetric by construction).
Matrix scatter_matrix(const PosteriorContext& ctx, const Vector& mu);

/// log pi_R(Psi) with unit proportionality constant. -inf if the information
/// matrix is not positive definite.
double log_prior_reference(const PosteriorContext& ctx, const Matrix& psi);
double log_prior_reference(const PosteriorContext& ctx, const PsiTerms& terms);
/// log pi_J(Psi) = log pi_R(Psi) + (1/2) log det sum_i (Psi + U_i)^{-1}
double log_prior_jeffreys(const PosteriorContext& ctx, const Matrix& psi);
double log_prior_jeffreys(const PosteriorContext& ctx, const PsiTerms& terms);
/// Prior selected by ctx.spec().
double log_prior(const PosteriorContext& ctx, const PsiTerms& terms);

/// -(1/2) sum log det(Psi + U_i) + log f(weighted_ssq). -inf for non-PD Psi.
double log_likelihood(const PosteriorContext& ctx, const Vector& mu, const Matrix& psi);
double log_likelihood(const PosteriorContext& ctx, const PsiTerms& terms, const Vector& mu);

/// Unnormalized log joint posterior. -inf for non-PD Psi.
double log_joint_posterior(const PosteriorContext& ctx, const Vector& mu, const Matrix& psi);
double log_joint_posterior(const PosteriorContext& ctx, const PsiTerms& terms, const Vector& mu);

/// Conditional law of mu given Psi: normal, or p-variate t with pn+d-p dof.
struct ConditionalMuLaw {
  Family family = Family::Normal;
  Vector location;
  Matrix dispersion;
  double dof = 0.0;           ///< t only
  double scale_factor = 1.0;  ///< (d + Q) / (pn + d - p) for t, 1 for normal
};

ConditionalMuLaw conditional_mu_law(const PosteriorContext& ctx, const Matrix& psi);
ConditionalMuLaw conditional_mu_law(const PosteriorContext& ctx, const PsiTerms& terms);

/// log density of the conditional law of mu at `mu` (normalized).
double log_conditional_mu_density(const ConditionalMuLaw& law, const Vector& mu);

/// tr(Psi^{-1} S(mu)) via triangular solves against the factor of Psi.
double trace_inv_psi_scatter(const PosteriorContext& ctx, const Matrix& psi_chol, const Vector& mu);

/// -(m/2) log det Psi + log f(tr(Psi^{-1} S(mu))) with the data generator
/// (the envelope q_R / q_J). -inf for non-PD Psi.
double log_giw_kernel(const PosteriorContext& ctx, const Matrix& psi, const Vector& mu);

/// Log density (up to a Psi-free constant) of the law drawn by sample_giw
/// with kernel exponent m. The t-scaled construction Psi = (xi/d) Omega with
/// Omega ~ IW(m, S) has generator exponent -(p(m-p-1)+d)/2, so this equals
/// log_giw_kernel whenever m - p - 1 == n (reference prior, or any normal model).
double log_giw_proposal_density(const PosteriorContext& ctx, const Matrix& psi, const Vector& mu);

enum class MarginalMethod { ClosedForm, Quadrature };

/// Unnormalized log marginal posterior of Psi:
///   log pi(Psi) - (1/2) log det P - (1/2) sum log det(Psi+U_i) + log int_0^inf u^{p-1} f(u^2 + Q) du
/// Quadrature may throw Error(QuadratureNonConvergence).
double log_marginal_psi(const PosteriorContext& ctx, const Matrix& psi,
                        MarginalMethod method = MarginalMethod::ClosedForm);

}  // namespace mvre
