#include "mvre/sampler.hpp"

#include "mvre/linalg.hpp"
#include "mvre/parallel.hpp"

#include <array>
#include <cmath>
#include <limits>

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

Vector draw_mu_general(const PosteriorContext& ctx, const PsiTerms& terms, RngStream& rng) {
  const ConditionalMuLaw law = conditional_mu_law(ctx, terms);
  const SpdMatrix dispersion(law.dispersion);
  switch (law.family) {
    case Family::Normal:
      return sample_mvn(rng, law.location, dispersion);
    case Family::StudentT:
      return sample_mvt(rng, law.dof, law.location, dispersion);
  }
  throw Error(ErrorCode::UnsupportedGenerator, "no conditional sampler for this generator");
}

Vector draw_mu_normal(const PsiTerms& terms, RngStream& rng) {
  Matrix cov = inverse_from_chol(terms.precision_chol);
  symmetrize(cov);
  return sample_mvn(rng, terms.pooled_mean, SpdMatrix(cov));
}

Vector draw_mu_t(const PosteriorContext& ctx, const PsiTerms& terms, RngStream& rng) {
  const Generator& g = ctx.generator();
  const double q = weighted_ssq(ctx, terms, terms.pooled_mean);
  const double nu = static_cast<double>(g.p) * g.n + g.dof - g.p;
  Matrix disp = inverse_from_chol(terms.precision_chol);
  disp *= (g.dof + q) / nu;
  symmetrize(disp);
  return sample_mvt(rng, nu, terms.pooled_mean, SpdMatrix(disp));
}

Vector draw_mu_from_terms(const PosteriorContext& ctx, const PsiTerms& terms, RngStream& rng, SamplerPath path) {
  if (path == SamplerPath::General) return draw_mu_general(ctx, terms, rng);
  return ctx.spec().family == Family::Normal ? draw_mu_normal(terms, rng) : draw_mu_t(ctx, terms, rng);
}

Matrix propose_psi(const PosteriorContext& ctx, const SpdMatrix& s, RngStream& rng, SamplerPath path) {
  const double m = ctx.giw_dof();
  if (path == SamplerPath::General) return sample_giw(rng, m, s, ctx.generator());
  if (ctx.spec().family == Family::Normal) return sample_inverse_wishart(rng, m, s);
  const double d = ctx.generator().dof;
  const Matrix omega = sample_inverse_wishart(rng, m, s);
  const double xi = sample_chi_square(rng, d);
  return (xi / d) * omega;
}

double proposal_log_density(const PosteriorContext& ctx, const Matrix& psi, const Vector& mu, SamplerPath path) {
  if (path == SamplerPath::General) return log_giw_proposal_density(ctx, psi, mu);
  Matrix l;
  if (!try_cholesky(psi, l)) return kNegInf;
  const double m = ctx.giw_dof();
  const double trace = trace_inv_psi_scatter(ctx, l, mu);
  const double log_det = log_det_from_chol(l);
  if (ctx.spec().family == Family::Normal) return -0.5 * m * log_det - 0.5 * trace;
  const double d = ctx.generator().dof;
  const double exponent = 0.5 * (ctx.p() * (m - ctx.p() - 1) + d);
  return -0.5 * m * log_det - exponent * std::log1p(trace / d);
}

}  // namespace

std::vector<GibbsState> initial_states(const PosteriorContext& ctx, int n_chains) {
  if (n_chains < 1) throw Error(ErrorCode::InvalidConfig, "need at least one chain");
  const Dataset& data = ctx.dataset();
  const int p = data.p();
  const int n = data.n();
  Vector xbar = Vector::Zero(p);
  Matrix ubar = Matrix::Zero(p, p);
  for (const StudyObservation& s : data.studies()) {
    xbar += s.x;
    ubar += s.u.matrix();
  }
  xbar /= n;
  ubar /= n;
  Matrix sigma = scatter_matrix(ctx, xbar) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  Vector lambda = eig.eigenvalues();
  double floor = 1e-6 * sigma.trace() / p;
  if (!(floor > 0.0)) floor = 1e-6 * ubar.trace() / p;
  for (int i = 0; i < p; ++i) lambda(i) = std::max(lambda(i), floor);
  Matrix base = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  symmetrize(base);

  constexpr std::array<double, 4> kScales{0.5, 1.0, 2.0, 4.0};
  std::vector<GibbsState> states;
  states.reserve(static_cast<std::size_t>(n_chains));
  for (int k = 0; k < n_chains; ++k) {
    GibbsState st;
    st.psi = kScales[static_cast<std::size_t>(k) % kScales.size()] * base;
    const PsiTerms terms = psi_terms(ctx, st.psi);
    st.mu = terms.pooled_mean;
    st.log_joint = log_joint_posterior(ctx, terms, st.mu);
    states.push_back(std::move(st));
  }
  return states;
}

Vector draw_mu(const PosteriorContext& ctx, const Matrix& psi, RngStream& rng, SamplerPath path) {
  return draw_mu_from_terms(ctx, psi_terms(ctx, psi), rng, path);
}

double mh_log_ratio(const PosteriorContext& ctx, const Vector& mu, const Matrix& current, const Matrix& proposed) {
  const double joint_new = log_joint_posterior(ctx, mu, proposed);
  if (joint_new == kNegInf) return kNegInf;
  return (joint_new - log_joint_posterior(ctx, mu, current)) +
         (log_giw_proposal_density(ctx, current, mu) - log_giw_proposal_density(ctx, proposed, mu));
}

StepResult gibbs_step(const PosteriorContext& ctx, const GibbsState& state, RngStream& rng, MuRejectionMode mode,
                      SamplerPath path) {
  const PsiTerms current = psi_terms(ctx, state.psi);
  const Vector mu = draw_mu_from_terms(ctx, current, rng, path);
  const double joint_current = log_joint_posterior(ctx, current, mu);

  Matrix s_chol;
  const Matrix s = scatter_matrix(ctx, mu);
  Matrix proposal;
  double log_ratio = kNegInf;
  double joint_proposal = kNegInf;
  if (try_cholesky(s, s_chol)) {
    proposal = propose_psi(ctx, SpdMatrix(s), rng, path);
    if (auto terms = try_psi_terms(ctx, proposal); terms) {
      const double q_proposal = proposal_log_density(ctx, proposal, mu, path);
      if (q_proposal != kNegInf) {
        joint_proposal = log_joint_posterior(ctx, *terms, mu);
        log_ratio = (joint_proposal - joint_current) + (proposal_log_density(ctx, state.psi, mu, path) - q_proposal);
      }
    }
  }
  const double log_u = std::log(rng.uniform());

  StepResult out;
  if (log_u < log_ratio) {
    out.state = GibbsState{mu, proposal, joint_proposal};
    out.accepted = true;
  } else if (mode == MuRejectionMode::StandardMwG) {
    out.state = GibbsState{mu, state.psi, joint_current};
  } else {
    out.state = state;
  }
  return out;
}

Chain run_chain(const PosteriorContext& ctx, const SamplerConfig& config, const GibbsState& init, RngStream& rng) {
  config.validate();
  Chain chain;
  chain.seed = rng.seed();
  chain.stream = rng.stream_id();
  chain.draws.reserve(static_cast<std::size_t>(config.retained()));
  GibbsState state = init;
  long accepted = 0;
  for (long b = 1; b <= config.length; ++b) {
    StepResult r = gibbs_step(ctx, state, rng, config.mu_rejection_mode, config.path);
    state = std::move(r.state);
    if (b <= config.burn_in) continue;
    if (r.accepted) ++accepted;
    if ((b - config.burn_in - 1) % config.thin == 0) {
      chain.draws.push_back(Draw{state.mu, state.psi, r.accepted});
    }
  }
  const long post = config.length - config.burn_in;
  chain.acceptance_rate = post > 0 ? static_cast<double>(accepted) / static_cast<double>(post) : 0.0;
  return chain;
}

ChainSet run_chains(const PosteriorContext& ctx, const SamplerConfig& config, int workers) {
  config.validate();
  const std::vector<GibbsState> inits = initial_states(ctx, config.n_chains);
  ChainSet set;
  set.spec = ctx.spec();
  set.config = config;
  set.p = ctx.p();
  set.chains.resize(static_cast<std::size_t>(config.n_chains));
  parallel_for(config.n_chains, workers > 0 ? workers : pool_size(config.n_chains), [&](int k) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(k));
    set.chains[static_cast<std::size_t>(k)] = run_chain(ctx, config, inits[static_cast<std::size_t>(k)], rng);
  });
  return set;
}

}  // namespace mvre
