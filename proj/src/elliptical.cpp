#include "mvre/elliptical.hpp"

#include <cmath>
#include <numbers>

namespace mvre {

Generator Generator::from_spec(const ModelSpec& spec, int p, int n) {
  spec.validate();
  Generator gen{spec.family, spec.family == Family::StudentT ? spec.dof : 0.0, p, n};
  gen.validate();
  return gen;
}

Generator Generator::with_n(int new_n) const {
  Generator g = *this;
  g.n = new_n;
  g.validate();
  return g;
}

void Generator::validate() const {
  if (p < 1 || n < 1) throw Error(ErrorCode::InvalidParameter, "generator needs p, n >= 1");
  if (family == Family::StudentT && !(std::isfinite(dof) && dof > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "t generator needs finite dof > 0");
  }
}

double log_normalizer(const Generator& gen) {
  const double pn = static_cast<double>(gen.p) * gen.n;
  switch (gen.family) {
    case Family::Normal:
      return -0.5 * pn * std::log(2.0 * std::numbers::pi);
    case Family::StudentT: {
      const double d = gen.dof;
      return std::lgamma(0.5 * (d + pn)) - std::lgamma(0.5 * d) - 0.5 * pn * std::log(std::numbers::pi * d);
    }
  }
  throw Error(ErrorCode::UnsupportedGenerator, "unknown generator family");
}

double log_f(const Generator& gen, double u) {
  if (u < 0.0) throw Error(ErrorCode::NegativeArgument, "generator argument must be >= 0");
  const double pn = static_cast<double>(gen.p) * gen.n;
  switch (gen.family) {
    case Family::Normal:
      return log_normalizer(gen) - 0.5 * u;
    case Family::StudentT:
      return log_normalizer(gen) - 0.5 * (pn + gen.dof) * std::log1p(u / gen.dof);
  }
  throw Error(ErrorCode::UnsupportedGenerator, "unknown generator family");
}

double log_f_conditional(const Generator& gen, double q_base, double u) {
  if (q_base < 0.0 || u < 0.0) throw Error(ErrorCode::NegativeArgument, "generator argument must be >= 0");
  return log_f(gen, q_base + u);
}

double j2(const Generator& gen) {
  const double pn = static_cast<double>(gen.p) * gen.n;
  switch (gen.family) {
    case Family::Normal:
      return pn * (pn + 2.0) / 4.0;
    case Family::StudentT: {
      const double d = gen.dof;
      return pn * (pn + 2.0) * (pn + d) / (4.0 * (pn + 2.0 + d));
    }
  }
  throw Error(ErrorCode::UnsupportedGenerator, "unknown generator family");
}

J2Coefficients j2_coefficients(const Generator& gen) {
  const double pn = static_cast<double>(gen.p) * gen.n;
  const double ratio = j2(gen) / (2.0 * pn + pn * pn);
  J2Coefficients c{2.0 * ratio, ratio - 0.25};
  if (c.b > 0.0) {
    throw Error(ErrorCode::UnsupportedGenerator, "J2/(2pn+p^2n^2) exceeds 1/4; proposal bound does not hold");
  }
  return c;
}

}  // namespace mvre
