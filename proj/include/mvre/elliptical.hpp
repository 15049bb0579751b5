#pragma once

// Density generators of the supported elliptical families.
//
// A generator f defines the data density through a quadratic form u:
//   normal:  f(u) = (2 pi)^{-pn/2} exp(-u/2)
//   t(d):    f(u) = (pi d)^{-pn/2} Gamma((d+pn)/2) / Gamma(d/2) (1 + u/d)^{-(pn+d)/2}
// Everything is evaluated in the log domain.

#include "mvre/core.hpp"

namespace mvre {

struct Generator {
  Family family = Family::Normal;
  double dof = 0.0;  ///< only meaningful for StudentT
  int p = 1;
  int n = 1;

  static Generator from_spec(const ModelSpec& spec, int p, int n);

  /// Same family with a different sample count n.
  Generator with_n(int new_n) const;

  void validate() const;
};

/// log K, the normalizing constant of f.
double log_normalizer(const Generator& gen);

/// log f(u). Throws Error(NegativeArgument) for u < 0.
double log_f(const Generator& gen, double u);

/// log f(q_base + u): the generator of the conditional law of mu.
double log_f_conditional(const Generator& gen, double q_base, double u);

/// J2 = E[(R^2)^2 (f'(R^2)/f(R^2))^2] in closed form.
double j2(const Generator& gen);

struct J2Coefficients {
  double a;  ///< 2 J2 / (2pn + p^2 n^2)
  double b;  ///< J2 / (2pn + p^2 n^2) - 1/4
};

/// Coefficients of the reference-prior information matrix.
/// Throws Error(UnsupportedGenerator) when b > 0, which would void the
/// inverse-Wishart bound behind the proposal.
J2Coefficients j2_coefficients(const Generator& gen);

}  // namespace mvre
