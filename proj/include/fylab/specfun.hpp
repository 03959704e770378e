#pragma once

#include <utility>

namespace fylab {

struct ProblemParams;

/// Arguments of the Gauss hypergeometric function 2F1(a, b; c; z).
struct HypergeometricArgs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double z = 0.0;
};

/// Natural log of Gamma(x) for x > 0. Throws Error(domain) otherwise.
double log_gamma(double x);

/// log|Gamma(x)| together with the sign of Gamma(x). At the poles
/// (x = 0, -1, -2, ...) sign is 0, so that sign * exp(log_abs) reads as the
/// reciprocal-gamma value 0 when used in a denominator.
struct SignedLogGamma {
  double log_abs = 0.0;
  int sign = 1;
};
SignedLogGamma signed_log_gamma(double x);

/// 1 / Gamma(x), exact zero at the poles.
double reciprocal_gamma(double x);

/// Digamma psi(x) for real x that is not a non-positive integer.
double digamma(double x);

/// z at which hyp2f1 switches from the Gauss series to the z -> 1
/// connection formula.
inline constexpr double kHypSwitch = 0.7;

/// 2F1(a, b; c; z) on z in [0, 1) with relative error <= 1e-10 for the
/// positive-parameter regime used by the kernel (a, b, c > 0, c - a - b < 0).
/// Raises AccuracyError when the series needs more than 10000 terms.
double hyp2f1(const HypergeometricArgs& args);

/// Plain Gauss series, valid for |z| < 1.
double hyp2f1_series(double a, double b, double c, double z);

/// 2F1(a, b; c; 1 - w) through the connection formulas around z = 1. The
/// complement w is taken as input so that tiny w keeps full precision. Handles
/// the integer case c - a - b = -m (logarithmic formula). When max_terms > 0
/// each of the w-series is truncated after that many terms.
double hyp2f1_complement(double a, double b, double c, double w,
                         int max_terms = 0);

/// Leading singular behaviour of the kernel's 2F1 as z -> 1-:
/// 2F1(z) = coefficient * (1 - z)^exponent * (1 + o(1)), exponent = -1 - 2s.
struct NearOneCoefficient {
  double coefficient = 0.0;
  double exponent = 0.0;
};
NearOneCoefficient hyp2f1_near_one_coeff(const ProblemParams& params);

}  // namespace fylab
