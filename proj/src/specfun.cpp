#include "fylab/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fylab/error.hpp"
#include "fylab/kernel.hpp"

namespace fylab {

namespace {

constexpr int kMaxTerms = 10000;
constexpr double kSeriesTol = 1e-16;

bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::floor(x);
}

double lgamma_abs(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

// sign * exp(sum of numerator log-gammas - sum of denominator log-gammas).
// A pole in the denominator gives 0.
template <std::size_t Num, std::size_t Den>
double gamma_ratio(const double (&num)[Num], const double (&den)[Den]) {
  double log_sum = 0.0;
  int sign = 1;
  for (double x : den) {
    const SignedLogGamma g = signed_log_gamma(x);
    if (g.sign == 0) return 0.0;
    log_sum -= g.log_abs;
    sign *= g.sign;
  }
  for (double x : num) {
    const SignedLogGamma g = signed_log_gamma(x);
    if (g.sign == 0)
      throw Error(ErrorKind::domain,
                  "gamma_ratio: pole in numerator at " + std::to_string(x));
    log_sum += g.log_abs;
    sign *= g.sign;
  }
  return sign * std::exp(log_sum);
}

// Gauss series with an optional hard cap on the number of terms.
double gauss_series(double a, double b, double c, double z, int max_terms) {
  double sum = 1.0;
  double term = 1.0;
  const int limit = max_terms > 0 ? max_terms - 1 : kMaxTerms;
  for (int k = 0; k < limit; ++k) {
    const double ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    term *= ratio;
    sum += term;
    if (term == 0.0) return sum;
    const double next = std::abs((a + k + 1) * (b + k + 1) /
                                 ((c + k + 1) * (k + 2.0)) * z);
    if (next < 1.0 && std::abs(term) <= kSeriesTol * std::abs(sum))
      return sum;
  }
  if (max_terms > 0) return sum;
  const double r = std::abs(z);
  const double bound =
      r < 1.0 ? std::abs(term) * r / (1.0 - r)
              : std::numeric_limits<double>::infinity();
  throw AccuracyError("hyp2f1: Gauss series did not converge in 10000 terms",
                      sum, bound);
}

// c = a + b - m with integer m >= 0 (logarithmic connection formula).
double complement_log_case(double a, double b, double c, double w, int m,
                           int max_terms) {
  if (is_nonpositive_integer(a) || is_nonpositive_integer(b))
    throw Error(ErrorKind::domain,
                "hyp2f1: logarithmic case needs a, b off the poles");
  double finite_part = 0.0;
  if (m > 0) {
    const double coef = gamma_ratio({static_cast<double>(m), c}, {a, b});
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k + 1 < m; ++k) {
      term *= (a - m + k) * (b - m + k) / ((k + 1.0) * (1.0 - m + k)) * w;
      sum += term;
    }
    finite_part = coef * std::pow(w, -m) * sum;
  }

  const double pref_inv = reciprocal_gamma(a - m) * reciprocal_gamma(b - m);
  if (pref_inv == 0.0) return finite_part;
  const double sign_m = (m % 2 == 0) ? 1.0 : -1.0;
  const double pref = -sign_m * std::exp(lgamma_abs(c)) * pref_inv;

  const double log_w = std::log(w);
  double coef = std::exp(-lgamma_abs(m + 1.0));  // 1 / m!
  double psi_k1 = digamma(1.0);
  double psi_km1 = digamma(m + 1.0);
  double psi_a = digamma(a);
  double psi_b = digamma(b);
  double wk = 1.0;
  double sum = 0.0;
  const int limit = max_terms > 0 ? max_terms : kMaxTerms;
  int k = 0;
  for (; k < limit; ++k) {
    const double term =
        coef * wk * (log_w - psi_k1 - psi_km1 + psi_a + psi_b);
    sum += term;
    if (max_terms <= 0 && k > 2 && std::abs(term) <= kSeriesTol * std::abs(sum))
      break;
    coef *= (a + k) * (b + k) / ((k + 1.0) * (k + 1.0 + m));
    psi_k1 += 1.0 / (k + 1.0);
    psi_km1 += 1.0 / (k + 1.0 + m);
    psi_a += 1.0 / (a + k);
    psi_b += 1.0 / (b + k);
    wk *= w;
  }
  if (max_terms <= 0 && k == limit)
    throw AccuracyError("hyp2f1: logarithmic series did not converge",
                        finite_part + pref * sum,
                        std::numeric_limits<double>::infinity());
  return finite_part + pref * sum;
}

// c - a - b = m > 0 integer (A&S 15.3.11).
double complement_log_case_positive(double a, double b, double c, double w,
                                    int m, int max_terms) {
  const double coef_a = gamma_ratio({static_cast<double>(m), c},
                                    {a + m, b + m});
  double term = 1.0;
  double finite = 1.0;
  for (int k = 0; k + 1 < m; ++k) {
    term *= (a + k) * (b + k) / ((k + 1.0) * (1.0 - m + k)) * w;
    finite += term;
  }
  const double pref_inv = reciprocal_gamma(a) * reciprocal_gamma(b);
  double tail = 0.0;
  if (pref_inv != 0.0) {
    const double sign_m = (m % 2 == 0) ? 1.0 : -1.0;
    const double pref = -sign_m * std::pow(w, m) * std::exp(lgamma_abs(c)) *
                        pref_inv;
    const double log_w = std::log(w);
    double coef = std::exp(-lgamma_abs(m + 1.0));
    double psi_k1 = digamma(1.0);
    double psi_km1 = digamma(m + 1.0);
    double psi_a = digamma(a + m);
    double psi_b = digamma(b + m);
    double wk = 1.0;
    double sum = 0.0;
    const int limit = max_terms > 0 ? max_terms : kMaxTerms;
    for (int k = 0; k < limit; ++k) {
      const double t = coef * wk * (log_w - psi_k1 - psi_km1 + psi_a + psi_b);
      sum += t;
      if (max_terms <= 0 && k > 2 && std::abs(t) <= kSeriesTol * std::abs(sum))
        break;
      coef *= (a + m + k) * (b + m + k) / ((k + 1.0) * (k + 1.0 + m));
      psi_k1 += 1.0 / (k + 1.0);
      psi_km1 += 1.0 / (k + 1.0 + m);
      psi_a += 1.0 / (a + m + k);
      psi_b += 1.0 / (b + m + k);
      wk *= w;
    }
    tail = pref * sum;
  }
  return coef_a * finite + tail;
}

}  // namespace

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::invalid_regime: return "invalid-regime";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::extrapolation: return "extrapolation";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::calibration: return "calibration";
    case ErrorKind::no_bifurcation: return "no-bifurcation";
    case ErrorKind::continuation: return "continuation";
    case ErrorKind::positivity: return "positivity";
    case ErrorKind::certificate: return "certificate";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

double log_gamma(double x) {
  if (!(x > 0.0))
    throw Error(ErrorKind::domain,
                "log_gamma: argument must be positive, got " +
                    std::to_string(x));
  return lgamma_abs(x);
}

SignedLogGamma signed_log_gamma(double x) {
  if (x > 0.0) return {lgamma_abs(x), 1};
  if (x == std::floor(x))
    return {std::numeric_limits<double>::infinity(), 0};
  const long fl = static_cast<long>(std::floor(x));
  return {lgamma_abs(x), (fl % 2 == 0) ? 1 : -1};
}

double reciprocal_gamma(double x) {
  const SignedLogGamma g = signed_log_gamma(x);
  if (g.sign == 0) return 0.0;
  return g.sign * std::exp(-g.log_abs);
}

double digamma(double x) {
  if (is_nonpositive_integer(x))
    throw Error(ErrorKind::domain, "digamma: pole at " + std::to_string(x));
  if (x < 0.0)
    return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * x);
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  // Bernoulli-number asymptotic series.
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 -
                                                      inv2 / 12))))));
  return acc + std::log(x) - 0.5 / x - series;
}

double hyp2f1_series(double a, double b, double c, double z) {
  return gauss_series(a, b, c, z, 0);
}

double hyp2f1_complement(double a, double b, double c, double w,
                         int max_terms) {
  if (!(w > 0.0 && w <= 1.0))
    throw Error(ErrorKind::domain, "hyp2f1_complement: w must lie in (0, 1]");
  const double m = c - a - b;
  const double m_round = std::round(m);
  if (std::abs(m - m_round) < 1e-13) {
    const int mi = static_cast<int>(m_round);
    if (mi <= 0) return complement_log_case(a, b, c, w, -mi, max_terms);
    return complement_log_case_positive(a, b, c, w, mi, max_terms);
  }
  const double coef_regular = gamma_ratio({c, m}, {c - a, c - b});
  const double coef_singular = gamma_ratio({c, -m}, {a, b});
  double regular = 0.0;
  if (coef_regular != 0.0)
    regular = coef_regular * gauss_series(a, b, 1.0 - m, w, max_terms);
  double singular = 0.0;
  if (coef_singular != 0.0)
    singular = coef_singular * std::pow(w, m) *
               gauss_series(c - a, c - b, 1.0 + m, w, max_terms);
  return regular + singular;
}

double hyp2f1(const HypergeometricArgs& args) {
  const auto [a, b, c, z] = args;
  if (is_nonpositive_integer(c))
    throw Error(ErrorKind::domain, "hyp2f1: c is a non-positive integer");
  if (!(z >= 0.0 && z < 1.0))
    throw Error(ErrorKind::domain, "hyp2f1: z must lie in [0, 1)");
  if (z <= kHypSwitch) return gauss_series(a, b, c, z, 0);
  return hyp2f1_complement(a, b, c, 1.0 - z);
}

NearOneCoefficient hyp2f1_near_one_coeff(const ProblemParams& params) {
  const double n = params.n;
  const double s = params.s;
  const double a = 0.5 * (n + 2.0 * s);
  const double b = 1.0 + s;
  const double c = 0.5 * n;
  const double excess = a + b - c;  // = 1 + 2s
  NearOneCoefficient out;
  out.exponent = -excess;
  const double m_round = std::round(excess);
  if (std::abs(excess - m_round) < 1e-13) {
    // Integer case: leading term of the finite sum in the logarithmic
    // formula, Gamma(m) Gamma(a+b-m) / (Gamma(a) Gamma(b)) with a + b - m = c.
    out.coefficient = gamma_ratio({m_round, c}, {a, b});
  } else {
    out.coefficient = gamma_ratio({c, excess}, {a, b});
  }
  return out;
}

}  // namespace fylab
