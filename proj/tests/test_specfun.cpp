#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <numbers>

#include "fylab/error.hpp"
#include "fylab/kernel.hpp"
#include "fylab/specfun.hpp"

using namespace fylab;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Gauss series summed in 50-digit arithmetic.
double series_oracle(double a, double b, double c, double z) {
  big sum = 1, term = 1;
  const big zz = z;
  for (int k = 0; k < 200000; ++k) {
    term *= (big(a) + k) * (big(b) + k) / ((big(c) + k) * (k + 1)) * zz;
    sum += term;
    if (abs(term) < big("1e-30") * abs(sum)) break;
  }
  return static_cast<double>(sum);
}

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

struct Case {
  int n;
  double s;
};
const Case kGrid[] = {{2, 0.25}, {2, 0.5},  {2, 0.75}, {3, 0.25}, {3, 0.5}, {3, 0.75},
                      {4, 0.25}, {4, 0.5},  {4, 0.75}, {5, 0.25}, {5, 0.5}, {5, 0.75}};

}  // namespace

TEST_CASE("log_gamma: Gamma(1) = Gamma(2) = 1") {
  CHECK(std::abs(log_gamma(1.0)) < 1e-15);
  CHECK(std::abs(log_gamma(2.0)) < 1e-15);
}

TEST_CASE("log_gamma(1/2) = log sqrt(pi)") {
  const double ref = 0.5 * std::log(std::numbers::pi);
  CHECK(std::abs(log_gamma(0.5) - ref) <= 1e-13 * ref);
  CHECK(std::abs(log_gamma(0.5) - 0.5723649429247001) < 1e-15);
}

TEST_CASE("log_gamma agrees with std::lgamma on [1e-3, 1e3]") {
  double worst = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const double x = std::pow(10.0, -3.0 + 6.0 * i / 600.0);
    const double ref = std::lgamma(x);
    worst = std::max(worst, std::abs(log_gamma(x) - ref) / std::max(1.0, std::abs(ref)));
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("log_gamma recurrence on [0.5, 100]") {
  for (double x = 0.5; x <= 100.0; x += 0.37)
    CHECK(std::abs(log_gamma(x + 1.0) - log_gamma(x) - std::log(x)) <= 1e-12);
}

TEST_CASE("log_gamma rejects x <= 0") {
  for (double x : {0.0, -1.0, -0.5}) {
    try {
      log_gamma(x);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
  }
}

TEST_CASE("hyp2f1 closed forms") {
  SUBCASE("z = 0 gives 1") {
    for (const auto& c : kGrid) {
      const ProblemParams p = make_params(c.n, c.s);
      CHECK(hyp2f1({p.hyp_a(), p.hyp_b(), p.hyp_c(), 0.0}) == 1.0);
    }
  }
  SUBCASE("(1, 1; 2; z) = -log(1 - z) / z") {
    CHECK(rel(hyp2f1({1, 1, 2, 0.5}), 1.3862943611198906) <= 1e-12);
    for (double z : {0.1, 0.3, 0.69, 0.71, 0.9, 0.99, 0.999999})
      CHECK(rel(hyp2f1({1, 1, 2, z}), -std::log1p(-z) / z) <= 1e-10);
  }
  SUBCASE("b = c reduces to (1 - z)^(-a)") {
    CHECK(rel(hyp2f1({2.0, 1.5, 1.5, 0.25}), 1.0 / (0.75 * 0.75)) <= 1e-12);
  }
}

TEST_CASE("hyp2f1 matches the 50-digit series on the kernel parameters") {
  for (const auto& c : kGrid) {
    const ProblemParams p = make_params(c.n, c.s);
    for (double z : {0.05, 0.3, 0.6, 0.69, 0.7, 0.71, 0.8, 0.9, 0.97}) {
      const double ref = series_oracle(p.hyp_a(), p.hyp_b(), p.hyp_c(), z);
      CHECK_MESSAGE(rel(hyp2f1({p.hyp_a(), p.hyp_b(), p.hyp_c(), z}), ref) <= 1e-10,
                    "n=", c.n, " s=", c.s, " z=", z);
    }
  }
}

TEST_CASE("series and connection branches agree around the switch") {
  for (const auto& c : kGrid) {
    const ProblemParams p = make_params(c.n, c.s);
    for (double z = kHypSwitch - 0.02; z <= kHypSwitch + 0.02 + 1e-12; z += 0.005) {
      const double series = hyp2f1_series(p.hyp_a(), p.hyp_b(), p.hyp_c(), z);
      const double conn = hyp2f1_complement(p.hyp_a(), p.hyp_b(), p.hyp_c(), 1.0 - z);
      CHECK_MESSAGE(rel(conn, series) <= 1e-9, "n=", c.n, " s=", c.s, " z=", z);
    }
  }
}

TEST_CASE("hyp2f1 is increasing in z") {
  for (const auto& c : kGrid) {
    const ProblemParams p = make_params(c.n, c.s);
    double prev = 0.0;
    for (int i = 0; i < 400; ++i) {
      const double z = i / 400.0 * 0.999;
      const double v = hyp2f1({p.hyp_a(), p.hyp_b(), p.hyp_c(), z});
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("Gauss series past its term budget raises AccuracyError") {
  try {
    hyp2f1_series(1.0, 1.0, 2.0, 0.999999);
    FAIL("no error");
  } catch (const AccuracyError& e) {
    CHECK(e.kind() == ErrorKind::accuracy);
    CHECK(e.partial_value() > 0.0);
    CHECK(e.error_bound() > 0.0);
  }
}

TEST_CASE("near-one coefficient") {
  for (const auto& c : kGrid) {
    const ProblemParams p = make_params(c.n, c.s);
    const auto coeff = hyp2f1_near_one_coeff(p);
    CHECK(coeff.exponent == -1.0 - 2.0 * c.s);
    const double a = p.hyp_a(), b = p.hyp_b(), cc = p.hyp_c();
    const double generic = std::exp(std::lgamma(cc) + std::lgamma(a + b - cc) - std::lgamma(a) -
                                    std::lgamma(b));
    CHECK(rel(coeff.coefficient, generic) <= 1e-12);
    const double w = 1e-6;
    const double ratio = hyp2f1({a, b, cc, 1.0 - w}) * std::pow(w, 1.0 + 2.0 * c.s);
    CHECK(rel(ratio, coeff.coefficient) <= 1e-4);
  }
}

TEST_CASE("logarithmic case s = 1/2 matches the two-sided perturbation") {
  for (int n : {2, 3, 4, 5}) {
    const double d = 1e-6;
    const double lo = hyp2f1_near_one_coeff(make_params(n, 0.5 - d)).coefficient;
    const double hi = hyp2f1_near_one_coeff(make_params(n, 0.5 + d)).coefficient;
    const double mid = hyp2f1_near_one_coeff(make_params(n, 0.5)).coefficient;
    CHECK(rel(mid, 0.5 * (lo + hi)) <= 1e-9);
    // Full function values near z = 1 across the integer case.
    const ProblemParams p = make_params(n, 0.5);
    for (double w : {1e-2, 1e-4}) {
      const ProblemParams pl = make_params(n, 0.5 - d), ph = make_params(n, 0.5 + d);
      const double fl = hyp2f1({pl.hyp_a(), pl.hyp_b(), pl.hyp_c(), 1.0 - w});
      const double fh = hyp2f1({ph.hyp_a(), ph.hyp_b(), ph.hyp_c(), 1.0 - w});
      CHECK(rel(hyp2f1({p.hyp_a(), p.hyp_b(), p.hyp_c(), 1.0 - w}), 0.5 * (fl + fh)) <= 1e-7);
    }
  }
}
