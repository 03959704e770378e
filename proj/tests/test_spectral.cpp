#include <doctest.h>

#include <cmath>
#include <random>

#include "fylab/error.hpp"
#include "fylab/grid_form.hpp"
#include "fylab/kernel.hpp"
#include "fylab/spectral.hpp"

using namespace fylab;

namespace {

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

struct Case {
  int n;
  double s;
};
const Case kCases[] = {{3, 0.5}, {3, 0.25}, {4, 0.75}, {2, 0.5}};

}  // namespace

TEST_CASE("lambda1 is positive, decreasing, with a positive eigenfunction") {
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    double prev = INFINITY;
    for (double M : {1.0, 2.0, 4.0, 8.0}) {
      const EigenResult r = lambda1(K, M, 1.0 / 40.0);
      CHECK(r.lambda1 > 0.0);
      CHECK(r.lambda1 < prev);
      CHECK(r.min_interior > 0.0);
      CHECK((r.phi1.array() >= 0.0).all());
      CHECK(r.residual <= 1e-8);
      prev = r.lambda1;
    }
  }
}

TEST_CASE("Rayleigh quotient properties") {
  const KernelModel K(make_params(3, 0.25));
  const GridForm form = assemble_stiffness(K, 3.0, 1.0 / 24.0);
  const EigenResult r = lambda1(form);
  CHECK(rel(rayleigh_quotient(form, r.phi1, false), r.lambda1) <= 1e-10);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd psi(form.size());
    for (int i = 0; i < psi.size(); ++i) psi[i] = g(rng);
    CHECK(rayleigh_quotient(form, psi, false) >= r.lambda1 * (1.0 - 1e-12));
    // The T-part of |psi| never exceeds that of psi.
    CHECK(form.stiffness_form(psi.cwiseAbs()) <= form.stiffness_form(psi) * (1.0 + 1e-12));
  }
  try {
    rayleigh_quotient(form, Eigen::VectorXd::Zero(form.size()));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
}

TEST_CASE("halving h changes lambda1 by at most 1%") {
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    const double a = lambda1(K, 2.0, 1.0 / 20.0).lambda1;
    const double b = lambda1(K, 2.0, 1.0 / 40.0).lambda1;
    CHECK_MESSAGE(rel(a, b) <= 0.01, "n=", c.n, " s=", c.s);
  }
}

TEST_CASE("pure-power scaling law") {
  for (const auto& c : kCases) {
    const KernelModel K = KernelModel(make_params(c.n, c.s)).pure_power();
    const double h = 1.0 / 64.0;
    const double mu1 = lambda1(K, 1.0, h).lambda1;
    for (double M : {2.0, 4.0, 8.0}) {
      const double mu = lambda1(K, M, h).lambda1;
      CHECK_MESSAGE(rel(mu * std::pow(M, 2.0 * c.s), mu1) <= 0.02, "n=", c.n, " s=", c.s,
                    " M=", M);
    }
  }
}

TEST_CASE("lambda1 falls below 4s / (n - 2s) on large intervals") {
  const KernelModel K(make_params(3, 0.5));
  const EigenResult r = lambda1(K, 16.0, 1.0 / 16.0);
  CHECK(r.lambda1 < K.params().lin_coeff);
}

TEST_CASE("lambda1 needs 64 interior nodes") {
  const KernelModel K(make_params(3, 0.5));
  try {
    lambda1(K, 1.0, 1.0 / 16.0);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resolution);
  }
}

TEST_CASE("Morse counts for v = 1") {
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    const double h = 1.0 / 20.0;
    // No negative direction while lambda1 stays above the potential depth.
    const EigenResult small = lambda1(K, 2.0, h);
    const MorseCount m_small = morse_count(K, Profile::constant(), 2.0, h);
    if (small.lambda1 > K.params().lin_coeff) CHECK(m_small.count == 0);
    // The smallest generalized eigenvalue of S - (p - 1) B is lambda1 - (p - 1).
    if (m_small.count > 0)
      CHECK(std::abs(m_small.negative_eigenvalues.front() - (small.lambda1 - K.params().lin_coeff)) <=
            1e-8);
    int prev = -1;
    for (double M : {5.0, 10.0, 20.0}) {
      const MorseCount m = morse_count(K, Profile::constant(), M, h);
      CHECK(m.count >= prev);
      CHECK(m.count > prev);
      CHECK(std::is_sorted(m.negative_eigenvalues.begin(), m.negative_eigenvalues.end()));
      prev = m.count;
    }
    CHECK(prev >= 5);
  }
}

TEST_CASE("Morse counts are translation invariant and monotone in M") {
  const KernelModel K(make_params(3, 0.25));
  const Profile v = Profile::periodic(6.0, {1.0, 0.35, 0.05});
  const double h = 1.0 / 16.0;
  int prev = -1;
  for (double M : {2.0, 4.0, 8.0, 12.0}) {
    const MorseCount m = morse_count(K, v, M, h, 0.5);
    CHECK(m.count >= prev);
    prev = m.count;
    for (double a : {1.7, -4.2})
      CHECK(morse_count(K, v.translated(a), M, h, 0.5 + a).count == m.count);
  }
}
