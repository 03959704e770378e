#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fylab/error.hpp"
#include "fylab/kernel.hpp"
#include "fylab/solver.hpp"
#include "fylab/spectral.hpp"
#include "fylab/verify.hpp"

using namespace fylab;

namespace {

const BranchPoint& solution_3_quarter() {
  static const BranchPoint b = [] {
    const KernelModel K(make_params(3, 0.25));
    return solve_periodic(K, 1.2 * bifurcation_period(K), 32, Seed::cosine(0.05));
  }();
  return b;
}

}  // namespace

TEST_CASE("intersection with 1") {
  SUBCASE("v = 1") {
    CHECK(check_intersection(Profile::constant()).kind == IntersectionKind::constant_one);
  }
  SUBCASE("cosine crosses at its analytic zeros") {
    const double L = 5.0;
    const IntersectionResult r = check_intersection(Profile::periodic(L, {1.0, 0.1}));
    REQUIRE(r.kind == IntersectionKind::crosses);
    REQUIRE(r.crossings.size() == 2);
    CHECK(std::abs(r.crossings[0] - 0.25 * L) <= 1e-9);
    CHECK(std::abs(r.crossings[1] - 0.75 * L) <= 1e-9);
  }
  SUBCASE("one-sided profile is a violation") {
    const IntersectionResult above = check_intersection(Profile::periodic(4.0, {1.2, 0.1}));
    CHECK(above.kind == IntersectionKind::violation);
    CHECK(above.side == 1);
    const IntersectionResult below = check_intersection(Profile::periodic(4.0, {0.8, 0.1}));
    CHECK(below.side == -1);
  }
  SUBCASE("converged solution crosses at least twice per period") {
    const IntersectionResult r = check_intersection(solution_3_quarter().profile);
    CHECK(r.kind == IntersectionKind::crosses);
    CHECK(r.crossings.size() >= 2);
  }
}

TEST_CASE("oscillation condition") {
  SUBCASE("v = 1 fails") {
    CHECK_FALSE(detect_oscillation(Profile::constant(), 30.0).found);
  }
  SUBCASE("synthetic cosine") {
    const double k = 1.3;
    const OscillationResult r =
        detect_oscillation(Profile::periodic(2 * std::numbers::pi / k, {1.0, 0.2}), 30.0);
    REQUIRE(r.found);
    // Extremes are taken from samples, so epsilon may sit just below 0.1.
    CHECK(r.certificate.epsilon <= 0.1);
    CHECK(r.certificate.epsilon >= 0.1 * (1.0 - 1e-3));
    CHECK(std::abs(r.certificate.M_osc - 2 * std::numbers::pi / k) <= 1e-9);
  }
  SUBCASE("solved profile: one period and half the smaller excursion") {
    const BranchPoint& b = solution_3_quarter();
    const OscillationResult r = detect_oscillation(b.profile, 3.0 * b.L);
    REQUIRE(r.found);
    CHECK(std::abs(r.certificate.M_osc - b.L) <= 1e-12);
    const double eps = 0.5 * std::min(b.max_v - 1.0, 1.0 - b.min_v);
    CHECK(std::abs(r.certificate.epsilon - eps) <= 1e-6 * eps);
    for (const auto& w : r.certificate.witness_windows) {
      CHECK(w.max_v > 1.0 + r.certificate.epsilon);
      CHECK(w.min_v < 1.0 - r.certificate.epsilon);
    }
  }
}

TEST_CASE("negative direction on a solved profile") {
  const KernelModel K(make_params(3, 0.25));
  const BranchPoint& b = solution_3_quarter();
  const auto cert = detect_oscillation(b.profile, 3.0 * b.L).certificate;
  const double width = 5.0 * cert.M_osc;
  const NegativeDirection d = build_negative_direction(K, b.profile, cert, 0.0, width);

  CHECK(d.a < d.x0);
  CHECK(d.x0 < d.x1);
  CHECK(d.x1 < d.b);
  CHECK(d.root_residual <= 1e-10);
  CHECK(d.step1_ok());
  CHECK(d.positive_variation > 2.0 * cert.epsilon);
  CHECK(d.negative_variation > 2.0 * cert.epsilon);
  CHECK(d.certified_bound < 0.0);
  CHECK(d.Q_value <= d.certified_bound);
  CHECK(d.step2_ok());
  CHECK(d.reduced_rel_diff <= 0.01);
  CHECK(d.mollified_rel_change <= 0.01);
  CHECK(d.Q_mollified <= d.certified_bound);
  CHECK(d.delta > 0.0);
  CHECK(d.sup_norm <= 1.0 / d.delta);
  CHECK(d.Q_value <= -d.delta);

  SUBCASE("translated interval and profile give the same Q") {
    const double a = 1.234;
    const NegativeDirection t = build_negative_direction(K, b.profile.translated(a), cert, a,
                                                         a + width, {1.0 / 160.0, false, false});
    CHECK(std::abs(t.Q_value - d.Q_value) <= 1e-8 * std::abs(d.Q_value));
  }
  SUBCASE("disjoint window gives a comparable Q") {
    const NegativeDirection far = build_negative_direction(K, b.profile, cert, 7.3 * b.L,
                                                           7.3 * b.L + width, {1.0 / 160.0, false, false});
    CHECK(std::abs(far.Q_value - d.Q_value) <= 0.1 * std::abs(d.Q_value));
  }
  SUBCASE("interval shorter than 5 M is rejected") {
    try {
      build_negative_direction(K, b.profile, cert, 0.0, 4.0 * cert.M_osc);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::domain);
    }
  }
  SUBCASE("translated family certifies ind(v) >= m") {
    for (int m : {2, 5}) {
      const IndexReport r = translated_family_bound(K, b.profile, m, width, &d, &cert);
      CHECK(r.verdict == Verdict::negative_definite);
      CHECK(r.implied_lower_bound == m);
      CHECK(r.max_eigenvalue < 0.0);
      CHECK(r.max_offdiag <= r.offdiag_bound);
      for (int i = 0; i < m; ++i) CHECK(r.gram(i, i) <= -d.delta * (1.0 - 1e-9));
      if (m == 5) CHECK(covering_morse_count(K, b.profile, r) >= r.implied_lower_bound);
    }
  }
}

TEST_CASE("translated family for v = 1") {
  const KernelModel K(make_params(3, 0.5));
  const IndexReport r = translated_family_bound(K, Profile::constant(), 5, 1.0);
  CHECK(r.constant_profile);
  CHECK(r.verdict == Verdict::negative_definite);
  CHECK(r.implied_lower_bound == 5);
  CHECK(r.template_lambda1 < K.params().lin_coeff);
  CHECK(covering_morse_count(K, Profile::constant(), r) >= 5);

  SUBCASE("off-diagonals decay with the spacing") {
    FamilyOptions fixed;
    fixed.search = false;
    const IndexReport a = translated_family_bound(K, Profile::constant(), 5, 4.0, nullptr, nullptr, fixed);
    const IndexReport b = translated_family_bound(K, Profile::constant(), 5, 8.0, nullptr, nullptr, fixed);
    CHECK(b.max_offdiag <= a.max_offdiag);
    CHECK(a.max_offdiag <= a.offdiag_bound);
    CHECK(b.max_offdiag <= b.offdiag_bound);
    CHECK(a.max_offdiag / b.max_offdiag >= 10.0);
  }
  SUBCASE("a single member is negative definite iff its diagonal is negative") {
    const IndexReport one = translated_family_bound(K, Profile::constant(), 1, 1.0);
    CHECK(one.gram.rows() == 1);
    CHECK((one.verdict == Verdict::negative_definite) == (one.gram(0, 0) < 0.0));
  }
}
