// One pass/fail line per acceptance criterion, grid of cases
// (n, s) in {(3, 0.5), (3, 0.25), (4, 0.75), (2, 0.5)}.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fylab/calibrate.hpp"
#include "fylab/error.hpp"
#include "fylab/kernel.hpp"
#include "fylab/pointwise.hpp"
#include "fylab/solver.hpp"
#include "fylab/spectral.hpp"
#include "fylab/symbol.hpp"
#include "fylab/verify.hpp"

using namespace fylab;

namespace {

struct Case {
  int n;
  double s;
};
const std::vector<Case> kCases = {{3, 0.5}, {3, 0.25}, {4, 0.75}, {2, 0.5}};

std::string label(const Case& c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "(%d,%g)", c.n, c.s);
  return buf;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& note) {
    pass = pass && ok;
    if (!ok) notes.push_back("FAILED " + note);
  }
  void note(const std::string& text) { notes.push_back(text); }
};

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

// Branch from 1.05 L* to 3 L* per case, shared by criteria 7 to 10.
struct Branch {
  double L_star = 0.0;
  std::vector<BranchPoint> points;
};

const Branch& branch_for(const Case& c) {
  static std::map<std::pair<int, double>, Branch> cache;
  auto& b = cache[{c.n, c.s}];
  if (b.points.empty()) {
    const KernelModel K(make_params(c.n, c.s));
    b.L_star = bifurcation_period(K);
    b.points = continue_branch(K, 1.05 * b.L_star, 3.0 * b.L_star, 4, 64);
  }
  return b;
}

Outcome kernel_asymptotics() {
  Outcome out;
  for (const auto& c : kCases) {
    const ProblemParams p = make_params(c.n, c.s);
    const KernelModel K(p);
    std::vector<double> near, far;
    for (int i = 0; i <= 200; ++i) {
      const double t = std::pow(10.0, -4.0 + 2.0 * i / 200.0);
      near.push_back(K(t) * std::pow(t, 1.0 + 2.0 * c.s));
      const double u = 8.0 + 8.0 * i / 200.0;
      far.push_back(K(u) * std::exp(p.decay_rate() * u));
    }
    const double a = spread(near), b = spread(far);
    out.require(a <= 0.01, label(c) + fmt(" power spread %.2e", a));
    out.require(b <= 0.001, label(c) + fmt(" exp spread %.2e", b));
    out.note(label(c) + fmt(" power %.1e exp %.1e", a, b));
  }
  return out;
}

Outcome conformal_calibration() {
  Outcome out;
  for (const auto& c : kCases) {
    const CalibrationResult r = calibrate_gamma(make_params(c.n, c.s));
    double worst = 0.0;
    for (const auto& k : r.constant_checks) worst = std::max(worst, k.rel_error);
    out.require(r.max_residual <= 0.01, label(c) + fmt(" identity residual %.2e", r.max_residual));
    out.require(r.constant_checks.size() >= 5 && worst <= 0.01,
                label(c) + fmt(" explicit solution %.2e at %zu radii", worst,
                               r.constant_checks.size()));
    out.note(label(c) + fmt(" gamma %.5f (closed form %.5f) residual %.1e explicit %.1e", r.gamma,
                            r.closed_form, r.max_residual, worst));
  }
  return out;
}

Outcome constant_solution() {
  Outcome out;
  double worst_p = 0.0, worst_r = 0.0;
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    for (int i = 0; i < 25; ++i) {
      const double t = -12.0 + i;
      worst_p = std::max(worst_p, std::abs(apply_P_pointwise(K, Profile::constant(), t)));
      worst_r = std::max(worst_r, std::abs(equation_residual(K, Profile::constant(), t)));
    }
  }
  out.require(worst_p <= 1e-10, fmt("P(1) %.1e", worst_p));
  out.require(worst_r <= 1e-10, fmt("residual %.1e", worst_r));
  out.note(fmt("max |P(1)| %.1e, max residual %.1e", worst_p, worst_r));
  return out;
}

Outcome eigenvalue_laws() {
  Outcome out;
  const std::vector<double> Ms = {1, 2, 4, 8, 16};
  const double h = 1.0 / 40.0;  // 1279 interior nodes at M = 16
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    const KernelModel pp = K.pure_power();
    std::vector<double> lam, mu;
    bool positive_phi = true;
    for (double M : Ms) {
      const EigenResult r = lambda1(K, M, h);
      lam.push_back(r.lambda1);
      positive_phi = positive_phi && r.min_interior > 0.0;
      mu.push_back(lambda1(pp, M, h).lambda1);
    }
    bool positive = true, decreasing = true;
    double worst_scaling = 0.0;
    for (std::size_t i = 0; i < Ms.size(); ++i) {
      positive = positive && lam[i] > 0.0;
      if (i) decreasing = decreasing && lam[i] < lam[i - 1];
      worst_scaling =
          std::max(worst_scaling, std::abs(mu[i] * std::pow(Ms[i], 2.0 * c.s) / mu[0] - 1.0));
    }
    const double lin = K.params().lin_coeff;
    out.require(positive, label(c) + " lambda1 > 0");
    out.require(decreasing, label(c) + " strictly decreasing");
    out.require(worst_scaling <= 0.02, label(c) + fmt(" pure-power scaling %.2e", worst_scaling));
    out.require(lam.back() < lin, label(c) + fmt(" lambda1(16) %.4f vs %.4f", lam.back(), lin));
    out.require(positive_phi, label(c) + " phi1 > 0");
    out.note(label(c) + fmt(" lambda1(1..16) %.4f..%.4f < %.3f, scaling %.1e", lam.front(),
                            lam.back(), lin, worst_scaling));
  }
  return out;
}

Outcome maximum_principle() {
  Outcome out;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int failures = 0;
  double least_negative = -INFINITY;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& c = kCases[trial % kCases.size()];
    const KernelModel K(make_params(c.n, c.s));
    // Random nonnegative profile on a grid of step 0.05 with one zero node.
    const int k0 = 100 + static_cast<int>(120 * u(rng));
    std::vector<double> nodes, values;
    const double a1 = u(rng), a2 = u(rng), f1 = 0.3 + 3 * u(rng), ph = 6.28 * u(rng);
    const double power = 2.0 + 2.0 * u(rng);
    for (int i = 0; i <= 320; ++i) {
      const double t = -8.0 + 0.05 * i;
      const double d = std::abs(t - (-8.0 + 0.05 * k0));
      const double g = std::max(0.05, 0.2 + a1 + a2 * std::sin(f1 * t + ph));
      nodes.push_back(t);
      values.push_back(i == k0 ? 0.0 : g * std::pow(d, power) / (1.0 + std::pow(d, power)));
    }
    const Profile w = Profile::grid(nodes, values, values.back());
    const double pw = apply_P_pointwise(K, w, nodes[k0]);
    if (!(pw < 0.0)) ++failures;
    least_negative = std::max(least_negative, pw);
  }
  out.require(failures == 0, fmt("%d failures", failures));
  out.note(fmt("100 profiles, %d failures, max P w(t0) = %.3e", failures, least_negative));
  return out;
}

double sup_difference(const Profile& a, const Profile& b, double L) {
  double worst = 0.0;
  for (int i = 0; i < 1024; ++i) {
    const double t = L * i / 1024.0;
    worst = std::max(worst, std::abs(a.value(t) - b.value(t)));
  }
  return worst;
}

Outcome bifurcation_and_branch() {
  Outcome out;
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    const double L_star = bifurcation_period(K);
    const SymbolEvaluator sym(K, 10.0);
    const double gap = std::abs(sym.theta(2 * std::numbers::pi / L_star) - K.params().lin_coeff);
    const double L = 1.05 * L_star;
    const BranchPoint b = solve_periodic(K, L, 32, Seed::cosine(0.05));
    const BranchPoint b2 = solve_periodic(K, L, 64, Seed::cosine(0.05));
    const double pw = pointwise_residual(K, b.profile, 48, 0.0191 * L);
    const double self = sup_difference(b.profile, b2.profile, L);
    out.require(gap <= 1e-10, label(c) + fmt(" theta gap %.1e", gap));
    out.require(b.nonconstant(1e-3), label(c) + fmt(" amplitude %.2e", b.amplitude));
    out.require(b.residual <= 1e-8, label(c) + fmt(" residual %.1e", b.residual));
    out.require(pw <= 1e-5, label(c) + fmt(" pointwise %.1e", pw));
    out.require(self <= 1e-7, label(c) + fmt(" mode doubling %.1e", self));
    out.note(label(c) + fmt(" L* %.6f gap %.0e res %.0e pointwise %.0e doubling %.0e", L_star,
                            gap, b.residual, pw, self));
  }
  return out;
}

Outcome intersection_on_branch() {
  Outcome out;
  int points = 0, one_sided = 0;
  for (const auto& c : kCases) {
    const Branch& br = branch_for(c);
    int min_changes = 1 << 20;
    double worst_mean = 0.0;
    for (const auto& b : br.points) {
      if (!b.nonconstant()) continue;
      ++points;
      const int changes = sign_changes_per_period(b.profile);
      min_changes = std::min(min_changes, changes);
      worst_mean = std::max(worst_mean, std::abs(b.mean_identity));
      if (check_intersection(b.profile).kind == IntersectionKind::violation) ++one_sided;
    }
    out.require(min_changes >= 2, label(c) + fmt(" sign changes %d", min_changes));
    out.require(worst_mean <= 1e-8, label(c) + fmt(" mean identity %.1e", worst_mean));
    out.note(label(c) + fmt(" %zu points L/L* 1.05..3, min sign changes %d, mean %.0e",
                            br.points.size(), min_changes, worst_mean));
  }
  out.require(points > 0, "no nonconstant branch points");
  out.require(one_sided == 0, fmt("%d one-sided solutions", one_sided));
  return out;
}

Outcome negative_direction() {
  Outcome out;
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    const Branch& br = branch_for(c);
    double worst_diff = 0.0, worst_literal = 0.0;
    for (const auto& b : br.points) {
      if (!b.nonconstant()) continue;
      const std::string at = label(c) + fmt(" L/L*=%.3f", b.L / br.L_star);
      const OscillationResult osc = detect_oscillation(b.profile, 3.0 * b.L);
      out.require(osc.found, at + " oscillation condition");
      if (!osc.found) continue;
      const auto& cert = osc.certificate;
      const NegativeDirection d =
          build_negative_direction(K, b.profile, cert, 0.0, 5.0 * cert.M_osc);
      out.require(d.step1_ok(), at + fmt(" step 1: %.3e, %.3e vs 2eps %.3e", d.positive_variation,
                                         d.negative_variation, 2 * cert.epsilon));
      out.require(d.certified_bound < 0.0 && d.Q_value <= d.certified_bound,
                  at + fmt(" Q %.4e vs bound %.3e", d.Q_value, d.certified_bound));
      out.require(d.reduced_rel_diff <= 0.01,
                  at + fmt(" Galerkin %.6f vs reduced %.6f (%.2e)", d.Q_value, d.Q_reduced,
                           d.reduced_rel_diff));
      worst_diff = std::max(worst_diff, d.reduced_rel_diff);
      worst_literal = std::max(
          worst_literal, std::abs(d.Q_value - d.Q_reduced_inner) / std::abs(d.Q_reduced_inner));
    }
    // The J+ x J- integral alone omits the exterior term; reported, not asserted.
    out.note(label(c) + fmt(" worst Galerkin/reduced gap %.1e (J+ x J- alone %.1e)", worst_diff,
                            worst_literal));
  }
  return out;
}

Outcome index_lower_bounds() {
  Outcome out;
  // Nonconstant: the largest-amplitude branch point of each case.
  int certified = 0;
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    const BranchPoint& b = branch_for(c).points.back();
    const auto osc = detect_oscillation(b.profile, 3.0 * b.L);
    if (!osc.found) {
      out.note(label(c) + " no oscillation certificate");
      continue;
    }
    const auto& cert = osc.certificate;
    const NegativeDirection d =
        build_negative_direction(K, b.profile, cert, 0.0, 5.0 * cert.M_osc, {1.0 / 160.0, false, false});
    const double d0 = 5.0 * cert.M_osc;
    const IndexReport r = translated_family_bound(K, b.profile, 5, d0, &d, &cert);
    FamilyOptions fixed;
    fixed.search = false;
    const IndexReport r2 = translated_family_bound(K, b.profile, 5, 2.0 * r.d, &d, &cert, fixed);
    const int covering = covering_morse_count(K, b.profile, r);
    const bool ok = r.verdict == Verdict::negative_definite && r.implied_lower_bound >= 5;
    certified += ok;
    const double drop = r.max_offdiag / r2.max_offdiag;
    out.require(r.max_offdiag <= r.offdiag_bound, label(c) + " offdiag above K(d) bound");
    out.require(drop >= 10.0, label(c) + fmt(" offdiag drop %.1e", drop));
    out.require(!ok || covering >= r.implied_lower_bound,
                label(c) + fmt(" covering Morse count %d", covering));
    out.note(label(c) + fmt(" ind(v) >= %d at d=%.2f, offdiag %.1e drop %.0e, covering %d",
                            r.implied_lower_bound, r.d_actual, r.max_offdiag, drop, covering));
  }
  out.require(certified >= 1, "no nonconstant branch point certified");

  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    const IndexReport r = translated_family_bound(K, Profile::constant(), 5, 1.0);
    FamilyOptions fixed;
    fixed.search = false;
    const IndexReport a = translated_family_bound(K, Profile::constant(), 5, 4.0, nullptr, nullptr, fixed);
    const IndexReport b = translated_family_bound(K, Profile::constant(), 5, 8.0, nullptr, nullptr, fixed);
    const int covering = covering_morse_count(K, Profile::constant(), r);
    const double drop = a.max_offdiag / b.max_offdiag;
    out.require(r.verdict == Verdict::negative_definite && r.implied_lower_bound >= 5,
                label(c) + " ind(1) >= 5 not certified");
    out.require(drop >= 10.0, label(c) + fmt(" v=1 offdiag drop %.1e", drop));
    out.require(a.max_offdiag <= a.offdiag_bound && b.max_offdiag <= b.offdiag_bound,
                label(c) + " v=1 offdiag above K(d) bound");
    out.require(covering >= r.implied_lower_bound, label(c) + fmt(" v=1 covering %d", covering));
    out.note(label(c) + fmt(" ind(1) >= %d, offdiag drop d 4->8 %.0e, covering %d",
                            r.implied_lower_bound, drop, covering));
  }
  return out;
}

Outcome translation_invariance() {
  Outcome out;
  for (const auto& c : kCases) {
    const KernelModel K(make_params(c.n, c.s));
    const BranchPoint& b = branch_for(c).points[2];
    const double a = 0.37 * b.L + 1.1;
    const double h = 1.0 / 16.0, M = std::ceil(2.0 * b.L / h) * h;
    const MorseCount m0 = morse_count(K, b.profile, M, h, 0.3);
    const MorseCount m1 = morse_count(K, b.profile.translated(a), M, h, 0.3 + a);
    double eig_gap = 0.0;
    const bool same = m0.count == m1.count;
    if (same)
      for (int i = 0; i < m0.count; ++i)
        eig_gap = std::max(eig_gap, std::abs(m0.negative_eigenvalues[i] - m1.negative_eigenvalues[i]) /
                                        std::abs(m0.negative_eigenvalues[i]));
    const auto cert = detect_oscillation(b.profile, 3.0 * b.L).certificate;
    const double w = 5.0 * cert.M_osc;
    const NegativeDirectionOptions quick{1.0 / 160.0, false, false};
    const NegativeDirection d0 = build_negative_direction(K, b.profile, cert, 0.0, w, quick);
    const NegativeDirection d1 =
        build_negative_direction(K, b.profile.translated(a), cert, a, a + w, quick);
    const double q_gap = std::abs(d1.Q_value - d0.Q_value) / std::abs(d0.Q_value);
    out.require(same, label(c) + fmt(" Morse counts %d vs %d", m0.count, m1.count));
    out.require(eig_gap <= 1e-8, label(c) + fmt(" eigenvalues %.1e", eig_gap));
    out.require(q_gap <= 1e-8, label(c) + fmt(" Q %.1e", q_gap));
    out.note(label(c) + fmt(" count %d, eigenvalue gap %.0e, Q gap %.0e", m0.count, eig_gap, q_gap));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"kernel asymptotics", kernel_asymptotics},
      {"conformal calibration", conformal_calibration},
      {"constant solution", constant_solution},
      {"eigenvalue laws", eigenvalue_laws},
      {"maximum principle", maximum_principle},
      {"bifurcation and branch", bifurcation_and_branch},
      {"intersection with 1 on the branch", intersection_on_branch},
      {"negative direction", negative_direction},
      {"Morse index lower bounds", index_lower_bounds},
      {"translation invariance", translation_invariance},
  };
  int failed = 0;
  int run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), static_cast<int>(i + 1)) == only.end())
      continue;
    ++run;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const Error& e) {
      out.require(false, std::string(to_string(e.kind())) + " error: " + e.what());
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !out.pass;
    std::printf("criterion %2zu %s: %s (%.1f s)\n", i + 1, out.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), secs);
    for (const auto& note : out.notes) std::printf("    %s\n", note.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", run - failed, run);
  return failed == 0 ? 0 : 1;
}
