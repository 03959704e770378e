#include "fylab/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "fylab/error.hpp"
#include "fylab/pointwise.hpp"
#include "fylab/symbol.hpp"

namespace fylab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Collocation in the phase variable 2 pi t / L, so every table is
/// independent of L; only the symbol values move with the period.
class Discretization {
 public:
  Discretization(const KernelModel& model, int modes, int points, double L_min)
      : model_(model), n_(modes), nc_(points), cos_(modes + 1, points) {
    for (int m = 0; m <= n_; ++m)
      for (int j = 0; j < nc_; ++j)
        cos_(m, j) = std::cos(kTwoPi * static_cast<double>((static_cast<long>(m) * j) % nc_) / nc_);
    ensure_symbol(L_min);
  }

  int modes() const { return n_; }

  void ensure_symbol(double L) {
    const double k_needed = kTwoPi * n_ / L;
    if (!symbol_ || symbol_->k_max() < k_needed) {
      symbol_ = std::make_unique<SymbolEvaluator>(model_, 1.5 * k_needed);
      cached_L_ = -1.0;
    }
  }

  const Eigen::VectorXd& theta(double L) {
    update(L);
    return theta_;
  }

  /// d theta(k_m) / dL = theta'(k_m) * (-k_m / L).
  const Eigen::VectorXd& theta_dL(double L) {
    update(L);
    return theta_dL_;
  }

  Eigen::VectorXd values(const Eigen::VectorXd& a) const { return cos_.transpose() * a; }

  /// Cosine coefficients m = 0..N of samples f_j.
  Eigen::VectorXd project(const Eigen::VectorXd& f) const {
    Eigen::VectorXd c = (cos_ * f) * (2.0 / nc_);
    c[0] *= 0.5;
    return c;
  }

  /// d [v^p]_m / d a_n for weights w_j = p v_j^{p-1}.
  Eigen::MatrixXd projection_jacobian(const Eigen::VectorXd& w) const {
    Eigen::MatrixXd scaled = cos_ * w.asDiagonal();
    Eigen::MatrixXd d = scaled * cos_.transpose() * (2.0 / nc_);
    d.row(0) *= 0.5;
    return d;
  }

 private:
  const KernelModel& model_;
  int n_;
  int nc_;
  Eigen::MatrixXd cos_;
  std::unique_ptr<SymbolEvaluator> symbol_;
  double cached_L_ = -1.0;
  Eigen::VectorXd theta_;
  Eigen::VectorXd theta_dL_;

  void update(double L) {
    if (L == cached_L_) return;
    ensure_symbol(L);
    std::vector<double> th;
    std::vector<double> tp;
    symbol_->harmonics(kTwoPi / L, n_, th, &tp);
    theta_ = Eigen::Map<Eigen::VectorXd>(th.data(), n_ + 1);
    theta_dL_.resize(n_ + 1);
    for (int m = 0; m <= n_; ++m) theta_dL_[m] = tp[m] * (-kTwoPi * m / L) / L;
    cached_L_ = L;
  }
};

struct State {
  Eigen::VectorXd a;
  double L = 0.0;
  int iterations = 0;
};

Eigen::VectorXd residual(Discretization& disc, const Eigen::VectorXd& a, double L, double p,
                         double* min_v) {
  const Eigen::VectorXd v = disc.values(a);
  *min_v = v.minCoeff();
  if (!(*min_v > 0.0)) return {};
  const Eigen::VectorXd vp = v.array().pow(p).matrix();
  const Eigen::VectorXd th = disc.theta(L);
  return (th.array() + 1.0).matrix().cwiseProduct(a) - disc.project(vp);
}

Eigen::MatrixXd jacobian(Discretization& disc, const Eigen::VectorXd& a, double L, double p) {
  const Eigen::VectorXd v = disc.values(a);
  const Eigen::VectorXd w = (p * v.array().pow(p - 1.0)).matrix();
  Eigen::MatrixXd j = -disc.projection_jacobian(w);
  const Eigen::VectorXd th = disc.theta(L);
  for (int m = 0; m <= disc.modes(); ++m) j(m, m) += th[m] + 1.0;
  return j;
}

/// Newton at fixed L (pinned = false) or with a_1 pinned and L unknown.
State newton(Discretization& disc, State s, double p, bool pinned, const SolverOptions& opt) {
  const int n = disc.modes();
  double min_v = 0.0;
  Eigen::VectorXd f = residual(disc, s.a, s.L, p, &min_v);
  if (f.size() == 0)
    throw Error(ErrorKind::positivity, "solve_periodic: initial guess is not positive");
  double norm = f.cwiseAbs().maxCoeff();
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (norm <= opt.newton_tol) {
      s.iterations += it;
      return s;
    }
    Eigen::MatrixXd j = jacobian(disc, s.a, s.L, p);
    if (pinned) j.col(1) = disc.theta_dL(s.L).cwiseProduct(s.a);
    const Eigen::VectorXd delta = j.partialPivLu().solve(f);
    double step = 1.0;
    bool accepted = false;
    bool positivity_failed = false;
    for (int halving = 0; halving <= opt.max_halvings; ++halving, step *= 0.5) {
      State trial = s;
      for (int m = 0; m <= n; ++m) {
        if (pinned && m == 1) continue;
        trial.a[m] -= step * delta[m];
      }
      if (pinned) {
        trial.L -= step * delta[1];
        if (!(trial.L > 0.0)) continue;
      }
      const Eigen::VectorXd ft = residual(disc, trial.a, trial.L, p, &min_v);
      if (ft.size() == 0) {
        positivity_failed = true;
        continue;
      }
      const double nt = ft.cwiseAbs().maxCoeff();
      if (nt < (1.0 - 1e-4 * step) * norm || nt <= opt.newton_tol) {
        s = trial;
        f = ft;
        norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (positivity_failed)
        throw Error(ErrorKind::positivity,
                    "solve_periodic: v <= 0 at a collocation point after step halving");
      throw Error(ErrorKind::continuation, "solve_periodic: Newton step rejected");
    }
  }
  throw Error(ErrorKind::continuation,
              "solve_periodic: Newton did not converge in " +
                  std::to_string(opt.max_iterations) + " iterations (residual " +
                  std::to_string(norm) + ", L = " + std::to_string(s.L) + ")");
}

BranchPoint finish(const KernelModel& model, const State& s) {
  BranchPoint bp;
  bp.L = s.L;
  std::vector<double> coeffs(s.a.data(), s.a.data() + s.a.size());
  bp.profile = Profile::periodic(s.L, coeffs);
  bp.newton_iters = s.iterations;
  const int n = static_cast<int>(s.a.size()) - 1;
  const int samples = 16 * (n + 1);
  const double p = model.params().p;
  const SymbolEvaluator sym(model, kTwoPi * n / s.L);
  std::vector<double> th;
  sym.harmonics(kTwoPi / s.L, n, th);
  bp.min_v = std::numeric_limits<double>::infinity();
  bp.max_v = -bp.min_v;
  double mean = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double phase = kTwoPi * j / samples;
    double v = 0.0;
    double pv = 0.0;
    for (int m = 0; m <= n; ++m) {
      const double c = std::cos(m * phase);
      v += s.a[m] * c;
      pv += th[m] * s.a[m] * c;
    }
    const double vp = std::pow(v, p);
    bp.residual = std::max(bp.residual, std::abs(pv + v - vp));
    bp.min_v = std::min(bp.min_v, v);
    bp.max_v = std::max(bp.max_v, v);
    bp.amplitude = std::max(bp.amplitude, std::abs(v - 1.0));
    mean += vp - v;
  }
  bp.mean_identity = mean / samples;
  return bp;
}

int collocation_points(int modes, const SolverOptions& opt) {
  return 2 * opt.oversample * modes;
}

State initial_state(int modes, double L) {
  State s;
  s.a = Eigen::VectorXd::Zero(modes + 1);
  s.a[0] = 1.0;
  s.L = L;
  return s;
}

double amplitude_of(Discretization& disc, const Eigen::VectorXd& a) {
  return (disc.values(a).array() - 1.0).abs().maxCoeff();
}

/// Fixed-L Newton along L from a converged nonconstant state, with a secant
/// predictor and adaptive steps. A step that lands on v = 1 or changes the
/// amplitude by more than half is treated as a failure.
State march(Discretization& disc, State start, double L_target, double p,
            const SolverOptions& opt) {
  State prev = start;
  std::optional<State> prev2;
  double amp = amplitude_of(disc, prev.a);
  double step = std::copysign(std::min(std::abs(L_target - prev.L), 0.05 * prev.L),
                              L_target - prev.L);
  while (prev.L != L_target) {
    if (std::abs(step) < 1e-8 * prev.L)
      throw Error(ErrorKind::continuation,
                  "solve_periodic: continuation stalled at L = " + std::to_string(prev.L));
    const bool last = std::abs(L_target - prev.L) <= std::abs(step) * (1.0 + 1e-12);
    const double L_next = last ? L_target : prev.L + step;
    State guess = prev;
    guess.L = L_next;
    if (prev2) guess.a += (prev.a - prev2->a) * ((L_next - prev.L) / (prev.L - prev2->L));
    bool ok = false;
    State next;
    try {
      next = newton(disc, guess, p, false, opt);
      const double amp_next = amplitude_of(disc, next.a);
      ok = amp_next > 0.5 * amp && amp_next < 1.5 * amp + 0.05 &&
           next.a[1] * prev.a[1] > 0.0;
      if (ok) amp = amp_next;
    } catch (const Error&) {
    }
    if (!ok) {
      step *= 0.5;
      continue;
    }
    prev2 = prev;
    prev = next;
    step *= 1.5;
  }
  return prev;
}

/// Solution with pinned first mode alpha; L is part of the solution.
State anchored_at(Discretization& disc, State guess, double alpha, double p,
                  const SolverOptions& opt) {
  guess.a[1] = alpha;
  return newton(disc, guess, p, true, opt);
}

/// Leaves v = 1 at L* along the branch with the sign of alpha0 and reaches
/// L_target: by adjusting the pinned mode below the first anchored period,
/// by marching in L above it.
State follow_branch(const KernelModel& model, Discretization& disc, double L_target,
                    double alpha0, const SolverOptions& opt) {
  const double p = model.params().p;
  const double sign = alpha0 < 0.0 ? -1.0 : 1.0;
  const double alpha = std::abs(alpha0);
  auto solve_at = [&](double a_abs, const State& from) {
    return anchored_at(disc, from, sign * a_abs, p, opt);
  };

  const State first = solve_at(alpha, initial_state(disc.modes(), bifurcation_period(model)));
  if (first.L <= L_target) return march(disc, first, L_target, p, opt);

  double a_hi = alpha;
  double g_hi = first.L - L_target;
  State s_hi = first;
  double a_lo = alpha;
  double g_lo = g_hi;
  State s_lo = first;
  for (;;) {
    a_lo *= 0.5;
    if (a_lo < 1e-5)
      throw Error(ErrorKind::no_bifurcation,
                  "solve_periodic: no nonconstant even solution near L = " +
                      std::to_string(L_target) + " (below the bifurcation branch)");
    s_lo = solve_at(a_lo, s_lo);
    g_lo = s_lo.L - L_target;
    if (g_lo <= 0.0) break;
    a_hi = a_lo;
    g_hi = g_lo;
    s_hi = s_lo;
  }

  // Illinois regula falsi on the pinned amplitude.
  int side = 0;
  State best = std::abs(g_lo) < std::abs(g_hi) ? s_lo : s_hi;
  for (int it = 0; it < 100 && std::abs(best.L - L_target) > 1e-13 * L_target; ++it) {
    const double a_new = a_hi - g_hi * (a_hi - a_lo) / (g_hi - g_lo);
    const State from = std::abs(a_new - a_lo) < std::abs(a_new - a_hi) ? s_lo : s_hi;
    best = solve_at(a_new, from);
    const double g_new = best.L - L_target;
    if (g_new > 0.0) {
      a_hi = a_new;
      g_hi = g_new;
      s_hi = best;
      if (side == 1) g_lo *= 0.5;
      side = 1;
    } else {
      a_lo = a_new;
      g_lo = g_new;
      s_lo = best;
      if (side == -1) g_hi *= 0.5;
      side = -1;
    }
    if (std::abs(a_hi - a_lo) < 1e-15) break;
  }
  best.L = L_target;
  return newton(disc, best, p, false, opt);
}

}  // namespace

double bifurcation_wavenumber(const KernelModel& model) {
  const double target = model.params().lin_coeff;
  double hi = 1.0;
  std::unique_ptr<SymbolEvaluator> sym = std::make_unique<SymbolEvaluator>(model, hi);
  while (sym->theta(hi) < target) {
    hi *= 2.0;
    if (hi > 1e6)
      throw Error(ErrorKind::no_bifurcation,
                  "bifurcation_period: theta stays below p - 1 up to k = 1e6");
    sym = std::make_unique<SymbolEvaluator>(model, hi);
  }
  double lo = 0.0;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (sym->theta(mid) < target ? lo : hi) = mid;
  }
  double k = 0.5 * (lo + hi);
  for (int it = 0; it < 20; ++it) {
    const double f = sym->theta(k) - target;
    if (std::abs(f) <= 1e-13 * target) break;
    k -= f / sym->theta_prime(k);
  }
  if (!(std::abs(sym->theta(k) - target) <= 1e-10))
    throw Error(ErrorKind::numerical, "bifurcation_period: root polish failed");
  return k;
}

double bifurcation_period(const KernelModel& model) {
  return kTwoPi / bifurcation_wavenumber(model);
}

BranchPoint solve_periodic(const KernelModel& model, double L, int N_modes, const Seed& seed,
                           const SolverOptions& options) {
  if (!(L > 0.0)) throw Error(ErrorKind::domain, "solve_periodic: L must be > 0");
  if (N_modes < 1) throw Error(ErrorKind::domain, "solve_periodic: N_modes must be >= 1");
  const double p = model.params().p;
  Discretization disc(model, N_modes, collocation_points(N_modes, options), 0.5 * L);

  if (seed.from) {
    State s = initial_state(N_modes, seed.from->L);
    const auto* per = seed.from->profile.periodic_data();
    if (!per) throw Error(ErrorKind::domain, "solve_periodic: seed must be periodic");
    for (int m = 0; m <= N_modes && m < static_cast<int>(per->coeffs.size()); ++m)
      s.a[m] = per->coeffs[m];
    if (!seed.from->nonconstant()) {
      s.L = L;
      return finish(model, newton(disc, s, p, false, options));
    }
    try {
      // Re-converge at the seed's own period (N may differ), then march.
      s = newton(disc, s, p, false, options);
      return finish(model, march(disc, s, L, p, options));
    } catch (const Error&) {
      return finish(model, follow_branch(model, disc, L, std::copysign(0.05, s.a[1]), options));
    }
  }

  if (seed.amplitude == 0.0) {
    State s = initial_state(N_modes, L);
    return finish(model, newton(disc, s, p, false, options));
  }
  return finish(model, follow_branch(model, disc, L, seed.amplitude, options));
}

std::vector<BranchPoint> continue_branch(const KernelModel& model, double L_start,
                                         double L_end, int steps, int N_modes,
                                         double seed_amplitude, const SolverOptions& options) {
  if (steps < 1) throw Error(ErrorKind::domain, "continue_branch: steps must be >= 1");
  std::vector<BranchPoint> out;
  try {
    out.push_back(solve_periodic(model, L_start, N_modes, Seed::cosine(seed_amplitude), options));
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(e.what()) + " [L = " + std::to_string(L_start) + "]");
  }
  for (int i = 1; i <= steps; ++i) {
    const double target = L_start * std::pow(L_end / L_start, static_cast<double>(i) / steps);
    try {
      out.push_back(
          solve_periodic(model, target, N_modes, Seed::continuation(out.back()), options));
    } catch (const Error& e) {
      throw Error(ErrorKind::continuation,
                  std::string(e.what()) + " [L = " + std::to_string(target) + "]");
    }
    if (!out.back().nonconstant())
      throw Error(ErrorKind::continuation,
                  "continue_branch: branch collapsed to v = 1 at L = " + std::to_string(target));
  }
  return out;
}

double pointwise_residual(const KernelModel& model, const Profile& profile, int samples,
                          double offset) {
  const auto* per = profile.periodic_data();
  if (!per) throw Error(ErrorKind::domain, "pointwise_residual: periodic profile required");
  double worst = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double t = offset + per->period * j / samples;
    worst = std::max(worst, std::abs(equation_residual(model, profile, t)));
  }
  return worst;
}

int sign_changes_per_period(const Profile& profile, int samples, double offset) {
  const auto* per = profile.periodic_data();
  if (!per) throw Error(ErrorKind::domain, "sign_changes_per_period: periodic profile required");
  std::vector<int> signs;
  for (int j = 0; j < samples; ++j) {
    const double d = profile.value(offset + per->period * j / samples) - 1.0;
    if (d != 0.0) signs.push_back(d > 0.0 ? 1 : -1);
  }
  int changes = 0;
  for (std::size_t i = 0; i < signs.size(); ++i)
    if (signs[i] != signs[(i + 1) % signs.size()]) ++changes;
  return changes;
}

}  // namespace fylab
