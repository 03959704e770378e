#pragma once

#include <vector>

#include "fylab/kernel.hpp"
#include "fylab/profile.hpp"

namespace fylab {

/// A converged even periodic solution of P v + v = v^p.
struct BranchPoint {
  double L = 0.0;
  Profile profile = Profile::constant();
  double residual = 0.0;   ///< sup |P v + v - v^p| on a fine grid (symbol form of P)
  double amplitude = 0.0;  ///< sup |v - 1|
  double min_v = 1.0;
  double max_v = 1.0;
  double mean_identity = 0.0;  ///< (1/L) integral over a period of (v^p - v)
  int newton_iters = 0;

  bool nonconstant(double tol = 1e-6) const { return amplitude > tol; }
};

/// Initial guess for solve_periodic: either 1 + amplitude cos(2 pi t / L) or
/// a previously converged branch point.
struct Seed {
  double amplitude = 0.0;
  const BranchPoint* from = nullptr;

  static Seed cosine(double amplitude) { return {amplitude, nullptr}; }
  static Seed continuation(const BranchPoint& point) { return {0.0, &point}; }
};

struct SolverOptions {
  int oversample = 4;         ///< collocation points = 2 * oversample * N_modes
  double newton_tol = 1e-12;  ///< sup norm of the Fourier residual
  int max_iterations = 60;
  int max_halvings = 20;
};

/// k* with theta(k*) = p - 1 (bisection, then Newton polish, |theta - (p-1)| <= 1e-10).
double bifurcation_wavenumber(const KernelModel& model);
/// L* = 2 pi / k*.
double bifurcation_period(const KernelModel& model);

/// Newton iteration on the cosine coefficients of an even solution with
/// period L. A cosine seed of amplitude 0 returns v = 1. A nonzero cosine
/// seed follows the branch that bifurcates from v = 1 at L*: the first mode
/// is pinned at the seed amplitude while L floats, then the branch is
/// marched in L (or, below that period, the pin is adjusted) until the
/// period equals L. A negative amplitude yields the half-period translate.
/// A continuation seed is marched from its own period to L.
BranchPoint solve_periodic(const KernelModel& model, double L, int N_modes, const Seed& seed,
                           const SolverOptions& options = {});

/// Branch points at geometrically spaced periods from L_start to L_end
/// (steps + 1 points), each marched from its predecessor.
std::vector<BranchPoint> continue_branch(const KernelModel& model, double L_start,
                                         double L_end, int steps, int N_modes,
                                         double seed_amplitude = 0.05,
                                         const SolverOptions& options = {});

/// sup |P v + v - v^p| at `samples` equally spaced points of one period,
/// with P applied pointwise by quadrature (independent of the symbol).
double pointwise_residual(const KernelModel& model, const Profile& profile, int samples,
                          double offset = 0.0);

/// Number of sign changes of v - 1 over one period [offset, offset + L).
int sign_changes_per_period(const Profile& profile, int samples = 2048, double offset = 0.0);

}  // namespace fylab
