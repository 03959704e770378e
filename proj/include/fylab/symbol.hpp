#pragma once

#include <vector>

#include "fylab/kernel.hpp"

namespace fylab {

/// theta(k) = integral over R of (1 - cos(k xi)) K(xi) dxi, so that
/// P cos(k .) = theta(k) cos(k .).
///
/// Quadrature nodes and kernel weights are computed once; every theta(k)
/// with |k| <= k_max is then a weighted sum.
class SymbolEvaluator {
 public:
  SymbolEvaluator(const KernelModel& model, double k_max);

  double theta(double k) const;
  /// d theta / dk.
  double theta_prime(double k) const;
  double k_max() const { return k_max_; }

  /// theta(m k1) and theta'(m k1) for m = 0..N in one sweep over the nodes.
  void harmonics(double k1, int N, std::vector<double>& theta,
                 std::vector<double>* theta_prime = nullptr) const;

 private:
  double k_max_;
  double a0_;
  double s_;
  double xi_min_;
  double power_tail_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;  ///< quadrature weight times K(node)
};

/// theta on the frequencies k_m = 2 pi m / L, m = 0..N.
struct PeriodicSymbol {
  double period = 0.0;
  std::vector<double> k;
  std::vector<double> theta;
};

PeriodicSymbol periodic_symbol(const KernelModel& model, double L, int N);
PeriodicSymbol periodic_symbol(const ProblemParams& params, double L, int N);

}  // namespace fylab
