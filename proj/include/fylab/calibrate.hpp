#pragma once

#include <vector>

#include "fylab/kernel.hpp"
#include "fylab/profile.hpp"

namespace fylab {

/// Low-accuracy quadrature of the n-dimensional fractional Laplacian
///   (-Delta)^s u(x) = c_{n,s} P.V. integral (u(x) - u(y)) / |x - y|^{n+2s} dy
/// for radial u. The sphere integral
///   G(r, rho) = integral over S^{n-1} of |r e - rho w|^{-n-2s} dw
/// is evaluated by direct angular quadrature, independently of the
/// hypergeometric kernel representation.
class RadialOracle {
 public:
  /// refinement >= 1 subdivides every quadrature panel and deepens the
  /// graded meshes.
  explicit RadialOracle(const ProblemParams& params, int refinement = 1);

  double sphere_integral(double r, double rho) const;

  /// r^{(n+2s)/2} (-Delta)^s u at |x| = e^{-t}, for
  /// u(x) = |x|^{-(n-2s)/2} v(-log|x|). Radial logarithmic coordinates make
  /// the result independent of r for fixed t.
  double reduced(const Profile& v, double t) const;

  /// (-Delta)^s of A |x|^{-(n-2s)/2} at |x| = r, integrated in rho directly.
  double power_law(double amplitude, double r) const;

  const ProblemParams& params() const { return params_; }

 private:
  ProblemParams params_;
  int refinement_;
  std::vector<double> sigma_nodes_;
  std::vector<double> sigma_weights_;  ///< weight times c_{n,s} G(e^{-sigma/2}, e^{sigma/2})
  double sigma_min_ = 0.0;
  double sigma_max_ = 0.0;
  double singular_coeff_ = 0.0;  ///< c_{n,s} G sigma^{1+2s} as sigma -> 0
};

struct CalibrationPoint {
  double amplitude = 0.0;
  double width = 0.0;
  double t = 0.0;
  double v = 0.0;
  double p1v = 0.0;       ///< P v with gamma = 1
  double oracle = 0.0;    ///< reduced oracle value divided by kappa
  double gamma_point = 0.0;
  double residual = 0.0;  ///< relative to the nonlocal part, after the fit
};

struct ConstantCheck {
  double r = 0.0;
  double lhs = 0.0;  ///< (-Delta)^s u0 by the oracle
  double rhs = 0.0;  ///< u0^p
  double rel_error = 0.0;
};

struct CalibrationResult {
  double gamma = 0.0;
  double closed_form = 0.0;
  double spread = 0.0;        ///< max |gamma_point / gamma - 1|
  double max_residual = 0.0;  ///< max relative identity residual
  int refinement = 1;
  std::vector<CalibrationPoint> battery;
  std::vector<ConstantCheck> constant_checks;
};

/// Least-squares gamma_{n,s} over a battery of bump perturbations of v = 1.
/// The input gamma is ignored. Throws Error(calibration) if the spread of the
/// per-point ratios exceeds 5%.
CalibrationResult calibrate_gamma(const ProblemParams& params, int refinement = 1);

/// Smooth compactly supported bump exp(1 - 1/(1 - x^2)) on (-1, 1), peak 1.
double bump(double x);

/// 1 + amplitude * bump((t - center) / width) sampled as a grid profile with
/// far-field value 1.
Profile bump_profile(double amplitude, double width, double center = 0.0,
                     int nodes_per_width = 64);

}  // namespace fylab
