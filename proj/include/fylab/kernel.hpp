#pragma once

#include <string>
#include <vector>

namespace fylab {

/// Where the kernel normalization gamma_{n,s} comes from.
enum class GammaSource {
  closed_form,  ///< c_{n,s} |S^{n-1}| / kappa_{n,s}
  calibrated,   ///< least-squares fit against the n-dimensional oracle
  explicit_value,
};

struct GammaMode {
  GammaSource source = GammaSource::closed_form;
  double value = 0.0;  ///< used only for explicit_value

  static GammaMode closed_form() { return {GammaSource::closed_form, 0.0}; }
  static GammaMode calibrated() { return {GammaSource::calibrated, 0.0}; }
  static GammaMode explicit_value(double v) {
    return {GammaSource::explicit_value, v};
  }
};

std::string to_string(GammaSource source);
GammaSource gamma_source_from_string(const std::string& name);

/// Dimension, fractional order and every constant derived from them.
struct ProblemParams {
  int n = 3;
  double s = 0.5;
  double p = 2.0;          ///< (n + 2s) / (n - 2s)
  double lin_coeff = 1.0;  ///< 4s / (n - 2s) = p - 1
  double c_ns = 0.0;       ///< fractional Laplacian constant
  double kappa_ns = 0.0;   ///< 2^{2s} (Gamma((n+2s)/4) / Gamma((n-2s)/4))^2
  double gamma_ns = 1.0;   ///< kernel normalization
  GammaSource gamma_source = GammaSource::closed_form;

  double hyp_a() const { return 0.5 * (n + 2.0 * s); }
  double hyp_b() const { return 1.0 + s; }
  double hyp_c() const { return 0.5 * n; }
  /// Exponential decay rate (n + 2s) / 2 of the kernel.
  double decay_rate() const { return 0.5 * (n + 2.0 * s); }
};

/// Surface area of the unit sphere S^{d-1} in R^d (d >= 1; |S^0| = 2).
double sphere_area(int d);

double fractional_laplacian_constant(int n, double s);
double explicit_solution_constant(int n, double s);
double gamma_closed_form(int n, double s);

/// Builds the parameter set. Throws Error(invalid_regime) unless n >= 1,
/// 0 < s < 1 and n > 2s. Calibrated mode runs calibrate_gamma.
ProblemParams make_params(int n, double s, GammaMode mode = GammaMode::closed_form());

/// Same parameters with a different normalization.
ProblemParams with_gamma(ProblemParams params, double gamma, GammaSource source);

enum class KernelMode { full, pure_power };

/// Evaluator for K(t) = gamma e^{-(n+2s)|t|/2} 2F1((n+2s)/2, 1+s; n/2; e^{-2|t|}),
/// or for its pure-power model A0 |t|^{-1-2s}. Immutable once constructed.
class KernelModel {
 public:
  /// Below this |t| the near-singular expansion is used.
  static constexpr double kTiny = 1e-4;
  static constexpr double kCacheMin = 1e-6;
  static constexpr double kCacheMax = 40.0;
  static constexpr int kCacheSize = 4096;

  explicit KernelModel(const ProblemParams& params,
                       KernelMode mode = KernelMode::full,
                       bool use_cache = true);

  /// K(t); cached inside [kCacheMin, kCacheMax] when enabled. t = 0 gives +inf.
  double operator()(double t) const;
  /// K(t) straight from the hypergeometric representation.
  double exact(double t) const;
  /// Two-term expansion around t = 0 used below kTiny.
  double near_singular(double t) const;

  /// lim K(t) |t|^{1+2s} as t -> 0.
  double a0() const { return a0_; }
  /// lim K(t) e^{(n+2s)|t|/2} as t -> infinity.
  double a_inf() const { return a_inf_; }

  /// Integral of K over [x, infinity), x > 0.
  double tail_integral(double x) const;

  const ProblemParams& params() const { return params_; }
  KernelMode mode() const { return mode_; }
  bool cached() const { return !log_values_.empty(); }

  /// Same normalization, pure-power kernel A0 |t|^{-1-2s}.
  KernelModel pure_power() const;

 private:
  double interpolate(double t) const;

  ProblemParams params_;
  KernelMode mode_;
  double a0_ = 0.0;
  double a_inf_ = 0.0;
  double log_min_ = 0.0;
  double dlog_ = 0.0;
  std::vector<double> log_values_;
  std::vector<double> log_slopes_;
};

/// K(t) with a singularity error at t = 0.
double kernel_eval(const KernelModel& model, double t);

enum class MomentOrder {
  tail0,   ///< integral of K over |xi| > h
  local2,  ///< integral of xi^2 K(xi) over (0, h)
};

double kernel_moments(const KernelModel& model, double h, MomentOrder order);

struct KernelTableRow {
  double t = 0.0;
  double k = 0.0;
  double k_times_power = 0.0;  ///< K |t|^{1+2s}
  double k_times_exp = 0.0;    ///< K e^{(n+2s)t/2}
};

/// Log-spaced table on [t_min, t_max].
std::vector<KernelTableRow> kernel_table(const KernelModel& model, double t_min,
                                         double t_max, int points);

}  // namespace fylab
