#include "fylab/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fylab/calibrate.hpp"
#include "fylab/error.hpp"
#include "fylab/quadrature.hpp"
#include "fylab/specfun.hpp"

namespace fylab {

std::string to_string(GammaSource source) {
  switch (source) {
    case GammaSource::closed_form: return "closed_form";
    case GammaSource::calibrated: return "calibrated";
    case GammaSource::explicit_value: return "explicit";
  }
  return "unknown";
}

GammaSource gamma_source_from_string(const std::string& name) {
  if (name == "closed_form") return GammaSource::closed_form;
  if (name == "calibrated") return GammaSource::calibrated;
  if (name == "explicit") return GammaSource::explicit_value;
  throw Error(ErrorKind::config, "unknown gamma_mode '" + name +
                                     "' (closed_form|calibrated|explicit)");
}

double sphere_area(int d) {
  if (d < 1) throw Error(ErrorKind::domain, "sphere_area: d must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) /
         std::exp(log_gamma(0.5 * d));
}

double fractional_laplacian_constant(int n, double s) {
  const double log_c = 2.0 * s * std::log(2.0) + log_gamma(0.5 * (n + 2.0 * s)) -
                       log_gamma(2.0 - s) - 0.5 * n * std::log(std::numbers::pi);
  return std::exp(log_c) * s * (1.0 - s);
}

double explicit_solution_constant(int n, double s) {
  const double log_ratio =
      log_gamma(0.25 * (n + 2.0 * s)) - log_gamma(0.25 * (n - 2.0 * s));
  return std::exp(2.0 * s * std::log(2.0) + 2.0 * log_ratio);
}

double gamma_closed_form(int n, double s) {
  return fractional_laplacian_constant(n, s) * sphere_area(n) /
         explicit_solution_constant(n, s);
}

ProblemParams make_params(int n, double s, GammaMode mode) {
  if (n < 1 || !(s > 0.0 && s < 1.0) || !(n > 2.0 * s))
    throw Error(ErrorKind::invalid_regime,
                "make_params: need n >= 1, 0 < s < 1 and n > 2s (n=" +
                    std::to_string(n) + ", s=" + std::to_string(s) + ")");
  ProblemParams p;
  p.n = n;
  p.s = s;
  p.p = (n + 2.0 * s) / (n - 2.0 * s);
  p.lin_coeff = 4.0 * s / (n - 2.0 * s);
  p.c_ns = fractional_laplacian_constant(n, s);
  p.kappa_ns = explicit_solution_constant(n, s);
  switch (mode.source) {
    case GammaSource::closed_form:
      p.gamma_ns = gamma_closed_form(n, s);
      break;
    case GammaSource::explicit_value:
      if (!(mode.value > 0.0) || !std::isfinite(mode.value))
        throw Error(ErrorKind::invalid_regime,
                    "make_params: explicit gamma must be positive");
      p.gamma_ns = mode.value;
      break;
    case GammaSource::calibrated: {
      ProblemParams placeholder = p;
      placeholder.gamma_ns = 1.0;
      placeholder.gamma_source = GammaSource::explicit_value;
      p.gamma_ns = calibrate_gamma(placeholder).gamma;
      break;
    }
  }
  p.gamma_source = mode.source;
  return p;
}

ProblemParams with_gamma(ProblemParams params, double gamma,
                         GammaSource source) {
  params.gamma_ns = gamma;
  params.gamma_source = source;
  return params;
}

KernelModel::KernelModel(const ProblemParams& params, KernelMode mode,
                         bool use_cache)
    : params_(params), mode_(mode) {
  const double s = params_.s;
  const NearOneCoefficient sing = hyp2f1_near_one_coeff(params_);
  // (1 - e^{-2t}) ~ 2t as t -> 0.
  a0_ = params_.gamma_ns * sing.coefficient * std::pow(2.0, -1.0 - 2.0 * s);
  a_inf_ = params_.gamma_ns;
  if (mode_ == KernelMode::pure_power || !use_cache) return;

  log_min_ = std::log(kCacheMin);
  dlog_ = (std::log(kCacheMax) - log_min_) / (kCacheSize - 1);
  // Two ghost nodes on each side feed the five-point slope stencil.
  std::vector<double> y(kCacheSize + 4);
  for (int i = 0; i < kCacheSize + 4; ++i)
    y[i] = std::log(exact(std::exp(log_min_ + (i - 2) * dlog_)));
  log_values_.assign(y.begin() + 2, y.end() - 2);
  log_slopes_.resize(kCacheSize);
  for (int i = 0; i < kCacheSize; ++i) {
    const int j = i + 2;
    log_slopes_[i] =
        (y[j - 2] - 8.0 * y[j - 1] + 8.0 * y[j + 1] - y[j + 2]) / (12.0 * dlog_);
  }
  // Fritsch-Carlson limiter keeps the interpolant monotone.
  for (int i = 0; i + 1 < kCacheSize; ++i) {
    const double delta = (log_values_[i + 1] - log_values_[i]) / dlog_;
    if (!(delta < 0.0))
      throw Error(ErrorKind::numerical,
                  "KernelModel: tabulated kernel is not strictly decreasing");
    if (log_slopes_[i] > 0.0) log_slopes_[i] = 0.0;
    if (log_slopes_[i + 1] > 0.0) log_slopes_[i + 1] = 0.0;
    const double alpha = log_slopes_[i] / delta;
    const double beta = log_slopes_[i + 1] / delta;
    const double r2 = alpha * alpha + beta * beta;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      log_slopes_[i] = tau * alpha * delta;
      log_slopes_[i + 1] = tau * beta * delta;
    }
  }
}

double KernelModel::near_singular(double t) const {
  t = std::abs(t);
  const double w = -std::expm1(-2.0 * t);
  return params_.gamma_ns * std::exp(-params_.decay_rate() * t) *
         hyp2f1_complement(params_.hyp_a(), params_.hyp_b(), params_.hyp_c(),
                           w, 2);
}

double KernelModel::exact(double t) const {
  t = std::abs(t);
  if (t == 0.0) return std::numeric_limits<double>::infinity();
  if (mode_ == KernelMode::pure_power)
    return a0_ * std::pow(t, -1.0 - 2.0 * params_.s);
  if (t < kTiny) return near_singular(t);
  const double z = std::exp(-2.0 * t);
  double f;
  if (z > kHypSwitch)
    f = hyp2f1_complement(params_.hyp_a(), params_.hyp_b(), params_.hyp_c(),
                          -std::expm1(-2.0 * t));
  else
    f = hyp2f1({params_.hyp_a(), params_.hyp_b(), params_.hyp_c(), z});
  return params_.gamma_ns * std::exp(-params_.decay_rate() * t) * f;
}

double KernelModel::interpolate(double t) const {
  const double x = (std::log(t) - log_min_) / dlog_;
  int i = static_cast<int>(x);
  if (i >= kCacheSize - 1) i = kCacheSize - 2;
  const double u = x - i;
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  const double y = h00 * log_values_[i] + h10 * dlog_ * log_slopes_[i] +
                   h01 * log_values_[i + 1] + h11 * dlog_ * log_slopes_[i + 1];
  return std::exp(y);
}

double KernelModel::operator()(double t) const {
  t = std::abs(t);
  if (cached() && t >= kCacheMin && t <= kCacheMax) return interpolate(t);
  return exact(t);
}

double KernelModel::tail_integral(double x) const {
  if (!(x > 0.0))
    throw Error(ErrorKind::domain, "tail_integral: x must be positive");
  const double s = params_.s;
  if (mode_ == KernelMode::pure_power)
    return a0_ * std::pow(x, -2.0 * s) / (2.0 * s);
  const auto k = [this](double t) { return (*this)(t); };
  double sum = 0.0;
  double left = x;
  while (left < 1.0) {
    const double right = std::min(2.0 * left, 1.0);
    sum += quad::gauss_legendre(k, left, right, 16);
    left = right;
  }
  const double rate = params_.decay_rate();
  for (;;) {
    const double right = left + 1.0;
    const double piece = quad::gauss_legendre(k, left, right, 16);
    sum += piece;
    left = right;
    if ((*this)(left) / rate < 1e-17 * sum) break;
  }
  return sum;
}

KernelModel KernelModel::pure_power() const {
  return KernelModel(params_, KernelMode::pure_power, false);
}

double kernel_eval(const KernelModel& model, double t) {
  if (t == 0.0)
    throw Error(ErrorKind::singularity, "kernel_eval: K is singular at t = 0");
  return model(t);
}

double kernel_moments(const KernelModel& model, double h, MomentOrder order) {
  if (!(h > 0.0)) throw Error(ErrorKind::domain, "kernel_moments: h must be > 0");
  if (order == MomentOrder::tail0) return 2.0 * model.tail_integral(h);
  const double s = model.params().s;
  const double a0 = model.a0();
  const auto f = [&](double xi) {
    if (xi < 1e-30) return a0 * std::pow(xi, 1.0 - 2.0 * s);
    return xi * xi * model(xi);
  };
  return quad::tanh_sinh(f, 0.0, h, 1e-12);
}

std::vector<KernelTableRow> kernel_table(const KernelModel& model, double t_min,
                                         double t_max, int points) {
  if (!(t_min > 0.0 && t_max > t_min) || points < 2)
    throw Error(ErrorKind::domain, "kernel_table: need 0 < t_min < t_max, points >= 2");
  std::vector<KernelTableRow> rows;
  rows.reserve(points);
  const double s = model.params().s;
  const double rate = model.params().decay_rate();
  const double lmin = std::log(t_min);
  const double dl = (std::log(t_max) - lmin) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double t = std::exp(lmin + i * dl);
    const double k = model(t);
    rows.push_back({t, k, k * std::pow(t, 1.0 + 2.0 * s), k * std::exp(rate * t)});
  }
  return rows;
}

}  // namespace fylab
