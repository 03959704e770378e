#include "fylab/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fylab/error.hpp"
#include "fylab/quadrature.hpp"

namespace fylab {

namespace {

void add_panel(std::vector<double>& nodes, std::vector<double>& weights,
               const KernelModel& model, double a, double b) {
  const auto x = quad::gl16_nodes();
  const auto w = quad::gl16_weights();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = mid + half * x[i];
    nodes.push_back(t);
    weights.push_back(half * w[i] * model(t));
  }
}

}  // namespace

SymbolEvaluator::SymbolEvaluator(const KernelModel& model, double k_max)
    : k_max_(k_max), a0_(model.a0()), s_(model.params().s) {
  if (!(k_max > 0.0))
    throw Error(ErrorKind::domain, "SymbolEvaluator: k_max must be > 0");
  // Panels resolve cos(k xi) with at most one period each.
  const double w0 = std::min(0.5, 2.0 * std::numbers::pi / k_max);
  double right = w0;
  while (right > 1e-14 * w0) {
    add_panel(nodes_, weights_, model, 0.5 * right, right);
    right *= 0.5;
  }
  xi_min_ = right;
  double reach;
  if (model.mode() == KernelMode::pure_power) {
    // No exponential tail; the mean of 4 sin^2 beyond reach is 2, which
    // theta() adds analytically.
    reach = 1e3;
    power_tail_ = 2.0 * a0_ * std::pow(reach, -2.0 * s_) / (2.0 * s_);
  } else {
    reach = 40.0 / model.params().decay_rate() + 5.0;
  }
  double left = w0;
  double width = w0;
  while (left < reach) {
    add_panel(nodes_, weights_, model, left, left + width);
    left += width;
    // Away from the singularity with no oscillation limit, widen panels.
    if (model.mode() == KernelMode::pure_power && left > 1.0)
      width = std::min(std::max(width, 0.25 * left), 2.0 * std::numbers::pi / k_max);
  }
}

double SymbolEvaluator::theta(double k) const {
  if (k == 0.0) return 0.0;
  k = std::abs(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double sh = std::sin(0.5 * k * nodes_[i]);
    sum += weights_[i] * sh * sh;
  }
  // Below xi_min: 4 sin^2(k xi / 2) K ~ k^2 A0 xi^{1-2s}.
  return 4.0 * sum + k * k * a0_ * std::pow(xi_min_, 2.0 - 2.0 * s_) / (2.0 - 2.0 * s_) +
         power_tail_;
}

double SymbolEvaluator::theta_prime(double k) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    sum += weights_[i] * nodes_[i] * std::sin(k * nodes_[i]);
  return 2.0 * sum + 2.0 * k * a0_ * std::pow(xi_min_, 2.0 - 2.0 * s_) / (2.0 - 2.0 * s_);
}

void SymbolEvaluator::harmonics(double k1, int N, std::vector<double>& theta,
                                std::vector<double>* theta_prime) const {
  theta.assign(N + 1, 0.0);
  if (theta_prime) theta_prime->assign(N + 1, 0.0);
  // Rotation on u = 1 - cos(m x) and sin(m x), free of cancellation at small x.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double x = k1 * nodes_[i];
    const double h = std::sin(0.5 * x);
    const double u1 = 2.0 * h * h;
    const double s1 = std::sin(x);
    double u = u1;
    double sn = s1;
    for (int m = 1; m <= N; ++m) {
      theta[m] += weights_[i] * u;
      if (theta_prime) (*theta_prime)[m] += weights_[i] * nodes_[i] * sn;
      const double un = u + u1 - u * u1 + sn * s1;
      sn = sn * (1.0 - u1) + (1.0 - u) * s1;
      u = un;
    }
  }
  const double rem = a0_ * std::pow(xi_min_, 2.0 - 2.0 * s_) / (2.0 - 2.0 * s_);
  for (int m = 1; m <= N; ++m) {
    const double k = k1 * m;
    theta[m] = 2.0 * theta[m] + k * k * rem + power_tail_;
    if (theta_prime) (*theta_prime)[m] = 2.0 * (*theta_prime)[m] + 2.0 * k * rem;
  }
}

PeriodicSymbol periodic_symbol(const KernelModel& model, double L, int N) {
  if (!(L > 0.0) || N < 1)
    throw Error(ErrorKind::domain, "periodic_symbol: need L > 0 and N >= 1");
  PeriodicSymbol out;
  out.period = L;
  const double k1 = 2.0 * std::numbers::pi / L;
  const SymbolEvaluator eval(model, k1 * N);
  for (int m = 0; m <= N; ++m) {
    out.k.push_back(k1 * m);
    out.theta.push_back(eval.theta(k1 * m));
  }
  return out;
}

PeriodicSymbol periodic_symbol(const ProblemParams& params, double L, int N) {
  return periodic_symbol(KernelModel(params), L, N);
}

}  // namespace fylab
