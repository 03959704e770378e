#include "fylab/pointwise.hpp"

#include <algorithm>
#include <cmath>

#include "fylab/error.hpp"
#include "fylab/quadrature.hpp"

namespace fylab {

namespace {

double truncation_radius(const KernelModel& model, const Profile& profile) {
  const double rate = model.params().decay_rate();
  const double scale = 2.0 * std::max(profile.sup_norm(), 1e-300) *
                       std::max(1.0, model.a_inf()) / rate;
  const double radius = (std::log(scale) + 12.0 * std::log(10.0)) / rate;
  if (model.mode() == KernelMode::pure_power) return std::max(radius, 200.0);
  return std::max(radius, 1.0);
}

}  // namespace

double apply_P_pointwise(const KernelModel& model, const Profile& profile, double t) {
  const double vt = profile.value(t);
  const double s = model.params().s;
  const double a0 = model.a0();

  double reach = truncation_radius(model, profile);
  // Beyond `reach` the second difference is replaced by a constant whose
  // integral against K is known.
  double tail_difference = 0.0;
  if (const auto* g = profile.grid_data()) {
    const double out = std::max(t - g->nodes.front(), g->nodes.back() - t);
    if (g->far_field && out <= reach) {
      reach = out;
      tail_difference = 2.0 * (*g->far_field - vt);
    }
  } else if (const auto* p = profile.periodic_data()) {
    // Mean of -4 sum a_m cos(k_m t) sin^2(k_m xi / 2) over xi.
    tail_difference = -2.0 * (vt - p->coeffs.front());
  }

  const auto integrand = [&](double xi) {
    if (xi < 1e-30) return 0.0;
    return profile.second_difference(t, xi) * model(xi);
  };

  const double scale = profile.feature_scale();
  const double first = std::min(0.5 * scale, reach);
  double sum = quad::tanh_sinh(
      [&](double xi) {
        // D ~ v''(t) xi^2 near 0; guard against inf * 0.
        if (xi < 1e-30) return 0.0;
        if (xi < 1e-12) return profile.derivative(t, 2) * a0 * std::pow(xi, 1.0 - 2.0 * s);
        return integrand(xi);
      },
      0.0, first, 1e-12);

  std::vector<double> cuts = profile.breakpoints(t, first, reach);
  const double width = std::min(scale, 1.0);
  std::vector<double> edges{first};
  std::size_t next = 0;
  while (edges.back() < reach) {
    double right = std::min(edges.back() + width, reach);
    while (next < cuts.size() && cuts[next] <= edges.back()) ++next;
    if (next < cuts.size() && cuts[next] < right) right = cuts[next];
    edges.push_back(right);
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    sum += quad::adaptive(integrand, edges[i], edges[i + 1], 1e-9, nullptr,
                          1e-12 * (edges[i + 1] - edges[i]));

  if (tail_difference != 0.0) sum += tail_difference * model.tail_integral(reach);
  return -sum;
}

double equation_residual(const KernelModel& model, const Profile& profile, double t) {
  const double v = profile.value(t);
  if (!(v > 0.0))
    throw Error(ErrorKind::positivity, "equation_residual: v(t) <= 0");
  return apply_P_pointwise(model, profile, t) + v - std::pow(v, model.params().p);
}

}  // namespace fylab
