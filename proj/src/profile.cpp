#include "fylab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fylab/error.hpp"

namespace fylab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> natural_spline_second(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = x[i] - x[i - 1];
    const double hr = x[i + 1] - x[i];
    diag[i] = 2.0 * (hl + hr);
    upper[i] = hr;
    rhs[i] = 6.0 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
  }
  // Thomas sweep on rows 1..n-2; the lower coefficient of row i is h_{i-1}.
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = x[i] - x[i - 1];
    const double f = lower / diag[i - 1];
    diag[i] -= f * upper[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    if (i == 1) break;
  }
  return m;
}

struct Piece {
  std::size_t i;
  bool inside;
};

// Piece index i with nodes[i] <= t < nodes[i+1] (last piece closed).
Piece locate(const GridData& g, double t) {
  const auto& x = g.nodes;
  if (t < x.front() || t > x.back()) return {0, false};
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  i = (i == 0) ? 0 : i - 1;
  if (i >= x.size() - 1) i = x.size() - 2;
  return {i, true};
}

double far_value(const GridData& g, double t) {
  if (!g.far_field)
    throw Error(ErrorKind::extrapolation,
                "profile: t = " + std::to_string(t) +
                    " lies outside the grid and no far-field value is set");
  return *g.far_field;
}

double spline_eval(const GridData& g, std::size_t i, double t, int order) {
  const double xl = g.nodes[i];
  const double xr = g.nodes[i + 1];
  const double h = xr - xl;
  const double a = (xr - t) / h;
  const double b = (t - xl) / h;
  const double ml = g.second[i];
  const double mr = g.second[i + 1];
  const double yl = g.values[i];
  const double yr = g.values[i + 1];
  switch (order) {
    case 0:
      return a * yl + b * yr + ((a * a * a - a) * ml + (b * b * b - b) * mr) * h * h / 6.0;
    case 1:
      return (yr - yl) / h - (3.0 * a * a - 1.0) / 6.0 * h * ml +
             (3.0 * b * b - 1.0) / 6.0 * h * mr;
    case 2:
      return a * ml + b * mr;
    default:
      return (mr - ml) / h;
  }
}

// Rotating (cos, sin) pairs avoid one libm call per mode.
template <typename F>
void for_each_mode(const PeriodicData& d, double angle, F&& f) {
  const double c1 = std::cos(angle);
  const double s1 = std::sin(angle);
  double c = 1.0;
  double s = 0.0;
  for (std::size_t m = 0; m < d.coeffs.size(); ++m) {
    f(m, c, s);
    const double cn = c * c1 - s * s1;
    s = s * c1 + c * s1;
    c = cn;
  }
}

}  // namespace

Profile Profile::periodic(double period, std::vector<double> coeffs,
                          double shift) {
  if (!(period > 0.0))
    throw Error(ErrorKind::domain, "Profile::periodic: period must be > 0");
  if (coeffs.empty()) coeffs.push_back(0.0);
  return Profile(PeriodicData{period, std::move(coeffs), shift});
}

Profile Profile::grid(std::vector<double> nodes, std::vector<double> values,
                      std::optional<double> far_field) {
  if (nodes.size() != values.size() || nodes.size() < 2)
    throw Error(ErrorKind::domain,
                "Profile::grid: need matching node/value arrays with >= 2 entries");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1]))
      throw Error(ErrorKind::domain, "Profile::grid: nodes must be strictly increasing");
  GridData g;
  g.second = natural_spline_second(nodes, values);
  g.nodes = std::move(nodes);
  g.values = std::move(values);
  g.far_field = far_field;
  return Profile(std::move(g));
}

Profile Profile::constant(double value) { return periodic(1.0, {value}); }

double Profile::value(double t) const {
  if (const auto* p = periodic_data()) {
    double sum = 0.0;
    for_each_mode(*p, kTwoPi * (t - p->shift) / p->period,
                  [&](std::size_t m, double c, double) { sum += p->coeffs[m] * c; });
    return sum;
  }
  const auto& g = *grid_data();
  const Piece piece = locate(g, t);
  if (!piece.inside) return far_value(g, t);
  return spline_eval(g, piece.i, t, 0);
}

double Profile::derivative(double t, int order) const {
  if (order < 1 || order > 3)
    throw Error(ErrorKind::domain, "Profile::derivative: order must be 1..3");
  if (const auto* p = periodic_data()) {
    const double k1 = kTwoPi / p->period;
    double sum = 0.0;
    for_each_mode(*p, k1 * (t - p->shift), [&](std::size_t m, double c, double s) {
      const double k = k1 * static_cast<double>(m);
      switch (order) {
        case 1: sum -= p->coeffs[m] * k * s; break;
        case 2: sum -= p->coeffs[m] * k * k * c; break;
        default: sum += p->coeffs[m] * k * k * k * s; break;
      }
    });
    return sum;
  }
  const auto& g = *grid_data();
  const Piece piece = locate(g, t);
  if (!piece.inside) {
    far_value(g, t);
    return 0.0;
  }
  return spline_eval(g, piece.i, t, order);
}

double Profile::second_difference(double t, double xi) const {
  if (const auto* p = periodic_data()) {
    const double k1 = kTwoPi / p->period;
    // cos(k(t+xi)) + cos(k(t-xi)) - 2 cos(kt) = -4 cos(kt) sin^2(k xi / 2)
    std::vector<double> half_sin(p->coeffs.size());
    for_each_mode(*p, 0.5 * k1 * xi,
                  [&](std::size_t m, double, double s) { half_sin[m] = s; });
    double sum = 0.0;
    for_each_mode(*p, k1 * (t - p->shift), [&](std::size_t m, double c, double) {
      sum += p->coeffs[m] * c * half_sin[m] * half_sin[m];
    });
    return -4.0 * sum;
  }
  const auto& g = *grid_data();
  const Piece piece = locate(g, t);
  if (piece.inside && t - xi >= g.nodes.front() && t + xi <= g.nodes.back()) {
    const std::size_t i = piece.i;
    const double hmin = std::min(g.nodes[i + 1] - g.nodes[i],
                                 i > 0 ? g.nodes[i] - g.nodes[i - 1]
                                       : std::numeric_limits<double>::infinity());
    if (xi <= 1e-3 * hmin) {
      const double v2 = spline_eval(g, i, t, 2);
      double jump = 0.0;
      if (t == g.nodes[i] && i > 0)
        jump = spline_eval(g, i, t, 3) - spline_eval(g, i - 1, t, 3);
      return v2 * xi * xi + jump / 6.0 * xi * xi * xi;
    }
  }
  return value(t + xi) + value(t - xi) - 2.0 * value(t);
}

double Profile::feature_scale() const {
  if (const auto* p = periodic_data()) {
    double amax = 0.0;
    for (std::size_t m = 1; m < p->coeffs.size(); ++m)
      amax = std::max(amax, std::abs(p->coeffs[m]));
    std::size_t eff = 1;
    for (std::size_t m = 1; m < p->coeffs.size(); ++m)
      if (std::abs(p->coeffs[m]) > 1e-10 * amax) eff = m;
    return p->period / (4.0 * std::max<std::size_t>(2, eff));
  }
  const auto& x = grid_data()->nodes;
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) h = std::min(h, x[i] - x[i - 1]);
  return h;
}

std::vector<double> Profile::breakpoints(double t, double lo, double hi) const {
  std::vector<double> out;
  const auto* g = grid_data();
  if (!g) return out;
  for (double x : g->nodes) {
    const double d = std::abs(x - t);
    if (d > lo && d < hi) out.push_back(d);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-14 * (1.0 + b); }),
            out.end());
  return out;
}

double Profile::sup_norm() const {
  if (const auto* p = periodic_data()) {
    double sum = 0.0;
    for (double a : p->coeffs) sum += std::abs(a);
    return sum;
  }
  const auto& g = *grid_data();
  double m = 0.0;
  for (double v : g.values) m = std::max(m, std::abs(v));
  if (g.far_field) m = std::max(m, std::abs(*g.far_field));
  return m;
}

std::pair<double, double> Profile::range_on(double a, double b, int samples) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i <= samples; ++i) {
    const double v = value(a + (b - a) * i / samples);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

bool Profile::is_constant(double tol) const {
  if (const auto* p = periodic_data()) {
    for (std::size_t m = 1; m < p->coeffs.size(); ++m)
      if (std::abs(p->coeffs[m]) > tol) return false;
    return true;
  }
  const auto& g = *grid_data();
  for (double v : g.values)
    if (std::abs(v - g.values.front()) > tol) return false;
  return !g.far_field || std::abs(*g.far_field - g.values.front()) <= tol;
}

Profile Profile::translated(double a) const {
  if (const auto* p = periodic_data())
    return periodic(p->period, p->coeffs, p->shift + a);
  GridData g = *grid_data();
  for (double& x : g.nodes) x += a;
  return Profile(std::move(g));
}

}  // namespace fylab
