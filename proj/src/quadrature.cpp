#include "fylab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <string>

#include "fylab/error.hpp"

namespace fylab::quad {

namespace bq = boost::math::quadrature;

namespace {

template <unsigned N>
double gl_fixed(const Integrand& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const auto& x = bq::gauss<double, N>::abscissa();
  const auto& w = bq::gauss<double, N>::weights();
  // Boost stores the non-negative half of a symmetric rule.
  double sum = 0.0;
  std::size_t start = 0;
  if (N % 2 == 1) {
    sum += w[0] * f(mid);
    start = 1;
  }
  for (std::size_t i = start; i < x.size(); ++i) {
    const double dx = half * x[i];
    sum += w[i] * (f(mid - dx) + f(mid + dx));
  }
  return sum * half;
}

struct Gl16Table {
  std::array<double, 16> nodes{};
  std::array<double, 16> weights{};
  Gl16Table() {
    const auto& x = bq::gauss<double, 16>::abscissa();
    const auto& w = bq::gauss<double, 16>::weights();
    for (std::size_t i = 0; i < 8; ++i) {
      nodes[7 - i] = -x[i];
      weights[7 - i] = w[i];
      nodes[8 + i] = x[i];
      weights[8 + i] = w[i];
    }
  }
};

const Gl16Table& gl16_table() {
  static const Gl16Table table;
  return table;
}

}  // namespace

double gauss_legendre(const Integrand& f, double a, double b, int order) {
  switch (order) {
    case 4: return gl_fixed<4>(f, a, b);
    case 8: return gl_fixed<8>(f, a, b);
    case 16: return gl_fixed<16>(f, a, b);
    case 32: return gl_fixed<32>(f, a, b);
    default:
      throw Error(ErrorKind::domain,
                  "gauss_legendre: unsupported order " + std::to_string(order));
  }
}

std::span<const double> gl16_nodes() { return gl16_table().nodes; }
std::span<const double> gl16_weights() { return gl16_table().weights; }

namespace {

double adaptive_step(const Integrand& f, double a, double b, double rel_tol,
                     double abs_tol, int depth, double* error) {
  double err = 0.0;
  const double value = bq::gauss_kronrod<double, 21>::integrate(f, a, b, 0, 0.0, &err);
  if (depth == 0 || err <= std::max(abs_tol, rel_tol * std::abs(value))) {
    *error += err;
    return value;
  }
  const double mid = 0.5 * (a + b);
  return adaptive_step(f, a, mid, rel_tol, 0.5 * abs_tol, depth - 1, error) +
         adaptive_step(f, mid, b, rel_tol, 0.5 * abs_tol, depth - 1, error);
}

}  // namespace

double adaptive(const Integrand& f, double a, double b, double rel_tol,
                double* error, double abs_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  const double value = adaptive_step(f, a, b, rel_tol, abs_tol, 20, &err);
  if (error) *error = err;
  return value;
}

double tanh_sinh(const Integrand& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  static thread_local bq::tanh_sinh<double> integrator(12);
  return integrator.integrate(f, a, b, rel_tol);
}

double graded(const Integrand& f, double a, double b, double min_fraction,
              int order) {
  double sum = 0.0;
  double right = b;
  double width = 0.5 * (b - a);
  const double stop = (b - a) * min_fraction;
  while (width > stop) {
    sum += gauss_legendre(f, right - width, right, order);
    right -= width;
    width *= 0.5;
  }
  sum += gauss_legendre(f, a, right, order);
  return sum;
}

}  // namespace fylab::quad
