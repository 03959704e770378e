#include "fylab/calibrate.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fylab/error.hpp"
#include "fylab/pointwise.hpp"
#include "fylab/quadrature.hpp"

namespace fylab {

namespace {

// GL16 on [a, b] split into `parts` equal panels.
template <typename F>
double panels(F&& f, double a, double b, int parts) {
  double sum = 0.0;
  const double w = (b - a) / parts;
  for (int i = 0; i < parts; ++i)
    sum += quad::gauss_legendre(f, a + i * w, a + (i + 1) * w, 16);
  return sum;
}

// Sphere integral in terms of d = |r - rho| and the product r * rho, so that
// nearly coincident radii keep full precision.
double angular(const ProblemParams& params, double d, double r_rho, double r_plus_rho,
               int refinement) {
  const int n = params.n;
  const double s = params.s;
  if (n == 1)
    return std::pow(d, -1.0 - 2.0 * s) + std::pow(r_plus_rho, -1.0 - 2.0 * s);
  const double expo = -0.5 * (n + 2.0 * s);
  const auto f = [&](double theta) {
    const double h = std::sin(0.5 * theta);
    return std::pow(std::sin(theta), n - 2) * std::pow(d * d + 4.0 * r_rho * h * h, expo);
  };
  // The integrand peaks in a layer of width ~ d / sqrt(r rho) around theta = 0.
  const double layer = d / std::sqrt(r_rho) / (4.0 * refinement);
  double sum = 0.0;
  double right = std::numbers::pi;
  while (0.5 * right > layer && right > 1e-300) {
    sum += panels(f, 0.5 * right, right, refinement);
    right *= 0.5;
  }
  sum += panels(f, 0.0, right, refinement);
  return sphere_area(n - 1) * sum;
}

}  // namespace

RadialOracle::RadialOracle(const ProblemParams& params, int refinement)
    : params_(params), refinement_(refinement) {
  if (refinement < 1)
    throw Error(ErrorKind::domain, "RadialOracle: refinement must be >= 1");
  const auto g_hat = [&](double sigma) {
    // r = e^{-sigma/2}, rho = e^{sigma/2}.
    return params_.c_ns * angular(params_, 2.0 * std::sinh(0.5 * sigma), 1.0,
                                  2.0 * std::cosh(0.5 * sigma), refinement_);
  };
  const auto x = quad::gl16_nodes();
  const auto w = quad::gl16_weights();
  const auto add = [&](double a, double b) {
    const double parts = refinement_;
    const double step = (b - a) / parts;
    for (int p = 0; p < refinement_; ++p) {
      const double lo = a + p * step;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double sigma = lo + 0.5 * step * (x[i] + 1.0);
        sigma_nodes_.push_back(sigma);
        sigma_weights_.push_back(0.5 * step * w[i] * g_hat(sigma));
      }
    }
  };
  const double target = 1e-7 / (refinement_ * refinement_);
  double right = 1.0;
  while (right > target) {
    add(0.5 * right, right);
    right *= 0.5;
  }
  sigma_min_ = right;
  singular_coeff_ = g_hat(sigma_min_) * std::pow(sigma_min_, 1.0 + 2.0 * params_.s);
  sigma_max_ = std::max(20.0, 15.0 / params_.s) * (refinement_ > 1 ? 1.5 : 1.0);
  const double width = 0.25 / refinement_;
  for (double a = 1.0; a < sigma_max_ - 1e-12; a += width) add(a, a + width);
}

double RadialOracle::sphere_integral(double r, double rho) const {
  if (!(r > 0.0 && rho > 0.0) || r == rho)
    throw Error(ErrorKind::domain, "sphere_integral: need distinct positive radii");
  return angular(params_, std::abs(r - rho), r * rho, r + rho, refinement_);
}

double RadialOracle::reduced(const Profile& v, double t) const {
  const double s = params_.s;
  const double beta = 0.5 * (params_.n - 2.0 * s);
  const double vt = v.value(t);
  double sum = 0.0;
  for (std::size_t j = 0; j < sigma_nodes_.size(); ++j) {
    const double sigma = sigma_nodes_[j];
    const double sh = std::sinh(0.5 * beta * sigma);
    // 2 cosh(beta sigma) v(t) - v(t + sigma) - v(t - sigma)
    sum += sigma_weights_[j] * (4.0 * sh * sh * vt - v.second_difference(t, sigma));
  }
  sum += singular_coeff_ * (beta * beta * vt - v.derivative(t, 2)) *
         std::pow(sigma_min_, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  sum += params_.c_ns * sphere_area(params_.n) * vt * std::exp(-2.0 * s * sigma_max_) /
         (2.0 * s);
  return sum;
}

double RadialOracle::power_law(double amplitude, double r) const {
  const int n = params_.n;
  const double s = params_.s;
  const double beta = 0.5 * (n - 2.0 * s);
  const double ur = amplitude * std::pow(r, -beta);
  // u(r) - u(r (1 + x)) without cancellation.
  const auto diff = [&](double x) { return -ur * std::expm1(-beta * std::log1p(x)); };
  // rho = r + offset; the offset is passed exactly so that the two sides of
  // the symmetric pair cancel without rounding noise.
  const auto f = [&](double offset) {
    const double rho = r + offset;
    return std::pow(rho, n - 1) * diff(offset / r) *
           angular(params_, std::abs(offset), r * rho, r + rho, refinement_);
  };
  const auto pair = [&](double delta) {
    if (delta <= 0.0) return 0.0;
    if (delta >= r) return f(delta);
    return f(-delta) + f(delta);
  };
  double sum = quad::tanh_sinh(pair, 0.5 * r, r, 1e-10);
  const double delta_min = 1e-10 * r / (refinement_ * refinement_);
  for (double right = 0.5 * r; right > delta_min; right *= 0.5)
    sum += panels(pair, 0.5 * right, right, refinement_);
  // rho = 2 r e^y beyond the near zone.
  const double y_max = 20.0 / s;
  const auto far = [&](double y) {
    const double rho = 2.0 * r * std::exp(y);
    return rho * f(rho - r);
  };
  for (double a = 0.0; a < y_max - 1e-12; a += 1.0) sum += panels(far, a, a + 1.0, refinement_);
  const double rho_max = 2.0 * r * std::exp(y_max);
  sum += ur * sphere_area(n) * std::pow(rho_max, -2.0 * s) / (2.0 * s);
  return params_.c_ns * sum;
}

double bump(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

Profile bump_profile(double amplitude, double width, double center, int nodes_per_width) {
  const double h = width / nodes_per_width;
  const int half = 2 * nodes_per_width;
  std::vector<double> nodes, values;
  for (int i = -half; i <= half; ++i) {
    const double t = center + i * h;
    nodes.push_back(t);
    values.push_back(1.0 + amplitude * bump((t - center) / width));
  }
  return Profile::grid(std::move(nodes), std::move(values), 1.0);
}

CalibrationResult calibrate_gamma(const ProblemParams& params, int refinement) {
  const ProblemParams unit = with_gamma(params, 1.0, GammaSource::explicit_value);
  const KernelModel model(unit);
  const RadialOracle oracle(unit, refinement);
  CalibrationResult out;
  out.refinement = refinement;
  out.closed_form = gamma_closed_form(params.n, params.s);

  for (double amplitude : {0.3, -0.25}) {
    for (double width : {0.6, 1.2}) {
      const Profile v = bump_profile(amplitude, width);
      for (double t : {0.0, 0.3 * width}) {
        CalibrationPoint pt;
        pt.amplitude = amplitude;
        pt.width = width;
        pt.t = t;
        pt.v = v.value(t);
        pt.p1v = apply_P_pointwise(model, v, t);
        pt.oracle = oracle.reduced(v, t) / params.kappa_ns;
        pt.gamma_point = (pt.oracle - pt.v) / pt.p1v;
        out.battery.push_back(pt);
      }
    }
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& pt : out.battery) {
    num += pt.p1v * (pt.oracle - pt.v);
    den += pt.p1v * pt.p1v;
  }
  out.gamma = num / den;
  for (auto& pt : out.battery) {
    const double nonlocal = pt.oracle - pt.v;
    pt.residual = std::abs(out.gamma * pt.p1v - nonlocal) / std::abs(nonlocal);
    out.max_residual = std::max(out.max_residual, pt.residual);
    out.spread = std::max(out.spread, std::abs(pt.gamma_point / out.gamma - 1.0));
  }

  const double amplitude = std::pow(params.kappa_ns, 1.0 / (params.p - 1.0));
  const double beta = 0.5 * (params.n - 2.0 * params.s);
  for (double r : {0.1, 0.5, 1.0, 2.0, 10.0}) {
    ConstantCheck c;
    c.r = r;
    c.lhs = oracle.power_law(amplitude, r);
    c.rhs = std::pow(amplitude * std::pow(r, -beta), params.p);
    c.rel_error = std::abs(c.lhs / c.rhs - 1.0);
    out.constant_checks.push_back(c);
  }

  if (!(out.spread <= 0.05))
    throw Error(ErrorKind::calibration,
                "calibrate_gamma: spread of per-point ratios " + std::to_string(out.spread) +
                    " exceeds 5%; the oracle quadrature is inadequate");
  return out;
}

}  // namespace fylab
