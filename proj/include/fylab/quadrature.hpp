#pragma once

#include <functional>
#include <span>

namespace fylab::quad {

using Integrand = std::function<double(double)>;

/// Fixed Gauss-Legendre rule on [a, b]. order is one of 4, 8, 16, 32.
double gauss_legendre(const Integrand& f, double a, double b, int order = 16);

/// Nodes and weights of the 16-point rule on [-1, 1].
std::span<const double> gl16_nodes();
std::span<const double> gl16_weights();

/// Adaptive Gauss-Kronrod (21 point) on a finite interval. A panel is
/// accepted once its error estimate is below max(abs_tol share, rel_tol *
/// |panel value|), so integrals that cancel to ~0 terminate.
double adaptive(const Integrand& f, double a, double b, double rel_tol = 1e-11,
                double* error = nullptr, double abs_tol = 0.0);

/// Double-exponential rule for integrands with an integrable endpoint
/// singularity; f must tolerate arguments arbitrarily close to a and b.
double tanh_sinh(const Integrand& f, double a, double b, double rel_tol = 1e-12);

/// Composite Gauss-Legendre on panels that shrink geometrically (ratio 1/2)
/// towards a, down to a + (b - a) * min_fraction. Suited to integrands that
/// behave like a power of (x - a).
double graded(const Integrand& f, double a, double b, double min_fraction,
              int order = 16);

}  // namespace fylab::quad
