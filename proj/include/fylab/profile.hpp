#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace fylab {

/// v(t) = sum_m coeffs[m] cos(2 pi m (t - shift) / period).
struct PeriodicData {
  double period = 1.0;
  std::vector<double> coeffs{1.0};
  double shift = 0.0;
};

/// Natural cubic spline through (nodes, values). Outside the node range the
/// profile equals far_field; without a far-field value evaluation there is an
/// extrapolation error.
struct GridData {
  std::vector<double> nodes;
  std::vector<double> values;
  std::vector<double> second;  ///< spline second derivatives at the nodes
  std::optional<double> far_field;
};

/// A candidate solution of the reduced equation (or any test function of t).
class Profile {
 public:
  static Profile periodic(double period, std::vector<double> coeffs,
                          double shift = 0.0);
  static Profile grid(std::vector<double> nodes, std::vector<double> values,
                      std::optional<double> far_field);
  static Profile constant(double value = 1.0);

  double value(double t) const;
  /// order = 1, 2 or 3. For grid profiles the third derivative is the
  /// right-sided one.
  double derivative(double t, int order = 1) const;
  /// v(t + xi) + v(t - xi) - 2 v(t), free of cancellation for small xi.
  double second_difference(double t, double xi) const;

  /// Shortest length scale on which the profile changes character
  /// (node spacing or a fraction of the period).
  double feature_scale() const;
  /// Distances xi in (lo, hi) at which t +- xi crosses a spline node.
  std::vector<double> breakpoints(double t, double lo, double hi) const;

  double sup_norm() const;
  std::pair<double, double> range_on(double a, double b, int samples) const;

  bool is_periodic() const { return std::holds_alternative<PeriodicData>(data_); }
  bool is_constant(double tol = 0.0) const;
  const PeriodicData* periodic_data() const { return std::get_if<PeriodicData>(&data_); }
  const GridData* grid_data() const { return std::get_if<GridData>(&data_); }

  /// t -> v(t - a).
  Profile translated(double a) const;

 private:
  explicit Profile(PeriodicData d) : data_(std::move(d)) {}
  explicit Profile(GridData d) : data_(std::move(d)) {}

  std::variant<PeriodicData, GridData> data_;
};

}  // namespace fylab
