#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fylab/kernel.hpp"
#include "fylab/profile.hpp"

namespace fylab {

/// Hat-function discretization of the quadratic form
///   Q_v[phi] = 1/2 double-integral (phi(t) - phi(tau))^2 K(t - tau)
///              + integral (1 - p v^{p-1}) phi^2
/// on [center - M, center + M] with uniform step h and zero boundary values.
///
/// On a uniform grid the stiffness matrix is Toeplitz, S_ij = sigma(|i - j|),
/// so only the generating sequence is stored. The mass and potential
/// matrices are tridiagonal.
struct GridForm {
  ProblemParams params;
  KernelMode kernel_mode = KernelMode::full;
  double center = 0.0;
  double M = 0.0;
  double h = 0.0;
  std::vector<double> nodes;  ///< interior nodes
  std::vector<double> sigma;  ///< S_ij = sigma[|i - j|]
  bool has_potential = false;
  std::vector<double> potential_diag;
  std::vector<double> potential_off;  ///< V(i, i+1)
  double quadrature_tol = 1e-12;

  int size() const { return static_cast<int>(nodes.size()); }
  Eigen::MatrixXd stiffness() const;
  Eigen::MatrixXd mass() const;
  /// Zero matrix when has_potential is false.
  Eigen::MatrixXd potential() const;

  /// phi^T S phi in O(N^2) without forming S.
  double stiffness_form(const Eigen::VectorXd& phi) const;
  double mass_form(const Eigen::VectorXd& phi) const;
  double potential_form(const Eigen::VectorXd& phi) const;
  /// phi^T (S + V) phi.
  double quadratic_form(const Eigen::VectorXd& phi) const;
  /// phi^T (S + V) psi.
  double bilinear_form(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi) const;
};

/// sigma(k) for k = 0..count-1 on a grid of step h.
std::vector<double> stiffness_sequence(const KernelModel& model, double h, int count);

/// Stiffness and mass only (the form T of the first-eigenvalue problem).
GridForm assemble_stiffness(const KernelModel& model, double M, double h,
                            double center = 0.0);

/// Full form Q_v including the potential built from the profile.
GridForm assemble_grid_form(const KernelModel& model, const Profile& profile, double M,
                            double h, double center = 0.0);

/// Adds (or replaces) the potential built from the profile.
void add_potential(GridForm& form, const Profile& profile);

/// The same grid moved by shift; the stiffness sequence is reused and the
/// potential dropped.
GridForm translated(const GridForm& form, double shift);

/// Samples f at the interior nodes.
template <typename F>
Eigen::VectorXd sample_nodes(const GridForm& form, F&& f) {
  Eigen::VectorXd out(form.size());
  for (int i = 0; i < form.size(); ++i) out[i] = f(form.nodes[i]);
  return out;
}

/// Writes "i,j,value" triplets of S, B and V (one matrix per file with the
/// given suffixes) plus a JSON header. Entries below drop_tol in magnitude
/// are omitted.
void export_grid_form(const GridForm& form, const std::string& prefix,
                      double drop_tol = 0.0);

}  // namespace fylab
