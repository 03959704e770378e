#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fylab/grid_form.hpp"
#include "fylab/kernel.hpp"
#include "fylab/profile.hpp"

namespace fylab {

/// First eigenpair of T on [center - M, center + M].
struct EigenResult {
  double lambda1 = 0.0;
  Eigen::VectorXd phi1;  ///< nodal values, phi^T B phi = 1, nonnegative
  std::vector<double> nodes;
  double M = 0.0;
  double h = 0.0;
  KernelMode kernel_mode = KernelMode::full;
  double residual = 0.0;      ///< ||(S - lambda1 B) phi1|| / ||phi1||
  double min_interior = 0.0;  ///< min over interior nodes of phi1
};

struct MorseCount {
  double M = 0.0;
  double center = 0.0;
  double h = 0.0;
  int count = 0;
  std::vector<double> negative_eigenvalues;  ///< ascending
  double tol_negative = 0.0;
};

/// Smallest generalized eigenvalue of (S, B) with eigenvector. Requires at
/// least 64 interior nodes.
EigenResult lambda1(const KernelModel& model, double M, double h, double center = 0.0);
/// Same, on a form that has already been assembled (its potential is ignored).
EigenResult lambda1(const GridForm& form);

/// Generalized eigenvalues of (S + V, B) below -1e-8 ||S + V||_max.
MorseCount morse_count(const KernelModel& model, const Profile& profile, double M,
                       double h, double center = 0.0);
MorseCount morse_count(const GridForm& form);

/// phi^T (S [+ V]) phi / phi^T B phi. Throws Error(domain) for phi = 0.
double rayleigh_quotient(const GridForm& form, const Eigen::VectorXd& phi,
                         bool include_potential = true);

}  // namespace fylab
