#include "fylab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "fylab/error.hpp"

namespace fylab {

namespace {

Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                        const char* where) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      a, b, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::numerical,
                std::string(where) + ": generalized eigensolver did not converge (n = " +
                    std::to_string(a.rows()) + ")");
  return solver.eigenvalues();
}

}  // namespace

EigenResult lambda1(const GridForm& form) {
  const int n = form.size();
  if (n < 64)
    throw Error(ErrorKind::resolution,
                "lambda1: " + std::to_string(n) + " interior nodes, need >= 64");
  const Eigen::MatrixXd s = form.stiffness();
  const Eigen::MatrixXd b = form.mass();
  const Eigen::VectorXd eig = generalized_eigenvalues(s, b, "lambda1");
  const double lambda = eig[0];

  // Inverse iteration with a shift just below the eigenvalue.
  const double gap = eig.size() > 1 ? eig[1] - eig[0] : std::abs(lambda);
  const double shift = lambda - 1e-3 * gap;
  const Eigen::LDLT<Eigen::MatrixXd> solve(s - shift * b);
  if (solve.info() != Eigen::Success)
    throw Error(ErrorKind::numerical, "lambda1: shifted factorization failed");
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  std::vector<double> trace;
  for (int it = 0; it < 8; ++it) {
    Eigen::VectorXd y = solve.solve(b * x);
    y /= std::sqrt(y.dot(b * y));
    const double change = std::min((y - x).norm(), (y + x).norm());
    x = y;
    trace.push_back(change);
    if (change < 1e-13 * std::sqrt(static_cast<double>(n))) break;
  }
  // Sign: nonnegative representative; ties go to a positive max-magnitude entry.
  const double total = x.sum();
  if (total < 0.0) {
    x = -x;
  } else if (total == 0.0) {
    Eigen::Index k;
    x.cwiseAbs().maxCoeff(&k);
    if (x[k] < 0.0) x = -x;
  }

  EigenResult out;
  out.lambda1 = lambda;
  out.phi1 = x;
  out.nodes = form.nodes;
  out.M = form.M;
  out.h = form.h;
  out.kernel_mode = form.kernel_mode;
  out.residual = (s * x - lambda * (b * x)).norm() / x.norm();
  out.min_interior = x.minCoeff();
  if (!(out.residual <= 1e-6 * std::max(1.0, std::abs(lambda)) * std::sqrt(double(n)))) {
    std::string msg = "lambda1: inverse iteration did not converge; step changes:";
    for (double c : trace) msg += " " + std::to_string(c);
    throw Error(ErrorKind::numerical, msg);
  }
  return out;
}

EigenResult lambda1(const KernelModel& model, double M, double h, double center) {
  return lambda1(assemble_stiffness(model, M, h, center));
}

MorseCount morse_count(const GridForm& form) {
  const Eigen::MatrixXd a = form.stiffness() + form.potential();
  const Eigen::VectorXd eig = generalized_eigenvalues(a, form.mass(), "morse_count");
  MorseCount out;
  out.M = form.M;
  out.center = form.center;
  out.h = form.h;
  out.tol_negative = 1e-8 * a.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < eig.size(); ++i)
    if (eig[i] < -out.tol_negative) out.negative_eigenvalues.push_back(eig[i]);
  out.count = static_cast<int>(out.negative_eigenvalues.size());
  return out;
}

MorseCount morse_count(const KernelModel& model, const Profile& profile, double M, double h,
                       double center) {
  return morse_count(assemble_grid_form(model, profile, M, h, center));
}

double rayleigh_quotient(const GridForm& form, const Eigen::VectorXd& phi,
                         bool include_potential) {
  if (phi.size() != form.size())
    throw Error(ErrorKind::domain, "rayleigh_quotient: vector size does not match the grid");
  const double denom = form.mass_form(phi);
  if (!(denom > 0.0)) throw Error(ErrorKind::domain, "rayleigh_quotient: phi is zero");
  const double num =
      include_potential ? form.quadratic_form(phi) : form.stiffness_form(phi);
  return num / denom;
}

}  // namespace fylab
