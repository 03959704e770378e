#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fylab/grid_form.hpp"
#include "fylab/kernel.hpp"
#include "fylab/profile.hpp"

namespace fylab {

enum class IntersectionKind { constant_one, crosses, violation };

struct IntersectionResult {
  IntersectionKind kind = IntersectionKind::constant_one;
  std::vector<double> crossings;  ///< zeros of v - 1 on the scanned range
  int side = 0;                   ///< for a violation: +1 above 1, -1 below
  double sup_deviation = 0.0;     ///< sup |v - 1| on the scanned range
  double range_a = 0.0;
  double range_b = 0.0;
};

/// Classifies v - 1 over one period (periodic profiles) or over the node
/// range (grid profiles). A nonconstant profile that stays on one side of 1
/// is a violation. Throws Error(resolution) if doubling the sampling finds
/// a different number of crossings.
IntersectionResult check_intersection(const Profile& profile, double constant_tol = 1e-8,
                                      int samples = 4096);

struct Window {
  double a = 0.0;
  double b = 0.0;
  double max_v = 0.0;
  double min_v = 0.0;
};

struct OscillationCertificate {
  double M_osc = 0.0;
  double epsilon = 0.0;
  double horizon = 0.0;
  int windows_checked = 0;
  std::vector<Window> witness_windows;  ///< a sample of windows plus the tightest one
};

struct OscillationResult {
  bool found = false;
  OscillationCertificate certificate;
  /// When not found: the window with the smallest margin at the most
  /// generous (M, epsilon) pair tried.
  Window failure;
  double M_tried = 0.0;
  double epsilon_tried = 0.0;
};

struct OscillationOptions {
  double sample_step = 0.0;  ///< 0: feature scale / 16
  int epsilon_levels = 6;    ///< epsilon0, epsilon0 / 2, ...
  int M_levels = 16;         ///< M0 * 1.25^k
};

/// Searches an (M, epsilon) pair of the Oscillation Condition on
/// [-horizon, horizon]: epsilon from half the smaller excursion downward,
/// M from one period (periodic) or horizon / 16 (grid) upward. Windows are
/// checked on samples so that every real window of length M contains a
/// checked one; the test is conservative.
OscillationResult detect_oscillation(const Profile& profile, double horizon,
                                     const OscillationOptions& options = {});

struct NegativeDirectionOptions {
  double h = 1.0 / 160.0;     ///< target grid step of the form (adjusted to divide |I|)
  bool reduced_check = true;  ///< evaluate the J+ x J- double integral
  bool mollify = true;        ///< smooth the corners of eta over width h
};

/// eta = |v'| on [x0, x1], 0 elsewhere, built on I = [a, b].
struct NegativeDirection {
  double a = 0.0;
  double b = 0.0;
  double M_osc = 0.0;
  double epsilon = 0.0;
  std::vector<double> crossings;        ///< y_1..y_5 with v(y_i) = 1
  double x0 = 0.0;
  double x1 = 0.0;
  std::vector<double> critical_points;  ///< zeros of v' in [x0, x1], ascending
  double root_residual = 0.0;           ///< max(|v'(x0)|, |v'(x1)|)
  double positive_variation = 0.0;      ///< integral of (v')^+ over [x0, x1]
  double negative_variation = 0.0;      ///< integral of (v')^- over [x0, x1]

  double h = 0.0;
  std::vector<double> nodes;
  Eigen::VectorXd eta;  ///< nodal values on the interior nodes of I
  double Q_value = 0.0;
  /// Q_v[eta] from the derivative of the equation: 4 times the double
  /// integral over J+ x J- of K(t - tau) v'(t) v'(tau), plus the
  /// interaction of J with its complement (exterior_term). NaN if skipped.
  double Q_reduced = 0.0;
  double Q_reduced_inner = 0.0;  ///< the J+ x J- part alone
  double exterior_term = 0.0;    ///< double integral over J x (R \ J) of K v'(t) v'(tau)
  double reduced_rel_diff = 0.0;  ///< |Q_value - Q_reduced| / |Q_reduced|
  double Q_mollified = 0.0;  ///< NaN if skipped
  double mollified_rel_change = 0.0;
  double certified_bound = 0.0;  ///< -4 K(10 M_osc) epsilon^2
  double sup_norm = 0.0;
  double l1_norm = 0.0;
  double delta = 0.0;  ///< min(-Q_value, 1 / sup_norm), 0 if Q_value >= 0

  bool step1_ok() const {
    return positive_variation > 2.0 * epsilon && negative_variation > 2.0 * epsilon;
  }
  bool step2_ok() const { return certified_bound < 0.0 && Q_value <= certified_bound; }
};

/// Follows the construction on I: five equal parts, crossings y_i, critical
/// points x0 (first after y_1) and x1 (last before y_5) by bisection on v'
/// sampled at h/4, eta, and Q_v[eta] from the Galerkin form. Throws
/// Error(domain) if |I| < 5 M_osc and Error(certificate) if a part has no
/// crossing or no critical point lies where the construction needs one.
NegativeDirection build_negative_direction(const KernelModel& model, const Profile& profile,
                                           const OscillationCertificate& cert, double a,
                                           double b, const NegativeDirectionOptions& options = {});

enum class Verdict { negative_definite, inconclusive };

struct SpacingTrial {
  double d = 0.0;              ///< requested gap between supports
  double d_actual = 0.0;       ///< realized gap (>= d)
  double max_offdiag = 0.0;
  double offdiag_bound = 0.0;  ///< K(d_actual) times the largest product of L1 norms
  double max_eigenvalue = 0.0;
  bool negative_definite = false;
};

struct IndexReport {
  int m = 0;
  bool constant_profile = false;
  double d = 0.0;           ///< gap of the reported family
  double d_actual = 0.0;
  double support_width = 0.0;
  std::vector<double> centers;  ///< centers of the family members
  Eigen::MatrixXd gram;
  double max_offdiag = 0.0;
  double offdiag_bound = 0.0;
  Eigen::VectorXd gram_eigenvalues;
  double max_eigenvalue = 0.0;
  double max_diagonal = 0.0;
  Verdict verdict = Verdict::inconclusive;
  int implied_lower_bound = 0;
  double template_lambda1 = 0.0;  ///< v = 1: lambda1 of the eigenfunction template
  double template_M = 0.0;        ///< v = 1: half-width of the template window
  double h = 0.0;
  std::vector<SpacingTrial> trials;
};

struct FamilyOptions {
  double h = 1.0 / 40.0;  ///< eigenfunction template grid; off-diagonal sampling step
  bool search = true;            ///< double d until negative definite
  double d_max_factor = 1e3;     ///< give up beyond d_max_factor * scale
};

/// m translated copies of a negative direction with supports separated by
/// at least d, and the Gram matrix of the bilinear form A_v on them.
/// For v = 1 the template is the first eigenfunction on the smallest
/// [-M, M] (M doubling from 2) with lambda1(M) < p - 1; otherwise it is
/// `direction`, and for periodic v the spacing is rounded up so that the
/// copies are exact translates by whole periods. Non-periodic profiles get a
/// fresh direction on every interval (this needs `cert`). With search on,
/// d doubles from the given value until the verdict is negative definite or
/// d exceeds d_max_factor times the scale (M_osc or the template width).
IndexReport translated_family_bound(const KernelModel& model, const Profile& profile, int m,
                                    double d, const NegativeDirection* direction = nullptr,
                                    const OscillationCertificate* cert = nullptr,
                                    const FamilyOptions& options = {});

/// Morse count on the smallest window that covers all supports of the
/// family, with a step no finer than needed to keep at most max_nodes
/// interior nodes.
int covering_morse_count(const KernelModel& model, const Profile& profile,
                         const IndexReport& report, int max_nodes = 1200);

}  // namespace fylab
