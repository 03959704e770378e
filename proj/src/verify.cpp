#include "fylab/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "fylab/error.hpp"
#include "fylab/quadrature.hpp"
#include "fylab/spectral.hpp"

namespace fylab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

/// Root of f in [lo, hi] given f(lo) and f(hi) of opposite signs.
template <typename F>
double bisect(F&& f, double lo, double hi, int steps) {
  const int s_lo = sign_of(f(lo));
  for (int i = 0; i < steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    const int s = sign_of(f(mid));
    if (s == 0) return mid;
    (s == s_lo ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Zeros of f located from sign changes of samples at a + j (b - a) / n,
/// j = 0..n. Exact zeros at samples count once.
template <typename F>
std::vector<double> sampled_roots(F&& f, double a, double b, int n, int steps) {
  std::vector<double> roots;
  double t_prev = a;
  int s_prev = sign_of(f(a));
  if (s_prev == 0) roots.push_back(a);
  for (int j = 1; j <= n; ++j) {
    const double t = a + (b - a) * j / n;
    const int s = sign_of(f(t));
    if (s == 0) {
      roots.push_back(t);
    } else if (s_prev != 0 && s != s_prev) {
      roots.push_back(bisect(f, t_prev, t, steps));
    }
    s_prev = s;
    t_prev = t;
  }
  return roots;
}

struct SlidingExtrema {
  std::vector<double> max_v;
  std::vector<double> min_v;
};

/// Max and min over every run of `width` consecutive samples.
SlidingExtrema sliding_extrema(const std::vector<double>& v, int width) {
  SlidingExtrema out;
  std::deque<int> hi;
  std::deque<int> lo;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    while (!hi.empty() && v[hi.back()] <= v[i]) hi.pop_back();
    while (!lo.empty() && v[lo.back()] >= v[i]) lo.pop_back();
    hi.push_back(i);
    lo.push_back(i);
    if (hi.front() <= i - width) hi.pop_front();
    if (lo.front() <= i - width) lo.pop_front();
    if (i >= width - 1) {
      out.max_v.push_back(v[hi.front()]);
      out.min_v.push_back(v[lo.front()]);
    }
  }
  return out;
}

double mollifier(double y) {
  const double u = 1.0 - y * y;
  return u > 0.0 ? std::exp(-1.0 / u) : 0.0;
}

/// Gauss nodes on panels that shrink geometrically towards both ends of
/// every piece, with weights and the values of v'.
struct NodeSet {
  std::vector<double> t;
  std::vector<double> wf;  ///< weight times v'(t)
  std::vector<int> piece;
};

void add_piece(NodeSet& set, const Profile& profile, double a, double b, int piece,
               double max_width) {
  const auto x = quad::gl16_nodes();
  const auto w = quad::gl16_weights();
  const auto add = [&](double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = mid + half * x[i];
      set.t.push_back(t);
      set.wf.push_back(half * w[i] * profile.derivative(t, 1));
      set.piece.push_back(piece);
    }
  };
  const double len = b - a;
  const double edge = std::min(0.25 * len, 0.5 * max_width);
  // Geometric panels [a + edge 2^-k-1, a + edge 2^-k] down to 1e-7 edge.
  for (double r = edge; r > 1e-7 * edge; r *= 0.5) {
    add(a + 0.5 * r, a + r);
    add(b - r, b - 0.5 * r);
  }
  const int mid_panels = std::max(1, static_cast<int>(std::ceil((len - 2.0 * edge) / max_width)));
  const double width = (len - 2.0 * edge) / mid_panels;
  for (int k = 0; k < mid_panels; ++k) add(a + edge + k * width, a + edge + (k + 1) * width);
}

struct ReducedForm {
  double inner = 0.0;     ///< 4 double integral over J+ x J-
  double exterior = 0.0;  ///< double integral over J x (R \ J) of K v'(t) v'(tau)
};

ReducedForm reduced_quadratic_form(const KernelModel& model, const Profile& profile,
                                   const std::vector<double>& cps) {
  const auto dv = [&](double t) { return profile.derivative(t, 1); };
  NodeSet inside;
  std::vector<int> sign;
  for (std::size_t i = 0; i + 1 < cps.size(); ++i) {
    sign.push_back(sign_of(dv(0.5 * (cps[i] + cps[i + 1]))));
    add_piece(inside, profile, cps[i], cps[i + 1], static_cast<int>(i), 0.5);
  }
  // K falls below 1e-18 of its value at distance 1 beyond this reach.
  const double reach = 1.0 + 18.0 * std::log(10.0) / model.params().decay_rate();
  NodeSet outside;
  add_piece(outside, profile, cps.front() - reach, cps.front(), -1, 0.5);
  add_piece(outside, profile, cps.back(), cps.back() + reach, -1, 0.5);

  ReducedForm out;
  const std::size_t n = inside.t.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (sign[inside.piece[i]] <= 0) continue;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (sign[inside.piece[j]] < 0) sum += inside.wf[j] * model(inside.t[i] - inside.t[j]);
    out.inner += inside.wf[i] * sum;
  }
  out.inner *= 4.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < outside.t.size(); ++j)
      sum += outside.wf[j] * model(inside.t[i] - outside.t[j]);
    out.exterior += inside.wf[i] * sum;
  }
  return out;
}

}  // namespace

IntersectionResult check_intersection(const Profile& profile, double constant_tol,
                                      int samples) {
  IntersectionResult out;
  double a;
  double b;
  bool cyclic;
  if (const auto* per = profile.periodic_data()) {
    a = per->shift;
    b = per->shift + per->period;
    cyclic = true;
  } else {
    const auto* grid = profile.grid_data();
    a = grid->nodes.front();
    b = grid->nodes.back();
    cyclic = false;
  }
  out.range_a = a;
  out.range_b = b;
  const auto d = [&](double t) { return profile.value(t) - 1.0; };

  const auto scan = [&](int n) {
    // Cyclic ranges end one sample short of b and close the loop at b.
    std::vector<double> roots = sampled_roots(d, a, b, n, 60);
    if (cyclic && !roots.empty() && roots.back() >= b) roots.pop_back();
    return roots;
  };
  double sup = 0.0;
  int dominant = 0;
  for (int j = 0; j <= samples; ++j) {
    const double x = d(a + (b - a) * j / samples);
    if (std::abs(x) > sup) {
      sup = std::abs(x);
      dominant = sign_of(x);
    }
  }
  out.sup_deviation = sup;
  if (sup <= constant_tol) {
    out.kind = IntersectionKind::constant_one;
    return out;
  }
  out.crossings = scan(samples);
  const std::vector<double> finer = scan(2 * samples);
  if (finer.size() != out.crossings.size())
    throw Error(ErrorKind::resolution,
                "check_intersection: " + std::to_string(out.crossings.size()) + " crossings at " +
                    std::to_string(samples) + " samples but " + std::to_string(finer.size()) +
                    " at " + std::to_string(2 * samples));
  if (out.crossings.empty()) {
    out.kind = IntersectionKind::violation;
    out.side = dominant;
  } else {
    out.kind = IntersectionKind::crosses;
  }
  return out;
}

OscillationResult detect_oscillation(const Profile& profile, double horizon,
                                     const OscillationOptions& options) {
  if (!(horizon > 0.0)) throw Error(ErrorKind::domain, "detect_oscillation: horizon must be > 0");
  double step = options.sample_step > 0.0 ? options.sample_step : profile.feature_scale() / 16.0;
  step = std::max(step, 2.0 * horizon / 2e6);
  const int n = static_cast<int>(std::floor(2.0 * horizon / step));
  std::vector<double> t(n + 1);
  std::vector<double> v(n + 1);
  for (int j = 0; j <= n; ++j) {
    t[j] = -horizon + j * step;
    v[j] = profile.value(t[j]);
  }
  const double vmax = *std::max_element(v.begin(), v.end());
  const double vmin = *std::min_element(v.begin(), v.end());
  const double eps0 = 0.5 * std::min(vmax - 1.0, 1.0 - vmin);
  const double M0 =
      profile.periodic_data() ? profile.periodic_data()->period : 2.0 * horizon / 16.0;

  OscillationResult out;
  if (!(eps0 > 0.0)) {
    out.failure = {t.front(), t.back(), vmax, vmin};
    out.M_tried = M0;
    out.epsilon_tried = 0.0;
    return out;
  }

  for (int j = 0; j < options.epsilon_levels; ++j) {
    const double eps = eps0 * std::pow(0.5, j);
    for (int k = 0; k < options.M_levels; ++k) {
      const double M = M0 * std::pow(1.25, k);
      if (M > 2.0 * horizon) break;
      // Every real window of length M contains width consecutive samples.
      const int width = static_cast<int>(std::floor(M / step));
      if (width < 2 || width > n + 1) continue;
      const SlidingExtrema ext = sliding_extrema(v, width);
      double worst = std::numeric_limits<double>::infinity();
      int worst_i = 0;
      for (std::size_t i = 0; i < ext.max_v.size(); ++i) {
        const double margin = std::min(ext.max_v[i] - 1.0 - eps, 1.0 - eps - ext.min_v[i]);
        if (margin < worst) {
          worst = margin;
          worst_i = static_cast<int>(i);
        }
      }
      const auto window = [&](int i) {
        return Window{t[i], t[i + width - 1], ext.max_v[i], ext.min_v[i]};
      };
      out.failure = window(worst_i);
      out.M_tried = M;
      out.epsilon_tried = eps;
      if (worst > 0.0) {
        out.found = true;
        OscillationCertificate& c = out.certificate;
        c.M_osc = M;
        c.epsilon = eps;
        c.horizon = horizon;
        c.windows_checked = static_cast<int>(ext.max_v.size());
        const int count = std::min<int>(16, c.windows_checked);
        for (int w = 0; w < count; ++w)
          c.witness_windows.push_back(
              window(static_cast<int>((static_cast<long>(w) * (c.windows_checked - 1)) /
                                      std::max(1, count - 1))));
        c.witness_windows.push_back(window(worst_i));
        return out;
      }
    }
  }
  return out;
}

namespace {

NegativeDirection direction_on_form(const KernelModel& model, const Profile& profile,
                                    const OscillationCertificate& cert, double a, double b,
                                    GridForm form, const NegativeDirectionOptions& options) {
  NegativeDirection out;
  out.a = a;
  out.b = b;
  out.M_osc = cert.M_osc;
  out.epsilon = cert.epsilon;
  const double h = form.h;
  out.h = h;
  const auto d = [&](double t) { return profile.value(t) - 1.0; };
  const auto dv = [&](double t) { return profile.derivative(t, 1); };

  // Step 1: a crossing of 1 in each fifth, then the outermost critical points.
  const double fifth = (b - a) / 5.0;
  const int per_fifth = std::max(64, static_cast<int>(std::ceil(fifth / (h / 4.0))));
  for (int i = 0; i < 5; ++i) {
    const double lo = a + i * fifth;
    const std::vector<double> r = sampled_roots(d, lo, lo + fifth, per_fifth, 60);
    if (r.empty())
      throw Error(ErrorKind::certificate,
                  "build_negative_direction: no crossing of 1 in part " + std::to_string(i + 1) +
                      " of [" + std::to_string(a) + ", " + std::to_string(b) +
                      "]; the (M, epsilon) pair is too generous");
    out.crossings.push_back(r.front());
  }
  const double y1 = out.crossings[0];
  const double y5 = out.crossings[4];
  const int n_crit = std::max(16, static_cast<int>(std::ceil((y5 - y1) / (h / 4.0))));
  std::vector<double> roots = sampled_roots(dv, y1, y5, n_crit, 40);
  roots.erase(std::remove_if(roots.begin(), roots.end(),
                             [&](double r) { return r <= y1 || r >= y5; }),
              roots.end());
  if (roots.size() < 2)
    throw Error(ErrorKind::certificate,
                "build_negative_direction: fewer than two critical points between y1 = " +
                    std::to_string(y1) + " and y5 = " + std::to_string(y5));
  out.x0 = roots.front();
  out.x1 = roots.back();
  out.critical_points = roots;
  out.root_residual = std::max(std::abs(dv(out.x0)), std::abs(dv(out.x1)));
  for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
    const double jump = profile.value(roots[i + 1]) - profile.value(roots[i]);
    (jump > 0.0 ? out.positive_variation : out.negative_variation) += std::abs(jump);
  }

  // Step 2: eta = |v'| on [x0, x1] and its quadratic form.
  add_potential(form, profile);
  out.nodes = form.nodes;
  const auto eta_c = [&](double t) {
    return (t >= out.x0 && t <= out.x1) ? std::abs(dv(t)) : 0.0;
  };
  out.eta = sample_nodes(form, eta_c);
  out.Q_value = form.quadratic_form(out.eta);
  out.sup_norm = out.eta.cwiseAbs().maxCoeff();
  out.l1_norm = h * out.eta.cwiseAbs().sum();
  out.certified_bound = -4.0 * model(10.0 * cert.M_osc) * cert.epsilon * cert.epsilon;
  out.delta = out.Q_value < 0.0 ? std::min(-out.Q_value, 1.0 / out.sup_norm) : 0.0;

  out.Q_reduced = kNaN;
  out.Q_reduced_inner = kNaN;
  out.exterior_term = kNaN;
  out.reduced_rel_diff = kNaN;
  if (options.reduced_check) {
    const ReducedForm r = reduced_quadratic_form(model, profile, roots);
    out.Q_reduced_inner = r.inner;
    out.exterior_term = r.exterior;
    out.Q_reduced = r.inner + r.exterior;
    out.reduced_rel_diff = std::abs(out.Q_value - out.Q_reduced) / std::abs(out.Q_reduced);
  }

  // Step 3: smooth the corners over width h and re-evaluate.
  out.Q_mollified = kNaN;
  out.mollified_rel_change = kNaN;
  if (options.mollify) {
    const double norm = quad::gauss_legendre(mollifier, -1.0, 1.0, 32);
    const auto smoothed = [&](double t) {
      const auto f = [&](double y) { return eta_c(t - h * y) * mollifier(y); };
      return (quad::gauss_legendre(f, -1.0, 0.0, 32) + quad::gauss_legendre(f, 0.0, 1.0, 32)) /
             norm;
    };
    const Eigen::VectorXd eta_m = sample_nodes(form, smoothed);
    out.Q_mollified = form.quadratic_form(eta_m);
    out.mollified_rel_change = std::abs(out.Q_mollified - out.Q_value) / std::abs(out.Q_value);
  }
  return out;
}

GridForm window_form(const KernelModel& model, double a, double b, double h_target) {
  const double M = 0.5 * (b - a);
  const double h = 2.0 * M / std::ceil(2.0 * M / h_target - 1e-9);
  return assemble_stiffness(model, M, h, 0.5 * (a + b));
}

}  // namespace

NegativeDirection build_negative_direction(const KernelModel& model, const Profile& profile,
                                           const OscillationCertificate& cert, double a,
                                           double b, const NegativeDirectionOptions& options) {
  if (!(cert.M_osc > 0.0 && cert.epsilon > 0.0))
    throw Error(ErrorKind::domain, "build_negative_direction: certificate needs M, epsilon > 0");
  if (!(b - a >= 5.0 * cert.M_osc * (1.0 - 1e-12)))
    throw Error(ErrorKind::domain,
                "build_negative_direction: |I| = " + std::to_string(b - a) + " < 5 M_osc = " +
                    std::to_string(5.0 * cert.M_osc));
  return direction_on_form(model, profile, cert, a, b, window_form(model, a, b, options.h),
                           options);
}

IndexReport translated_family_bound(const KernelModel& model, const Profile& profile, int m,
                                    double d, const NegativeDirection* direction,
                                    const OscillationCertificate* cert,
                                    const FamilyOptions& options) {
  if (m < 1) throw Error(ErrorKind::domain, "translated_family_bound: m must be >= 1");
  if (!(d > 0.0)) throw Error(ErrorKind::domain, "translated_family_bound: d must be > 0");

  IndexReport report;
  report.m = m;
  report.constant_profile = profile.is_constant(1e-12) && std::abs(profile.value(0.0) - 1.0) <= 1e-12;

  // Template: nodal vector on a base form, plus the rule for its translates.
  GridForm base;
  Eigen::VectorXd phi;
  double scale;
  double snap = 0.0;
  const double p = model.params().p;
  if (report.constant_profile) {
    double M = 2.0;
    EigenResult eig;
    for (;;) {
      const double h = 2.0 * M / std::ceil(2.0 * M / options.h);
      eig = lambda1(model, M, h);
      if (eig.lambda1 < p - 1.0) break;
      M *= 2.0;
      if (M > 256.0)
        throw Error(ErrorKind::no_bifurcation,
                    "translated_family_bound: lambda1(M) >= p - 1 up to M = 256");
    }
    base = assemble_stiffness(model, M, eig.h, 0.0);
    phi = eig.phi1;
    report.template_lambda1 = eig.lambda1;
    report.template_M = M;
    scale = 2.0 * M;
  } else {
    if (!direction)
      throw Error(ErrorKind::domain,
                  "translated_family_bound: a nonconstant profile needs a negative direction");
    base = window_form(model, direction->a, direction->b, direction->h);
    phi = direction->eta;
    scale = direction->M_osc;
    if (const auto* per = profile.periodic_data()) snap = per->period;
    else if (!cert)
      throw Error(ErrorKind::domain,
                  "translated_family_bound: non-periodic profiles need the certificate");
  }
  const double width = 2.0 * base.M;
  report.support_width = width;
  report.h = base.h;

  const auto evaluate = [&](double gap, IndexReport& r) {
    double step = width + gap;
    if (snap > 0.0) step = std::ceil(step / snap - 1e-12) * snap;
    r.d = gap;
    r.d_actual = step - width;
    r.centers.clear();
    std::vector<Eigen::VectorXd> members;
    std::vector<std::vector<double>> member_nodes;
    Eigen::VectorXd diag(m);
    for (int j = 0; j < m; ++j) {
      const double shift = j * step;
      if (!report.constant_profile && snap == 0.0) {
        const NegativeDirection nd =
            direction_on_form(model, profile, *cert, direction->a + shift,
                              direction->b + shift, translated(base, shift),
                              {base.h, false, false});
        members.push_back(nd.eta);
        diag[j] = nd.Q_value;
      } else {
        GridForm f = translated(base, shift);
        add_potential(f, profile);
        members.push_back(phi);
        diag[j] = f.quadratic_form(phi);
      }
      std::vector<double> nodes = base.nodes;
      for (double& x : nodes) x += shift;
      member_nodes.push_back(std::move(nodes));
      r.centers.push_back(base.center + shift);
    }
    r.gram = Eigen::MatrixXd::Zero(m, m);
    r.max_offdiag = 0.0;
    double l1_max = 0.0;
    std::vector<double> l1(m);
    for (int j = 0; j < m; ++j) {
      r.gram(j, j) = diag[j];
      l1[j] = base.h * members[j].cwiseAbs().sum();
    }
    // Disjoint supports: A_v[phi_i, phi_j] = -double integral of phi_i(t) phi_j(tau) K(t - tau).
    // K is smooth across the gap, so a strided trapezoid rule suffices.
    const int stride = std::max(1, static_cast<int>(std::floor(options.h / base.h + 1e-9)));
    const double h2 = (stride * base.h) * (stride * base.h);
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        double sum = 0.0;
        for (int x = 0; x < members[i].size(); x += stride) {
          const double fi = members[i][x];
          if (fi == 0.0) continue;
          for (int y = 0; y < members[j].size(); y += stride) {
            const double fj = members[j][y];
            if (fj == 0.0) continue;
            sum += fi * fj * model(member_nodes[i][x] - member_nodes[j][y]);
          }
        }
        r.gram(i, j) = r.gram(j, i) = -h2 * sum;
        r.max_offdiag = std::max(r.max_offdiag, h2 * std::abs(sum));
        l1_max = std::max(l1_max, l1[i] * l1[j]);
      }
    }
    r.offdiag_bound = m > 1 ? model(r.d_actual) * l1_max : 0.0;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.gram, Eigen::EigenvaluesOnly);
    r.gram_eigenvalues = es.eigenvalues();
    r.max_eigenvalue = es.eigenvalues().maxCoeff();
    r.max_diagonal = diag.maxCoeff();
    const bool ok = r.max_eigenvalue < 0.0;
    r.verdict = ok ? Verdict::negative_definite : Verdict::inconclusive;
    r.implied_lower_bound = ok ? m : 0;
    r.trials.push_back({gap, r.d_actual, r.max_offdiag, r.offdiag_bound, r.max_eigenvalue, ok});
    return ok;
  };

  const double d_max = options.d_max_factor * scale;
  for (double gap = d;; gap *= 2.0) {
    if (evaluate(gap, report) || !options.search || 2.0 * gap > d_max) break;
  }
  return report;
}

int covering_morse_count(const KernelModel& model, const Profile& profile,
                         const IndexReport& report, int max_nodes) {
  if (report.centers.empty())
    throw Error(ErrorKind::domain, "covering_morse_count: empty family");
  const double a = report.centers.front() - 0.5 * report.support_width;
  const double b = report.centers.back() + 0.5 * report.support_width;
  const double M = 0.5 * (b - a);
  const double h_min = 2.0 * M / max_nodes;
  const double h = 2.0 * M / std::ceil(2.0 * M / std::max(report.h, h_min));
  return morse_count(model, profile, M, h, 0.5 * (a + b)).count;
}

}  // namespace fylab
