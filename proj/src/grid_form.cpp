#include "fylab/grid_form.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>

#include "fylab/error.hpp"
#include "fylab/quadrature.hpp"

namespace fylab {

namespace {

/// Autocorrelation of the unit hat function.
double hat_overlap(double u) {
  u = std::abs(u);
  if (u >= 2.0) return 0.0;
  if (u <= 1.0) return 2.0 / 3.0 - u * u + 0.5 * u * u * u;
  const double r = 2.0 - u;
  return r * r * r / 6.0;
}

double sigma_entry(const KernelModel& model, double h, int k) {
  const double h2 = h * h;
  const auto scaled_k = [&](double x) { return model(h * x); };
  // The bracket 2B(k) - B(x-k) - B(x+k) on [0, 1], written without cancellation.
  std::function<double(double)> near;
  switch (k) {
    case 0: near = [](double x) { return x * x * (2.0 - x); }; break;
    case 1: near = [](double x) { return x * x * (2.0 / 3.0 * x - 1.0); }; break;
    case 2: near = [](double x) { return -x * x * x / 6.0; }; break;
    default: break;
  }
  double sum = 0.0;
  if (near) {
    sum += quad::tanh_sinh(
        [&](double x) {
          if (x < 1e-30) return 0.0;
          return scaled_k(x) * near(x);
        },
        0.0, 1.0, 1e-13);
  }
  const double bk = hat_overlap(k);
  const auto bracket = [&](double x) {
    return scaled_k(x) * (2.0 * bk - hat_overlap(x - k) - hat_overlap(x + k));
  };
  const int lo = std::max(1, k - 2);
  for (int j = lo; j < k + 2; ++j)
    sum += quad::gauss_legendre(bracket, j, j + 1.0, 16);
  sum *= h2;
  if (bk > 0.0) sum += h * 2.0 * bk * model.tail_integral((k + 2) * h);
  return sum;
}

int interior_count(double M, double h) {
  if (!(M > 0.0) || !(h > 0.0))
    throw Error(ErrorKind::domain, "grid form: need M > 0 and h > 0");
  const double ratio = 2.0 * M / h;
  const double elements = std::round(ratio);
  if (std::abs(ratio - elements) > 1e-9 * ratio)
    throw Error(ErrorKind::domain, "grid form: h must divide 2M");
  const int n = static_cast<int>(elements) - 1;
  if (n < 16)
    throw Error(ErrorKind::resolution,
                "grid form: h too coarse, " + std::to_string(n) +
                    " interior nodes (need >= 16)");
  return n;
}

}  // namespace

std::vector<double> stiffness_sequence(const KernelModel& model, double h, int count) {
  std::vector<double> sigma(static_cast<std::size_t>(std::max(count, 0)), 0.0);
  for (int k = 0; k < count; ++k) {
    // Exponential decay: once K underflows, every later entry is zero.
    if (k > 3 && model(h * (k - 2)) == 0.0) break;
    sigma[k] = sigma_entry(model, h, k);
  }
  return sigma;
}

GridForm assemble_stiffness(const KernelModel& model, double M, double h, double center) {
  const int n = interior_count(M, h);
  GridForm form;
  form.params = model.params();
  form.kernel_mode = model.mode();
  form.center = center;
  form.M = M;
  form.h = h;
  form.nodes.resize(n);
  for (int i = 0; i < n; ++i) form.nodes[i] = center - M + (i + 1) * h;
  form.sigma = stiffness_sequence(model, h, n);
  return form;
}

GridForm assemble_grid_form(const KernelModel& model, const Profile& profile, double M,
                            double h, double center) {
  GridForm form = assemble_stiffness(model, M, h, center);
  add_potential(form, profile);
  return form;
}

GridForm translated(const GridForm& form, double shift) {
  GridForm out = form;
  out.center += shift;
  for (double& x : out.nodes) x += shift;
  out.has_potential = false;
  out.potential_diag.clear();
  out.potential_off.clear();
  return out;
}

void add_potential(GridForm& form, const Profile& profile) {
  const double M = form.M;
  const double h = form.h;
  const double center = form.center;
  const int n = form.size();
  const double p = form.params.p;
  form.has_potential = true;
  form.potential_diag.assign(n, 0.0);
  form.potential_off.assign(n > 0 ? n - 1 : 0, 0.0);
  const auto weight = [&](double t) {
    const double v = profile.value(t);
    if (!(v > 0.0))
      throw Error(ErrorKind::positivity,
                  "assemble_grid_form: profile is not positive at t = " + std::to_string(t));
    return 1.0 - p * std::pow(v, p - 1.0);
  };
  // Element e spans nodes e and e+1 of the full grid (boundary nodes 0 and n+1).
  for (int e = 0; e <= n; ++e) {
    const double xl = center - M + e * h;
    const double xr = xl + h;
    const double dl = quad::gauss_legendre(
        [&](double t) { const double a = (xr - t) / h; return weight(t) * a * a; }, xl, xr, 8);
    const double dr = quad::gauss_legendre(
        [&](double t) { const double b = (t - xl) / h; return weight(t) * b * b; }, xl, xr, 8);
    const double off = quad::gauss_legendre(
        [&](double t) { return weight(t) * (xr - t) * (t - xl) / (h * h); }, xl, xr, 8);
    if (e >= 1) form.potential_diag[e - 1] += dl;
    if (e + 1 <= n) form.potential_diag[e] += dr;
    if (e >= 1 && e + 1 <= n) form.potential_off[e - 1] += off;
  }
}

Eigen::MatrixXd GridForm::stiffness() const {
  const int n = size();
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = sigma[std::abs(i - j)];
  return s;
}

Eigen::MatrixXd GridForm::mass() const {
  const int n = size();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    b(i, i) = 2.0 * h / 3.0;
    if (i + 1 < n) b(i, i + 1) = b(i + 1, i) = h / 6.0;
  }
  return b;
}

Eigen::MatrixXd GridForm::potential() const {
  const int n = size();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  if (!has_potential) return v;
  for (int i = 0; i < n; ++i) {
    v(i, i) = potential_diag[i];
    if (i + 1 < n) v(i, i + 1) = v(i + 1, i) = potential_off[i];
  }
  return v;
}

double GridForm::stiffness_form(const Eigen::VectorXd& phi) const {
  return bilinear_form(phi, phi) - potential_form(phi);
}

double GridForm::mass_form(const Eigen::VectorXd& phi) const {
  const int n = size();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += 2.0 * h / 3.0 * phi[i] * phi[i];
    if (i + 1 < n) sum += 2.0 * h / 6.0 * phi[i] * phi[i + 1];
  }
  return sum;
}

double GridForm::potential_form(const Eigen::VectorXd& phi) const {
  if (!has_potential) return 0.0;
  const int n = size();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += potential_diag[i] * phi[i] * phi[i];
    if (i + 1 < n) sum += 2.0 * potential_off[i] * phi[i] * phi[i + 1];
  }
  return sum;
}

double GridForm::quadratic_form(const Eigen::VectorXd& phi) const {
  return bilinear_form(phi, phi);
}

double GridForm::bilinear_form(const Eigen::VectorXd& phi, const Eigen::VectorXd& psi) const {
  const int n = size();
  if (phi.size() != n || psi.size() != n)
    throw Error(ErrorKind::domain, "GridForm: vector size does not match the grid");
  double sum = sigma[0] * phi.dot(psi);
  for (int k = 1; k < n; ++k) {
    if (sigma[k] == 0.0) continue;
    const int len = n - k;
    sum += sigma[k] * (phi.head(len).dot(psi.tail(len)) + phi.tail(len).dot(psi.head(len)));
  }
  if (has_potential) {
    for (int i = 0; i < n; ++i) {
      sum += potential_diag[i] * phi[i] * psi[i];
      if (i + 1 < n) sum += potential_off[i] * (phi[i] * psi[i + 1] + phi[i + 1] * psi[i]);
    }
  }
  return sum;
}

void export_grid_form(const GridForm& form, const std::string& prefix, double drop_tol) {
  const auto write = [&](const std::string& name, const Eigen::MatrixXd& m) {
    const std::string path = prefix + "_" + name + ".csv";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error(ErrorKind::io, "cannot write " + path);
    std::fprintf(f, "i,j,value\n");
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j)
        if (std::abs(m(i, j)) > drop_tol)
          std::fprintf(f, "%d,%d,%.17g\n", i, j, m(i, j));
    std::fclose(f);
  };
  write("S", form.stiffness());
  write("B", form.mass());
  write("V", form.potential());
  nlohmann::json header = {
      {"n", form.params.n},
      {"s", form.params.s},
      {"gamma", form.params.gamma_ns},
      {"gamma_source", to_string(form.params.gamma_source)},
      {"kernel_mode", form.kernel_mode == KernelMode::full ? "full" : "pure_power"},
      {"center", form.center},
      {"M", form.M},
      {"h", form.h},
      {"size", form.size()},
      {"has_potential", form.has_potential},
      {"quadrature_tol", form.quadrature_tol},
      {"format", "CSV triplets i,j,value; indices are 0-based interior nodes"},
  };
  std::ofstream out(prefix + ".json");
  if (!out) throw Error(ErrorKind::io, "cannot write " + prefix + ".json");
  out << header.dump(2) << "\n";
}

}  // namespace fylab
