#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fylab/error.hpp"
#include "fylab/kernel.hpp"
#include "fylab/pointwise.hpp"
#include "fylab/profile.hpp"
#include "fylab/solver.hpp"
#include "fylab/spectral.hpp"
#include "fylab/symbol.hpp"
#include "fylab/verify.hpp"

namespace py = pybind11;
using namespace fylab;

PYBIND11_MODULE(_fylab, m) {
  m.doc() = "Reduced fractional Yamabe equation on the line";

  static py::exception<Error> error_type(m, "FylabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      inst.attr("kind") = to_string(e.kind());
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<ProblemParams>(m, "ProblemParams")
      .def_readonly("n", &ProblemParams::n)
      .def_readonly("s", &ProblemParams::s)
      .def_readonly("p", &ProblemParams::p)
      .def_readonly("lin_coeff", &ProblemParams::lin_coeff)
      .def_readonly("c_ns", &ProblemParams::c_ns)
      .def_readonly("kappa_ns", &ProblemParams::kappa_ns)
      .def_readonly("gamma_ns", &ProblemParams::gamma_ns)
      .def_property_readonly("gamma_source",
                             [](const ProblemParams& p) { return to_string(p.gamma_source); })
      .def("decay_rate", &ProblemParams::decay_rate);

  m.def(
      "make_params",
      [](int n, double s, std::optional<double> gamma) {
        return make_params(n, s, gamma ? GammaMode::explicit_value(*gamma) : GammaMode::closed_form());
      },
      py::arg("n"), py::arg("s"), py::arg("gamma") = py::none());

  py::class_<Profile>(m, "Profile")
      .def_static("constant", &Profile::constant, py::arg("value") = 1.0)
      .def_static("periodic", &Profile::periodic, py::arg("period"), py::arg("coeffs"),
                  py::arg("shift") = 0.0)
      .def_static("grid", &Profile::grid, py::arg("nodes"), py::arg("values"),
                  py::arg("far_field") = py::none())
      .def("__call__", &Profile::value)
      .def("derivative", &Profile::derivative, py::arg("t"), py::arg("order") = 1)
      .def("translated", &Profile::translated)
      .def("is_periodic", &Profile::is_periodic)
      .def("is_constant", &Profile::is_constant, py::arg("tol") = 0.0)
      .def_property_readonly("coeffs", [](const Profile& p) -> std::optional<std::vector<double>> {
        if (const auto* d = p.periodic_data()) return d->coeffs;
        return std::nullopt;
      });

  py::class_<KernelModel>(m, "Kernel")
      .def(py::init([](const ProblemParams& p, bool pure_power) {
             return KernelModel(p, pure_power ? KernelMode::pure_power : KernelMode::full);
           }),
           py::arg("params"), py::arg("pure_power") = false)
      .def("__call__", &kernel_eval)
      .def("exact", &KernelModel::exact)
      .def("tail_integral", &KernelModel::tail_integral)
      .def_property_readonly("a0", &KernelModel::a0)
      .def_property_readonly("a_inf", &KernelModel::a_inf)
      .def_property_readonly("params", &KernelModel::params);

  m.def("theta", [](const KernelModel& K, double k) { return SymbolEvaluator(K, std::abs(k) + 1.0).theta(k); });
  m.def("apply_P", &apply_P_pointwise, py::arg("kernel"), py::arg("profile"), py::arg("t"));
  m.def("equation_residual", &equation_residual);

  py::class_<EigenResult>(m, "EigenResult")
      .def_readonly("lambda1", &EigenResult::lambda1)
      .def_readonly("phi1", &EigenResult::phi1)
      .def_readonly("nodes", &EigenResult::nodes)
      .def_readonly("residual", &EigenResult::residual)
      .def_readonly("min_interior", &EigenResult::min_interior);
  m.def("lambda1", py::overload_cast<const KernelModel&, double, double, double>(&lambda1),
        py::arg("kernel"), py::arg("M"), py::arg("h"), py::arg("center") = 0.0);

  py::class_<MorseCount>(m, "MorseCount")
      .def_readonly("count", &MorseCount::count)
      .def_readonly("negative_eigenvalues", &MorseCount::negative_eigenvalues);
  m.def("morse_count",
        py::overload_cast<const KernelModel&, const Profile&, double, double, double>(&morse_count),
        py::arg("kernel"), py::arg("profile"), py::arg("M"), py::arg("h"), py::arg("center") = 0.0);

  py::class_<BranchPoint>(m, "BranchPoint")
      .def_readonly("L", &BranchPoint::L)
      .def_readonly("profile", &BranchPoint::profile)
      .def_readonly("residual", &BranchPoint::residual)
      .def_readonly("amplitude", &BranchPoint::amplitude)
      .def_readonly("min_v", &BranchPoint::min_v)
      .def_readonly("max_v", &BranchPoint::max_v)
      .def_readonly("mean_identity", &BranchPoint::mean_identity)
      .def("nonconstant", &BranchPoint::nonconstant, py::arg("tol") = 1e-6);

  py::class_<SolverOptions>(m, "SolverOptions").def(py::init<>());
  m.def("bifurcation_period", &bifurcation_period);
  m.def(
      "solve_periodic",
      [](const KernelModel& K, double L, int N_modes, double amplitude) {
        return solve_periodic(K, L, N_modes, Seed::cosine(amplitude));
      },
      py::arg("kernel"), py::arg("L"), py::arg("N_modes") = 32, py::arg("amplitude") = 0.05);
  m.def("continue_branch", &continue_branch, py::arg("kernel"), py::arg("L_start"),
        py::arg("L_end"), py::arg("steps"), py::arg("N_modes") = 32,
        py::arg("seed_amplitude") = 0.05, py::arg("options") = SolverOptions{});
  m.def("pointwise_residual", &pointwise_residual, py::arg("kernel"), py::arg("profile"),
        py::arg("samples"), py::arg("offset") = 0.0);
  m.def("sign_changes_per_period", &sign_changes_per_period, py::arg("profile"),
        py::arg("samples") = 2048, py::arg("offset") = 0.0);

  m.def("crossings", [](const Profile& v) {
    const IntersectionResult r = check_intersection(v);
    const char* kind = r.kind == IntersectionKind::constant_one ? "constant_one"
                       : r.kind == IntersectionKind::crosses    ? "crosses"
                                                                : "violation";
    return py::make_tuple(kind, r.crossings);
  });

  py::class_<IndexReport>(m, "IndexReport")
      .def_readonly("m", &IndexReport::m)
      .def_readonly("d", &IndexReport::d)
      .def_readonly("gram", &IndexReport::gram)
      .def_readonly("max_offdiag", &IndexReport::max_offdiag)
      .def_readonly("max_eigenvalue", &IndexReport::max_eigenvalue)
      .def_readonly("implied_lower_bound", &IndexReport::implied_lower_bound)
      .def_property_readonly("negative_definite", [](const IndexReport& r) {
        return r.verdict == Verdict::negative_definite;
      });
  m.def(
      "index_lower_bound",
      [](const KernelModel& K, const Profile& v, int m, double d) {
        if (v.is_constant()) return translated_family_bound(K, v, m, d);
        const double period = v.is_periodic() ? v.periodic_data()->period : 0.0;
        const OscillationResult osc = detect_oscillation(v, period > 0 ? 3.0 * period : 60.0);
        if (!osc.found) throw Error(ErrorKind::certificate, "no oscillation certificate");
        const auto& cert = osc.certificate;
        const NegativeDirection dir = build_negative_direction(K, v, cert, 0.0, 5.0 * cert.M_osc);
        return translated_family_bound(K, v, m, std::max(d, 5.0 * cert.M_osc), &dir, &cert);
      },
      py::arg("kernel"), py::arg("profile"), py::arg("m") = 5, py::arg("d") = 1.0);
}
