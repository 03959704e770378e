#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fylab/calibrate.hpp"
#include "fylab/error.hpp"
#include "fylab/io.hpp"
#include "fylab/kernel.hpp"
#include "fylab/solver.hpp"
#include "fylab/spectral.hpp"
#include "fylab/verify.hpp"

using namespace fylab;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::io:
    case ErrorKind::domain:
    case ErrorKind::invalid_regime:
    case ErrorKind::singularity:
      return kExitConfig;
    case ErrorKind::invariant:
    case ErrorKind::certificate:
      return kExitInvariant;
    default:
      return kExitNumerical;
  }
}

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::string profile_path;
  int workers = 0;
  int m = 0;
  bool pure_power = false;
};

RunConfig resolve(const Flags& flags) {
  RunConfig config = flags.config_path.empty() ? RunConfig{} : load_config(flags.config_path);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.workers > 0) config.workers = flags.workers;
  if (flags.m > 0) config.m = flags.m;
  if (flags.pure_power) config.pure_power = true;
  // Flags go through the same validation as the file.
  return parse_config(format_config(config));
}

std::string out_path(const RunConfig& config, const std::string& name) {
  return (std::filesystem::path(config.out_dir) / name).string();
}

// Runs job(i) for i in [0, count) on up to `workers` threads; results are
// written into caller-owned slots, so output order never depends on timing.
void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void finish(const RunConfig& config, const ProblemParams& params, const std::string& command,
            const std::string& anchor, const std::vector<std::string>& outputs,
            json extra = json::object()) {
  json manifest = make_manifest(command, anchor, config, params, outputs);
  for (auto& [key, value] : extra.items()) manifest[key] = value;
  write_json(out_path(config, command + ".manifest.json"), manifest);
}

int cmd_kernel(const RunConfig& config) {
  const ProblemParams params = params_from_config(config);
  const KernelModel model(params);
  const double q = 1.0 + 2.0 * params.s;
  std::vector<std::string> header{"t", "K", "K_times_power", "K_times_exp"};
  if (config.pure_power) {
    header.push_back("pure_power");
    header.push_back("K_over_pure_power");
  }
  CsvWriter csv(out_path(config, "kernel.csv"), header);
  double pow_lo = INFINITY, pow_hi = 0.0, exp_lo = INFINITY, exp_hi = 0.0;
  for (const auto& row : kernel_table(model, config.table_t_min, config.table_t_max,
                                      config.table_points)) {
    std::vector<double> cells{row.t, row.k, row.k_times_power, row.k_times_exp};
    if (config.pure_power) {
      const double pure = model.a0() * std::pow(row.t, -q);
      cells.push_back(pure);
      cells.push_back(row.k / pure);
    }
    csv.row(cells);
    if (row.t <= 1e-2) {
      pow_lo = std::min(pow_lo, row.k_times_power);
      pow_hi = std::max(pow_hi, row.k_times_power);
    }
    if (row.t >= 8.0) {
      exp_lo = std::min(exp_lo, row.k_times_exp);
      exp_hi = std::max(exp_hi, row.k_times_exp);
    }
  }
  csv.close();
  json ratios = {{"A0", model.a0()}, {"A_inf", model.a_inf()}};
  if (pow_hi > 0.0) ratios["power_spread_t_le_1e-2"] = pow_hi / pow_lo - 1.0;
  if (exp_hi > 0.0) ratios["exp_spread_t_ge_8"] = exp_hi / exp_lo - 1.0;
  finish(config, params, "kernel",
         "kernel K(t) and its asymptotics: K ~ A0 |t|^(-1-2s) as t -> 0, "
         "K ~ A_inf e^(-(n+2s)|t|/2) as |t| -> infinity",
         {"kernel.csv"}, {{"asymptotics", ratios}});
  std::printf("kernel: A0 = %.10g, A_inf = %.10g, %d rows -> %s\n", model.a0(), model.a_inf(),
              config.table_points, out_path(config, "kernel.csv").c_str());
  return kExitOk;
}

int cmd_lambda1(const RunConfig& config) {
  const ProblemParams params = params_from_config(config);
  const KernelModel full(params);
  const KernelModel model = config.pure_power ? full.pure_power() : full;
  const auto& Ms = config.M_list;
  std::vector<std::optional<EigenResult>> results(Ms.size());
  parallel_for(static_cast<int>(Ms.size()), config.workers,
               [&](int i) { results[i] = lambda1(model, Ms[i], config.h); });

  CsvWriter csv(out_path(config, "lambda1.csv"),
                {"M", "h", "nodes", "lambda1", "lambda1_M2s", "phi1_positive", "below_threshold",
                 "residual"});
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < Ms.size(); ++i) {
    const EigenResult& r = *results[i];
    const bool positive = r.min_interior > 0.0;
    const bool below = r.lambda1 < params.lin_coeff;
    csv.row(std::vector<std::string>{format_double(Ms[i]), format_double(r.h),
                                     std::to_string(r.phi1.size()), format_double(r.lambda1),
                                     format_double(r.lambda1 * std::pow(Ms[i], 2.0 * params.s)),
                                     positive ? "true" : "false", below ? "true" : "false",
                                     format_double(r.residual)});
    if (!(r.lambda1 > 0.0)) failures.push_back("lambda1 <= 0 at M = " + format_double(Ms[i]));
    if (!positive) failures.push_back("phi1 not positive at M = " + format_double(Ms[i]));
    for (std::size_t j = 0; j < i; ++j)
      if (Ms[j] < Ms[i] && !(results[j]->lambda1 > r.lambda1))
        failures.push_back("lambda1 not decreasing between M = " + format_double(Ms[j]) +
                           " and M = " + format_double(Ms[i]));
  }
  csv.close();
  json summary = json::array();
  for (const auto& r : results) summary.push_back(to_json(*r));
  finish(config, params, "lambda1", "first eigenvalue lambda1(M) of P on [-M, M]",
         {"lambda1.csv"}, {{"results", summary}, {"threshold", params.lin_coeff},
                           {"failures", failures}});
  for (const auto& r : results)
    std::printf("lambda1: M = %-6g lambda1 = %.10g\n", r->M, r->lambda1);
  for (const auto& f : failures) std::fprintf(stderr, "invariant: %s\n", f.c_str());
  return failures.empty() ? kExitOk : kExitInvariant;
}

int cmd_solve(const RunConfig& config) {
  const ProblemParams params = params_from_config(config);
  const KernelModel model(params);
  const double L_star = bifurcation_period(model);
  SolverOptions options;
  options.oversample = config.oversample;
  options.newton_tol = config.newton_tol;
  const auto branch = continue_branch(model, config.L_start_factor * L_star,
                                      config.L_end_factor * L_star, config.steps,
                                      config.N_modes, 0.05, options);

  const int count = static_cast<int>(branch.size());
  std::vector<double> pointwise(count);
  std::vector<int> changes(count);
  parallel_for(count, config.workers, [&](int i) {
    const double L = branch[i].L;
    pointwise[i] = pointwise_residual(model, branch[i].profile, 64, 0.37 * L / 64);
    changes[i] = sign_changes_per_period(branch[i].profile);
  });

  std::vector<std::string> outputs{"branch.csv"};
  CsvWriter csv(out_path(config, "branch.csv"),
                {"L", "L_over_Lstar", "amplitude", "residual", "pointwise_residual", "min_v",
                 "max_v", "mean_identity", "sign_changes", "newton_iters"});
  std::vector<std::string> failures;
  json points = json::array();
  for (int i = 0; i < count; ++i) {
    const BranchPoint& b = branch[i];
    csv.row(std::vector<std::string>{
        format_double(b.L), format_double(b.L / L_star), format_double(b.amplitude),
        format_double(b.residual), format_double(pointwise[i]), format_double(b.min_v),
        format_double(b.max_v), format_double(b.mean_identity), std::to_string(changes[i]),
        std::to_string(b.newton_iters)});
    char name[32];
    std::snprintf(name, sizeof name, "profiles/point_%03d", i);
    write_profile_samples(out_path(config, std::string(name) + ".csv"), b.profile, 0.0, b.L,
                          config.profile_samples);
    write_json(out_path(config, std::string(name) + ".json"), profile_to_json(b.profile));
    outputs.push_back(std::string(name) + ".csv");
    outputs.push_back(std::string(name) + ".json");
    json point = to_json(b);
    point.erase("profile");
    point["pointwise_residual"] = pointwise[i];
    point["sign_changes"] = changes[i];
    point["profile_file"] = std::string(name) + ".json";
    points.push_back(point);

    const std::string at = " at L = " + format_double(b.L);
    if (!(b.residual <= config.residual_tol)) failures.push_back("residual" + at);
    if (!(pointwise[i] <= config.pointwise_tol)) failures.push_back("pointwise residual" + at);
    if (!(std::abs(b.mean_identity) <= config.mean_tol)) failures.push_back("mean identity" + at);
    if (!(b.min_v > 0.0)) failures.push_back("positivity" + at);
    if (b.nonconstant() && changes[i] < 2) failures.push_back("one-sided solution" + at);
  }
  csv.close();
  finish(config, params, "solve", "periodic solutions of P v + v = v^p bifurcating from v = 1",
         outputs,
         {{"L_star", L_star},
          {"profile_samples_per_period", config.profile_samples},
          {"points", points},
          {"failures", failures}});
  std::printf("solve: L* = %.12g, %d points, last amplitude %.6g -> %s\n", L_star, count,
              branch.back().amplitude, out_path(config, "branch.csv").c_str());
  for (const auto& f : failures) std::fprintf(stderr, "invariant: %s\n", f.c_str());
  return failures.empty() ? kExitOk : kExitInvariant;
}

Profile profile_or_one(const Flags& flags) {
  return flags.profile_path.empty() ? Profile::constant() : load_profile(flags.profile_path);
}

int cmd_morse(const RunConfig& config, const Flags& flags) {
  const ProblemParams params = params_from_config(config);
  const KernelModel model(params);
  const Profile profile = profile_or_one(flags);
  auto Ms = config.M_list;
  std::sort(Ms.begin(), Ms.end());
  std::vector<std::optional<MorseCount>> counts(Ms.size());
  parallel_for(static_cast<int>(Ms.size()), config.workers, [&](int i) {
    counts[i] = morse_count(model, profile, Ms[i], config.h, config.window_start);
  });
  CsvWriter csv(out_path(config, "morse.csv"),
                {"M", "center", "h", "count", "lowest_eigenvalue", "tol_negative"});
  std::vector<std::string> failures;
  json summary = json::array();
  for (std::size_t i = 0; i < Ms.size(); ++i) {
    const MorseCount& c = *counts[i];
    const double lowest = c.negative_eigenvalues.empty() ? NAN : c.negative_eigenvalues.front();
    csv.row(std::vector<std::string>{format_double(c.M), format_double(c.center),
                                     format_double(c.h), std::to_string(c.count),
                                     c.negative_eigenvalues.empty() ? "" : format_double(lowest),
                                     format_double(c.tol_negative)});
    if (i > 0 && c.count < counts[i - 1]->count)
      failures.push_back("count decreases from M = " + format_double(Ms[i - 1]) +
                         " to M = " + format_double(Ms[i]));
    summary.push_back(to_json(c));
    std::printf("morse: M = %-6g count = %d\n", c.M, c.count);
  }
  csv.close();
  finish(config, params, "morse",
         "Morse index lower bounds: negative directions of Q_v on nested windows",
         {"morse.csv"},
         {{"profile", flags.profile_path.empty() ? json("v = 1") : json(flags.profile_path)},
          {"counts", summary},
          {"failures", failures}});
  for (const auto& f : failures) std::fprintf(stderr, "invariant: %s\n", f.c_str());
  return failures.empty() ? kExitOk : kExitInvariant;
}

void write_gram(const std::string& path, const IndexReport& report) {
  std::vector<std::string> header;
  for (int j = 0; j < report.gram.cols(); ++j) header.push_back("c" + std::to_string(j));
  CsvWriter csv(path, header);
  for (int i = 0; i < report.gram.rows(); ++i) {
    std::vector<double> row(report.gram.cols());
    for (int j = 0; j < report.gram.cols(); ++j) row[j] = report.gram(i, j);
    csv.row(row);
  }
  csv.close();
}

int cmd_verify(const RunConfig& config, const Flags& flags) {
  const ProblemParams params = params_from_config(config);
  const KernelModel model(params);
  const Profile profile = profile_or_one(flags);
  FamilyOptions family;
  family.h = config.h_family;
  std::vector<std::string> outputs{"verify.json", "gram.csv"};
  json result = {{"profile",
                  flags.profile_path.empty() ? json("v = 1") : json(flags.profile_path)},
                 {"m", config.m}};

  if (profile.is_constant(1e-12) && std::abs(profile.value(0.0) - 1.0) < 1e-12) {
    const IndexReport report =
        translated_family_bound(model, profile, config.m, 1.0, nullptr, nullptr, family);
    const int covering = covering_morse_count(model, profile, report);
    const bool ok = report.verdict == Verdict::negative_definite &&
                    report.implied_lower_bound >= config.m && covering >= config.m;
    result["index_report"] = to_json(report);
    result["covering_morse_count"] = covering;
    result["conclusion"] = ok ? "ind(1) >= " + std::to_string(config.m) : "inconclusive";
    write_json(out_path(config, "verify.json"), result);
    write_gram(out_path(config, "gram.csv"), report);
    finish(config, params, "verify", "ind(1) >= m from translated first eigenfunctions",
           outputs, {{"conclusion", result["conclusion"]}});
    std::printf("verify: v = 1, %s (covering Morse count %d)\n",
                result["conclusion"].get<std::string>().c_str(), covering);
    return ok ? kExitOk : kExitInvariant;
  }

  const IntersectionResult intersection = check_intersection(profile);
  result["intersection"] = to_json(intersection);
  double horizon = 0.0;
  if (const auto* p = profile.periodic_data()) {
    horizon = config.horizon_periods * p->period;
  } else {
    const auto* g = profile.grid_data();
    horizon = std::min(-g->nodes.front(), g->nodes.back());
    if (!(horizon > 0.0))
      throw Error(ErrorKind::config, "grid profile must cover a symmetric range [-H, H]");
  }
  const OscillationResult osc = detect_oscillation(profile, horizon);
  result["oscillation"] = to_json(osc);
  std::string conclusion = "inconclusive";
  bool ok = false;
  if (intersection.kind == IntersectionKind::violation) {
    conclusion = "one-sided nonconstant profile";
  } else if (!osc.found) {
    conclusion = "oscillation condition not found";
  } else {
    const auto& cert = osc.certificate;
    NegativeDirectionOptions nd_options;
    nd_options.h = config.h_direction;
    const double a = config.window_start;
    const NegativeDirection direction =
        build_negative_direction(model, profile, cert, a, a + 5.0 * cert.M_osc, nd_options);
    result["negative_direction"] = to_json(direction);
    CsvWriter eta(out_path(config, "eta.csv"), {"t", "eta"});
    for (int i = 0; i < direction.eta.size(); ++i)
      eta.row(std::vector<double>{direction.nodes[i], direction.eta[i]});
    eta.close();
    outputs.push_back("eta.csv");
    const IndexReport report = translated_family_bound(model, profile, config.m,
                                                       5.0 * cert.M_osc, &direction, &cert, family);
    const int covering = covering_morse_count(model, profile, report);
    result["index_report"] = to_json(report);
    result["covering_morse_count"] = covering;
    write_gram(out_path(config, "gram.csv"), report);
    ok = direction.step1_ok() && direction.step2_ok() &&
         report.verdict == Verdict::negative_definite && config.m >= 2 &&
         report.implied_lower_bound >= config.m;
    if (ok) conclusion = "ind(v) >= " + std::to_string(config.m);
  }
  result["conclusion"] = conclusion;
  write_json(out_path(config, "verify.json"), result);
  if (!result.contains("index_report")) outputs = {"verify.json"};
  finish(config, params, "verify",
         "infinite Morse index of nonconstant solutions: oscillation condition, "
         "negative direction |v'|, translated family",
         outputs, {{"conclusion", conclusion}});
  std::printf("verify: %s\n", conclusion.c_str());
  return ok ? kExitOk : kExitInvariant;
}

int cmd_calibrate(const RunConfig& config) {
  const ProblemParams params = params_from_config(config);
  const CalibrationResult cal = calibrate_gamma(params, config.refinement);
  CsvWriter battery(out_path(config, "calibrate.csv"),
                    {"amplitude", "width", "t", "v", "P1v", "oracle", "gamma_point", "residual"});
  for (const auto& p : cal.battery)
    battery.row(std::vector<double>{p.amplitude, p.width, p.t, p.v, p.p1v, p.oracle,
                                    p.gamma_point, p.residual});
  battery.close();
  CsvWriter constants(out_path(config, "explicit_solution.csv"),
                      {"r", "lhs", "rhs", "rel_error"});
  for (const auto& c : cal.constant_checks)
    constants.row(std::vector<double>{c.r, c.lhs, c.rhs, c.rel_error});
  constants.close();
  double worst_constant = 0.0;
  for (const auto& c : cal.constant_checks) worst_constant = std::max(worst_constant, c.rel_error);
  const bool ok = cal.max_residual <= 0.01 && worst_constant <= 0.01;
  finish(config, with_gamma(params, cal.gamma, GammaSource::calibrated), "calibrate",
         "conformal property of the fractional Laplacian and the explicit singular solution",
         {"calibrate.csv", "explicit_solution.csv"},
         {{"gamma", cal.gamma},
          {"closed_form", cal.closed_form},
          {"spread", cal.spread},
          {"max_residual", cal.max_residual},
          {"explicit_solution_max_error", worst_constant},
          {"refinement", cal.refinement}});
  std::printf("calibrate: gamma = %.8g (closed form %.8g), spread %.2e, residual %.2e\n",
              cal.gamma, cal.closed_form, cal.spread, cal.max_residual);
  return ok ? kExitOk : kExitInvariant;
}

void add_flags(CLI::App* sub, Flags& flags, bool with_profile) {
  sub->add_option("--config", flags.config_path, "config file (key = value with [sections])");
  sub->add_option("--out", flags.out_dir, "output directory");
  sub->add_option("--workers", flags.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  sub->add_flag("--pure-power", flags.pure_power, "use the pure-power kernel A0 |t|^(-1-2s)");
  sub->add_option("--m", flags.m, "family size for verify")->check(CLI::PositiveNumber);
  if (with_profile)
    sub->add_option("--profile", flags.profile_path, "profile file (.json or .csv t,v); default v = 1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fylab: nonlocal operator P of the singular fractional Yamabe problem"};
  app.require_subcommand(1);
  Flags flags;
  auto* kernel = app.add_subcommand("kernel", "kernel table with asymptotic ratios");
  auto* lam = app.add_subcommand("lambda1", "first eigenvalue over grid.M_list");
  auto* solve = app.add_subcommand("solve", "bifurcation period and periodic branch");
  auto* morse = app.add_subcommand("morse", "Morse counts of a profile over grid.M_list");
  auto* verify = app.add_subcommand("verify", "Morse index lower bound certificate");
  auto* calibrate = app.add_subcommand("calibrate", "fit gamma against the n-dimensional oracle");
  auto* config = app.add_subcommand("config", "print the resolved config");
  for (auto* sub : {kernel, lam, solve, calibrate, config}) add_flags(sub, flags, false);
  for (auto* sub : {morse, verify}) add_flags(sub, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const RunConfig run = resolve(flags);
    if (config->parsed()) {
      std::fputs(format_config(run).c_str(), stdout);
      return kExitOk;
    }
    if (kernel->parsed()) return cmd_kernel(run);
    if (lam->parsed()) return cmd_lambda1(run);
    if (solve->parsed()) return cmd_solve(run);
    if (morse->parsed()) return cmd_morse(run, flags);
    if (verify->parsed()) return cmd_verify(run, flags);
    if (calibrate->parsed()) return cmd_calibrate(run);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitConfig;
}
