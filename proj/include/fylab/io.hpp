#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "fylab/kernel.hpp"
#include "fylab/profile.hpp"
#include "fylab/solver.hpp"
#include "fylab/spectral.hpp"
#include "fylab/verify.hpp"

namespace fylab {

/// Everything a CLI run depends on. All algorithms are deterministic, so the
/// config alone fixes every CSV output.
struct RunConfig {
  // [problem]
  int n = 3;
  double s = 0.5;
  std::string gamma_mode = "closed_form";  ///< closed_form | calibrated | explicit
  double gamma_value = 0.0;                ///< used when gamma_mode = explicit
  bool pure_power = false;

  // [kernel]
  double table_t_min = 1e-4;
  double table_t_max = 16.0;
  int table_points = 161;

  // [grid]
  double M = 8.0;
  double h = 0.025;
  std::vector<double> M_list{1.0, 2.0, 4.0, 8.0, 16.0};

  // [solver]
  double L_start_factor = 1.05;  ///< first period as a multiple of L*
  double L_end_factor = 1.5;
  int steps = 4;
  int N_modes = 64;
  int oversample = 4;
  double newton_tol = 1e-12;
  int profile_samples = 256;  ///< samples per period in profile files

  // [verify]
  int m = 5;
  double horizon_periods = 3.0;
  double window_start = 0.0;
  double h_direction = 1.0 / 160.0;
  double h_family = 1.0 / 40.0;

  // [calibrate]
  int refinement = 1;

  // [tolerances]
  double residual_tol = 1e-8;
  double pointwise_tol = 1e-5;
  double mean_tol = 1e-8;

  // [output]
  std::string out_dir = "fylab_out";
  int workers = 1;

  bool operator==(const RunConfig&) const = default;
};

/// Parses flat "key = value" lines grouped under "[section]" headers.
/// Blank lines and '#' comments are ignored; keys not given keep their
/// defaults. Throws Error(config) naming the offending line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Every key, doubles at 17 significant digits, so parse(format(c)) == c.
std::string format_config(const RunConfig& config);
nlohmann::json config_to_json(const RunConfig& config);

/// Parameters and kernel selected by the config.
ProblemParams params_from_config(const RunConfig& config);
GammaMode gamma_mode_from_config(const RunConfig& config);

/// "%.17g".
std::string format_double(double x);

/// Comma-separated file with a header row, written on close or destruction.
class CsvWriter {
 public:
  CsvWriter(std::string path, std::vector<std::string> header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);
  /// Throws Error(io) with the path if the file cannot be written.
  void close();

 private:
  std::string path_;
  std::size_t columns_;
  std::string buffer_;
  bool closed_ = false;
};

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& value);

/// Run manifest: command, the result it instantiates, the resolved config
/// (as JSON and as config text), derived constants, output files and a
/// UTC timestamp (the only field that changes between identical runs).
nlohmann::json make_manifest(const std::string& command, const std::string& anchor,
                             const RunConfig& config, const ProblemParams& params,
                             const std::vector<std::string>& outputs);

nlohmann::json params_to_json(const ProblemParams& params);

/// Profiles as JSON: {"kind": "constant" | "periodic" | "grid", ...}.
nlohmann::json profile_to_json(const Profile& profile);
Profile profile_from_json(const nlohmann::json& value);
/// ".json" files as above; ".csv" files with columns t,v become grid
/// profiles without far field. Throws Error(io) or Error(config).
Profile load_profile(const std::string& path);
/// Columns t,v at `samples` equally spaced points of [a, b).
void write_profile_samples(const std::string& path, const Profile& profile, double a,
                           double b, int samples);

nlohmann::json to_json(const BranchPoint& point);
nlohmann::json to_json(const EigenResult& result);
nlohmann::json to_json(const MorseCount& count);
nlohmann::json to_json(const IntersectionResult& result);
nlohmann::json to_json(const OscillationCertificate& cert);
nlohmann::json to_json(const OscillationResult& result);
/// Scalars and point lists; eta itself goes to CSV.
nlohmann::json to_json(const NegativeDirection& direction);
nlohmann::json to_json(const IndexReport& report);

}  // namespace fylab
