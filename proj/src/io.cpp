#include "fylab/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "fylab/error.hpp"

namespace fylab {

namespace {

using nlohmann::json;

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, "expected a number, got '" + text + "'");
  }
  if (used != text.size())
    throw Error(ErrorKind::config, "expected a number, got '" + text + "'");
  return value;
}

int parse_int(const std::string& text) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::config, "expected an integer, got '" + text + "'");
  }
  if (used != text.size())
    throw Error(ErrorKind::config, "expected an integer, got '" + text + "'");
  return static_cast<int>(value);
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorKind::config, "expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw Error(ErrorKind::config, "empty entry in list '" + text + "'");
    out.push_back(parse_double(item));
  }
  if (out.empty()) throw Error(ErrorKind::config, "empty list");
  return out;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_double(values[i]);
  }
  return out;
}

struct Key {
  const char* section;
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<json(const RunConfig&)> to_json;
};

template <typename T>
Key make_key(const char* section, const char* name, T RunConfig::*field) {
  Key key{section, name, {}, {}, {}};
  key.to_json = [field](const RunConfig& c) { return json(c.*field); };
  if constexpr (std::is_same_v<T, int>) {
    key.get = [field](const RunConfig& c) { return std::to_string(c.*field); };
    key.set = [field](RunConfig& c, const std::string& v) { c.*field = parse_int(v); };
  } else if constexpr (std::is_same_v<T, double>) {
    key.get = [field](const RunConfig& c) { return format_double(c.*field); };
    key.set = [field](RunConfig& c, const std::string& v) { c.*field = parse_double(v); };
  } else if constexpr (std::is_same_v<T, bool>) {
    key.get = [field](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); };
    key.set = [field](RunConfig& c, const std::string& v) { c.*field = parse_bool(v); };
  } else if constexpr (std::is_same_v<T, std::string>) {
    key.get = [field](const RunConfig& c) { return c.*field; };
    key.set = [field](RunConfig& c, const std::string& v) { c.*field = v; };
  } else {
    key.get = [field](const RunConfig& c) { return format_list(c.*field); };
    key.set = [field](RunConfig& c, const std::string& v) { c.*field = parse_list(v); };
  }
  return key;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      make_key("problem", "n", &RunConfig::n),
      make_key("problem", "s", &RunConfig::s),
      make_key("problem", "gamma_mode", &RunConfig::gamma_mode),
      make_key("problem", "gamma_value", &RunConfig::gamma_value),
      make_key("problem", "pure_power", &RunConfig::pure_power),
      make_key("kernel", "table_t_min", &RunConfig::table_t_min),
      make_key("kernel", "table_t_max", &RunConfig::table_t_max),
      make_key("kernel", "table_points", &RunConfig::table_points),
      make_key("grid", "M", &RunConfig::M),
      make_key("grid", "h", &RunConfig::h),
      make_key("grid", "M_list", &RunConfig::M_list),
      make_key("solver", "L_start_factor", &RunConfig::L_start_factor),
      make_key("solver", "L_end_factor", &RunConfig::L_end_factor),
      make_key("solver", "steps", &RunConfig::steps),
      make_key("solver", "N_modes", &RunConfig::N_modes),
      make_key("solver", "oversample", &RunConfig::oversample),
      make_key("solver", "newton_tol", &RunConfig::newton_tol),
      make_key("solver", "profile_samples", &RunConfig::profile_samples),
      make_key("verify", "m", &RunConfig::m),
      make_key("verify", "horizon_periods", &RunConfig::horizon_periods),
      make_key("verify", "window_start", &RunConfig::window_start),
      make_key("verify", "h_direction", &RunConfig::h_direction),
      make_key("verify", "h_family", &RunConfig::h_family),
      make_key("calibrate", "refinement", &RunConfig::refinement),
      make_key("tolerances", "residual_tol", &RunConfig::residual_tol),
      make_key("tolerances", "pointwise_tol", &RunConfig::pointwise_tol),
      make_key("tolerances", "mean_tol", &RunConfig::mean_tol),
      make_key("output", "out_dir", &RunConfig::out_dir),
      make_key("output", "workers", &RunConfig::workers),
  };
  return table;
}

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::config, what); };
  if (c.n < 1) fail("problem.n must be >= 1");
  if (!(c.s > 0.0 && c.s < 1.0)) fail("problem.s must lie in (0, 1)");
  if (!(c.n > 2.0 * c.s)) fail("problem: need n > 2s");
  gamma_source_from_string(c.gamma_mode);
  if (c.gamma_mode == "explicit" && !(c.gamma_value > 0.0))
    fail("problem.gamma_value must be positive when gamma_mode = explicit");
  if (!(c.table_t_min > 0.0 && c.table_t_max > c.table_t_min) || c.table_points < 2)
    fail("kernel: need 0 < table_t_min < table_t_max and table_points >= 2");
  if (!(c.M > 0.0 && c.h > 0.0)) fail("grid: M and h must be positive");
  for (double M : c.M_list)
    if (!(M > 0.0)) fail("grid.M_list entries must be positive");
  if (!(c.L_start_factor > 1.0 && c.L_end_factor >= c.L_start_factor))
    fail("solver: need 1 < L_start_factor <= L_end_factor");
  if (c.steps < 0 || c.N_modes < 4 || c.oversample < 1 || c.profile_samples < 8)
    fail("solver: steps >= 0, N_modes >= 4, oversample >= 1, profile_samples >= 8");
  if (c.m < 1 || !(c.horizon_periods > 0.0) || !(c.h_direction > 0.0) ||
      !(c.h_family > 0.0))
    fail("verify: m >= 1 and positive horizon_periods, h_direction, h_family");
  if (c.refinement < 1) fail("calibrate.refinement must be >= 1");
  if (c.workers < 1) fail("output.workers must be >= 1");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json vector_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json window_json(const Window& w) {
  return {{"a", w.a}, {"b", w.b}, {"max_v", w.max_v}, {"min_v", w.min_v}};
}

// JSON cannot hold NaN; skipped checks are reported as null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::stringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string context = "config line " + std::to_string(line_no) + " '" + trim(raw) + "'";
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::config, context + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& key : keys()) known = known || section == key.section;
      if (!known) throw Error(ErrorKind::config, context + ": unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, context + ": expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw Error(ErrorKind::config, context + ": key outside a section");
    const Key* match = nullptr;
    for (const auto& key : keys())
      if (section == key.section && name == key.name) match = &key;
    if (!match)
      throw Error(ErrorKind::config, context + ": unknown key '" + section + "." + name + "'");
    try {
      match->set(config, value);
    } catch (const Error& e) {
      throw Error(ErrorKind::config, context + ": " + e.what());
    }
  }
  validate(config);
  return config;
}

RunConfig load_config(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return parse_config(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string format_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& key : keys()) {
    if (section != key.section) {
      if (!section.empty()) out += "\n";
      section = key.section;
      out += "[" + section + "]\n";
    }
    out += std::string(key.name) + " = " + key.get(config) + "\n";
  }
  return out;
}

json config_to_json(const RunConfig& config) {
  json out = json::object();
  for (const auto& key : keys()) out[key.section][key.name] = key.to_json(config);
  return out;
}

GammaMode gamma_mode_from_config(const RunConfig& config) {
  switch (gamma_source_from_string(config.gamma_mode)) {
    case GammaSource::closed_form: return GammaMode::closed_form();
    case GammaSource::calibrated: return GammaMode::calibrated();
    case GammaSource::explicit_value: return GammaMode::explicit_value(config.gamma_value);
  }
  return GammaMode::closed_form();
}

ProblemParams params_from_config(const RunConfig& config) {
  return make_params(config.n, config.s, gamma_mode_from_config(config));
}

CsvWriter::CsvWriter(std::string path, std::vector<std::string> header)
    : path_(std::move(path)), columns_(header.size()) {
  row(header);
}

CsvWriter::~CsvWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
    }
  }
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw Error(ErrorKind::invariant, path_ + ": row has " + std::to_string(cells.size()) +
                                          " cells, header has " + std::to_string(columns_));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvWriter::close() {
  closed_ = true;
  write_text(path_, buffer_);
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json(const std::string& path, const json& value) {
  write_text(path, value.dump(2) + "\n");
}

json params_to_json(const ProblemParams& params) {
  return {{"n", params.n},
          {"s", params.s},
          {"p", params.p},
          {"lin_coeff", params.lin_coeff},
          {"c_ns", params.c_ns},
          {"kappa_ns", params.kappa_ns},
          {"gamma_ns", params.gamma_ns},
          {"gamma_source", to_string(params.gamma_source)},
          {"decay_rate", params.decay_rate()}};
}

json make_manifest(const std::string& command, const std::string& anchor,
                   const RunConfig& config, const ProblemParams& params,
                   const std::vector<std::string>& outputs) {
  return {{"command", command},
          {"instantiates", anchor},
          {"config", config_to_json(config)},
          {"config_text", format_config(config)},
          {"params", params_to_json(params)},
          {"outputs", outputs},
          {"timestamp", utc_timestamp()}};
}

json profile_to_json(const Profile& profile) {
  if (const auto* p = profile.periodic_data()) {
    if (p->coeffs.size() == 1 && p->coeffs[0] == 1.0) return {{"kind", "constant"}, {"value", 1.0}};
    return {{"kind", "periodic"}, {"period", p->period}, {"coeffs", p->coeffs}, {"shift", p->shift}};
  }
  const auto* g = profile.grid_data();
  json out = {{"kind", "grid"}, {"nodes", g->nodes}, {"values", g->values}};
  out["far_field"] = g->far_field ? json(*g->far_field) : json(nullptr);
  return out;
}

Profile profile_from_json(const json& value) {
  try {
    const std::string kind = value.at("kind").get<std::string>();
    if (kind == "constant") return Profile::constant(value.value("value", 1.0));
    if (kind == "periodic")
      return Profile::periodic(value.at("period").get<double>(),
                               value.at("coeffs").get<std::vector<double>>(),
                               value.value("shift", 0.0));
    if (kind == "grid") {
      std::optional<double> far;
      if (value.contains("far_field") && !value.at("far_field").is_null())
        far = value.at("far_field").get<double>();
      return Profile::grid(value.at("nodes").get<std::vector<double>>(),
                           value.at("values").get<std::vector<double>>(), far);
    }
    throw Error(ErrorKind::config, "unknown profile kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, std::string("malformed profile: ") + e.what());
  }
}

Profile load_profile(const std::string& path) {
  const std::string text = read_text(path);
  const auto ext = std::filesystem::path(path).extension().string();
  try {
    if (ext == ".json") {
      json value;
      try {
        value = json::parse(text);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::config, std::string("invalid JSON: ") + e.what());
      }
      return profile_from_json(value);
    }
    if (ext == ".csv") {
      std::stringstream in(text);
      std::string line;
      std::vector<double> t;
      std::vector<double> v;
      int line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || (line_no == 1 && line.rfind("t", 0) == 0)) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
          throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected t,v");
        t.push_back(parse_double(trim(line.substr(0, comma))));
        v.push_back(parse_double(trim(line.substr(comma + 1))));
      }
      return Profile::grid(std::move(t), std::move(v), std::nullopt);
    }
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
  throw Error(ErrorKind::config, path + ": profile files must end in .json or .csv");
}

void write_profile_samples(const std::string& path, const Profile& profile, double a, double b,
                           int samples) {
  CsvWriter csv(path, {"t", "v"});
  for (int i = 0; i < samples; ++i) {
    const double t = a + (b - a) * i / samples;
    csv.row(std::vector<double>{t, profile.value(t)});
  }
  csv.close();
}

json to_json(const BranchPoint& point) {
  return {{"L", point.L},
          {"amplitude", point.amplitude},
          {"residual", point.residual},
          {"min_v", point.min_v},
          {"max_v", point.max_v},
          {"mean_identity", point.mean_identity},
          {"newton_iters", point.newton_iters},
          {"profile", profile_to_json(point.profile)}};
}

json to_json(const EigenResult& r) {
  return {{"lambda1", r.lambda1},
          {"M", r.M},
          {"h", r.h},
          {"kernel_mode", r.kernel_mode == KernelMode::full ? "full" : "pure_power"},
          {"residual", r.residual},
          {"min_interior", r.min_interior},
          {"size", r.phi1.size()}};
}

json to_json(const MorseCount& c) {
  return {{"M", c.M},
          {"center", c.center},
          {"h", c.h},
          {"count", c.count},
          {"negative_eigenvalues", c.negative_eigenvalues},
          {"tol_negative", c.tol_negative}};
}

json to_json(const IntersectionResult& r) {
  const char* kind = r.kind == IntersectionKind::constant_one ? "constant_one"
                     : r.kind == IntersectionKind::crosses    ? "crosses"
                                                              : "violation";
  return {{"kind", kind},
          {"crossings", r.crossings},
          {"side", r.side},
          {"sup_deviation", r.sup_deviation},
          {"range", {r.range_a, r.range_b}}};
}

json to_json(const OscillationCertificate& c) {
  json windows = json::array();
  for (const auto& w : c.witness_windows) windows.push_back(window_json(w));
  return {{"M_osc", c.M_osc},
          {"epsilon", c.epsilon},
          {"horizon", c.horizon},
          {"windows_checked", c.windows_checked},
          {"witness_windows", windows}};
}

json to_json(const OscillationResult& r) {
  json out = {{"found", r.found}, {"M_tried", r.M_tried}, {"epsilon_tried", r.epsilon_tried}};
  if (r.found)
    out["certificate"] = to_json(r.certificate);
  else
    out["failure"] = window_json(r.failure);
  return out;
}

json to_json(const NegativeDirection& d) {
  return {{"interval", {d.a, d.b}},
          {"M_osc", d.M_osc},
          {"epsilon", d.epsilon},
          {"crossings", d.crossings},
          {"x0", d.x0},
          {"x1", d.x1},
          {"critical_points", d.critical_points},
          {"root_residual", d.root_residual},
          {"positive_variation", d.positive_variation},
          {"negative_variation", d.negative_variation},
          {"step1_ok", d.step1_ok()},
          {"h", d.h},
          {"size", d.eta.size()},
          {"Q_value", d.Q_value},
          {"Q_reduced", number(d.Q_reduced)},
          {"Q_reduced_inner", number(d.Q_reduced_inner)},
          {"exterior_term", number(d.exterior_term)},
          {"reduced_rel_diff", number(d.reduced_rel_diff)},
          {"Q_mollified", number(d.Q_mollified)},
          {"mollified_rel_change", number(d.mollified_rel_change)},
          {"certified_bound", d.certified_bound},
          {"step2_ok", d.step2_ok()},
          {"sup_norm", d.sup_norm},
          {"l1_norm", d.l1_norm},
          {"delta", d.delta}};
}

json to_json(const IndexReport& r) {
  json gram = json::array();
  for (int i = 0; i < r.gram.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < r.gram.cols(); ++j) row.push_back(r.gram(i, j));
    gram.push_back(row);
  }
  json trials = json::array();
  for (const auto& t : r.trials)
    trials.push_back({{"d", t.d},
                      {"d_actual", t.d_actual},
                      {"max_offdiag", t.max_offdiag},
                      {"offdiag_bound", t.offdiag_bound},
                      {"max_eigenvalue", t.max_eigenvalue},
                      {"negative_definite", t.negative_definite}});
  json out = {{"m", r.m},
              {"constant_profile", r.constant_profile},
              {"d", r.d},
              {"d_actual", r.d_actual},
              {"support_width", r.support_width},
              {"centers", r.centers},
              {"gram", gram},
              {"max_offdiag", r.max_offdiag},
              {"offdiag_bound", r.offdiag_bound},
              {"gram_eigenvalues", vector_json(r.gram_eigenvalues)},
              {"max_eigenvalue", r.max_eigenvalue},
              {"max_diagonal", r.max_diagonal},
              {"verdict", r.verdict == Verdict::negative_definite ? "negative_definite"
                                                                  : "inconclusive"},
              {"implied_lower_bound", r.implied_lower_bound},
              {"h", r.h},
              {"trials", trials}};
  if (r.constant_profile) {
    out["template_lambda1"] = r.template_lambda1;
    out["template_M"] = r.template_M;
  }
  return out;
}

}  // namespace fylab
