#pragma once

// Run configuration for the command-line front end. Configs are flat
// key=value files; command-line flags use the same keys and win over the file.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "nivib/analytic_phase.hpp"
#include "nivib/contrast.hpp"
#include "nivib/core.hpp"

namespace nivib {

inline constexpr const char* version = "1.0.0";

class config_error : public std::invalid_argument {
 public:
  config_error(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class grid_kind { log, linear };
enum class output_format { csv, json };

struct run_config {
  int geometry = 3;
  axis direction = axis::y;
  double half_separation = 0.05;          // L, m
  double speed = 2000.0;                  // m/s
  double bragg_angle = std::numbers::pi / 6.0;
  std::optional<double> amplitude;        // m, or rad for theta
  std::optional<double> freq_min;         // Hz
  std::optional<double> freq_max;         // Hz
  std::optional<std::size_t> n_points;
  grid_kind grid = grid_kind::log;
  std::size_t nodes = 1024;
  quadrature scheme = quadrature::trapezoid;
  std::size_t n_chi = 64;
  contrast_method method = contrast_method::phasor;
  bool literal_paper = false;
  std::string output = "contrast.csv";
  output_format format = output_format::csv;
  unsigned workers = 1;
  std::size_t mc_samples = 0;  // 0: deterministic quadrature
  std::uint64_t seed = 1;

  [[nodiscard]] geometry_kind geometry_kind_value() const {
    return geometry == 3 ? geometry_kind::three_blade : geometry_kind::four_blade;
  }

  // Translational runs use 0.1 um, rotational 1 urad.
  [[nodiscard]] double amplitude_or_default() const {
    if (amplitude) return *amplitude;
    return direction == axis::theta_z ? 1e-6 : 1e-7;
  }
  // Theta curves span [0.1, 1e3] Hz, the others [1, 1e4] Hz.
  [[nodiscard]] double freq_min_or_default() const {
    if (freq_min) return *freq_min;
    return direction == axis::theta_z ? 0.1 : 1.0;
  }
  [[nodiscard]] double freq_max_or_default() const {
    if (freq_max) return *freq_max;
    return direction == axis::theta_z ? 1e3 : 1e4;
  }
  // 200 points per decade on the default log grid.
  [[nodiscard]] std::size_t n_points_or_default() const {
    if (n_points) return *n_points;
    const double decades = std::log10(freq_max_or_default() / freq_min_or_default());
    return static_cast<std::size_t>(std::llround(200.0 * decades)) + 1;
  }

  [[nodiscard]] rotation_convention convention() const {
    return literal_paper ? rotation_convention::literal_paper : rotation_convention::velocity_consistent;
  }

  [[nodiscard]] averaging_config averaging() const {
    averaging_config a;
    a.n_samples = nodes;
    a.scheme = scheme;
    a.n_chi = n_chi;
    return a;
  }

  void validate() const {
    const auto positive = [](double v, const char* field) {
      if (!std::isfinite(v) || v <= 0.0) throw config_error(field, "must be positive and finite");
    };
    if (geometry != 3 && geometry != 4) throw config_error("geometry", "must be 3 or 4");
    positive(half_separation, "L");
    positive(speed, "v");
    positive(bragg_angle, "alpha");
    if (bragg_angle >= std::numbers::pi / 2) throw config_error("alpha", "must be below pi/2");
    const double amp = amplitude_or_default();
    if (!std::isfinite(amp) || amp < 0.0) throw config_error("amplitude", "must be non-negative and finite");
    const double fmin = freq_min_or_default();
    const double fmax = freq_max_or_default();
    if (!std::isfinite(fmin) || fmin < 0.0) throw config_error("freq_min", "must be non-negative and finite");
    if (!std::isfinite(fmax)) throw config_error("freq_max", "must be finite");
    if (!(fmin < fmax)) throw config_error("freq_max", "must exceed freq_min");
    if (grid == grid_kind::log && fmin <= 0.0) throw config_error("freq_min", "must be positive on a log grid");
    if (n_points_or_default() < 2) throw config_error("n_points", "must be at least 2");
    if (nodes < 16) throw config_error("nodes", "must be at least 16");
    if (n_chi < 8) throw config_error("n_chi", "must be at least 8");
    if (workers == 0) throw config_error("workers", "must be at least 1");
    if (output.empty()) throw config_error("output", "must not be empty");
  }

  [[nodiscard]] phase_model_input model_input() const {
    phase_model_input in;
    in.beam = make_beam(speed, bragg_angle);
    in.geom = make_geometry(geometry_kind_value(), half_separation);
    in.vib = make_vibration(direction, amplitude_or_default(), 0.0, 0.0);
    return in;
  }

  [[nodiscard]] std::vector<double> frequencies() const {
    const double fmin = freq_min_or_default();
    const double fmax = freq_max_or_default();
    const std::size_t n = n_points_or_default();
    return grid == grid_kind::log ? log_grid(fmin, fmax, n) : linear_grid(fmin, fmax, n);
  }
};

namespace config_detail {

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error(key, "expected a number, got '" + text + "'");
  }
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  try {
    if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative");
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error(key, "expected a non-negative integer, got '" + text + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw config_error(key, "expected true or false, got '" + text + "'");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace config_detail

inline axis parse_axis(const std::string& text) {
  if (text == "y") return axis::y;
  if (text == "x") return axis::x;
  if (text == "theta" || text == "theta_z") return axis::theta_z;
  if (text == "z") return axis::z;
  throw config_error("axis", "expected one of y, x, theta, z; got '" + text + "'");
}

// Apply key=value settings on top of `cfg`. Unknown keys are rejected.
inline void apply_setting(run_config& cfg, const std::string& key, const std::string& value) {
  using namespace config_detail;
  if (key == "geometry") {
    cfg.geometry = static_cast<int>(parse_unsigned(key, value));
  } else if (key == "axis") {
    cfg.direction = parse_axis(value);
  } else if (key == "L") {
    cfg.half_separation = parse_double(key, value);
  } else if (key == "v") {
    cfg.speed = parse_double(key, value);
  } else if (key == "alpha") {
    cfg.bragg_angle = parse_double(key, value);
  } else if (key == "amplitude") {
    cfg.amplitude = parse_double(key, value);
  } else if (key == "freq_min") {
    cfg.freq_min = parse_double(key, value);
  } else if (key == "freq_max") {
    cfg.freq_max = parse_double(key, value);
  } else if (key == "n_points") {
    cfg.n_points = parse_unsigned(key, value);
  } else if (key == "freq") {
    // min:max:n shorthand
    const auto a = value.find(':');
    const auto b = a == std::string::npos ? a : value.find(':', a + 1);
    if (b == std::string::npos) throw config_error("freq", "expected min:max:n, got '" + value + "'");
    cfg.freq_min = parse_double("freq_min", value.substr(0, a));
    cfg.freq_max = parse_double("freq_max", value.substr(a + 1, b - a - 1));
    cfg.n_points = parse_unsigned("n_points", value.substr(b + 1));
  } else if (key == "grid") {
    if (value == "log") cfg.grid = grid_kind::log;
    else if (value == "linear") cfg.grid = grid_kind::linear;
    else throw config_error(key, "expected log or linear, got '" + value + "'");
  } else if (key == "nodes") {
    cfg.nodes = parse_unsigned(key, value);
  } else if (key == "quadrature") {
    if (value == "trapezoid" || value == "uniform-trapezoid") cfg.scheme = quadrature::trapezoid;
    else if (value == "midpoint") cfg.scheme = quadrature::midpoint;
    else throw config_error(key, "expected trapezoid or midpoint, got '" + value + "'");
  } else if (key == "n_chi") {
    cfg.n_chi = parse_unsigned(key, value);
  } else if (key == "method") {
    if (value == "phasor") cfg.method = contrast_method::phasor;
    else if (value == "scan") cfg.method = contrast_method::scan;
    else throw config_error(key, "expected phasor or scan, got '" + value + "'");
  } else if (key == "literal_paper") {
    cfg.literal_paper = parse_bool(key, value);
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "format") {
    if (value == "csv") cfg.format = output_format::csv;
    else if (value == "json") cfg.format = output_format::json;
    else throw config_error(key, "expected csv or json, got '" + value + "'");
  } else if (key == "workers") {
    cfg.workers = static_cast<unsigned>(parse_unsigned(key, value));
  } else if (key == "mc_samples") {
    cfg.mc_samples = parse_unsigned(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_unsigned(key, value);
  } else {
    throw config_error(key, "unknown configuration key");
  }
}

// Parse a flat key=value file; '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(std::istream& is, const std::string& origin = "config") {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error(origin + ":" + std::to_string(lineno), "expected key=value");
    }
    out[config_detail::trim(line.substr(0, eq))] = config_detail::trim(line.substr(eq + 1));
  }
  return out;
}

inline std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("config", "cannot open '" + path + "'");
  return parse_key_values(is, path);
}

inline run_config config_from_settings(const std::map<std::string, std::string>& settings, run_config base = {}) {
  for (const auto& [k, v] : settings) apply_setting(base, k, v);
  return base;
}

// Every field, with defaults resolved, in the same keys the file format uses.
inline nlohmann::json to_json(const run_config& c) {
  nlohmann::json j;
  j["geometry"] = c.geometry;
  j["axis"] = std::string(to_string(c.direction));
  j["L"] = c.half_separation;
  j["v"] = c.speed;
  j["alpha"] = c.bragg_angle;
  j["amplitude"] = c.amplitude_or_default();
  j["freq_min"] = c.freq_min_or_default();
  j["freq_max"] = c.freq_max_or_default();
  j["n_points"] = c.n_points_or_default();
  j["grid"] = c.grid == grid_kind::log ? "log" : "linear";
  j["nodes"] = c.nodes;
  j["quadrature"] = c.scheme == quadrature::trapezoid ? "trapezoid" : "midpoint";
  j["n_chi"] = c.n_chi;
  j["method"] = std::string(to_string(c.method));
  j["literal_paper"] = c.literal_paper;
  j["output"] = c.output;
  j["format"] = c.format == output_format::csv ? "csv" : "json";
  j["workers"] = c.workers;
  j["mc_samples"] = c.mc_samples;
  j["seed"] = c.seed;
  return j;
}

inline run_config config_from_json(const nlohmann::json& j) {
  run_config c;
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      apply_setting(c, key, value.get<std::string>());
    } else if (value.is_boolean()) {
      apply_setting(c, key, value.get<bool>() ? "true" : "false");
    } else if (value.is_number_float()) {
      // Exact round trip through text.
      std::ostringstream os;
      os.precision(17);
      os << value.get<double>();
      apply_setting(c, key, os.str());
    } else if (value.is_number()) {
      apply_setting(c, key, value.dump());
    } else {
      throw config_error(key, "unsupported JSON value");
    }
  }
  return c;
}

}  // namespace nivib
