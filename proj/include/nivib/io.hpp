#pragma once

// Result files: contrast CSV, JSON provenance sidecar, oracle golden files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "nivib/analytic_phase.hpp"
#include "nivib/contrast.hpp"
#include "nivib/path_oracle.hpp"
#include "nivib/run_config.hpp"

namespace nivib {

// 17 significant digits; round-trips every double. Negative zero prints as 0.
[[nodiscard]] inline std::string format_full(double v) { return fmt::format("{:.16e}", v == 0.0 ? 0.0 : v); }

inline void write_curve_csv(std::ostream& os, const contrast_curve& curve) {
  os << "frequency_hz,contrast\n";
  for (const auto& p : curve.points) os << format_full(p.frequency_hz) << ',' << format_full(p.contrast) << '\n';
}

struct csv_curve {
  std::vector<double> frequency_hz;
  std::vector<double> contrast;
};

inline csv_curve read_curve_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "frequency_hz,contrast") {
    throw std::runtime_error("contrast CSV: missing 'frequency_hz,contrast' header");
  }
  csv_curve out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("contrast CSV: malformed row '" + line + "'");
    out.frequency_hz.push_back(std::stod(line.substr(0, comma)));
    out.contrast.push_back(std::stod(line.substr(comma + 1)));
  }
  return out;
}

[[nodiscard]] inline nlohmann::json curve_provenance(const contrast_curve& curve, const run_config& cfg) {
  const phase_model_input& in = curve.inputs;
  nlohmann::json j;
  j["tool"] = "nivib";
  j["version"] = version;
  j["config"] = to_json(cfg);
  j["model"] = std::string(to_string(curve.model));
  j["rotation_convention"] = std::string(to_string(curve.convention));
  j["contrast_method"] = cfg.mc_samples > 0 ? std::string("monte-carlo") : std::string(to_string(curve.method));
  j["quadrature"] = {
      {"scheme", std::string(to_string(curve.averaging.scheme))},
      {"initial_nodes", curve.averaging.n_samples},
      {"max_nodes", curve.averaging.max_samples},
      {"doubling_tolerance", curve.averaging.tolerance},
      {"n_chi", curve.averaging.n_chi},
  };
  if (cfg.mc_samples > 0) j["monte_carlo"] = {{"samples", cfg.mc_samples}, {"seed", cfg.seed}};
  j["constants"] = {{"neutron_mass", in.constants.neutron_mass}, {"hbar", in.constants.hbar}};
  j["derived"] = {
      {"v_x", in.beam.v_x},
      {"v_y", in.beam.v_y},
      {"tau", in.tau()},
      {"wavelength", in.beam.wavelength(in.constants)},
  };
  j["notes"] = {
      "Bragg angle, frequency grid and quadrature resolution are tool defaults, not measured values.",
      "The random vibration phase is integrated with a deterministic uniform rule unless monte_carlo is present.",
  };
  j["points"] = curve.points.size();
  return j;
}

[[nodiscard]] inline nlohmann::json curve_to_json(const contrast_curve& curve, const run_config& cfg) {
  nlohmann::json j = curve_provenance(curve, cfg);
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : curve.points) pts.push_back({{"frequency_hz", p.frequency_hz}, {"contrast", p.contrast}});
  j["curve"] = std::move(pts);
  return j;
}

[[nodiscard]] inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// Writes the CSV plus its sidecar, or a single JSON document.
inline std::vector<std::filesystem::path> write_curve(const contrast_curve& curve, const run_config& cfg) {
  const std::filesystem::path out = cfg.output;
  if (cfg.format == output_format::json) {
    write_text_file(out, curve_to_json(curve, cfg).dump(2) + "\n");
    return {out};
  }
  std::ostringstream csv;
  write_curve_csv(csv, curve);
  write_text_file(out, csv.str());
  const auto side = sidecar_path(out);
  write_text_file(side, curve_provenance(curve, cfg).dump(2) + "\n");
  return {out, side};
}

// ---------------------------------------------------------------------------
// Golden files: one record per line,
//   <hash> <delta_phi> <model> <mode> key=value ...
// where hash is FNV-1a 64 over the canonical parameter string.

struct golden_case {
  geometry_kind geometry = geometry_kind::three_blade;
  axis direction = axis::y;
  double half_separation = 0.05;
  double speed = 2000.0;
  double bragg_angle = std::numbers::pi / 6.0;
  double amplitude = 1e-7;
  double frequency_hz = 0.0;
  double varphi = 0.0;

  [[nodiscard]] phase_model_input input() const {
    phase_model_input in;
    in.beam = make_beam(speed, bragg_angle);
    in.geom = make_geometry(geometry, half_separation);
    in.vib = make_vibration(direction, amplitude, two_pi * frequency_hz, varphi);
    return in;
  }

  [[nodiscard]] std::string canonical() const {
    return fmt::format("geometry={} axis={} L={} v={} alpha={} amplitude={} f={} varphi={}",
                       geometry == geometry_kind::three_blade ? 3 : 4, to_string(direction), format_full(half_separation),
                       format_full(speed), format_full(bragg_angle), format_full(amplitude), format_full(frequency_hz),
                       format_full(varphi));
  }
};

[[nodiscard]] inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[nodiscard]] inline std::string input_hash(const golden_case& c) { return fmt::format("{:016x}", fnv1a64(c.canonical())); }

struct golden_record {
  golden_case input;
  std::string hash;
  double delta_phi = 0.0;
};

// The cases the test suite pins: reference parameters at the spot frequencies
// used for each axis, plus a phase grid for the y and theta models.
[[nodiscard]] inline std::vector<golden_case> default_golden_cases() {
  std::vector<golden_case> cases;
  const auto add = [&](geometry_kind g, axis a, double amp, double f, double varphi) {
    golden_case c;
    c.geometry = g;
    c.direction = a;
    c.amplitude = amp;
    c.frequency_hz = f;
    c.varphi = varphi;
    cases.push_back(c);
  };
  using std::numbers::pi;
  add(geometry_kind::three_blade, axis::y, 1e-7, 100.0, 0.0);
  add(geometry_kind::four_blade, axis::y, 1e-7, 100.0, 0.0);
  add(geometry_kind::three_blade, axis::x, 1e-7, 100.0, pi / 4);
  add(geometry_kind::four_blade, axis::x, 1e-7, 100.0, pi / 4);
  add(geometry_kind::three_blade, axis::theta_z, 1e-6, 10.0, pi / 2);
  add(geometry_kind::four_blade, axis::theta_z, 1e-6, 10.0, 0.0);
  for (double f : {1.0, 10.0, 100.0}) {
    for (int k = 0; k < 8; ++k) {
      const double varphi = two_pi * k / 8.0;
      add(geometry_kind::three_blade, axis::y, 1e-7, f, varphi);
      add(geometry_kind::four_blade, axis::y, 1e-7, f, varphi);
      add(geometry_kind::three_blade, axis::theta_z, 1e-6, f, varphi);
      add(geometry_kind::four_blade, axis::theta_z, 1e-6, f, varphi);
    }
  }
  return cases;
}

[[nodiscard]] inline golden_record make_golden_record(const golden_case& c) {
  return {c, input_hash(c), trace_any(c.input(), trace_mode::nominal_time).delta_phi};
}

inline void write_golden(std::ostream& os, const std::vector<golden_record>& records) {
  os << "# nivib oracle golden values (nominal-time path tracer)\n";
  os << "# hash delta_phi model mode parameters\n";
  for (const auto& r : records) {
    const auto model = select_model(r.input.direction, r.input.geometry);
    os << r.hash << ' ' << format_full(r.delta_phi) << ' ' << to_string(model) << " nominal-time "
       << r.input.canonical() << '\n';
  }
}

inline std::vector<golden_record> read_golden(std::istream& is) {
  std::vector<golden_record> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    golden_record r;
    std::string model, mode;
    ls >> r.hash >> r.delta_phi >> model >> mode;
    std::string kv;
    std::map<std::string, std::string> params;
    while (ls >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::runtime_error("golden: malformed field '" + kv + "'");
      params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!ls.eof() || params.size() != 8) throw std::runtime_error("golden: malformed record '" + line + "'");
    r.input.geometry = params.at("geometry") == "3" ? geometry_kind::three_blade : geometry_kind::four_blade;
    r.input.direction = parse_axis(params.at("axis"));
    r.input.half_separation = std::stod(params.at("L"));
    r.input.speed = std::stod(params.at("v"));
    r.input.bragg_angle = std::stod(params.at("alpha"));
    r.input.amplitude = std::stod(params.at("amplitude"));
    r.input.frequency_hz = std::stod(params.at("f"));
    r.input.varphi = std::stod(params.at("varphi"));
    out.push_back(r);
  }
  return out;
}

}  // namespace nivib
