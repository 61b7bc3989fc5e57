// nivib: contrast of vibrating neutron interferometers.
//
//   nivib sweep           contrast vs frequency for one geometry and axis
//   nivib single          Delta Phi at one frequency and phase, model vs oracle
//   nivib reproduce-fig3  contrast curves for y, x and theta, both geometries
//   nivib golden          regenerate the oracle golden file
//
// Exit codes: 0 success, 2 configuration error, 3 numerical error, 1 I/O.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "nivib/io.hpp"
#include "nivib/nivib.hpp"
#include "nivib/run_config.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;
constexpr int exit_io = 1;

const std::vector<std::string> config_keys = {
    "geometry", "axis",  "L",      "v",      "alpha",  "amplitude", "freq_min", "freq_max", "n_points", "freq",
    "grid",     "nodes", "quadrature", "n_chi", "method", "output", "format", "workers", "mc_samples", "seed"};

struct config_flags {
  std::string config_file;
  std::map<std::string, std::string> values;
  bool literal_paper = false;
  std::vector<CLI::Option*> options;
};

void add_config_flags(CLI::App& cmd, config_flags& flags) {
  cmd.add_option("--config", flags.config_file, "key=value configuration file (flags override it)");
  for (const auto& key : config_keys) {
    std::string names = "--" + key;
    if (key.find('_') != std::string::npos) {
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      names += ",--" + dashed;
    }
    flags.options.push_back(cmd.add_option(names, flags.values[key], "configuration key '" + key + "'"));
  }
  cmd.add_flag("--literal_paper,--literal-paper", flags.literal_paper, "use the as-printed rotational velocity forms");
}

nivib::run_config resolve(const config_flags& flags) {
  std::map<std::string, std::string> settings;
  if (!flags.config_file.empty()) settings = nivib::read_key_value_file(flags.config_file);
  nivib::run_config cfg;
  for (const auto& [k, v] : settings) nivib::apply_setting(cfg, k, v);
  for (std::size_t i = 0; i < config_keys.size(); ++i) {
    if (flags.options[i]->count() > 0) nivib::apply_setting(cfg, config_keys[i], flags.values.at(config_keys[i]));
  }
  if (flags.literal_paper) cfg.literal_paper = true;
  cfg.validate();
  return cfg;
}

nivib::contrast_curve run_curve(const nivib::run_config& cfg) {
  const auto input = cfg.model_input();
  const auto model = nivib::select_model(cfg.direction, cfg.geometry_kind_value());
  const auto freqs = cfg.frequencies();
  if (cfg.mc_samples == 0) {
    nivib::sweep_options opt;
    opt.method = cfg.method;
    opt.convention = cfg.convention();
    opt.workers = cfg.workers;
    return nivib::sweep(input, model, freqs, cfg.averaging(), opt);
  }
  nivib::contrast_curve curve;
  curve.inputs = input;
  curve.model = model;
  curve.convention = cfg.convention();
  curve.averaging = cfg.averaging();
  for (double f : freqs) {
    nivib::phase_model_input in = input;
    in.vib.omega = nivib::two_pi * f;
    const nivib::phase_model pm{in, model, cfg.convention()};
    curve.points.push_back({f, nivib::contrast_monte_carlo(pm, cfg.mc_samples, cfg.seed)});
  }
  return curve;
}

int run_sweep(const config_flags& flags) {
  const auto cfg = resolve(flags);
  const auto curve = run_curve(cfg);
  if (cfg.output == "-") {
    nivib::write_curve_csv(std::cout, curve);
    return 0;
  }
  for (const auto& path : nivib::write_curve(curve, cfg)) fmt::print("wrote {}\n", path.string());
  return 0;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-12); }

int run_single(const config_flags& flags, double frequency_hz, double varphi) {
  const auto cfg = resolve(flags);
  if (!std::isfinite(frequency_hz) || frequency_hz < 0.0) throw nivib::config_error("frequency", "must be non-negative");
  nivib::phase_model_input in = cfg.model_input();
  in.vib = nivib::make_vibration(cfg.direction, cfg.amplitude_or_default(), nivib::two_pi * frequency_hz, varphi);
  const auto model = nivib::select_model(cfg.direction, cfg.geometry_kind_value());

  const double analytic = nivib::evaluate(model, in, cfg.convention()).delta_phi;
  const auto nominal = nivib::trace_any(in, nivib::trace_mode::nominal_time);
  const auto event = nivib::trace_any(in, nivib::trace_mode::event_resolved);

  fmt::print("model: {}\n", nivib::to_string(model));
  fmt::print("geometry: {}\naxis: {}\n", cfg.geometry, nivib::to_string(cfg.direction));
  fmt::print("frequency_hz: {}\nvarphi: {}\namplitude: {}\n", nivib::format_full(frequency_hz),
             nivib::format_full(in.vib.varphi), nivib::format_full(in.vib.amplitude));
  fmt::print("analytic [{}]: {}\n", nivib::to_string(cfg.convention()), nivib::format_full(analytic));
  if (cfg.direction == nivib::axis::theta_z) {
    const auto other = cfg.literal_paper ? nivib::rotation_convention::velocity_consistent
                                         : nivib::rotation_convention::literal_paper;
    fmt::print("analytic [{}]: {}\n", nivib::to_string(other), nivib::format_full(nivib::evaluate(model, in, other).delta_phi));
  }
  fmt::print("oracle [nominal-time, velocity-consistent]: {}\n", nivib::format_full(nominal.delta_phi));
  fmt::print("oracle [event-resolved, velocity-consistent]: {}\n", nivib::format_full(event.delta_phi));
  fmt::print("relative discrepancy vs nominal-time: {}\n", nivib::format_full(relative_gap(analytic, nominal.delta_phi)));
  fmt::print("relative discrepancy vs event-resolved: {}\n", nivib::format_full(relative_gap(analytic, event.delta_phi)));
  fmt::print("recombination offset y (m): {}\n", nivib::format_full(event.recombination_offset));
  if (cfg.direction == nivib::axis::x) {
    fmt::print("recombination offset x (m): {}\n", nivib::format_full(nominal.offset_x));
  }
  return 0;
}

struct panel {
  const char* id;
  nivib::axis direction;
};

int run_reproduce(const std::string& out_dir, std::size_t nodes, unsigned workers) {
  namespace fs = std::filesystem;
  const panel panels[] = {{"A", nivib::axis::y}, {"B", nivib::axis::x}, {"C", nivib::axis::theta_z}};
  std::string manifest = "panel,geometry,axis,csv\n";
  for (const auto& p : panels) {
    for (int g : {3, 4}) {
      nivib::run_config cfg;
      cfg.geometry = g;
      cfg.direction = p.direction;
      cfg.nodes = nodes;
      cfg.workers = workers;
      const std::string name = fmt::format("fig3{}_{}_blade.csv", p.id, g == 3 ? "three" : "four");
      // Provenance names the CSV relative to the manifest so the output
      // directory can be moved.
      cfg.output = name;
      cfg.validate();
      const auto curve = run_curve(cfg);
      const fs::path csv_path = fs::path(out_dir) / name;
      std::ostringstream csv;
      nivib::write_curve_csv(csv, curve);
      nivib::write_text_file(csv_path, csv.str());
      nivib::write_text_file(nivib::sidecar_path(csv_path), nivib::curve_provenance(curve, cfg).dump(2) + "\n");
      manifest += fmt::format("{},{},{},{}\n", p.id, g, nivib::to_string(p.direction), name);
      fmt::print("panel {} geometry {}: {} points -> {}\n", p.id, g, curve.points.size(), csv_path.string());
    }
  }
  nivib::write_text_file(fs::path(out_dir) / "fig3_manifest.csv", manifest);
  return 0;
}

int run_golden(const std::string& path) {
  std::vector<nivib::golden_record> records;
  for (const auto& c : nivib::default_golden_cases()) records.push_back(nivib::make_golden_record(c));
  std::ostringstream os;
  nivib::write_golden(os, records);
  nivib::write_text_file(path, os.str());
  fmt::print("wrote {} records to {}\n", records.size(), path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrast loss of perfect-crystal neutron interferometers under sinusoidal vibration"};
  app.set_version_flag("--version", nivib::version);
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "contrast vs vibration frequency");
  config_flags sweep_flags;
  add_config_flags(*sweep, sweep_flags);

  auto* single = app.add_subcommand("single", "phase difference at one frequency and vibration phase");
  config_flags single_flags;
  add_config_flags(*single, single_flags);
  double frequency_hz = 100.0;
  double varphi = 0.0;
  single->add_option("--frequency", frequency_hz, "vibration frequency (Hz)")->capture_default_str();
  single->add_option("--varphi", varphi, "random vibration phase (rad)")->capture_default_str();

  auto* reproduce = app.add_subcommand("reproduce-fig3", "contrast curves for y, x and theta vibrations");
  std::string out_dir = "fig3";
  std::size_t nodes = 1024;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  reproduce->add_option("--output_dir,--output-dir", out_dir, "directory for CSVs, sidecars and manifest")->capture_default_str();
  reproduce->add_option("--nodes", nodes, "initial quadrature nodes")->capture_default_str();
  reproduce->add_option("--workers", workers, "worker threads")->capture_default_str();

  auto* golden = app.add_subcommand("golden", "regenerate oracle golden values");
  std::string golden_path = "golden.txt";
  golden->add_option("--output", golden_path, "golden file path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*sweep) return run_sweep(sweep_flags);
    if (*single) return run_single(single_flags, frequency_hz, varphi);
    if (*reproduce) return run_reproduce(out_dir, nodes, workers);
    if (*golden) return run_golden(golden_path);
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return exit_config;
  } catch (const nivib::sweep_error& e) {
    fmt::print(stderr, "numerical error at {} Hz: {}\n", e.frequency_hz(), e.what());
    return exit_numerical;
  } catch (const nivib::quadrature_error& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return exit_numerical;
  } catch (const nivib::oracle_error& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return exit_numerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_io;
  }
  return 0;
}
