// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Informational lines start with "  info".

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "nivib/io.hpp"
#include "nivib/nivib.hpp"

using namespace nivib;
namespace fs = std::filesystem;

namespace {

struct outcome {
  bool pass = false;
  std::string detail;
};

struct criterion {
  std::string name;
  std::function<outcome()> check;
};

// Printed under the criterion's result line.
std::vector<std::string> pending_info;
void info(const std::string& text) { pending_info.push_back(text); }

phase_model_input reference_input(geometry_kind g, axis a, std::optional<double> amplitude = {}) {
  phase_model_input in;
  in.beam = make_beam(2000.0, std::numbers::pi / 6.0);
  in.geom = make_geometry(g, 0.05);
  in.vib = make_vibration(a, amplitude.value_or(a == axis::theta_z ? 1e-6 : 1e-7), 0.0, 0.0);
  return in;
}

phase_model_input at_frequency(phase_model_input in, double f_hz, double varphi = 0.0) {
  in.vib.omega = two_pi * f_hz;
  in.vib.varphi = wrap_phase(varphi);
  return in;
}

phase_model_input at_omega_tau(phase_model_input in, double omega_tau, double varphi = 0.0) {
  in.vib.omega = omega_tau / in.tau();
  in.vib.varphi = wrap_phase(varphi);
  return in;
}

constexpr geometry_kind geometries[] = {geometry_kind::three_blade, geometry_kind::four_blade};
constexpr axis all_axes[] = {axis::y, axis::x, axis::theta_z, axis::z};

std::vector<double> translational_grid() { return per_decade_grid(1.0, 1e4, 200); }
std::vector<double> rotational_grid() { return per_decade_grid(0.1, 1e3, 200); }

contrast_curve curve_for(geometry_kind g, axis a, const std::vector<double>& grid) {
  return sweep(reference_input(g, a), select_model(a, g), grid, {});
}

// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> omega_tau_grid() { return log_grid(1e-5, 1e-3, 21); }

// Delta Phi is a sinusoid in the vibration phase to leading order; its
// amplitude is sqrt(d(0)^2 + d(pi/2)^2).
double phase_envelope(const phase_model_input& in, model_kind m) {
  auto a = in;
  a.vib.varphi = 0.0;
  auto b = in;
  b.vib.varphi = std::numbers::pi / 2;
  return std::hypot(evaluate(m, a).delta_phi, evaluate(m, b).delta_phi);
}

outcome static_limit() {
  double worst = 0.0;
  for (auto g : geometries) {
    for (auto a : all_axes) {
      const auto m = select_model(a, g);
      for (auto conv : {rotation_convention::velocity_consistent, rotation_convention::literal_paper}) {
        sweep_options opt;
        opt.convention = conv;
        const std::vector<double> still{0.0, 1e-9};
        for (const auto& p : sweep(reference_input(g, a), m, still, {}, opt).points) {
          worst = std::max(worst, std::abs(p.contrast - 1.0));
        }
        const std::vector<double> grid{1.0, 100.0, 1e4};
        for (const auto& p : sweep(reference_input(g, a, 0.0), m, grid, {}, opt).points) {
          worst = std::max(worst, std::abs(p.contrast - 1.0));
        }
      }
    }
  }
  return {worst <= 1e-9, fmt::format("max |C - 1| = {:.3e} over 8 models, omega in {{0, 2pi 1e-9}} and zero amplitude "
                                     "(tolerance 1e-9)",
                                     worst)};
}

outcome z_immunity() {
  std::size_t points = 0;
  std::size_t not_one = 0;
  for (auto g : geometries) {
    for (double amp : {1e-9, 1e-7, 1e-3}) {
      const auto curve = sweep(reference_input(g, axis::z, amp), model_kind::z, translational_grid(), {});
      for (const auto& p : curve.points) {
        ++points;
        if (p.contrast != 1.0) ++not_one;
      }
    }
  }
  return {not_one == 0, fmt::format("{} of {} points differ from 1 exactly (both geometries, amplitudes 1e-9..1e-3 m, "
                                    "1 Hz..10 kHz)",
                                    not_one, points)};
}

outcome contrast_onset() {
  const auto curve = curve_for(geometry_kind::three_blade, axis::y, translational_grid());
  const double at_1hz = curve.points.front().contrast;
  double crossing = NAN;
  for (const auto& p : curve.points) {
    if (p.frequency_hz >= 10.0 && p.frequency_hz <= 300.0 && p.contrast < 0.9) {
      crossing = p.frequency_hz;
      break;
    }
  }
  const bool pass = std::isfinite(crossing) && at_1hz > 0.999;
  return {pass, fmt::format("C(1 Hz) = {:.8f}; first point below 0.9 in [10, 300] Hz at {:.4g} Hz", at_1hz, crossing)};
}

outcome pointwise_dominance(axis a, const std::vector<double>& grid, double report_limit_hz) {
  const auto three = curve_for(geometry_kind::three_blade, a, grid);
  const auto four = curve_for(geometry_kind::four_blade, a, grid);
  std::size_t violations = 0;
  std::size_t below_limit = 0;
  double first = NAN;
  double worst = 0.0;
  double worst_f = NAN;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gap = three.points[i].contrast - four.points[i].contrast;
    if (gap > 0.0) {
      ++violations;
      if (grid[i] <= report_limit_hz) ++below_limit;
      if (std::isnan(first)) first = grid[i];
      if (gap > worst) {
        worst = gap;
        worst_f = grid[i];
      }
    }
  }
  info(fmt::format("{} violations at or below {:.4g} Hz", below_limit, report_limit_hz));
  return {violations == 0,
          fmt::format("{} of {} grid points have C4 < C3; first at {:.4g} Hz, largest deficit {:.4f} at {:.4g} Hz",
                      violations, grid.size(), first, worst, worst_f)};
}

outcome y_dominance() { return pointwise_dominance(axis::y, translational_grid(), 1e3); }

outcome x_penalty() {
  const auto three = reference_input(geometry_kind::three_blade, axis::x);
  const auto four = reference_input(geometry_kind::four_blade, axis::x);
  const auto amplitude = [](const phase_model_input& in) {
    auto a = in;
    a.vib.varphi = 0.0;
    auto b = in;
    b.vib.varphi = std::numbers::pi / 2;
    return std::hypot(recombination_offset_x(a), recombination_offset_x(b));
  };
  double last_ratio = NAN;
  double previous_error = INFINITY;
  bool converging = true;
  for (double wt : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double ratio = amplitude(at_omega_tau(four, wt)) / amplitude(at_omega_tau(three, wt));
    const double error = std::abs(ratio - 1.5);
    info(fmt::format("omega tau = {:.0e}: |dx4| / |dx3| = {:.9f}", wt, ratio));
    converging = converging && error <= previous_error;
    previous_error = error;
    last_ratio = ratio;
  }
  const double rel = std::abs(last_ratio - 1.5) / 1.5;
  return {rel <= 0.01 && converging,
          fmt::format("ratio {:.9f} at omega tau = 1e-5, relative distance to 3/2 = {:.2e} (tolerance 1e-2), "
                      "monotone approach: {}",
                      last_ratio, rel, converging ? "yes" : "no")};
}

outcome scaling_exponents() {
  const auto grid = omega_tau_grid();
  const auto three = reference_input(geometry_kind::three_blade, axis::y);
  const auto four = reference_input(geometry_kind::four_blade, axis::y);
  std::vector<double> w, d3, d4, e3, e4;
  for (double wt : grid) {
    w.push_back(wt);
    d3.push_back(dphi_y_three(at_omega_tau(three, wt, 0.0)).delta_phi);
    d4.push_back(dphi_y_four(at_omega_tau(four, wt, 0.0)).delta_phi);
    e3.push_back(phase_envelope(at_omega_tau(three, wt), model_kind::y_three));
    e4.push_back(phase_envelope(at_omega_tau(four, wt), model_kind::y_four));
  }
  const double s3 = loglog_slope(w, d3);
  const double s4 = loglog_slope(w, d4);
  info(fmt::format("amplitude over the vibration phase: slopes {:.4f} (three-blade), {:.4f} (four-blade)",
                   loglog_slope(w, e3), loglog_slope(w, e4)));
  const bool pass = std::abs(s3 - 2.0) <= 0.1 && std::abs(s4 - 3.0) <= 0.1;
  return {pass, fmt::format("slopes of |dPhi(omega; varphi = 0)| over omega tau in [1e-5, 1e-3]: {:.4f} (three-blade, "
                            "target 2 +- 0.1), {:.4f} (four-blade, target 3 +- 0.1)",
                            s3, s4)};
}

outcome approximation_consistency() {
  const auto three = reference_input(geometry_kind::three_blade, axis::y);
  const auto four = reference_input(geometry_kind::four_blade, axis::y);
  const auto rel_error = [](double approx, double exact) { return std::abs(approx - exact) / std::abs(exact); };
  const auto ratio3 = [&](double wt, double varphi) {
    const auto a = at_omega_tau(three, wt, varphi);
    const auto b = at_omega_tau(three, wt / 2, varphi);
    return rel_error(dphi_y_three_approx(a).delta_phi, dphi_y_three(a).delta_phi) /
           rel_error(dphi_y_three_approx(b).delta_phi, dphi_y_three(b).delta_phi);
  };
  const auto ratio4 = [&](double wt, double varphi) {
    const auto a = at_omega_tau(four, wt, varphi);
    const auto b = at_omega_tau(four, wt / 2, varphi);
    return rel_error(dphi_y_four_approx(a).delta_phi, dphi_y_four(a).delta_phi) /
           rel_error(dphi_y_four_approx(b).delta_phi, dphi_y_four(b).delta_phi);
  };
  const double r3 = ratio3(8e-4, 0.0);
  const double r4 = ratio4(8e-4, 0.0);
  info(fmt::format("at varphi = 1: error ratios {:.6f} (three-blade), {:.6f} (four-blade)", ratio3(8e-4, 1.0),
                   ratio4(8e-4, 1.0)));
  return {r3 >= 4.0 && r4 >= 4.0,
          fmt::format("error ratio on halving omega tau from 8e-4 at varphi = 0: {:.9f} (three-blade first-derivative "
                      "form), {:.9f} (four-blade second-derivative form); required >= 4",
                      r3, r4)};
}

outcome oracle_equivalence() {
  double worst = 0.0;
  std::string where;
  std::size_t cases = 0;
  for (auto g : geometries) {
    for (auto a : {axis::y, axis::theta_z}) {
      const auto base = reference_input(g, a);
      const auto m = select_model(a, g);
      for (double f : {1.0, 10.0, 100.0}) {
        for (int k = 0; k < 64; ++k) {
          const auto in = at_frequency(base, f, two_pi * k / 64.0);
          const double model = evaluate(m, in).delta_phi;
          const double oracle = trace(in, trace_mode::nominal_time).delta_phi;
          const double rel = std::abs(model - oracle) / std::max(std::abs(oracle), 1e-12);
          ++cases;
          if (rel > worst) {
            worst = rel;
            where = fmt::format("{} at f = {} Hz, varphi index {}", to_string(m), f, k);
          }
        }
      }
    }
  }
  return {worst <= 1e-6, fmt::format("max relative gap {:.3e} over {} cases ({}); tolerance 1e-6", worst, cases, where)};
}

outcome contrast_identity() {
  double worst_scan = 0.0;
  for (auto g : geometries) {
    for (auto a : all_axes) {
      for (bool approx : {false, true}) {
        if (approx && a != axis::y) continue;
        const auto m = select_model(a, g, approx);
        for (double f : {1.0, 10.0, 100.0, 1000.0}) {
          const phase_model pm{at_frequency(reference_input(g, a), f), m, rotation_convention::velocity_consistent};
          const auto avg = converge_average(pm, {});
          worst_scan = std::max(worst_scan, std::abs(contrast_scan(avg, 64) - contrast_phasor(avg)));
        }
      }
    }
  }
  double worst_bessel = 0.0;
  const auto base = reference_input(geometry_kind::three_blade, axis::y);
  for (double f : {10.0, 30.0, 100.0, 300.0, 1000.0}) {
    const auto in = at_frequency(base, f);
    const double w = in.vib.omega;
    const double tau = in.tau();
    const double y0 = in.vib.amplitude;
    if (y0 * w / in.beam.v_y >= 1e-6) continue;
    const double k = 32.0 * in.mass_over_hbar() * tau * in.beam.v_y * y0 * w * std::sin(w * tau);
    const double c = contrast_phasor(phase_model::for_input(in));
    worst_bessel = std::max(worst_bessel, std::abs(c - std::abs(std::cyl_bessel_j(0.0, k))));
  }
  return {worst_scan <= 1e-6 && worst_bessel <= 1e-3,
          fmt::format("max |scan - phasor| = {:.3e} (tolerance 1e-6) over 12 models x 4 frequencies; "
                      "max |C - |J0(K)|| = {:.3e} (tolerance 1e-3) for three-blade y at 10..1000 Hz",
                      worst_scan, worst_bessel)};
}

outcome rotational_robustness() {
  auto result = pointwise_dominance(axis::theta_z, rotational_grid(), 1e3);
  const auto four = curve_for(geometry_kind::four_blade, axis::theta_z, rotational_grid());
  double max_high = 0.0;
  for (const auto& p : four.points) {
    if (p.frequency_hz >= 100.0) max_high = std::max(max_high, p.contrast);
  }
  const bool below_one = max_high < 1.0;
  result.pass = result.pass && below_one;
  result.detail += fmt::format("; four-blade max contrast above 100 Hz = {:.4f} (must be < 1)", max_high);
  return result;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "nivib_acceptance";
  fs::remove_all(root);
  const std::string cli = NIVIB_CLI;
  const auto reproduce = [&](const fs::path& dir, unsigned workers) {
    const std::string cmd = fmt::format("{} reproduce-fig3 --workers {} --output_dir {} > /dev/null", cli, workers,
                                        dir.string());
    return std::system(cmd.c_str());
  };
  const fs::path a = root / "run_a";
  const fs::path b = root / "run_b";
  const fs::path c = root / "run_c";
  const int ra = reproduce(a, 1);
  const int rb = reproduce(b, 1);
  const int rc = reproduce(c, 3);
  if (ra != 0 || rb != 0 || rc != 0) return {false, fmt::format("reproduce-fig3 exited with {}, {}, {}", ra, rb, rc)};

  // Repeated identical runs: every file. Different worker counts: the CSVs
  // (the sidecars record the worker count).
  std::size_t files = 0;
  std::size_t repeat_diff = 0;
  std::size_t csvs = 0;
  std::size_t worker_diff = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    const auto name = entry.path().filename();
    const auto text = slurp(entry.path());
    if (text != slurp(b / name)) ++repeat_diff;
    if (entry.path().extension() == ".csv") {
      ++csvs;
      if (text != slurp(c / name)) ++worker_diff;
    }
  }

  std::size_t bit_mismatches = 0;
  const auto grid = translational_grid();
  for (auto g : geometries) {
    const auto in = reference_input(g, axis::y);
    sweep_options many;
    many.workers = 4;
    const auto one = sweep(in, select_model(axis::y, g), grid, {});
    const auto four = sweep(in, select_model(axis::y, g), grid, {}, many);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(one.points[i].contrast) != std::bit_cast<std::uint64_t>(four.points[i].contrast)) {
        ++bit_mismatches;
      }
    }
  }
  fs::remove_all(root);
  return {files == 13 && csvs == 7 && repeat_diff == 0 && worker_diff == 0 && bit_mismatches == 0,
          fmt::format("repeated runs: {} of {} files differ; 1 vs 3 workers: {} of {} CSVs differ; in-process "
                      "1 vs 4 workers: {} of {} points differ bitwise",
                      repeat_diff, files, worker_diff, csvs, bit_mismatches, 2 * grid.size())};
}

}  // namespace

int main() {
  const std::vector<criterion> criteria = {
      {"static limit", static_limit},
      {"z immunity", z_immunity},
      {"three-blade y contrast onset", contrast_onset},
      {"four-blade dominance under y vibration", y_dominance},
      {"four-blade penalty under x vibration", x_penalty},
      {"small-omega scaling exponents", scaling_exponents},
      {"derivative-form consistency", approximation_consistency},
      {"closed form vs path oracle", oracle_equivalence},
      {"contrast identity", contrast_identity},
      {"rotational robustness", rotational_robustness},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", c.name, o.detail);
    for (const auto& line : pending_info) fmt::print("  info  {}\n", line);
    pending_info.clear();
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
