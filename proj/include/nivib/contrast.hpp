#pragma once

// Random-phase averaging, fringe contrast and contrast-vs-frequency sweeps.
//
// The random vibration phase varphi is integrated out with a uniform rule on
// [0, 2pi). The integrand exp(i Delta Phi(varphi)) is smooth and periodic, so
// the rule converges spectrally once the node count exceeds the bandwidth of
// Delta Phi; the node count is doubled until the mean phasor stops moving.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "nivib/analytic_phase.hpp"
#include "nivib/core.hpp"

namespace nivib {

template <class F>
concept phase_function = std::regular_invocable<const F&, double> &&
                         std::convertible_to<std::invoke_result_t<const F&, double>, double>;

enum class quadrature { trapezoid, midpoint };

[[nodiscard]] constexpr std::string_view to_string(quadrature q) {
  return q == quadrature::trapezoid ? "uniform-trapezoid" : "midpoint";
}

struct averaging_config {
  std::size_t n_samples = 1024;  // starting node count
  quadrature scheme = quadrature::trapezoid;
  std::size_t n_chi = 64;        // control-phase scan resolution
  double tolerance = 1e-10;      // allowed change of the mean phasor on doubling
  std::size_t max_samples = std::size_t{1} << 22;

  void validate() const {
    if (n_samples < 16) throw std::invalid_argument("quadrature nodes must be at least 16");
    if (n_chi < 8) throw std::invalid_argument("control-phase scan needs at least 8 points");
    if (!(tolerance > 0.0)) throw std::invalid_argument("quadrature tolerance must be positive");
    if (max_samples < n_samples) throw std::invalid_argument("max_samples below n_samples");
  }
};

class quadrature_error : public std::runtime_error {
 public:
  quadrature_error(const std::string& what, std::size_t nodes, double change)
      : std::runtime_error(what), nodes_(nodes), change_(change) {}
  [[nodiscard]] std::size_t nodes() const { return nodes_; }
  [[nodiscard]] double change() const { return change_; }

 private:
  std::size_t nodes_;
  double change_;
};

// Delta Phi sampled on a converged set of uniform nodes.
struct phase_average {
  std::vector<double> delta_phi;
  quadrature scheme = quadrature::trapezoid;

  [[nodiscard]] std::size_t nodes() const { return delta_phi.size(); }

  [[nodiscard]] std::complex<double> mean_phasor() const {
    double re = 0.0;
    double im = 0.0;
    for (double p : delta_phi) {
      re += std::cos(p);
      im += std::sin(p);
    }
    const double n = static_cast<double>(delta_phi.size());
    return {re / n, im / n};
  }

  // (1/2pi) int (1 + cos(Delta Phi + chi)) dvarphi
  [[nodiscard]] double mean_intensity(double chi) const {
    double acc = 0.0;
    for (double p : delta_phi) acc += std::cos(p + chi);
    return 1.0 + acc / static_cast<double>(delta_phi.size());
  }
};

[[nodiscard]] inline double quadrature_node(std::size_t k, std::size_t n, quadrature q) {
  const double offset = q == quadrature::midpoint ? 0.5 : 0.0;
  return two_pi * (static_cast<double>(k) + offset) / static_cast<double>(n);
}

template <phase_function F>
[[nodiscard]] std::vector<double> sample_phase(const F& model, std::size_t n, quadrature q) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = model(quadrature_node(k, n, q));
  return out;
}

template <phase_function F>
[[nodiscard]] phase_average converge_average(const F& model, const averaging_config& cfg) {
  cfg.validate();
  std::size_t n = cfg.n_samples;
  phase_average coarse{sample_phase(model, n, cfg.scheme), cfg.scheme};

  // Start above the bandwidth of exp(i Delta Phi): roughly the peak-to-peak
  // phase excursion.
  const auto [lo, hi] = std::minmax_element(coarse.delta_phi.begin(), coarse.delta_phi.end());
  const double excursion = *hi - *lo;
  if (!std::isfinite(excursion)) throw quadrature_error("phase model returned a non-finite value", n, excursion);
  const double wanted = 2.0 * excursion + 16.0;
  if (static_cast<double>(n) < wanted) {
    if (wanted > static_cast<double>(cfg.max_samples)) {
      throw quadrature_error("phase excursion " + std::to_string(excursion) + " rad needs more than " +
                                 std::to_string(cfg.max_samples) + " quadrature nodes",
                             n, excursion);
    }
    n = std::bit_ceil(static_cast<std::size_t>(std::ceil(wanted)));
    coarse = {sample_phase(model, n, cfg.scheme), cfg.scheme};
  }

  auto coarse_mean = coarse.mean_phasor();
  while (true) {
    const std::size_t fine_n = 2 * n;
    if (fine_n > cfg.max_samples) {
      throw quadrature_error("quadrature did not converge within " + std::to_string(cfg.max_samples) + " nodes",
                             n, std::numeric_limits<double>::quiet_NaN());
    }
    phase_average fine{sample_phase(model, fine_n, cfg.scheme), cfg.scheme};
    const auto fine_mean = fine.mean_phasor();
    const double change = std::abs(fine_mean - coarse_mean);
    if (change <= cfg.tolerance) return fine;
    n = fine_n;
    coarse = std::move(fine);
    coarse_mean = fine_mean;
  }
}

template <phase_function F>
[[nodiscard]] double mean_intensity(const F& model, double chi, const averaging_config& cfg = {}) {
  require_finite(chi, "control phase");
  return converge_average(model, cfg).mean_intensity(chi);
}

// Fringe contrast (max - min) / (max + min) of the averaged intensity over the
// control phase chi: a grid scan over n_chi points, then each extremum is
// polished with Brent's method inside its bracketing grid cell.
[[nodiscard]] inline double contrast_scan(const phase_average& avg, std::size_t n_chi) {
  if (n_chi < 8) throw std::invalid_argument("control-phase scan needs at least 8 points");
  std::vector<double> intensity(n_chi);
  for (std::size_t j = 0; j < n_chi; ++j) {
    intensity[j] = avg.mean_intensity(quadrature_node(j, n_chi, quadrature::trapezoid));
  }
  const auto imax = static_cast<std::size_t>(std::max_element(intensity.begin(), intensity.end()) - intensity.begin());
  const auto imin = static_cast<std::size_t>(std::min_element(intensity.begin(), intensity.end()) - intensity.begin());

  const double step = two_pi / static_cast<double>(n_chi);
  constexpr int bits = std::numeric_limits<double>::digits / 2;
  const auto polish = [&](std::size_t j, double sign) {
    const double centre = step * static_cast<double>(j);
    auto objective = [&](double chi) { return sign * avg.mean_intensity(chi); };
    const auto found = boost::math::tools::brent_find_minima(objective, centre - step, centre + step, bits);
    return sign * found.second;
  };
  const double i_max = std::max(polish(imax, -1.0), intensity[imax]);
  const double i_min = std::min(polish(imin, +1.0), intensity[imin]);
  const double denom = i_max + i_min;
  if (!(denom > 0.0)) throw quadrature_error("degenerate fringe: max + min intensity is not positive", avg.nodes(), denom);
  return std::clamp((i_max - i_min) / denom, 0.0, 1.0);
}

// |<exp(i Delta Phi)>|; equal to the scanned contrast because the averaged
// intensity is 1 + Re(exp(i chi) <exp(i Delta Phi)>).
[[nodiscard]] inline double contrast_phasor(const phase_average& avg) {
  return std::min(1.0, std::abs(avg.mean_phasor()));
}

template <phase_function F>
[[nodiscard]] double contrast_scan(const F& model, const averaging_config& cfg = {}) {
  return contrast_scan(converge_average(model, cfg), cfg.n_chi);
}

template <phase_function F>
[[nodiscard]] double contrast_phasor(const F& model, const averaging_config& cfg = {}) {
  return contrast_phasor(converge_average(model, cfg));
}

// Stochastic estimate with uniformly drawn varphi; validation only.
template <phase_function F>
[[nodiscard]] double contrast_monte_carlo(const F& model, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("Monte Carlo needs at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, two_pi);
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double p = model(phase(rng));
    re += std::cos(p);
    im += std::sin(p);
  }
  const double n = static_cast<double>(samples);
  return std::min(1.0, std::hypot(re / n, im / n));
}

// ---------------------------------------------------------------------------
// Frequency sweeps

enum class contrast_method { phasor, scan };

[[nodiscard]] constexpr std::string_view to_string(contrast_method m) {
  return m == contrast_method::phasor ? "phasor" : "scan";
}

struct contrast_point {
  double frequency_hz = 0.0;
  double contrast = 0.0;
};

struct contrast_curve {
  std::vector<contrast_point> points;
  phase_model_input inputs{};  // vibration omega/varphi are not meaningful here
  model_kind model = model_kind::z;
  rotation_convention convention = rotation_convention::velocity_consistent;
  averaging_config averaging{};
  contrast_method method = contrast_method::phasor;
};

struct sweep_options {
  contrast_method method = contrast_method::phasor;
  rotation_convention convention = rotation_convention::velocity_consistent;
  unsigned workers = 1;
};

class sweep_error : public std::runtime_error {
 public:
  sweep_error(const std::string& what, double frequency_hz)
      : std::runtime_error(what), frequency_hz_(frequency_hz) {}
  [[nodiscard]] double frequency_hz() const { return frequency_hz_; }

 private:
  double frequency_hz_;
};

inline void validate_grid(std::span<const double> freqs) {
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!std::isfinite(freqs[i]) || freqs[i] < 0.0) {
      throw std::invalid_argument("frequency grid values must be finite and non-negative");
    }
    if (i > 0 && !(freqs[i] > freqs[i - 1])) {
      throw std::invalid_argument("frequency grid must be strictly increasing");
    }
  }
}

[[nodiscard]] inline std::vector<double> log_grid(double f_min, double f_max, std::size_t n) {
  if (!(f_min > 0.0) || !(f_max > f_min) || n < 2) {
    throw std::invalid_argument("log grid needs 0 < f_min < f_max and at least 2 points");
  }
  std::vector<double> out(n);
  const double a = std::log10(f_min);
  const double b = std::log10(f_max);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = f_min;
  out.back() = f_max;
  return out;
}

[[nodiscard]] inline std::vector<double> linear_grid(double f_min, double f_max, std::size_t n) {
  if (!(f_min >= 0.0) || !(f_max > f_min) || n < 2) {
    throw std::invalid_argument("linear grid needs 0 <= f_min < f_max and at least 2 points");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = f_min + (f_max - f_min) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = f_max;
  return out;
}

// Logarithmic grid with a fixed density per decade, endpoints included.
[[nodiscard]] inline std::vector<double> per_decade_grid(double f_min, double f_max, std::size_t per_decade) {
  const double decades = std::log10(f_max / f_min);
  const auto n = static_cast<std::size_t>(std::llround(decades * static_cast<double>(per_decade))) + 1;
  return log_grid(f_min, f_max, n);
}

[[nodiscard]] inline double contrast_at(const phase_model_input& base, model_kind model, double frequency_hz,
                                        const averaging_config& cfg, const sweep_options& opt) {
  phase_model_input in = base;
  in.vib.omega = two_pi * frequency_hz;
  const phase_model pm{in, model, opt.convention};
  const phase_average avg = converge_average(pm, cfg);
  return opt.method == contrast_method::phasor ? contrast_phasor(avg) : contrast_scan(avg, cfg.n_chi);
}

// Each grid point is computed independently into its own slot, so the result
// is bit-identical for any worker count.
[[nodiscard]] inline contrast_curve sweep(const phase_model_input& base, model_kind model,
                                          std::span<const double> freqs, const averaging_config& cfg,
                                          const sweep_options& opt = {}) {
  validate_grid(freqs);
  cfg.validate();
  contrast_curve curve;
  curve.inputs = base;
  curve.inputs.vib.omega = 0.0;
  curve.inputs.vib.varphi = 0.0;
  curve.model = model;
  curve.convention = opt.convention;
  curve.averaging = cfg;
  curve.method = opt.method;
  curve.points.resize(freqs.size());

  std::vector<std::exception_ptr> failures(freqs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < freqs.size(); i = next.fetch_add(1)) {
      try {
        curve.points[i] = {freqs[i], contrast_at(base, model, freqs[i], cfg, opt)};
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(freqs.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      throw sweep_error("at " + std::to_string(freqs[i]) + " Hz: " + e.what(), freqs[i]);
    }
  }
  return curve;
}

}  // namespace nivib
