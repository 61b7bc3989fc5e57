#pragma once

// Physical constants, beam kinematics, interferometer geometry, crystal
// vibration and the moving-wall reflection rule.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nivib {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018.
struct physical_constants {
  double neutron_mass = 1.67492749804e-27;  // kg
  double hbar = 1.054571817e-34;            // J s

  // m_n / hbar in s/m^2; phase accumulated per (m/s)^2 * s of flight.
  [[nodiscard]] constexpr double mass_over_hbar() const { return neutron_mass / hbar; }
};

inline void require_finite(double value, std::string_view what) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

struct velocity2 {
  double x = 0.0;
  double y = 0.0;

  [[nodiscard]] constexpr double norm_squared() const { return x * x + y * y; }
  friend constexpr bool operator==(const velocity2&, const velocity2&) = default;
};

// Neutron beam with the velocity split against the Bragg planes: x runs
// through the blades, y is the component flipped by a Bragg reflection.
struct beam_parameters {
  double speed = 0.0;       // m/s
  double bragg_angle = 0.0; // rad
  double v_x = 0.0;
  double v_y = 0.0;

  // de Broglie wavelength, informational only.
  [[nodiscard]] double wavelength(const physical_constants& c = {}) const {
    return two_pi / (c.mass_over_hbar() * speed);
  }
};

inline beam_parameters make_beam(double speed, double bragg_angle) {
  require_finite(speed, "beam speed");
  require_finite(bragg_angle, "Bragg angle");
  if (speed <= 0.0) throw std::invalid_argument("beam speed must be positive");
  if (bragg_angle <= 0.0 || bragg_angle >= std::numbers::pi / 2) {
    throw std::invalid_argument("Bragg angle must lie in (0, pi/2)");
  }
  return {speed, bragg_angle, speed * std::cos(bragg_angle), speed * std::sin(bragg_angle)};
}

enum class geometry_kind { three_blade, four_blade };

[[nodiscard]] constexpr std::string_view to_string(geometry_kind g) {
  return g == geometry_kind::three_blade ? "three_blade" : "four_blade";
}

// Blade layout along x. Both variants span 4L so a neutron needs 4*tau to
// cross, with tau = L / v_x.
struct geometry {
  geometry_kind kind = geometry_kind::three_blade;
  double half_separation = 0.0;  // L, m

  [[nodiscard]] std::vector<double> blade_positions() const {
    const double l = half_separation;
    if (kind == geometry_kind::three_blade) return {0.0, 2.0 * l, 4.0 * l};
    return {0.0, l, 3.0 * l, 4.0 * l};
  }

  // Nominal blade-crossing times in units of tau.
  [[nodiscard]] std::vector<double> crossing_times_in_tau() const {
    if (kind == geometry_kind::three_blade) return {0.0, 2.0, 4.0};
    return {0.0, 1.0, 3.0, 4.0};
  }

  // Rotation center: center of mass, midway along x on the beam axis.
  [[nodiscard]] double center_x() const { return 2.0 * half_separation; }

  [[nodiscard]] std::size_t blade_count() const {
    return kind == geometry_kind::three_blade ? 3 : 4;
  }
};

inline geometry make_geometry(geometry_kind kind, double half_separation) {
  require_finite(half_separation, "half blade separation L");
  if (half_separation <= 0.0) throw std::invalid_argument("half blade separation L must be positive");
  return {kind, half_separation};
}

// Blade-to-blade unit time tau = L / v_x.
struct transit_time {
  double tau = 0.0;

  [[nodiscard]] static transit_time of(const geometry& g, const beam_parameters& b) {
    return {g.half_separation / b.v_x};
  }
  // Flight time of the first inter-blade gap: 2 tau (three blades), tau (four).
  [[nodiscard]] double first_gap(geometry_kind k) const {
    return k == geometry_kind::three_blade ? 2.0 * tau : tau;
  }
  [[nodiscard]] double total() const { return 4.0 * tau; }
};

enum class axis { y, x, theta_z, z };

[[nodiscard]] constexpr std::string_view to_string(axis a) {
  switch (a) {
    case axis::y: return "y";
    case axis::x: return "x";
    case axis::theta_z: return "theta";
    case axis::z: return "z";
  }
  return "?";
}

// zeta(t) = amplitude * sin(omega t + varphi). Amplitude is in m for the
// translational axes and rad for theta_z.
struct vibration {
  axis direction = axis::y;
  double amplitude = 0.0;
  double omega = 0.0;   // rad/s
  double varphi = 0.0;  // random phase, [0, 2pi)

  [[nodiscard]] double displacement(double t) const {
    return amplitude * std::sin(omega * t + varphi);
  }
  [[nodiscard]] double velocity(double t) const {
    return amplitude * omega * std::cos(omega * t + varphi);
  }
  [[nodiscard]] double acceleration(double t) const {
    return -amplitude * omega * omega * std::sin(omega * t + varphi);
  }
  [[nodiscard]] double jerk(double t) const {
    return -amplitude * omega * omega * omega * std::cos(omega * t + varphi);
  }

  // velocity(t1) - velocity(t0) in product form, free of cancellation when
  // omega * (t1 - t0) is small.
  [[nodiscard]] double velocity_change(double t0, double t1) const {
    const double half = 0.5 * omega * (t1 - t0);
    return -2.0 * amplitude * omega * std::sin(0.5 * omega * (t0 + t1) + varphi) * std::sin(half);
  }
  // displacement(t1) - displacement(t0), same treatment.
  [[nodiscard]] double displacement_change(double t0, double t1) const {
    const double half = 0.5 * omega * (t1 - t0);
    return 2.0 * amplitude * std::cos(0.5 * omega * (t0 + t1) + varphi) * std::sin(half);
  }

  [[nodiscard]] vibration with_phase(double phase) const {
    vibration v = *this;
    v.varphi = phase;
    return v;
  }
};

[[nodiscard]] inline double wrap_phase(double phase) {
  double r = std::fmod(phase, two_pi);
  if (r < 0.0) r += two_pi;
  return r >= two_pi ? 0.0 : r;
}

inline vibration make_vibration(axis direction, double amplitude, double omega, double varphi = 0.0) {
  require_finite(amplitude, "vibration amplitude");
  require_finite(omega, "angular frequency");
  require_finite(varphi, "vibration phase");
  if (amplitude < 0.0) throw std::invalid_argument("vibration amplitude must be non-negative");
  if (omega < 0.0) throw std::invalid_argument("angular frequency must be non-negative");
  return {direction, amplitude, omega, wrap_phase(varphi)};
}

[[nodiscard]] inline double crystal_velocity(const vibration& spec, double t) {
  return spec.velocity(t);
}

// Elastic bounce off an infinitely heavy wall moving along y at u_wall:
// v_y -> -(v_y - 2 u_wall); v_x is untouched. Transmission is the identity.
[[nodiscard]] constexpr velocity2 reflect_off_moving_wall(velocity2 v_in, double u_wall) {
  return {v_in.x, -(v_in.y - 2.0 * u_wall)};
}

}  // namespace nivib
