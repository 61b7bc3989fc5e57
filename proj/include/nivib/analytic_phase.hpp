#pragma once

// Closed-form phase differences Delta Phi = Phi(path II) - Phi(path I) for
// the three- and four-blade interferometers under sinusoidal crystal motion.
//
// Path I is transmitted at the first blade, path II is reflected there.
// Segment phases are (m_n/hbar) |v|^2 dt. Where a model is assembled from
// segment velocities, each v_y is kept as (sign * v_y + kick) and only the
// excess over the unperturbed phase is summed; the unperturbed parts are
// identical on both paths and cancel exactly.

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "nivib/core.hpp"

namespace nivib {

struct phase_model_input {
  physical_constants constants{};
  beam_parameters beam{};
  geometry geom{};
  vibration vib{};

  [[nodiscard]] double tau() const { return transit_time::of(geom, beam).tau; }
  [[nodiscard]] double mass_over_hbar() const { return constants.mass_over_hbar(); }
};

struct phase_sample {
  double delta_phi = 0.0;  // rad
  double varphi = 0.0;     // rad
};

// How the rotating crystal's blade velocities enter the theta models.
//  velocity_consistent: blade velocity is lever * theta0 * omega * cos(omega t + varphi)
//    and every bounce is a signed moving-wall reflection.
//  literal_paper: the printed three-blade form with omega * sin(varphi) at the
//    first blade, and the printed four-blade path II velocities (first
//    segment +v_y + 2 u1).
enum class rotation_convention { velocity_consistent, literal_paper };

[[nodiscard]] constexpr std::string_view to_string(rotation_convention c) {
  return c == rotation_convention::velocity_consistent ? "velocity-consistent" : "literal-paper";
}

enum class model_kind {
  y_three,
  y_three_approx,
  y_four,
  y_four_approx,
  x_three,
  x_four,
  theta_three,
  theta_four,
  z,
};

[[nodiscard]] constexpr std::string_view to_string(model_kind m) {
  switch (m) {
    case model_kind::y_three: return "dphi_y_three";
    case model_kind::y_three_approx: return "dphi_y_three_approx";
    case model_kind::y_four: return "dphi_y_four";
    case model_kind::y_four_approx: return "dphi_y_four_approx";
    case model_kind::x_three: return "dphi_x_three";
    case model_kind::x_four: return "dphi_x_four";
    case model_kind::theta_three: return "dphi_theta_three";
    case model_kind::theta_four: return "dphi_theta_four";
    case model_kind::z: return "dphi_z";
  }
  return "?";
}

class model_mismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void expect(const phase_model_input& in, axis a, std::string_view model) {
  if (in.vib.direction != a) {
    throw model_mismatch(std::string(model) + ": vibration axis must be " + std::string(to_string(a)) +
                         ", got " + std::string(to_string(in.vib.direction)));
  }
}

inline void expect(const phase_model_input& in, axis a, geometry_kind g, std::string_view model) {
  expect(in, a, model);
  if (in.geom.kind != g) {
    throw model_mismatch(std::string(model) + ": geometry must be " + std::string(to_string(g)));
  }
}

// Excess phase of one segment with v_y = sign * v_y0 + kick over duration dt,
// relative to the same segment flown at the unperturbed speed.
[[nodiscard]] inline double excess_phase(double mass_over_hbar, double v_y0, double sign, double kick,
                                         double dt) {
  return mass_over_hbar * (2.0 * sign * v_y0 * kick + kick * kick) * dt;
}

}  // namespace detail

// 16 (m/hbar) tau (v_y - u(0)) (u(2 tau) - u(0))
[[nodiscard]] inline phase_sample dphi_y_three(const phase_model_input& in) {
  detail::expect(in, axis::y, geometry_kind::three_blade, "dphi_y_three");
  const double tau = in.tau();
  const double u0 = in.vib.velocity(0.0);
  const double du = in.vib.velocity_change(0.0, 2.0 * tau);
  return {16.0 * in.mass_over_hbar() * tau * (in.beam.v_y - u0) * du, in.vib.varphi};
}

// Slowly-varying form: u(2 tau) - u(0) ~ 2 tau du/dt|_tau.
[[nodiscard]] inline phase_sample dphi_y_three_approx(const phase_model_input& in) {
  detail::expect(in, axis::y, geometry_kind::three_blade, "dphi_y_three_approx");
  const double tau = in.tau();
  const double u0 = in.vib.velocity(0.0);
  return {16.0 * in.mass_over_hbar() * tau * tau * (in.beam.v_y - u0) * 2.0 * in.vib.acceleration(tau),
          in.vib.varphi};
}

// 8 (m/hbar) tau (u(0) - v_y) (2 u(0) - 3 u(tau) + u(3 tau)); the stencil
// annihilates constant and linear motion.
[[nodiscard]] inline phase_sample dphi_y_four(const phase_model_input& in) {
  detail::expect(in, axis::y, geometry_kind::four_blade, "dphi_y_four");
  const double tau = in.tau();
  const double u0 = in.vib.velocity(0.0);
  const double stencil = -3.0 * in.vib.velocity_change(0.0, tau) + in.vib.velocity_change(0.0, 3.0 * tau);
  return {8.0 * in.mass_over_hbar() * tau * (u0 - in.beam.v_y) * stencil, in.vib.varphi};
}

// Second-derivative form, -(3/2) tau^2 d2u/dt2 at 5 tau / 4 standing in for
// u'(tau/2) - u'(2 tau).
[[nodiscard]] inline phase_sample dphi_y_four_approx(const phase_model_input& in) {
  detail::expect(in, axis::y, geometry_kind::four_blade, "dphi_y_four_approx");
  const double tau = in.tau();
  const double u0 = in.vib.velocity(0.0);
  const double curvature = in.vib.jerk(1.25 * tau);
  return {16.0 * in.mass_over_hbar() * tau * tau * tau * (in.beam.v_y - u0) * -1.5 * curvature,
          in.vib.varphi};
}

// Offset of the recombination point from the last blade:
//   three blades: x(4 tau) - 2 x(2 tau) + x(0)
//   four blades:  x(4 tau) - 4 x(tau) + 3 x(0)
[[nodiscard]] inline double recombination_offset_x(const phase_model_input& in) {
  detail::expect(in, axis::x, "recombination_offset_x");
  const double tau = in.tau();
  const vibration& x = in.vib;
  if (in.geom.kind == geometry_kind::three_blade) {
    return x.displacement_change(2.0 * tau, 4.0 * tau) - x.displacement_change(0.0, 2.0 * tau);
  }
  return x.displacement_change(0.0, 4.0 * tau) - 4.0 * x.displacement_change(0.0, tau);
}

// Path-length difference 2 dx tan(alpha) sin(alpha) converted to phase
// (m/hbar) v dl.
[[nodiscard]] inline double phase_from_offset_x(const phase_model_input& in, double offset) {
  const double alpha = in.beam.bragg_angle;
  const double dl = 2.0 * offset * std::tan(alpha) * std::sin(alpha);
  return in.mass_over_hbar() * in.beam.speed * dl;
}

[[nodiscard]] inline phase_sample dphi_x(const phase_model_input& in) {
  detail::expect(in, axis::x, "dphi_x");
  return {phase_from_offset_x(in, recombination_offset_x(in)), in.vib.varphi};
}

// Three-blade rotation about the middle blade. Only the first blade kicks
// path II (lever 2L); the middle blade moves along x and leaves |v| alone, so
//   Delta Phi = (m/hbar) (|v_II|^2 - |v_I|^2) 4 tau = 16 (m/hbar) tau u1 (u1 - v_y).
[[nodiscard]] inline phase_sample dphi_theta_three(
    const phase_model_input& in, rotation_convention conv = rotation_convention::velocity_consistent) {
  detail::expect(in, axis::theta_z, geometry_kind::three_blade, "dphi_theta_three");
  const double tau = in.tau();
  const double lever = 2.0 * in.geom.half_separation;
  const double rate = in.vib.amplitude * in.vib.omega;
  const double u1 = conv == rotation_convention::velocity_consistent ? lever * rate * std::cos(in.vib.varphi)
                                                                     : lever * rate * std::sin(in.vib.varphi);
  const double speed_sq_diff = 4.0 * u1 * (u1 - in.beam.v_y);
  return {in.mass_over_hbar() * speed_sq_diff * 4.0 * tau, in.vib.varphi};
}

// Four-blade rotation about the midpoint. Outer blades have lever 2L, inner
// blades sqrt(L^2 + (v_y tau)^2); the second and third blades move in
// antiphase. Segments last tau, 2 tau, tau.
[[nodiscard]] inline phase_sample dphi_theta_four(
    const phase_model_input& in, rotation_convention conv = rotation_convention::velocity_consistent) {
  detail::expect(in, axis::theta_z, geometry_kind::four_blade, "dphi_theta_four");
  const double tau = in.tau();
  const double l = in.geom.half_separation;
  const double vy = in.beam.v_y;
  const double inner = std::hypot(l, vy * tau);
  const auto rate = [&](double t) { return in.vib.amplitude * in.vib.omega * std::cos(in.vib.omega * t + in.vib.varphi); };
  const double u1 = 2.0 * l * rate(0.0);
  const double u2 = inner * rate(tau);
  const double u3 = -inner * rate(3.0 * tau);

  const double r = in.mass_over_hbar();
  using detail::excess_phase;
  const double path_i = excess_phase(r, vy, +1.0, 0.0, tau) +
                        excess_phase(r, vy, -1.0, 2.0 * u2, 2.0 * tau) +
                        excess_phase(r, vy, +1.0, -2.0 * u2 + 2.0 * u3, tau);
  // The printed path II starts at +v_y + 2 u1; the consistent bounce gives
  // -v_y + 2 u1. Later segments are reflections of the previous one either way.
  const double first_sign = conv == rotation_convention::velocity_consistent ? -1.0 : +1.0;
  const double path_ii = excess_phase(r, vy, first_sign, 2.0 * u1, tau) +
                         excess_phase(r, vy, -first_sign, -2.0 * u1 + 2.0 * u2, 2.0 * tau) +
                         excess_phase(r, vy, first_sign, 2.0 * u1 - 2.0 * u2 + 2.0 * u3, tau);
  return {path_ii - path_i, in.vib.varphi};
}

// Neither velocity has a z component nor do path lengths depend on z.
[[nodiscard]] inline phase_sample dphi_z(const phase_model_input& in) {
  detail::expect(in, axis::z, "dphi_z");
  return {0.0, in.vib.varphi};
}

[[nodiscard]] inline model_kind select_model(axis a, geometry_kind g, bool approximate = false) {
  const bool three = g == geometry_kind::three_blade;
  switch (a) {
    case axis::y:
      if (approximate) return three ? model_kind::y_three_approx : model_kind::y_four_approx;
      return three ? model_kind::y_three : model_kind::y_four;
    case axis::x: return three ? model_kind::x_three : model_kind::x_four;
    case axis::theta_z: return three ? model_kind::theta_three : model_kind::theta_four;
    case axis::z: return model_kind::z;
  }
  throw std::invalid_argument("unknown axis");
}

[[nodiscard]] inline phase_sample evaluate(model_kind m, const phase_model_input& in,
                                           rotation_convention conv = rotation_convention::velocity_consistent) {
  switch (m) {
    case model_kind::y_three: return dphi_y_three(in);
    case model_kind::y_three_approx: return dphi_y_three_approx(in);
    case model_kind::y_four: return dphi_y_four(in);
    case model_kind::y_four_approx: return dphi_y_four_approx(in);
    case model_kind::x_three:
    case model_kind::x_four: {
      const model_kind expected = select_model(axis::x, in.geom.kind);
      if (m != expected) throw model_mismatch(std::string(to_string(m)) + ": geometry mismatch");
      return dphi_x(in);
    }
    case model_kind::theta_three: return dphi_theta_three(in, conv);
    case model_kind::theta_four: return dphi_theta_four(in, conv);
    case model_kind::z: return dphi_z(in);
  }
  throw std::invalid_argument("unknown model");
}

// Delta Phi as a function of the random vibration phase, everything else
// frozen. This is what the contrast engine averages over.
struct phase_model {
  phase_model_input input{};
  model_kind kind = model_kind::z;
  rotation_convention convention = rotation_convention::velocity_consistent;

  static phase_model for_input(const phase_model_input& in, bool approximate = false,
                               rotation_convention conv = rotation_convention::velocity_consistent) {
    return {in, select_model(in.vib.direction, in.geom.kind, approximate), conv};
  }

  [[nodiscard]] double operator()(double varphi) const {
    phase_model_input in = input;
    in.vib.varphi = wrap_phase(varphi);
    return evaluate(kind, in, convention).delta_phi;
  }
};

}  // namespace nivib
