#pragma once

// Brute-force kinematic tracer. Walks a neutron along both interferometer
// paths blade by blade, applying a moving-wall bounce at each reflection and
// nothing at each transmission, and accumulates (m_n/hbar) |v|^2 dt per
// segment. Used to certify the closed-form phase models and to emit golden
// values.
//
// Two timing modes:
//   nominal_time    blades are crossed at the unperturbed times {0, 2, 4} tau
//                   or {0, 1, 3, 4} tau and points, as the closed forms assume;
//   event_resolved  each crossing time is solved against the displaced blade
//                   plane with a bracketed secant iteration.
//
// Rotations about z are handled with the small-angle rule dr = r * theta. A
// crossing point further from the center of rotation along x than along y is
// treated as moving along y with lever |r|; otherwise it moves along x and
// does not kick the neutron. For the three-blade crystal this gives levers
// 2L, 0, 2L; for the four-blade crystal 2L, |r|, |r|, 2L with the second and
// third blades in antiphase.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nivib/analytic_phase.hpp"
#include "nivib/core.hpp"

namespace nivib {

enum class trace_mode { nominal_time, event_resolved };

[[nodiscard]] constexpr std::string_view to_string(trace_mode m) {
  return m == trace_mode::nominal_time ? "nominal-time" : "event-resolved";
}

struct path_segment {
  double start_time = 0.0;
  double end_time = 0.0;
  velocity2 velocity{};
  double accumulated_phase = 0.0;  // (m/hbar) |v|^2 (end - start)
  double excess_phase = 0.0;       // same, minus the unperturbed-speed phase
};

struct trace_result {
  std::vector<path_segment> path_i;
  std::vector<path_segment> path_ii;
  double delta_phi = 0.0;
  trace_mode mode = trace_mode::nominal_time;
  // y_II - y_I where the paths meet the last blade.
  double recombination_offset = 0.0;
  // Recombination-point offset along x; only set by trace_x.
  double offset_x = std::numeric_limits<double>::quiet_NaN();
  std::size_t solver_iterations = 0;
};

class oracle_error : public std::runtime_error {
 public:
  oracle_error(const std::string& what, std::size_t blade, double lo, double hi)
      : std::runtime_error(what), blade_(blade), lo_(lo), hi_(hi) {}
  [[nodiscard]] std::size_t blade() const { return blade_; }
  [[nodiscard]] double bracket_lo() const { return lo_; }
  [[nodiscard]] double bracket_hi() const { return hi_; }

 private:
  std::size_t blade_;
  double lo_;
  double hi_;
};

namespace oracle_detail {

enum class action { transmit, reflect, recombine };

// Path I is transmitted at the first blade, path II reflected; every inner
// blade reflects both.
inline std::vector<action> routing(geometry_kind g, bool path_ii) {
  std::vector<action> r;
  r.push_back(path_ii ? action::reflect : action::transmit);
  const std::size_t inner = g == geometry_kind::three_blade ? 1 : 2;
  for (std::size_t i = 0; i < inner; ++i) r.push_back(action::reflect);
  r.push_back(action::recombine);
  return r;
}

// Rigid motion of the crystal as seen at a blade crossing point.
struct crystal_motion {
  vibration vib;
  double center_x = 0.0;

  // Velocity of the reflecting planes along y at (x, y), in extended
  // precision: the phase difference is a small remainder of O(1 rad)
  // segment phases built from these.
  [[nodiscard]] long double wall_velocity(double x, double y, double t) const {
    using ld = long double;
    const ld rate = ld(vib.amplitude) * ld(vib.omega) * std::cos(ld(vib.omega) * ld(t) + ld(vib.varphi));
    switch (vib.direction) {
      case axis::y: return rate;
      case axis::x:
      case axis::z: return 0.0L;
      case axis::theta_z: {
        const ld dx = ld(x) - ld(center_x);
        if (std::abs(dx) < std::abs(ld(y))) return 0.0L;
        const ld lever = (dx < 0.0L ? 1.0L : -1.0L) * std::hypot(dx, ld(y));
        return lever * rate;
      }
    }
    return 0.0L;
  }

  // Shift of the blade plane along x at height y.
  [[nodiscard]] double plane_shift(double y, double t) const {
    switch (vib.direction) {
      case axis::x: return vib.displacement(t);
      case axis::theta_z: return vib.displacement(t) * y;
      case axis::y:
      case axis::z: return 0.0;
    }
    return 0.0;
  }

  // Upper bound on |plane_shift| for heights up to |y_max|.
  [[nodiscard]] double shift_bound(double y_max) const {
    switch (vib.direction) {
      case axis::x: return vib.amplitude;
      case axis::theta_z: return vib.amplitude * y_max;
      case axis::y:
      case axis::z: return 0.0;
    }
    return 0.0;
  }
};

struct ray {
  double t_nominal = 0.0;  // unperturbed time at the last blade
  double delay = 0.0;      // actual time minus t_nominal
  double x0 = 0.0;         // x(t) = x0 + v_x t; v_x never changes
  double y = 0.0;
  double y_nominal = 0.0;  // height of the unkicked ray
  double sign = 1.0;       // v_y = sign * v_y0 + kick
  long double kick = 0.0L;
  velocity2 velocity{};
};

// Solve x0 + v_x (t_nominal + delay) = blade_x + plane_shift(y, t) for the
// delay behind the nominal crossing. Working in the delay keeps sub-ulp
// resolution of the absolute time, which matters because (m/hbar) v^2 is
// ~6e13 rad/s.
inline double solve_delay(const ray& r, const crystal_motion& motion, double t_nominal, double bound,
                          std::size_t blade, std::size_t& iterations) {
  const auto g = [&](double delay) {
    const double dt = (t_nominal - r.t_nominal) + (delay - r.delay);
    const double y = r.y + r.velocity.y * dt;
    return r.x0 + r.velocity.x * delay - motion.plane_shift(y, t_nominal + delay);
  };
  constexpr int max_iterations = 100;

  const double centre = -r.x0 / r.velocity.x;
  double half_width = 4.0 * bound / r.velocity.x + std::abs(centre) + 1e-30;
  double lo = centre - half_width;
  double hi = centre + half_width;
  double g_lo = g(lo);
  double g_hi = g(hi);
  for (int expand = 0; expand < 8 && g_lo * g_hi > 0.0; ++expand) {
    half_width *= 4.0;
    lo = centre - half_width;
    hi = centre + half_width;
    g_lo = g(lo);
    g_hi = g(hi);
  }
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if (g_lo * g_hi > 0.0) {
    throw oracle_error("no sign change bracketing blade " + std::to_string(blade), blade, lo, hi);
  }

  // Secant steps kept inside the bracket (Illinois variant of regula falsi).
  double a = lo, fa = g_lo;
  double b = hi, fb = g_hi;
  for (int it = 0; it < max_iterations; ++it) {
    ++iterations;
    const double c = (a * fb - b * fa) / (fb - fa);
    const double fc = g(c);
    if (fc == 0.0) return c;
    const double step = std::abs(c - b);
    if (fc * fb < 0.0) {
      a = b;
      fa = fb;
    } else {
      fa *= 0.5;
    }
    b = c;
    fb = fc;
    const double scale = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
    if (step <= scale || std::abs(b - a) <= scale) return b;
  }
  throw oracle_error("crossing-time solver did not converge at blade " + std::to_string(blade), blade, lo, hi);
}

struct traced_path {
  std::vector<path_segment> segments;
  std::vector<double> crossing_times;
  double end_y = 0.0;
  double end_delay = 0.0;
  long double excess = 0.0L;
};

inline traced_path trace_path(const phase_model_input& in, trace_mode mode, bool path_ii, std::size_t& iterations) {
  const geometry& geo = in.geom;
  const auto blades = geo.blade_positions();
  const auto nominal = geo.crossing_times_in_tau();
  const auto route = routing(geo.kind, path_ii);
  const double tau = in.tau();
  const double vy0 = in.beam.v_y;
  const double r = in.mass_over_hbar();
  const crystal_motion motion{in.vib, geo.center_x()};
  const double y_max = 4.0 * geo.half_separation * std::tan(in.beam.bragg_angle);
  const bool resolved = mode == trace_mode::event_resolved;

  traced_path out;
  ray state;
  state.velocity = {in.beam.v_x, vy0};
  state.x0 = resolved ? motion.plane_shift(0.0, 0.0) : 0.0;

  for (std::size_t b = 0; b < blades.size(); ++b) {
    const double t_nominal = nominal[b] * tau;
    if (b > 0) {
      const double delay = resolved ? solve_delay(state, motion, t_nominal, motion.shift_bound(y_max), b, iterations)
                                    : 0.0;
      const double dt_nominal = t_nominal - state.t_nominal;
      const double dt = dt_nominal + (delay - state.delay);
      path_segment seg;
      seg.start_time = state.t_nominal + state.delay;
      seg.end_time = t_nominal + delay;
      seg.velocity = state.velocity;
      seg.accumulated_phase = r * state.velocity.norm_squared() * dt;
      const long double dt_exact =
          (long double)(nominal[b] - nominal[b - 1]) * tau + ((long double)delay - state.delay);
      const long double excess =
          (long double)r * (2.0L * state.sign * vy0 * state.kick + state.kick * state.kick) * dt_exact;
      seg.excess_phase = double(excess);
      out.segments.push_back(seg);
      out.excess += excess;
      state.y += state.velocity.y * dt;
      state.y_nominal += state.sign * vy0 * dt_nominal;
      state.t_nominal = t_nominal;
      state.delay = delay;
    }
    out.crossing_times.push_back(state.t_nominal + state.delay);

    switch (route[b]) {
      case action::transmit:
        break;
      case action::reflect: {
        // Nominal mode samples the wall at the unperturbed crossing point.
        const double y = resolved ? state.y : state.y_nominal;
        const long double u = motion.wall_velocity(blades[b], y, state.t_nominal + state.delay);
        state.velocity = reflect_off_moving_wall(state.velocity, double(u));
        // Same bounce applied to the split v_y = sign * v_y0 + kick.
        state.sign = -state.sign;
        state.kick = -(state.kick - 2.0L * u);
        break;
      }
      case action::recombine:
        break;
    }
  }
  out.end_y = state.y;
  out.end_delay = state.delay;
  return out;
}

inline void require_traceable(const phase_model_input& in) {
  if (in.vib.direction == axis::x) {
    throw model_mismatch("trace: x-axis vibrations are traced with trace_x");
  }
}

}  // namespace oracle_detail

// Trace both paths for y, theta_z or z vibrations.
[[nodiscard]] inline trace_result trace(const phase_model_input& in, trace_mode mode = trace_mode::nominal_time) {
  oracle_detail::require_traceable(in);
  trace_result res;
  res.mode = mode;
  auto one = oracle_detail::trace_path(in, mode, false, res.solver_iterations);
  auto two = oracle_detail::trace_path(in, mode, true, res.solver_iterations);
  // Unperturbed phases differ only through unequal total flight times.
  const double v2 = in.beam.speed * in.beam.speed;
  res.delta_phi =
      double((long double)in.mass_over_hbar() * v2 * (two.end_delay - one.end_delay) + (two.excess - one.excess));
  res.recombination_offset = two.end_y - one.end_y;
  res.path_i = std::move(one.segments);
  res.path_ii = std::move(two.segments);
  return res;
}

// Trace x-axis vibrations. Longitudinal motion leaves every velocity alone;
// the phase comes from the paths meeting off the last blade. The blade-plane
// displacements at the crossing times are combined with the geometry's
// stencil (relative to the first blade):
//   three blades: (d3 - d1) - 2 (d2 - d1)
//   four blades:  (d4 - d1) - 4 (d2 - d1)
// then dl = 2 dx tan(alpha) sin(alpha) and Delta Phi = (m/hbar) v dl.
[[nodiscard]] inline trace_result trace_x(const phase_model_input& in, trace_mode mode = trace_mode::nominal_time) {
  if (in.vib.direction != axis::x) throw model_mismatch("trace_x: vibration axis must be x");
  trace_result res;
  res.mode = mode;
  auto one = oracle_detail::trace_path(in, mode, false, res.solver_iterations);
  auto two = oracle_detail::trace_path(in, mode, true, res.solver_iterations);

  const auto& t = one.crossing_times;
  const auto shift = [&](std::size_t b) { return in.vib.displacement_change(t.front(), t[b]); };
  const std::vector<double> weights = in.geom.kind == geometry_kind::three_blade
                                          ? std::vector<double>{-2.0, 1.0}
                                          : std::vector<double>{-4.0, 0.0, 1.0};
  double dx = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] != 0.0) dx += weights[k] * shift(k + 1);
  }
  const double alpha = in.beam.bragg_angle;
  const double dl = 2.0 * dx * std::tan(alpha) * std::sin(alpha);
  res.offset_x = dx;
  res.delta_phi = in.mass_over_hbar() * in.beam.speed * dl;
  res.recombination_offset = two.end_y - one.end_y;
  res.path_i = std::move(one.segments);
  res.path_ii = std::move(two.segments);
  return res;
}

// Dispatch on the vibration axis.
[[nodiscard]] inline trace_result trace_any(const phase_model_input& in, trace_mode mode = trace_mode::nominal_time) {
  return in.vib.direction == axis::x ? trace_x(in, mode) : trace(in, mode);
}

}  // namespace nivib
