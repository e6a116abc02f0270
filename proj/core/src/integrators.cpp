#include "bgsdc/integrators.hpp"

#include <cmath>
#include <stdexcept>

namespace bgsdc {

Vec3 boris_rotation_solve(const Vec3& c, double h, const Vec3& B) {
  const Vec3 hB = h * B;
  return (c + cross(c, hB) + dot(c, hB) * hB) / (1.0 + norm2(hB));
}

Vec3 boris_trick(const Vec3& v_prev, const Vec3& E_half, const Vec3& B_here, double dt, double alpha) {
  const double half = 0.5 * alpha * dt;
  const Vec3 t = half * B_here;
  const Vec3 s = (2.0 / (1.0 + norm2(t))) * t;
  const Vec3 v_minus = v_prev + half * E_half;
  const Vec3 v_star = v_minus + cross(v_minus, t);
  const Vec3 v_plus = v_minus + cross(v_star, s);
  return v_plus + half * E_half;
}

ParticleState step_nonstaggered(const ParticleState& state, double dt, const FieldModel& field, double alpha,
                                WorkCounter* counter) {
  // The sample at x_n is the one taken at the end of the previous step, so a
  // step costs a single new evaluation.
  const FieldSample here = field.sample(state.x);
  const Vec3 f_n = lorentz(here, state.v, alpha);
  const Vec3 x_new = state.x + dt * (state.v + (0.5 * dt) * f_n);

  const FieldSample there = field.sample(x_new);
  count(counter);
  // v_{n+1} = v_n + dt/2 f_n + (alpha dt/2) (E_{n+1} + v_{n+1} x B_{n+1})
  const double h = 0.5 * alpha * dt;
  const Vec3 c = state.v + (0.5 * dt) * f_n + h * there.E;
  return {x_new, boris_rotation_solve(c, h, there.B), state.t + dt};
}

StaggeredState staggered_start(const ParticleState& state, double dt, const FieldModel& field, double alpha,
                               WorkCounter* counter) {
  const FieldSample here = field.sample(state.x);
  count(counter);
  const Vec3 v_half = boris_trick(state.v, here.E, here.B, 0.5 * dt, alpha);
  return {state.x + dt * v_half, v_half, state.t + dt};
}

StaggeredState step_staggered(const StaggeredState& state, double dt, const FieldModel& field, double alpha,
                              WorkCounter* counter) {
  const FieldSample here = field.sample(state.x_n);
  count(counter);
  const Vec3 v_half = boris_trick(state.v_half, here.E, here.B, dt, alpha);
  return {state.x_n + dt * v_half, v_half, state.t + dt};
}

ParticleState synchronize(const StaggeredState& state, double dt, const FieldModel& field, double alpha) {
  const FieldSample here = field.sample(state.x_n);
  const double h = 0.5 * alpha * dt;
  return {state.x_n, boris_rotation_solve(state.v_half + h * here.E, h, here.B), state.t};
}

ParticleState gyro_analytic(const ParticleState& state0, double t, const Vec3& B_const, double alpha) {
  const double B_norm = norm(B_const);
  if (B_norm == 0.0) throw std::invalid_argument("gyro_analytic requires a non-zero field");
  const Vec3 b = B_const / B_norm;
  const double omega = alpha * B_norm;

  const Vec3 v_par = dot(state0.v, b) * b;
  const Vec3 v_perp = state0.v - v_par;
  const Vec3 v_perp_x_b = cross(v_perp, b);
  const double phase = omega * t;
  const double c = std::cos(phase);
  const double s = std::sin(phase);

  // dv/dt = alpha v x B rotates v_perp towards v_perp x b.
  const Vec3 v = v_par + c * v_perp + s * v_perp_x_b;
  const Vec3 x = state0.x + t * v_par + (s / omega) * v_perp + ((1.0 - c) / omega) * v_perp_x_b;
  return {x, v, state0.t + t};
}

}  // namespace bgsdc
