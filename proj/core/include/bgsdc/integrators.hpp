#pragma once

#include "bgsdc/fields.hpp"
#include "bgsdc/vec3.hpp"
#include "bgsdc/work.hpp"

namespace bgsdc {

struct ParticleState {
  Vec3 x;
  Vec3 v;
  double t = 0.0;
};

/// Leapfrog state: position at t and velocity at t - dt/2.
struct StaggeredState {
  Vec3 x_n;
  Vec3 v_half;
  double t = 0.0;
};

/// Lorentz acceleration alpha (E + v x B) from a precomputed field sample.
inline Vec3 lorentz(const FieldSample& s, const Vec3& v, double alpha) {
  return alpha * (s.E + cross(v, s.B));
}

/// Unique solution of v = c + h (v x B):
///   v = (c + h c x B + h^2 (c . B) B) / (1 + h^2 |B|^2)
/// The coefficient h absorbs the charge-to-mass ratio and the (sub)step length.
Vec3 boris_rotation_solve(const Vec3& c, double h, const Vec3& B);

/// Half kick, rotation, half kick. Solves
///   v = v_prev + alpha dt E_half + alpha dt (v_prev + v) / 2 x B_here.
Vec3 boris_trick(const Vec3& v_prev, const Vec3& E_half, const Vec3& B_here, double dt, double alpha);

/// Velocity-Verlet step with the implicit trapezoidal velocity update
/// resolved in closed form. Costs one f-evaluation.
ParticleState step_nonstaggered(const ParticleState& state, double dt, const FieldModel& field, double alpha,
                                WorkCounter* counter = nullptr);

/// First kick and drift of the kick-drift-kick scheme: v_{1/2} from a
/// norm-preserving half step at (x_0, v_0), then x_1 = x_0 + dt v_{1/2}.
StaggeredState staggered_start(const ParticleState& state, double dt, const FieldModel& field, double alpha,
                               WorkCounter* counter = nullptr);

/// Classical leapfrog Boris step (x_n, v_{n-1/2}) -> (x_{n+1}, v_{n+1/2}).
StaggeredState step_staggered(const StaggeredState& state, double dt, const FieldModel& field, double alpha,
                              WorkCounter* counter = nullptr);

/// Velocity at t_n from (x_n, v_{n-1/2}) by closing the last half kick.
/// Diagnostic only; not counted as work.
ParticleState synchronize(const StaggeredState& state, double dt, const FieldModel& field, double alpha);

/// Exact motion in a uniform magnetic field (E = 0). Throws std::invalid_argument for B = 0.
ParticleState gyro_analytic(const ParticleState& state0, double t, const Vec3& B_const, double alpha);

}  // namespace bgsdc
