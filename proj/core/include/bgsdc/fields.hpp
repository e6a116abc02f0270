#pragma once

#include "bgsdc/vec3.hpp"

namespace bgsdc {

/// Electric and magnetic field sampled at one point. Producing one sample
/// is the unit of work counted by the integrators.
struct FieldSample {
  Vec3 E;
  Vec3 B;
};

/// Static electromagnetic field. Implementations are pure and thread-safe.
class FieldModel {
 public:
  virtual ~FieldModel() = default;

  virtual Vec3 B_at(const Vec3& point) const = 0;
  virtual Vec3 E_at(const Vec3& /*point*/) const { return {}; }
  /// Electric potential with E = -grad(potential). Zero for purely magnetic models.
  virtual double potential_at(const Vec3& /*point*/) const { return 0.0; }

  FieldSample sample(const Vec3& point) const { return {E_at(point), B_at(point)}; }
};

// ---------------------------------------------------------------------------
// Uniform field (validation problem with closed-form gyration).

class UniformField final : public FieldModel {
 public:
  explicit UniformField(const Vec3& B, const Vec3& E = {}) : B_(B), E_(E) {}

  Vec3 B_at(const Vec3&) const override { return B_; }
  Vec3 E_at(const Vec3&) const override { return E_; }
  double potential_at(const Vec3& point) const override { return -dot(E_, point); }

  const Vec3& B() const { return B_; }

 private:
  Vec3 B_;
  Vec3 E_;
};

Vec3 uniform_B(const Vec3& point, const Vec3& B_const);

// ---------------------------------------------------------------------------
// Magnetic mirror
//
//   B = (-B0 x z / z0^2, -B0 y z / z0^2, B0 (1 + z^2 / z0^2))
//
// which is divergence-free and peaks at the coils z = +-z0.

struct MirrorParams {
  double z0 = 16.0;
  double omega_B = 400.0;
  double alpha = 1.0;
  /// Sign of the z^2 term in B_z. +1 is the divergence-free field; -1 reproduces
  /// the variant with a field minimum at the coils and is only kept for tests.
  double bz_curvature_sign = 1.0;

  double B0() const { return omega_B / alpha; }
  void validate() const;
};

Vec3 mirror_B(const Vec3& point, const MirrorParams& params);

class MirrorField final : public FieldModel {
 public:
  explicit MirrorField(const MirrorParams& params);

  Vec3 B_at(const Vec3& point) const override { return mirror_B(point, params_); }
  const MirrorParams& params() const { return params_; }

 private:
  MirrorParams params_;
};

// ---------------------------------------------------------------------------
// Solov'ev equilibrium with a radial electric field E_r = E0 r^2 / r_a^2 around
// the magnetic axis (R0, Z0). Defaults are the JET-like parameter set.

struct SolovevParams {
  double sigma = 1.46387369075;
  double epsilon = 0.22615668214;
  double kappa = 1.43320389205;
  double psi = 1.13333149039;  // T^-1 m^-1
  double r_ma = 3.83120489;    // m
  double r_mi = 1.96085203;    // m
  double z_m = 0.303973168;    // m
  double z0_len = 1.0;         // m
  double Bphi0 = -9.96056843;  // T m
  double E0 = 50000.0;         // V/m
  double r_a = 1.5;            // m
  double R0 = 3.000458;        // m
  double Z0 = 0.30397317;      // m
  double alpha = 47918787.60368;  // C/kg

  void validate() const;
};

/// Cylindrical components of the Solov'ev magnetic field at (R, Z).
struct CylindricalB {
  double B_R;
  double B_Z;
  double B_phi;
};

CylindricalB solovev_B_cylindrical(double R, double Z, const SolovevParams& params);

/// Magnetic field in Cartesian components. Throws DegeneratePointError for R < 1e-12.
Vec3 solovev_B(const Vec3& point, const SolovevParams& params);
Vec3 solovev_E(const Vec3& point, const SolovevParams& params);
/// Potential -E0 r^3 / (3 r_a^2), the antiderivative of the radial field.
double solovev_potential(const Vec3& point, const SolovevParams& params);

class SolovevField final : public FieldModel {
 public:
  explicit SolovevField(const SolovevParams& params);

  Vec3 B_at(const Vec3& point) const override { return solovev_B(point, params_); }
  Vec3 E_at(const Vec3& point) const override { return solovev_E(point, params_); }
  double potential_at(const Vec3& point) const override { return solovev_potential(point, params_); }

  const SolovevParams& params() const { return params_; }

 private:
  SolovevParams params_;
};

}  // namespace bgsdc
