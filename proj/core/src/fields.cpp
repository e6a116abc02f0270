#include "bgsdc/fields.hpp"

#include <cmath>
#include <stdexcept>

#include "bgsdc/errors.hpp"

namespace bgsdc {

namespace {

constexpr double kAxisTolerance = 1e-12;

struct PoloidalPoint {
  double R;
  double Z;
  double cos_phi;
  double sin_phi;
};

PoloidalPoint to_cylindrical(const Vec3& point) {
  const double R = std::hypot(point.x, point.y);
  if (R < kAxisTolerance) {
    throw DegeneratePointError("Solov'ev field evaluated on the symmetry axis (R < 1e-12 m)");
  }
  return {R, point.z, point.x / R, point.y / R};
}

Vec3 to_cartesian(const PoloidalPoint& p, double v_R, double v_Z, double v_phi) {
  return {v_R * p.cos_phi - v_phi * p.sin_phi, v_R * p.sin_phi + v_phi * p.cos_phi, v_Z};
}

}  // namespace

Vec3 uniform_B(const Vec3&, const Vec3& B_const) { return B_const; }

// ---------------------------------------------------------------------------

void MirrorParams::validate() const {
  if (!(z0 > 0.0)) throw std::invalid_argument("mirror: z0 must be positive");
  if (!(alpha != 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("mirror: alpha must be finite and non-zero");
  if (!std::isfinite(omega_B)) throw std::invalid_argument("mirror: omega_B must be finite");
  if (bz_curvature_sign != 1.0 && bz_curvature_sign != -1.0) {
    throw std::invalid_argument("mirror: bz_curvature_sign must be +1 or -1");
  }
}

Vec3 mirror_B(const Vec3& point, const MirrorParams& params) {
  const double B0 = params.B0();
  const double inv_z02 = 1.0 / (params.z0 * params.z0);
  return {-B0 * point.x * point.z * inv_z02, -B0 * point.y * point.z * inv_z02,
          B0 * (1.0 + params.bz_curvature_sign * point.z * point.z * inv_z02)};
}

MirrorField::MirrorField(const MirrorParams& params) : params_(params) { params_.validate(); }

// ---------------------------------------------------------------------------

void SolovevParams::validate() const {
  if (!(r_ma > r_mi && r_mi > 0.0)) throw std::invalid_argument("solovev: require r_ma > r_mi > 0");
  if (!(r_a > 0.0)) throw std::invalid_argument("solovev: r_a must be positive");
  if (!(sigma != 0.0 && psi != 0.0 && z0_len != 0.0)) {
    throw std::invalid_argument("solovev: sigma, psi and z0 must be non-zero");
  }
}

CylindricalB solovev_B_cylindrical(double R, double Z, const SolovevParams& p) {
  const double width = p.r_ma - p.r_mi;
  const double xt = 2.0 * (R - p.r_mi) / width - 1.0;
  const double yt = (Z - p.z_m) / p.z0_len;
  const double eps = p.epsilon;
  const double shape = 1.0 - 0.25 * eps * eps;
  const double sigma2 = p.sigma * p.sigma;

  const double B_R = -(2.0 * yt / sigma2) * shape * (1.0 + p.kappa * eps * xt * (2.0 + eps * xt)) / (p.psi * R);
  const double B_Z = 4.0 * (1.0 + eps * xt) *
                     (xt - 0.5 * eps * (1.0 - xt * xt) + shape * yt * yt * p.kappa * eps / sigma2) /
                     (p.psi * R * (width / p.z0_len));
  const double B_phi = p.Bphi0 / R;
  return {B_R, B_Z, B_phi};
}

Vec3 solovev_B(const Vec3& point, const SolovevParams& params) {
  const PoloidalPoint p = to_cylindrical(point);
  const CylindricalB b = solovev_B_cylindrical(p.R, p.Z, params);
  return to_cartesian(p, b.B_R, b.B_Z, b.B_phi);
}

Vec3 solovev_E(const Vec3& point, const SolovevParams& params) {
  const PoloidalPoint p = to_cylindrical(point);
  const double dR = p.R - params.R0;
  const double dZ = p.Z - params.Z0;
  const double r = std::hypot(dR, dZ);
  if (r < kAxisTolerance) return {};
  // E0 r^2 / r_a^2 along (dR, dZ) / r
  const double scale = params.E0 * r / (params.r_a * params.r_a);
  return to_cartesian(p, scale * dR, scale * dZ, 0.0);
}

double solovev_potential(const Vec3& point, const SolovevParams& params) {
  const PoloidalPoint p = to_cylindrical(point);
  const double r = std::hypot(p.R - params.R0, p.Z - params.Z0);
  return -params.E0 * r * r * r / (3.0 * params.r_a * params.r_a);
}

SolovevField::SolovevField(const SolovevParams& params) : params_(params) { params_.validate(); }

}  // namespace bgsdc
