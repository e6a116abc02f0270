#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <bgsdc/errors.hpp>
#include <bgsdc/fields.hpp>

using namespace bgsdc;

namespace {

double divergence(const FieldModel& f, const Vec3& p, double h) {
  double div = 0.0;
  for (int i = 0; i < 3; ++i) {
    Vec3 e;
    e[i] = h;
    div += (f.B_at(p + e)[i] - f.B_at(p - e)[i]) / (2.0 * h);
  }
  return div;
}

MirrorParams mirror(double B0, double z0) {
  MirrorParams p;
  p.z0 = z0;
  p.alpha = 1.0;
  p.omega_B = B0;
  return p;
}

Vec3 rotate_z(const Vec3& v, double phi) {
  return {std::cos(phi) * v.x - std::sin(phi) * v.y, std::sin(phi) * v.x + std::cos(phi) * v.y, v.z};
}

}  // namespace

TEST(Mirror, CentreAndCoilValues) {
  const Vec3 centre = mirror_B({0, 0, 0}, mirror(2000, 200));
  EXPECT_EQ(centre, Vec3(0, 0, 2000));
  const Vec3 coil = mirror_B({0, 0, 8}, mirror(1, 8));
  EXPECT_DOUBLE_EQ(coil.z, 2.0);
  EXPECT_DOUBLE_EQ(coil.x, 0.0);
}

TEST(Mirror, ClosedForm) {
  const MirrorParams p = mirror(400, 16);
  const Vec3 x{1, 2, 3};
  const Vec3 B = mirror_B(x, p);
  EXPECT_DOUBLE_EQ(B.x, -400.0 * 1 * 3 / 256.0);
  EXPECT_DOUBLE_EQ(B.y, -400.0 * 2 * 3 / 256.0);
  EXPECT_DOUBLE_EQ(B.z, 400.0 * (1 + 9 / 256.0));
}

TEST(Mirror, B0IsOmegaOverAlpha) {
  MirrorParams p;
  p.omega_B = 400;
  p.alpha = 2;
  EXPECT_DOUBLE_EQ(p.B0(), 200.0);
  EXPECT_DOUBLE_EQ(mirror_B({0, 0, 0}, p).z, 200.0);
}

TEST(Mirror, DivergenceFreeAtSamplePoint) {
  const MirrorField f(mirror(400, 16));
  EXPECT_LE(std::abs(divergence(f, {1, 2, 3}, 1e-4)), 1e-8);
}

TEST(Mirror, DivergenceFreeRandom) {
  const MirrorParams p = mirror(400, 16);
  const MirrorField f(p);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-p.z0 / 2, p.z0 / 2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x{u(rng), u(rng), u(rng)};
    EXPECT_LE(std::abs(divergence(f, x, 1e-4 * p.z0)), 1e-6 * p.B0());
  }
}

TEST(Mirror, CurvatureSignHookBreaksDivergence) {
  MirrorParams p = mirror(400, 16);
  p.bz_curvature_sign = -1.0;
  const MirrorField f(p);
  EXPECT_GT(std::abs(divergence(f, {1, 2, 3}, 1e-4)), 1.0);
}

TEST(Mirror, InvalidParams) {
  MirrorParams p;
  p.z0 = 0.0;
  EXPECT_THROW(MirrorField{p}, std::invalid_argument);
  p = MirrorParams{};
  p.alpha = 0.0;
  EXPECT_THROW(MirrorField{p}, std::invalid_argument);
}

TEST(Mirror, NoElectricField) {
  const MirrorField f(mirror(400, 16));
  EXPECT_EQ(f.E_at({1, 2, 3}), Vec3{});
  EXPECT_EQ(f.potential_at({1, 2, 3}), 0.0);
}

TEST(Uniform, ConstantEverywhere) {
  const UniformField f({0, 0, 1});
  EXPECT_EQ(f.B_at({1, 2, 3}), Vec3(0, 0, 1));
  EXPECT_EQ(f.B_at({-5, 0, 9}), f.B_at({1, 2, 3}));
  EXPECT_EQ(f.E_at({1, 2, 3}), Vec3{});
  EXPECT_EQ(uniform_B({4, 4, 4}, {0, 0, 0}), Vec3{});
}

TEST(Uniform, PotentialMatchesField) {
  const UniformField f({0, 0, 1}, {1, -2, 3});
  const Vec3 x{0.5, 0.25, -1};
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Vec3 e;
    e[i] = h;
    EXPECT_NEAR(-(f.potential_at(x + e) - f.potential_at(x - e)) / (2 * h), f.E_at(x)[i], 1e-8);
  }
}

TEST(Solovev, ToroidalComponent) {
  const SolovevParams p;
  const CylindricalB c = solovev_B_cylindrical(3.000458, 0.1, p);
  EXPECT_NEAR(c.B_phi, -9.96056843 / 3.000458, 1e-12);
  EXPECT_NEAR(c.B_phi, -3.3197, 1e-4);
  // Cartesian at phi = 0: B_y is the toroidal component.
  const Vec3 B = solovev_B({3.000458, 0, 0.1}, p);
  EXPECT_NEAR(B.y, c.B_phi, 1e-14);
  EXPECT_NEAR(B.x, c.B_R, 1e-14);
  EXPECT_NEAR(B.z, c.B_Z, 1e-14);
}

TEST(Solovev, RadialComponentVanishesAtZm) {
  const SolovevParams p;
  EXPECT_NEAR(solovev_B_cylindrical(2.7, p.z_m, p).B_R, 0.0, 1e-15);
}

TEST(Solovev, Axisymmetry) {
  const SolovevParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> R(2.2, 3.8), Z(-0.8, 1.2), ph(0.0, 2 * std::numbers::pi);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x{R(rng), 0.0, Z(rng)};
    const double phi = ph(rng);
    const Vec3 B0 = solovev_B(x, p);
    const Vec3 B1 = solovev_B(rotate_z(x, phi), p);
    EXPECT_NEAR(norm(B1), norm(B0), 1e-12 * norm(B0));
    // Components rotate with the point.
    const Vec3 expect = rotate_z(B0, phi);
    EXPECT_NEAR(norm(B1 - expect), 0.0, 1e-12 * norm(B0));
  }
  const Vec3 x{3.1, 0.4, 0.2};
  EXPECT_NEAR(norm(solovev_B(rotate_z(x, std::numbers::pi / 3), p)), norm(solovev_B(x, p)), 1e-12 * norm(solovev_B(x, p)));
}

TEST(Solovev, DivergenceFree) {
  const SolovevField f(SolovevParams{});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> R(2.2, 3.8), Z(-0.8, 1.2), ph(0.0, 2 * std::numbers::pi);
  for (int i = 0; i < 50; ++i) {
    const double phi = ph(rng);
    const double r = R(rng);
    const Vec3 x{r * std::cos(phi), r * std::sin(phi), Z(rng)};
    EXPECT_LE(std::abs(divergence(f, x, 1e-5)), 1e-6 * norm(f.B_at(x)));
  }
}

TEST(Solovev, DegeneratePoint) {
  const SolovevParams p;
  EXPECT_THROW(solovev_B({0, 0, 0.3}, p), DegeneratePointError);
  EXPECT_THROW(solovev_E({1e-13, 0, 0.3}, p), DegeneratePointError);
  EXPECT_THROW(solovev_potential({0, 0, 0.3}, p), DegeneratePointError);
}

TEST(Solovev, InvalidParams) {
  SolovevParams p;
  p.r_mi = 4.0;
  EXPECT_THROW(SolovevField{p}, std::invalid_argument);
  p = SolovevParams{};
  p.r_a = 0.0;
  EXPECT_THROW(SolovevField{p}, std::invalid_argument);
}

TEST(Solovev, ElectricFieldValues) {
  const SolovevParams p;
  EXPECT_EQ(solovev_E({p.R0, 0, p.Z0}, p), Vec3{});
  const Vec3 E = solovev_E({p.R0 + 1.0, 0, p.Z0}, p);
  EXPECT_NEAR(E.x, 50000.0 / 2.25, 1e-9);
  EXPECT_NEAR(E.y, 0.0, 1e-12);
  EXPECT_NEAR(E.z, 0.0, 1e-12);
  // |E| = E0 at r = r_a, in any poloidal direction and toroidal angle.
  const double th = 0.7;
  const double R = p.R0 + p.r_a * std::cos(th);
  const Vec3 x = rotate_z({R, 0, p.Z0 + p.r_a * std::sin(th)}, 1.1);
  EXPECT_NEAR(norm(solovev_E(x, p)), p.E0, 1e-10 * p.E0);
}

TEST(Solovev, PotentialValues) {
  const SolovevParams p;
  EXPECT_EQ(solovev_potential({p.R0, 0, p.Z0}, p), 0.0);
  EXPECT_NEAR(solovev_potential({p.R0 + p.r_a, 0, p.Z0}, p), -25000.0, 1e-9);
  // -dPhi/dr at r = 0.7 matches E_r.
  const double h = 1e-6;
  const double r = 0.7;
  const double dphi = (solovev_potential({p.R0 + r + h, 0, p.Z0}, p) - solovev_potential({p.R0 + r - h, 0, p.Z0}, p)) /
                      (2 * h);
  const double Er = p.E0 * r * r / (p.r_a * p.r_a);
  EXPECT_NEAR(-dphi, Er, 1e-6 * Er);
}

TEST(Solovev, PotentialGradientRandom) {
  const SolovevField f(SolovevParams{});
  const SolovevParams& p = f.params();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> rr(0.1, p.r_a), th(0, 2 * std::numbers::pi), ph(0, 2 * std::numbers::pi);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double r = rr(rng), t = th(rng);
    const Vec3 x = rotate_z({p.R0 + r * std::cos(t), 0, p.Z0 + r * std::sin(t)}, ph(rng));
    const Vec3 E = f.E_at(x);
    Vec3 grad;
    for (int k = 0; k < 3; ++k) {
      Vec3 e;
      e[k] = h;
      grad[k] = (f.potential_at(x + e) - f.potential_at(x - e)) / (2 * h);
    }
    EXPECT_LE(norm(E + grad), 1e-6 * norm(E));
  }
}

TEST(Solovev, ElectricFieldCurlFreePoloidal) {
  const SolovevParams p;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> rr(0.1, p.r_a), th(0, 2 * std::numbers::pi);
  const double h = 1e-5;
  auto ER = [&](double R, double Z) { return solovev_E({R, 0, Z}, p).x; };
  auto EZ = [&](double R, double Z) { return solovev_E({R, 0, Z}, p).z; };
  for (int i = 0; i < 100; ++i) {
    const double r = rr(rng), t = th(rng);
    const double R = p.R0 + r * std::cos(t), Z = p.Z0 + r * std::sin(t);
    const double dER_dZ = (ER(R, Z + h) - ER(R, Z - h)) / (2 * h);
    const double dEZ_dR = (EZ(R + h, Z) - EZ(R - h, Z)) / (2 * h);
    EXPECT_LE(std::abs(dER_dZ - dEZ_dR), 1e-6 * p.E0 / p.r_a);
  }
}
