#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <bgsdc/diagnostics.hpp>

#include "oracles.hpp"

using namespace bgsdc;

namespace {

constexpr double kPi = std::numbers::pi;

ReflectionEvent event(double B) {
  ReflectionEvent e;
  e.B_at_ref = B;
  return e;
}

// Node values of one step where x moves along z and v_par = v_z follows a given function.
template <class VparFn>
NodeSolution synthetic_step(const NodeSet& nodes, double t0, double dt, VparFn vpar) {
  NodeSolution U(nodes.size());
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    const double t = t0 + nodes.taus[m] * dt;
    U.xs[m] = {0.0, 0.0, t};
    U.vs[m] = {0.0, 0.0, vpar(t)};
  }
  return U;
}

}  // namespace

TEST(Pitch, Decomposition) {
  const PitchDecomposition par = pitch_decompose({0, 0, 3}, {0, 0, 1});
  EXPECT_EQ(par.v_perp, 0.0);
  EXPECT_EQ(par.pitch_angle, 0.0);
  const PitchDecomposition perp = pitch_decompose({3, 0, 0}, {0, 0, 1});
  EXPECT_EQ(perp.v_par, 0.0);
  EXPECT_NEAR(perp.pitch_angle, kPi / 2, 1e-15);
  const PitchDecomposition s1 = pitch_decompose({100, 0, 50}, {0, 0, 2000});
  EXPECT_DOUBLE_EQ(s1.v_par, 50.0);
  EXPECT_NEAR(s1.v_perp, 100.0, 1e-12);
  EXPECT_THROW(pitch_decompose({1, 0, 0}, {0, 0, 0}), std::invalid_argument);
  EXPECT_THROW(pitch_decompose({0, 0, 0}, {0, 0, 1}), std::invalid_argument);
}

TEST(BRef, AdiabaticPrediction) {
  MirrorParams p;
  p.omega_B = 2000;
  p.z0 = 200;
  const MirrorField f(p);
  EXPECT_NEAR(b_ref_adiabatic({1.0, 0.5, 0}, {100, 0, 50}, f), 2500.0, 1e-12 * 2500);
  EXPECT_NEAR(b_ref_adiabatic({1.0, 0.5, 0}, {200, 0, 100}, f), 2500.0, 1e-12 * 2500);
  EXPECT_NEAR(b_ref_adiabatic({0, 0, 0}, {3, 4, 0}, f), 2000.0, 1e-12 * 2000);
  EXPECT_THROW(b_ref_adiabatic({0, 0, 0}, {0, 0, 5}, f), std::domain_error);
}

TEST(BRef, RotationInvariant) {
  const Vec3 B{0.3, -1.2, 2.0}, v{1.0, 2.0, -0.5};
  const UniformField f(B);
  const double ref = b_ref_adiabatic({}, v, f);
  const double c = std::cos(0.7), s = std::sin(0.7);
  auto rot = [&](const Vec3& a) { return Vec3{c * a.x - s * a.y, s * a.x + c * a.y, a.z}; };
  const UniformField g(rot(B));
  EXPECT_NEAR(b_ref_adiabatic({}, rot(v), g), ref, 1e-12 * ref);
}

TEST(Reflections, NoEventWhenSignFixed) {
  const NodeSet nodes = lobatto_nodes(3);
  const UniformField f({0, 0, 1});
  ReflectionDetector d(nodes, 1.0, f);
  d.add(0, 0.0, synthetic_step(nodes, 0.0, 1.0, [](double t) { return 1.0 + t; }));
  EXPECT_TRUE(d.scan().events.empty());
  EXPECT_EQ(d.scan().skipped, 0u);
}

TEST(Reflections, LinearRootAtMidpoint) {
  const NodeSet nodes = lobatto_nodes(2);
  const UniformField f({0, 0, 3});
  ReflectionDetector d(nodes, 0.5, f);
  d.add(4, 2.0, synthetic_step(nodes, 2.0, 0.5, [](double t) { return t < 2.25 ? 1.0 : -1.0; }));
  ASSERT_EQ(d.scan().events.size(), 1u);
  const ReflectionEvent& e = d.scan().events[0];
  EXPECT_NEAR(e.t_ref, 2.25, 1e-12);
  EXPECT_NEAR(e.x_ref.z, 2.25, 1e-12);
  EXPECT_DOUBLE_EQ(e.B_at_ref, 3.0);
  EXPECT_EQ(e.step_index, 4u);
}

TEST(Reflections, CosineRootRecovered) {
  // The interpolant's root error scales like (omega dt)^M; omega dt = 0.1 resolves it.
  const double omega = 1.0, dt = 0.1;
  const NodeSet nodes = lobatto_nodes(5);
  const UniformField f({0, 0, 1});
  std::vector<NodeSolution> data;
  std::vector<double> starts;
  for (int k = 0; k < 20; ++k) {
    starts.push_back(k * dt);
    data.push_back(synthetic_step(nodes, k * dt, dt, [&](double t) { return std::cos(omega * t); }));
  }
  const ReflectionScan scan = detect_reflections(data, starts, dt, nodes, f);
  ASSERT_EQ(scan.events.size(), 1u);
  EXPECT_NEAR(scan.events[0].t_ref, kPi / (2 * omega), 1e-8 * dt);
  EXPECT_EQ(scan.events[0].step_index, 15u);
}

TEST(Reflections, PolynomialRootExact) {
  // v_par(t) = (t - 0.3)(1 + t^2) is exactly representable with 5 nodes.
  const NodeSet nodes = lobatto_nodes(5);
  const UniformField f({0, 0, 1});
  ReflectionDetector d(nodes, 1.0, f);
  d.add(0, 0.0, synthetic_step(nodes, 0.0, 1.0, [](double t) { return (t - 0.3) * (1 + t * t); }));
  ASSERT_EQ(d.scan().events.size(), 1u);
  EXPECT_NEAR(d.scan().events[0].t_ref, 0.3, 1e-12);
}

TEST(Reflections, FromRecordedRun) {
  // A mirror-trapped particle bounces; the streamed and stored scans agree.
  MirrorParams p;
  p.omega_B = 400;
  p.z0 = 4;
  const MirrorField f(p);
  const MethodConfig cfg{Method::Bgsdc, 3, 1, 2, 1, UpdateKind::Quadrature};
  RunOptions opt;
  opt.retain_nodes = true;
  ReflectionDetector live(lobatto_nodes(3), 1e-3, f);
  opt.node_observer = [&](std::size_t k, double t, const NodeSolution& U) { live.add(k, t, U); };
  const RunRecord rec = run_trajectory({{0.1, 0, 0}, {10, 0, 10}, 0}, 1e-3, 1000, f, 1.0, cfg, opt);
  const ReflectionScan scan = detect_reflections(rec, f);
  ASSERT_GE(scan.events.size(), 1u);
  ASSERT_EQ(scan.events.size(), live.scan().events.size());
  for (std::size_t i = 0; i < scan.events.size(); ++i) {
    EXPECT_EQ(scan.events[i].t_ref, live.scan().events[i].t_ref);
    // Reflections happen where |B| matches the adiabatic prediction closely.
    EXPECT_NEAR(scan.events[i].B_at_ref, b_ref_adiabatic({0.1, 0, 0}, {10, 0, 10}, f), 0.05 * p.omega_B);
  }
  RunRecord bare = rec;
  bare.node_data.clear();
  EXPECT_THROW(detect_reflections(bare, f), std::invalid_argument);
}

TEST(SigmaB, Values) {
  const std::vector<ReflectionEvent> same{event(5), event(5)};
  EXPECT_EQ(sigma_B(same, 5.0), 0.0);
  const std::vector<ReflectionEvent> one{event(7)};
  EXPECT_DOUBLE_EQ(sigma_B(one, 5.0), 2.0);
  const std::vector<ReflectionEvent> pm{event(6), event(4)};
  EXPECT_DOUBLE_EQ(sigma_B(pm, 5.0), 1.0);
  const std::vector<double> refs{6.0, 4.0};
  EXPECT_EQ(sigma_B(pm, refs), 0.0);
  EXPECT_THROW(sigma_B(std::vector<ReflectionEvent>{}, 1.0), std::invalid_argument);
  EXPECT_THROW(sigma_B(pm, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(SigmaB, PermutationAndScaling) {
  const std::vector<ReflectionEvent> a{event(1), event(2), event(4)};
  const std::vector<ReflectionEvent> b{event(4), event(1), event(2)};
  EXPECT_DOUBLE_EQ(sigma_B(a, 2.5), sigma_B(b, 2.5));
  const std::vector<ReflectionEvent> c{event(10), event(20), event(40)};
  EXPECT_NEAR(sigma_B(c, 25.0), 10.0 * sigma_B(a, 2.5), 1e-12);
}

TEST(Defect, IdenticalAndShifted) {
  const UniformField f({0, 0, 1});
  const MethodConfig boris{Method::NonstaggeredBoris, 2, 0, 0, 1, UpdateKind::Quadrature};
  const RunRecord ref = run_trajectory({{1, 0, 0}, {0, 1, 0}, 0}, 0.05, 40, f, 1.0, boris);
  EXPECT_EQ(trajectory_defect(ref, ref), 0.0);
  RunRecord shifted = ref;
  shifted.states[7].x.y += 0.5;
  EXPECT_DOUBLE_EQ(trajectory_defect(shifted, ref), 0.5);
  DefectAccumulator acc(ref);
  for (const auto& s : shifted.states) acc.add(s);
  EXPECT_DOUBLE_EQ(acc.value(), 0.5);
}

TEST(Defect, CoarseRunAgainstAnalyticGyration) {
  // Reference sampled from the exact solution; the defect is the largest
  // componentwise deviation of the coarse run at shared times.
  const Vec3 B{0, 0, 1};
  const ParticleState s0{{1, 0, 0}, {0, 1, 0.1}, 0};
  const MethodConfig boris{Method::NonstaggeredBoris, 2, 0, 0, 1, UpdateKind::Quadrature};
  const UniformField f(B);
  const RunRecord run = run_trajectory(s0, 0.2, 20, f, 1.0, boris);
  RunRecord ref = run_trajectory(s0, 0.05, 80, f, 1.0, boris);
  double expect = 0.0;
  for (auto& s : ref.states) {
    const auto e = oracle::gyro_expm(s0.x, s0.v, B, 1.0, s.t);
    s.x = e.x;
    s.v = e.v;
  }
  for (const auto& s : run.states) {
    const auto e = oracle::gyro_expm(s0.x, s0.v, B, 1.0, s.t);
    for (int i = 0; i < 3; ++i) expect = std::max(expect, std::abs(s.x[i] - e.x[i]));
  }
  EXPECT_NEAR(trajectory_defect(run, ref), expect, 1e-10);
}

TEST(Defect, MisalignedGrid) {
  const UniformField f({0, 0, 1});
  const MethodConfig boris{Method::NonstaggeredBoris, 2, 0, 0, 1, UpdateKind::Quadrature};
  const RunRecord a = run_trajectory({{1, 0, 0}, {0, 1, 0}, 0}, 0.03, 10, f, 1.0, boris);
  const RunRecord b = run_trajectory({{1, 0, 0}, {0, 1, 0}, 0}, 0.02, 15, f, 1.0, boris);
  EXPECT_THROW(trajectory_defect(a, b), std::invalid_argument);
}

TEST(Orders, PairwiseAndFitted) {
  const std::vector<double> h1{0.1, 0.01}, e1{1e-2, 1e-4};
  EXPECT_NEAR(convergence_order(h1, e1)[0], 2.0, 1e-12);
  const std::vector<double> h2{0.2, 0.1}, e2{8e-3, 1e-3};
  EXPECT_NEAR(convergence_order(h2, e2)[0], 3.0, 1e-12);
  const std::vector<double> h3{0.2, 0.1, 0.05}, e3{1e-13, 1e-13, 1e-13};
  for (double p : convergence_order(h3, e3)) EXPECT_EQ(p, 0.0);
  const std::vector<double> e4{4.0, 1.0, 0.25};
  EXPECT_NEAR(fitted_order(h3, e4), 2.0, 1e-12);
  const std::vector<double> bad{1.0, 0.0};
  EXPECT_THROW(convergence_order(h1, bad), std::invalid_argument);
  const std::vector<double> short_h{0.1};
  EXPECT_THROW(convergence_order(short_h, short_h), std::invalid_argument);
}

TEST(SelfConvergence, Values) {
  const std::vector<Vec3> same{{2, 0, 0}, {2, 0, 0}, {2, 0, 0}};
  for (double e : self_convergence(same)) EXPECT_EQ(e, 0.0);
  const std::vector<Vec3> two{{1.0, 0, 0}, {1.1, 0, 0}};
  EXPECT_NEAR(self_convergence(two)[0], 0.1, 1e-15);
  const std::vector<Vec3> vec{{3, 4, 0}, {3, 4, 1}};
  EXPECT_NEAR(self_convergence_norm(vec)[0], 0.2, 1e-15);
  const std::vector<Vec3> zero{{0, 0, 0}, {1, 0, 0}};
  EXPECT_THROW(self_convergence(zero), std::invalid_argument);
}

TEST(SelfConvergence, RecoversOrderOnGyration) {
  // Final positions of staggered Boris over a quarter orbit at halving steps.
  const UniformField f({0, 0, 1});
  const MethodConfig sb{Method::StaggeredBoris, 2, 0, 0, 1, UpdateKind::Quadrature};
  std::vector<Vec3> finals;
  std::vector<double> h;
  for (int n : {50, 100, 200, 400}) {
    const RunRecord r = run_trajectory({{1, 0, 0}, {0, 1, 0}, 0}, 1.3 / n, n, f, 1.0, sb);
    finals.push_back(r.states.back().x);
    h.push_back(1.3 / n);
  }
  const std::vector<double> e = self_convergence_norm(finals);
  EXPECT_NEAR(e[0] / e[1], 4.0, 0.4);
  EXPECT_NEAR(e[1] / e[2], 4.0, 0.4);
}

TEST(Energy, SeriesBasics) {
  const UniformField f({0, 0, 0});
  const MethodConfig sb{Method::StaggeredBoris, 2, 0, 0, 1, UpdateKind::Quadrature};
  const RunRecord r = run_trajectory({{0, 0, 0}, {1, 2, 3}, 0}, 0.1, 10, f, 1.0, sb);
  const EnergySeries es = relative_energy_series(r, f, 1.0);
  ASSERT_EQ(es.relative_error.size(), 11u);
  EXPECT_EQ(es.relative_error[0], 0.0);
  for (double e : es.relative_error) EXPECT_LE(e, 1e-15);
  const RunRecord z = run_trajectory({{0, 0, 0}, {0, 0, 0}, 0}, 0.1, 3, f, 1.0, sb);
  EXPECT_THROW(relative_energy_series(z, f, 1.0), std::domain_error);
}

TEST(Energy, StaggeredHalfStepSpeedsConserved) {
  const MirrorField f(MirrorParams{});
  const MethodConfig sb{Method::StaggeredBoris, 2, 0, 0, 1, UpdateKind::Quadrature};
  const RunRecord r = run_trajectory({{1, 0, 0}, {100, 0, 50}, 0}, 0.5 / 400, 5000, f, 1.0, sb);
  const EnergySeries es = relative_energy_series(r, f, 1.0);
  for (double e : es.relative_error) EXPECT_LE(e, 1e-12);
  const EnergySeries stored = relative_energy_series(r);
  EXPECT_EQ(stored.relative_error.size(), es.relative_error.size());
}

TEST(Energy, TwoHalvesTest) {
  const std::vector<double> flat{0.0, 1e-5, 2e-5, 1e-5, 2e-5, 3e-5};
  EXPECT_TRUE(bounded_two_halves(flat));
  const std::vector<double> growing{0.0, 1e-6, 2e-6, 1e-5, 5e-5, 1e-4};
  EXPECT_FALSE(bounded_two_halves(growing));
  EXPECT_TRUE(bounded_two_halves(growing, 100.0));
}
