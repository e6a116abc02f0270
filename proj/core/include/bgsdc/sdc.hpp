#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bgsdc/collocation.hpp"
#include "bgsdc/fields.hpp"
#include "bgsdc/integrators.hpp"
#include "bgsdc/work.hpp"

namespace bgsdc {

/// Stacked unknown U = (x_1..x_M, v_1..v_M) of one collocation step.
struct NodeSolution {
  std::vector<Vec3> xs;
  std::vector<Vec3> vs;

  NodeSolution() = default;
  explicit NodeSolution(std::size_t M) : xs(M), vs(M) {}

  std::size_t size() const { return xs.size(); }

  /// U_0 = (x0, ..., x0, v0, ..., v0).
  static NodeSolution uniform(std::size_t M, const Vec3& x0, const Vec3& v0);

  NodeSolution& operator+=(const NodeSolution& o);
  NodeSolution& operator-=(const NodeSolution& o);
  NodeSolution& operator*=(double s);

  friend bool operator==(const NodeSolution&, const NodeSolution&) = default;
};

NodeSolution operator+(NodeSolution a, const NodeSolution& b);
NodeSolution operator-(NodeSolution a, const NodeSolution& b);
NodeSolution operator*(double s, NodeSolution a);

/// Flat layout matching U: 3M position entries, then 3M velocity entries.
std::vector<double> flatten(const NodeSolution& U);
NodeSolution unflatten(std::span<const double> flat);

double norm(const NodeSolution& U);

/// Position and velocity at the end of a step.
struct PhasePoint {
  Vec3 x;
  Vec3 v;
};

/// F(U): velocity block v_m and force block f(x_m, v_m).
struct RHSStack {
  std::vector<Vec3> dxs;
  std::vector<Vec3> dvs;

  std::size_t size() const { return dxs.size(); }
};

/// Start of a step with the force at (x0, v0), which every node-1 evaluation
/// reuses (Lobatto node 1 coincides with the left endpoint).
struct StepStart {
  Vec3 x0;
  Vec3 v0;
  FieldSample sample0;

  /// Samples the field at x0 and charges one evaluation.
  static StepStart make(const Vec3& x0, const Vec3& v0, const FieldModel& field, WorkCounter* counter = nullptr);
};

/// Field frozen at fixed node positions. With it F becomes affine in U:
/// f_lin(v_m) = alpha (E_m + v_m x B_m).
struct FrozenField {
  std::vector<FieldSample> samples;

  std::size_t size() const { return samples.size(); }

  /// Samples the field at every node position; node 1 reuses the step start
  /// sample when it sits at x0. Charges M-1 evaluations in that case.
  static FrozenField at_nodes(const NodeSolution& U, const StepStart& start, const FieldModel& field,
                              WorkCounter* counter = nullptr);
  /// Samples every node (M evaluations).
  static FrozenField at_nodes(const NodeSolution& U, const FieldModel& field, WorkCounter* counter = nullptr);

  /// Same magnetic field with E removed: the linear part of F_lin.
  FrozenField linear_part() const;
};

/// F(U) with the live field; charges M evaluations.
RHSStack eval_F(const NodeSolution& U, const FieldModel& field, double alpha, WorkCounter* counter = nullptr);

/// F(U) reusing the start sample at node 1 when U sits at (x0, v0) there.
RHSStack eval_F(const NodeSolution& U, const StepStart& start, const FieldModel& field, double alpha,
                WorkCounter* counter = nullptr);

RHSStack eval_F_frozen(const NodeSolution& U, const FrozenField& frozen, double alpha);

/// Q applied blockwise: (sum_j q_mj dxs_j, sum_j q_mj dvs_j).
NodeSolution apply_QF(const RHSStack& stack, const CollocationTables& tables);

/// Q_Delta applied: (QdE v + 1/2 QdE2 f, QdT f).
NodeSolution apply_QdeltaF(const RHSStack& stack, const CollocationTables& tables);

/// U - Q F_lin(U).
NodeSolution apply_collocation_operator(const NodeSolution& U, const CollocationTables& tables,
                                        const FrozenField& frozen, double alpha);

/// Solves (I - Q_Delta F_lin) U = b by forward elimination over the nodes,
/// resolving each implicit velocity with the rotation kernel.
NodeSolution solve_preconditioner(const NodeSolution& b, const CollocationTables& tables,
                                  const FrozenField& frozen, double alpha);

/// Result of a nonlinear elimination: node values plus the field sampled at
/// each node, so F(U) is available without further evaluations.
struct SweepResult {
  NodeSolution U;
  std::vector<FieldSample> samples;

  RHSStack rhs(double alpha) const;
};

/// Solves U - Q_Delta F(U) = b with the field evaluated live at each freshly
/// computed position. Charges M-1 evaluations (node 1 reuses the start sample).
SweepResult nonlinear_elimination(const NodeSolution& b, const StepStart& start, const CollocationTables& tables,
                                  const FieldModel& field, double alpha, WorkCounter* counter = nullptr);

/// Predictor U^0 - Q_Delta F(U^0) = U_0: one non-staggered Boris pass across
/// the nodes. Charges M evaluations including the one at (x0, v0).
NodeSolution predictor_sweep(const Vec3& x0, const Vec3& v0, const CollocationTables& tables,
                             const FieldModel& field, double alpha, WorkCounter* counter = nullptr);

/// U^{k+1} = U_0 + Q F(U^k). Charges M-1 evaluations when node 1 is at (x0, v0).
NodeSolution picard_iteration(const NodeSolution& U_k, const StepStart& start, const CollocationTables& tables,
                              const FieldModel& field, double alpha, WorkCounter* counter = nullptr);
NodeSolution picard_iteration(const NodeSolution& U_k, const Vec3& x0, const Vec3& v0,
                              const CollocationTables& tables, const FieldModel& field, double alpha,
                              WorkCounter* counter = nullptr);

/// x_new = x0 + sum q_m v_m, v_new = v0 + sum q_m f(x_m, v_m).
PhasePoint collocation_update(const NodeSolution& U, const StepStart& start, const CollocationTables& tables,
                              const FieldModel& field, double alpha, WorkCounter* counter = nullptr);
PhasePoint collocation_update(const NodeSolution& U, const Vec3& x0, const Vec3& v0,
                              const CollocationTables& tables, const FieldModel& field, double alpha,
                              WorkCounter* counter = nullptr);

/// max over the 2M node blocks of |U - U_0 - Q F(U)|, divided by 1 + |v0|.
double collocation_residual(const NodeSolution& U, const Vec3& x0, const Vec3& v0, const CollocationTables& tables,
                            const FieldModel& field, double alpha);

}  // namespace bgsdc
