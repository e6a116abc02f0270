#include "bgsdc/sdc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bgsdc {

// ---------------------------------------------------------------------------
// NodeSolution

NodeSolution NodeSolution::uniform(std::size_t M, const Vec3& x0, const Vec3& v0) {
  NodeSolution U;
  U.xs.assign(M, x0);
  U.vs.assign(M, v0);
  return U;
}

NodeSolution& NodeSolution::operator+=(const NodeSolution& o) {
  for (std::size_t m = 0; m < size(); ++m) {
    xs[m] += o.xs[m];
    vs[m] += o.vs[m];
  }
  return *this;
}

NodeSolution& NodeSolution::operator-=(const NodeSolution& o) {
  for (std::size_t m = 0; m < size(); ++m) {
    xs[m] -= o.xs[m];
    vs[m] -= o.vs[m];
  }
  return *this;
}

NodeSolution& NodeSolution::operator*=(double s) {
  for (std::size_t m = 0; m < size(); ++m) {
    xs[m] *= s;
    vs[m] *= s;
  }
  return *this;
}

NodeSolution operator+(NodeSolution a, const NodeSolution& b) { return a += b; }
NodeSolution operator-(NodeSolution a, const NodeSolution& b) { return a -= b; }
NodeSolution operator*(double s, NodeSolution a) { return a *= s; }

std::vector<double> flatten(const NodeSolution& U) {
  const std::size_t M = U.size();
  std::vector<double> flat(6 * M);
  for (std::size_t m = 0; m < M; ++m) {
    for (int d = 0; d < 3; ++d) {
      flat[3 * m + d] = U.xs[m][d];
      flat[3 * M + 3 * m + d] = U.vs[m][d];
    }
  }
  return flat;
}

NodeSolution unflatten(std::span<const double> flat) {
  if (flat.size() % 6 != 0) throw std::invalid_argument("flat node vector length must be a multiple of 6");
  const std::size_t M = flat.size() / 6;
  NodeSolution U(M);
  for (std::size_t m = 0; m < M; ++m) {
    for (int d = 0; d < 3; ++d) {
      U.xs[m][d] = flat[3 * m + d];
      U.vs[m][d] = flat[3 * M + 3 * m + d];
    }
  }
  return U;
}

double norm(const NodeSolution& U) {
  double sum = 0.0;
  for (std::size_t m = 0; m < U.size(); ++m) sum += norm2(U.xs[m]) + norm2(U.vs[m]);
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// Field access

StepStart StepStart::make(const Vec3& x0, const Vec3& v0, const FieldModel& field, WorkCounter* counter) {
  count(counter);
  return {x0, v0, field.sample(x0)};
}

namespace {

FieldSample sample_node(std::size_t m, const Vec3& x, const StepStart& start, const FieldModel& field,
                        WorkCounter* counter) {
  if (m == 0 && x == start.x0) return start.sample0;
  count(counter);
  return field.sample(x);
}

RHSStack rhs_from_samples(const NodeSolution& U, std::span<const FieldSample> samples, double alpha) {
  RHSStack F{U.vs, std::vector<Vec3>(U.size())};
  for (std::size_t m = 0; m < U.size(); ++m) F.dvs[m] = lorentz(samples[m], U.vs[m], alpha);
  return F;
}

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("node count mismatch between solution and tables");
}

// Forward elimination for (I - Q_Delta F) U = b. Node m only depends on
// nodes j < m through the strictly lower parts of QdE, QdE2 and QdT; the
// diagonal of QdT (dtau_m / 2) makes the velocity implicit, which the
// rotation kernel resolves in closed form.
template <class SampleAt>
SweepResult eliminate(const NodeSolution& b, const CollocationTables& t, double alpha, SampleAt&& sample_at) {
  const std::size_t M = t.size();
  require_same_size(b.size(), M);
  SweepResult out{NodeSolution(M), std::vector<FieldSample>(M)};
  std::vector<Vec3> f(M);
  for (std::size_t m = 0; m < M; ++m) {
    Vec3 x = b.xs[m];
    Vec3 c = b.vs[m];
    for (std::size_t j = 0; j < m; ++j) {
      x += t.QdE(m, j) * out.U.vs[j] + (0.5 * t.QdE2(m, j)) * f[j];
      c += t.QdT(m, j) * f[j];
    }
    const FieldSample s = sample_at(m, x);
    const double h = alpha * t.QdT(m, m);
    const Vec3 v = boris_rotation_solve(c + h * s.E, h, s.B);
    out.U.xs[m] = x;
    out.U.vs[m] = v;
    out.samples[m] = s;
    f[m] = lorentz(s, v, alpha);
  }
  return out;
}

}  // namespace

FrozenField FrozenField::at_nodes(const NodeSolution& U, const StepStart& start, const FieldModel& field,
                                  WorkCounter* counter) {
  FrozenField frozen;
  frozen.samples.reserve(U.size());
  for (std::size_t m = 0; m < U.size(); ++m) frozen.samples.push_back(sample_node(m, U.xs[m], start, field, counter));
  return frozen;
}

FrozenField FrozenField::at_nodes(const NodeSolution& U, const FieldModel& field, WorkCounter* counter) {
  FrozenField frozen;
  frozen.samples.reserve(U.size());
  for (const Vec3& x : U.xs) frozen.samples.push_back(field.sample(x));
  count(counter, static_cast<std::int64_t>(U.size()));
  return frozen;
}

FrozenField FrozenField::linear_part() const {
  FrozenField lin = *this;
  for (FieldSample& s : lin.samples) s.E = {};
  return lin;
}

RHSStack SweepResult::rhs(double alpha) const { return rhs_from_samples(U, samples, alpha); }

// ---------------------------------------------------------------------------
// Operators

RHSStack eval_F(const NodeSolution& U, const FieldModel& field, double alpha, WorkCounter* counter) {
  std::vector<FieldSample> samples;
  samples.reserve(U.size());
  for (const Vec3& x : U.xs) samples.push_back(field.sample(x));
  count(counter, static_cast<std::int64_t>(U.size()));
  return rhs_from_samples(U, samples, alpha);
}

RHSStack eval_F(const NodeSolution& U, const StepStart& start, const FieldModel& field, double alpha,
                WorkCounter* counter) {
  std::vector<FieldSample> samples;
  samples.reserve(U.size());
  for (std::size_t m = 0; m < U.size(); ++m) samples.push_back(sample_node(m, U.xs[m], start, field, counter));
  return rhs_from_samples(U, samples, alpha);
}

RHSStack eval_F_frozen(const NodeSolution& U, const FrozenField& frozen, double alpha) {
  require_same_size(U.size(), frozen.size());
  return rhs_from_samples(U, frozen.samples, alpha);
}

NodeSolution apply_QF(const RHSStack& stack, const CollocationTables& tables) {
  const std::size_t M = tables.size();
  require_same_size(stack.size(), M);
  NodeSolution out(M);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t j = 0; j < M; ++j) {
      out.xs[m] += tables.Q(m, j) * stack.dxs[j];
      out.vs[m] += tables.Q(m, j) * stack.dvs[j];
    }
  }
  return out;
}

NodeSolution apply_QdeltaF(const RHSStack& stack, const CollocationTables& tables) {
  const std::size_t M = tables.size();
  require_same_size(stack.size(), M);
  NodeSolution out(M);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t j = 0; j < M; ++j) {
      out.xs[m] += tables.QdE(m, j) * stack.dxs[j] + (0.5 * tables.QdE2(m, j)) * stack.dvs[j];
      out.vs[m] += tables.QdT(m, j) * stack.dvs[j];
    }
  }
  return out;
}

NodeSolution apply_collocation_operator(const NodeSolution& U, const CollocationTables& tables,
                                        const FrozenField& frozen, double alpha) {
  return U - apply_QF(eval_F_frozen(U, frozen, alpha), tables);
}

NodeSolution solve_preconditioner(const NodeSolution& b, const CollocationTables& tables, const FrozenField& frozen,
                                  double alpha) {
  require_same_size(frozen.size(), tables.size());
  return eliminate(b, tables, alpha, [&](std::size_t m, const Vec3&) { return frozen.samples[m]; }).U;
}

SweepResult nonlinear_elimination(const NodeSolution& b, const StepStart& start, const CollocationTables& tables,
                                  const FieldModel& field, double alpha, WorkCounter* counter) {
  return eliminate(b, tables, alpha,
                   [&](std::size_t m, const Vec3& x) { return sample_node(m, x, start, field, counter); });
}

NodeSolution predictor_sweep(const Vec3& x0, const Vec3& v0, const CollocationTables& tables,
                             const FieldModel& field, double alpha, WorkCounter* counter) {
  const StepStart start = StepStart::make(x0, v0, field, counter);
  return nonlinear_elimination(NodeSolution::uniform(tables.size(), x0, v0), start, tables, field, alpha, counter).U;
}

NodeSolution picard_iteration(const NodeSolution& U_k, const StepStart& start, const CollocationTables& tables,
                              const FieldModel& field, double alpha, WorkCounter* counter) {
  return NodeSolution::uniform(tables.size(), start.x0, start.v0) +
         apply_QF(eval_F(U_k, start, field, alpha, counter), tables);
}

NodeSolution picard_iteration(const NodeSolution& U_k, const Vec3& x0, const Vec3& v0,
                              const CollocationTables& tables, const FieldModel& field, double alpha,
                              WorkCounter* counter) {
  const StepStart start{x0, v0, field.sample(x0)};
  return picard_iteration(U_k, start, tables, field, alpha, counter);
}

PhasePoint collocation_update(const NodeSolution& U, const StepStart& start, const CollocationTables& tables,
                              const FieldModel& field, double alpha, WorkCounter* counter) {
  const RHSStack F = eval_F(U, start, field, alpha, counter);
  PhasePoint out{start.x0, start.v0};
  for (std::size_t m = 0; m < tables.size(); ++m) {
    out.x += tables.q_end[m] * F.dxs[m];
    out.v += tables.q_end[m] * F.dvs[m];
  }
  return out;
}

PhasePoint collocation_update(const NodeSolution& U, const Vec3& x0, const Vec3& v0,
                              const CollocationTables& tables, const FieldModel& field, double alpha,
                              WorkCounter* counter) {
  const StepStart start{x0, v0, field.sample(x0)};
  return collocation_update(U, start, tables, field, alpha, counter);
}

double collocation_residual(const NodeSolution& U, const Vec3& x0, const Vec3& v0, const CollocationTables& tables,
                            const FieldModel& field, double alpha) {
  const NodeSolution r =
      U - NodeSolution::uniform(tables.size(), x0, v0) - apply_QF(eval_F(U, field, alpha), tables);
  double worst = 0.0;
  for (std::size_t m = 0; m < r.size(); ++m) worst = std::max({worst, norm(r.xs[m]), norm(r.vs[m])});
  return worst / (1.0 + norm(v0));
}

}  // namespace bgsdc
