#include "bgsdc/stepper.hpp"

#include <stdexcept>

#include "bgsdc/errors.hpp"
#include "bgsdc/gmres.hpp"

namespace bgsdc {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::StaggeredBoris: return "staggered-boris";
    case Method::NonstaggeredBoris: return "nonstaggered-boris";
    case Method::BorisSdc: return "boris-sdc";
    case Method::Bgsdc: return "bgsdc";
  }
  return "unknown";
}

std::string_view to_string(UpdateKind u) { return u == UpdateKind::Quadrature ? "quadrature" : "last_node"; }

Method parse_method(std::string_view name) {
  for (Method m : {Method::StaggeredBoris, Method::NonstaggeredBoris, Method::BorisSdc, Method::Bgsdc}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

UpdateKind parse_update(std::string_view name) {
  if (name == "quadrature") return UpdateKind::Quadrature;
  if (name == "last_node") return UpdateKind::LastNode;
  throw std::invalid_argument("unknown update kind '" + std::string(name) + "'");
}

std::string MethodConfig::iterations_label() const {
  switch (method) {
    case Method::Bgsdc: return std::to_string(K_gmres) + "," + std::to_string(K_picard);
    case Method::BorisSdc: return std::to_string(K_sweeps);
    default: return "";
  }
}

std::string MethodConfig::label() const {
  std::string out(to_string(method));
  if (is_collocation()) out += "(" + iterations_label() + ")";
  return out;
}

void MethodConfig::validate() const {
  if (is_collocation() && (M < kMinNodes || M > kMaxNodes)) {
    throw std::invalid_argument("M must lie in [" + std::to_string(kMinNodes) + ", " + std::to_string(kMaxNodes) +
                                "], got " + std::to_string(M));
  }
  if (K_gmres < 0 || K_picard < 0) throw std::invalid_argument("iteration counts must be non-negative");
  if (method == Method::Bgsdc && K_gmres > 6 * M) {
    throw std::invalid_argument("K_gmres exceeds the dimension 6M of the collocation system");
  }
  if (method == Method::BorisSdc && K_sweeps < 1) throw std::invalid_argument("boris-sdc needs K_sweeps >= 1");
}

namespace {

PhasePoint quadrature_update(const Vec3& x0, const Vec3& v0, const RHSStack& F, const CollocationTables& tables) {
  PhasePoint out{x0, v0};
  for (std::size_t m = 0; m < tables.size(); ++m) {
    out.x += tables.q_end[m] * F.dxs[m];
    out.v += tables.q_end[m] * F.dvs[m];
  }
  return out;
}

PhasePoint last_node(const NodeSolution& U) { return {U.xs.back(), U.vs.back()}; }

}  // namespace

StepResult bgsdc_step(const Vec3& x0, const Vec3& v0, const CollocationTables& tables, const FieldModel& field,
                      double alpha, const MethodConfig& config, WorkCounter* counter) {
  const std::size_t M = tables.size();
  const StepStart start = StepStart::make(x0, v0, field, counter);
  const NodeSolution U0 = NodeSolution::uniform(M, x0, v0);

  NodeSolution U = nonlinear_elimination(U0, start, tables, field, alpha, counter).U;

  // F_lin(U) = L U + e with L the frozen magnetic rotation and e = (0, alpha E_m).
  // GMRES sees the linear part; e moves to the right-hand side.
  const FrozenField frozen = FrozenField::at_nodes(U, start, field, counter);
  if (config.K_gmres > 0) {
    const FrozenField linear = frozen.linear_part();
    RHSStack e{std::vector<Vec3>(M), std::vector<Vec3>(M)};
    for (std::size_t m = 0; m < M; ++m) e.dvs[m] = alpha * frozen.samples[m].E;

    const NodeSolution rhs = solve_preconditioner(U0 + apply_QF(e, tables), tables, linear, alpha);
    const LinearMap A = [&](std::span<const double> u) {
      const NodeSolution Uu = unflatten(u);
      return flatten(solve_preconditioner(apply_collocation_operator(Uu, tables, linear, alpha), tables, linear, alpha));
    };
    const std::vector<double> b = flatten(rhs);
    const KrylovResult kr = gmres_solve(A, b, flatten(U), config.K_gmres);
    U = unflatten(kr.solution);
    // The operator is the identity on node 1, so this only removes rounding.
    U.xs[0] = x0;
    U.vs[0] = v0;
  }

  for (int k = 0; k < config.K_picard; ++k) U = picard_iteration(U, start, tables, field, alpha, counter);

  StepResult out;
  out.end = config.update == UpdateKind::Quadrature ? collocation_update(U, start, tables, field, alpha, counter)
                                                    : last_node(U);
  out.nodes = std::move(U);
  return out;
}

StepResult boris_sdc_step(const Vec3& x0, const Vec3& v0, const CollocationTables& tables, const FieldModel& field,
                          double alpha, const MethodConfig& config, WorkCounter* counter) {
  const std::size_t M = tables.size();
  const StepStart start = StepStart::make(x0, v0, field, counter);
  const NodeSolution U0 = NodeSolution::uniform(M, x0, v0);

  SweepResult sweep = nonlinear_elimination(U0, start, tables, field, alpha, counter);
  for (int k = 0; k < config.K_sweeps; ++k) {
    const RHSStack F = sweep.rhs(alpha);
    const NodeSolution b = U0 + apply_QF(F, tables) - apply_QdeltaF(F, tables);
    sweep = nonlinear_elimination(b, start, tables, field, alpha, counter);
  }

  StepResult out;
  // The last sweep already sampled the field at the final node positions.
  out.end = config.update == UpdateKind::Quadrature ? quadrature_update(x0, v0, sweep.rhs(alpha), tables)
                                                    : last_node(sweep.U);
  out.nodes = std::move(sweep.U);
  return out;
}

double total_energy(const Vec3& x, const Vec3& v, const FieldModel& field, double alpha) {
  return 0.5 * norm2(v) + alpha * field.potential_at(x);
}

namespace {

void check_finite(std::size_t step, const Vec3& x, const Vec3& v) {
  if (!is_finite(x)) throw NonFiniteStateError(step, "position");
  if (!is_finite(v)) throw NonFiniteStateError(step, "velocity");
}

NodeSolution endpoints(const ParticleState& a, const ParticleState& b) {
  NodeSolution U(2);
  U.xs = {a.x, b.x};
  U.vs = {a.v, b.v};
  return U;
}

// Stores strided states and the full energy series, forwards every state to
// the observer.
class Recorder {
 public:
  Recorder(RunRecord& rec, const RunOptions& options) : rec_(rec), options_(options) {}

  void push(std::size_t n, const ParticleState& s, double energy, const Vec3* v_half = nullptr) {
    check_finite(n, s.x, s.v);
    if (options_.observer) options_.observer(s);
    rec_.energy.push_back(energy);
    if (n % rec_.record_stride == 0 || n == rec_.steps()) {
      rec_.states.push_back(s);
      if (v_half != nullptr) rec_.half_step_velocities.push_back(*v_half);
    }
  }

  void push_nodes(std::size_t step, double t_start, NodeSolution&& U) {
    if (options_.node_observer) options_.node_observer(step, t_start, U);
    if (options_.retain_nodes) rec_.node_data.push_back(std::move(U));
  }

  bool wants_nodes() const { return options_.retain_nodes || static_cast<bool>(options_.node_observer); }

 private:
  RunRecord& rec_;
  const RunOptions& options_;
};

}  // namespace

RunRecord run_trajectory(const ParticleState& initial, double dt, std::int64_t N_steps, const FieldModel& field,
                         double alpha, const MethodConfig& config, const RunOptions& options) {
  if (N_steps < 1) throw std::invalid_argument("run_trajectory needs at least one step");
  if (options.record_stride < 1) throw std::invalid_argument("record_stride must be at least 1");
  config.validate();

  RunRecord rec;
  rec.config = config;
  rec.dt = dt;
  rec.alpha = alpha;
  rec.n_steps = N_steps;
  rec.record_stride = options.record_stride;
  rec.nodes = config.is_collocation() ? lobatto_nodes(config.M) : NodeSet{{0.0, 1.0}};
  const auto N = static_cast<std::size_t>(N_steps);
  rec.states.reserve(N / rec.record_stride + 2);
  rec.energy.reserve(N + 1);
  if (options.retain_nodes) rec.node_data.reserve(N);

  Recorder recorder(rec, options);
  auto time_at = [&](std::size_t n) { return initial.t + static_cast<double>(n) * dt; };

  switch (config.method) {
    case Method::NonstaggeredBoris: {
      ParticleState s = initial;
      recorder.push(0, s, total_energy(s.x, s.v, field, alpha));
      for (std::size_t n = 1; n <= N; ++n) {
        ParticleState next = step_nonstaggered(s, dt, field, alpha, &rec.work);
        next.t = time_at(n);
        recorder.push(n, next, total_energy(next.x, next.v, field, alpha));
        if (recorder.wants_nodes()) recorder.push_nodes(n - 1, s.t, endpoints(s, next));
        s = next;
      }
      break;
    }
    case Method::StaggeredBoris: {
      ParticleState prev = initial;
      recorder.push(0, initial, total_energy(initial.x, initial.v, field, alpha), &initial.v);
      StaggeredState s = staggered_start(initial, dt, field, alpha, &rec.work);
      for (std::size_t n = 1; n <= N; ++n) {
        if (n > 1) s = step_staggered(s, dt, field, alpha, &rec.work);
        check_finite(n, s.x_n, s.v_half);
        ParticleState synced = synchronize(s, dt, field, alpha);
        synced.t = time_at(n);
        recorder.push(n, synced, total_energy(s.x_n, s.v_half, field, alpha), &s.v_half);
        if (recorder.wants_nodes()) recorder.push_nodes(n - 1, prev.t, endpoints(prev, synced));
        prev = synced;
      }
      break;
    }
    case Method::BorisSdc:
    case Method::Bgsdc: {
      const CollocationTables tables = make_tables(rec.nodes, dt);
      const auto stepper = config.method == Method::Bgsdc ? &bgsdc_step : &boris_sdc_step;
      ParticleState s = initial;
      recorder.push(0, s, total_energy(s.x, s.v, field, alpha));
      for (std::size_t n = 1; n <= N; ++n) {
        StepResult r = stepper(s.x, s.v, tables, field, alpha, config, &rec.work);
        const double t_start = s.t;
        s = {r.end.x, r.end.v, time_at(n)};
        recorder.push(n, s, total_energy(s.x, s.v, field, alpha));
        if (recorder.wants_nodes()) recorder.push_nodes(n - 1, t_start, std::move(r.nodes));
      }
      break;
    }
  }
  return rec;
}

std::int64_t predicted_work_serial(std::int64_t N_steps, int M, int K_picard) {
  return N_steps * (3 * static_cast<std::int64_t>(M) - 2 + static_cast<std::int64_t>(M - 1) * K_picard);
}

double predicted_work_parallel(std::int64_t N_steps, int M, int K_picard, double tau_overhead) {
  if (tau_overhead < 0.0) throw std::invalid_argument("tau_overhead must be non-negative");
  return static_cast<double>(N_steps) * (M + 2 + K_picard + tau_overhead);
}

std::int64_t predicted_work(const MethodConfig& config, std::int64_t N_steps) {
  const std::int64_t M = config.M;
  switch (config.method) {
    case Method::StaggeredBoris:
    case Method::NonstaggeredBoris: return N_steps;
    case Method::BorisSdc: return N_steps * (M + config.K_sweeps * (M - 1));
    case Method::Bgsdc: {
      const std::int64_t serial = predicted_work_serial(N_steps, config.M, config.K_picard);
      return config.update == UpdateKind::Quadrature ? serial : serial - N_steps * (M - 1);
    }
  }
  return 0;
}

}  // namespace bgsdc
