#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "bgsdc/collocation.hpp"
#include "bgsdc/fields.hpp"
#include "bgsdc/integrators.hpp"
#include "bgsdc/sdc.hpp"
#include "bgsdc/work.hpp"

namespace bgsdc {

enum class Method { StaggeredBoris, NonstaggeredBoris, BorisSdc, Bgsdc };

/// How the end-of-step value is formed from the node values.
///  quadrature: x0 + sum q_m v_m, v0 + sum q_m f_m (costs M-1 evaluations for BGSDC)
///  last_node:  the value at tau_M = 1, free of charge
enum class UpdateKind { Quadrature, LastNode };

std::string_view to_string(Method m);
std::string_view to_string(UpdateKind u);
/// Throws std::invalid_argument for unknown names.
Method parse_method(std::string_view name);
UpdateKind parse_update(std::string_view name);

struct MethodConfig {
  Method method = Method::Bgsdc;
  int M = 3;
  int K_gmres = 0;
  int K_picard = 0;
  int K_sweeps = 1;
  UpdateKind update = UpdateKind::Quadrature;

  bool is_collocation() const { return method == Method::BorisSdc || method == Method::Bgsdc; }
  /// Nodes used for stored node data: M for collocation methods, 2 for Boris.
  int node_count() const { return is_collocation() ? M : 2; }
  /// Iteration count shown in tables: "k_g,k_p" for BGSDC, "K" for Boris-SDC, "" otherwise.
  std::string iterations_label() const;
  /// e.g. "bgsdc(2,3)", "boris-sdc(4)", "staggered-boris".
  std::string label() const;

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

struct StepResult {
  PhasePoint end;
  NodeSolution nodes;
};

/// One BGSDC(K_gmres, K_picard) step: predictor sweep, GMRES on the
/// preconditioned collocation problem with the field frozen at the predictor
/// positions, Picard iterations with the live field, update.
StepResult bgsdc_step(const Vec3& x0, const Vec3& v0, const CollocationTables& tables, const FieldModel& field,
                      double alpha, const MethodConfig& config, WorkCounter* counter = nullptr);

/// Predictor plus K_sweeps nonlinear Boris-SDC sweeps, then the update.
StepResult boris_sdc_step(const Vec3& x0, const Vec3& v0, const CollocationTables& tables, const FieldModel& field,
                          double alpha, const MethodConfig& config, WorkCounter* counter = nullptr);

/// Total energy per unit mass |v|^2 / 2 + alpha * potential(x).
double total_energy(const Vec3& x, const Vec3& v, const FieldModel& field, double alpha);

struct RunRecord {
  MethodConfig config;
  double dt = 0.0;
  double alpha = 1.0;
  std::int64_t n_steps = 0;
  /// states[i] holds step i * record_stride (the final step is always kept).
  std::size_t record_stride = 1;
  /// (x_n, v_n, t_n). Staggered runs store synchronized velocities.
  std::vector<ParticleState> states;
  /// Per step node values, only when requested. Boris runs store the two
  /// endpoints with nodes {0, 1}.
  std::vector<NodeSolution> node_data;
  NodeSet nodes;
  WorkCounter work;
  /// Total energy H_n for every step. Staggered runs use the half-step velocity v_{n-1/2}.
  std::vector<double> energy;
  /// Staggered runs only, aligned with states: v_{n-1/2}, with v_0 at n = 0.
  std::vector<Vec3> half_step_velocities;

  std::size_t steps() const { return static_cast<std::size_t>(n_steps); }
  /// Time between consecutive stored states (the last interval may be shorter).
  double sample_interval() const { return dt * static_cast<double>(record_stride); }
};

struct RunOptions {
  bool retain_nodes = false;
  std::size_t record_stride = 1;
  /// Called with every state n = 0..N, including the ones not stored.
  std::function<void(const ParticleState&)> observer;
  /// Called after every step with its index (from 0), start time and node
  /// values, whether or not retain_nodes is set.
  std::function<void(std::size_t, double, const NodeSolution&)> node_observer;
};

/// Integrates N_steps steps of length dt. Throws NonFiniteStateError with the
/// step index when the state stops being finite.
RunRecord run_trajectory(const ParticleState& initial, double dt, std::int64_t N_steps, const FieldModel& field,
                         double alpha, const MethodConfig& config, const RunOptions& options = {});

/// N (3M - 2 + (M - 1) K_picard).
std::int64_t predicted_work_serial(std::int64_t N_steps, int M, int K_picard);

/// N (M + 2 + K_picard + tau_overhead): evaluations at different nodes run concurrently.
double predicted_work_parallel(std::int64_t N_steps, int M, int K_picard, double tau_overhead = 0.0);

/// Serial evaluation count for any method under this library's accounting.
std::int64_t predicted_work(const MethodConfig& config, std::int64_t N_steps);

}  // namespace bgsdc
