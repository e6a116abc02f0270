#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bgsdc/collocation.hpp"
#include "bgsdc/fields.hpp"
#include "bgsdc/stepper.hpp"

namespace bgsdc {

struct PitchDecomposition {
  double v_par = 0.0;
  double v_perp = 0.0;
  double pitch_angle = 0.0;  // radians, in [0, pi/2] measured from the field line
};

/// Splits v into components along and across B. Throws std::invalid_argument
/// for a zero field or zero velocity.
PitchDecomposition pitch_decompose(const Vec3& v, const Vec3& B);

/// Field magnitude at the adiabatic turning point, |B(x0)| |v0|^2 / v_perp0^2.
/// Throws std::domain_error when v0 is parallel to B(x0).
double b_ref_adiabatic(const Vec3& x0, const Vec3& v0, const FieldModel& field);

struct ReflectionEvent {
  double t_ref = 0.0;
  Vec3 x_ref;
  double B_at_ref = 0.0;
  std::size_t step_index = 0;
};

struct ReflectionScan {
  std::vector<ReflectionEvent> events;
  /// Steps with opposite endpoint signs whose interpolant showed no sign change.
  std::size_t skipped = 0;
};

inline constexpr double kBisectionTolerance = 1e-13;
inline constexpr int kBisectionMaxIterations = 200;

/// Streaming reflection finder: feed the node values of each step in order,
/// e.g. from a RunOptions node_observer, without storing the run.
class ReflectionDetector {
 public:
  ReflectionDetector(NodeSet nodes, double dt, const FieldModel& field);

  void add(std::size_t step_index, double t_start, const NodeSolution& U);
  const ReflectionScan& scan() const { return scan_; }

 private:
  NodeSet nodes_;
  double dt_;
  const FieldModel* field_;
  std::vector<double> vpar_;
  ReflectionScan scan_;
};

/// Locates sign changes of v_parallel inside each step by bisection on the
/// node interpolant. Needs node data for every step.
ReflectionScan detect_reflections(const RunRecord& record, const FieldModel& field);
ReflectionScan detect_reflections(std::span<const NodeSolution> node_data, std::span<const double> step_start_times,
                                  double dt, const NodeSet& nodes, const FieldModel& field);

/// Root-mean-square deviation of the event field magnitudes from B_reference.
double sigma_B(std::span<const ReflectionEvent> events, double B_reference);
/// Per-event references, paired by position in the lists.
double sigma_B(std::span<const ReflectionEvent> events, std::span<const double> B_reference);

/// Largest componentwise |x_n - x_ref(t_n)| over the run's time points, which
/// must be a subset of the reference grid. Throws std::invalid_argument otherwise.
double trajectory_defect(const RunRecord& run, const RunRecord& reference);

/// Streaming form of trajectory_defect: feed states one at a time, e.g. from
/// a RunOptions observer, without storing the run.
class DefectAccumulator {
 public:
  explicit DefectAccumulator(const RunRecord& reference);

  void add(const ParticleState& s);
  double value() const { return worst_; }

 private:
  const RunRecord* reference_;
  double worst_ = 0.0;
};

/// Pairwise log(e_{i+1} / e_i) / log(h_{i+1} / h_i).
std::vector<double> convergence_order(std::span<const double> step_sizes, std::span<const double> errors);

/// Least-squares slope of log(error) against log(step size).
double fitted_order(std::span<const double> step_sizes, std::span<const double> errors);

/// |x_i - x_{i+1}| / |x_i| for the first position component, entries ordered
/// from coarse to fine.
std::vector<double> self_convergence(std::span<const Vec3> final_positions);
/// Same with Euclidean vector norms.
std::vector<double> self_convergence_norm(std::span<const Vec3> final_positions);

struct EnergySeries {
  std::vector<double> H;
  std::vector<double> relative_error;
};

/// Relative total energy error of a run against its first entry.
EnergySeries relative_energy_series(const RunRecord& record);

/// Recomputes H_n from the stored states (every step must be stored). For
/// staggered runs the half-step velocities are used.
EnergySeries relative_energy_series(const RunRecord& record, const FieldModel& field, double alpha);

/// max over the second half <= factor * max over the first half (index 0 excluded).
bool bounded_two_halves(std::span<const double> rel_errors, double factor = 2.0);

}  // namespace bgsdc
