#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "harness/config.hpp"
#include "harness/csv.hpp"

namespace harness {

/// Tables produced by one command. `extra` carries per-node rows for the
/// trajectory command when node retention is on.
struct ExperimentOutput {
  Table table;
  std::optional<Table> extra;
};

/// Runs a resolved experiment. Jobs run on a worker pool; rows are emitted in
/// configuration order, so the output does not depend on the thread count.
/// Throws bgsdc::NumericalError (and subclasses) on numerical aborts.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

ExperimentOutput gyro_validate(const ExperimentConfig& cfg);
ExperimentOutput mirror_convergence(const ExperimentConfig& cfg);
ExperimentOutput mirror_reflections(const ExperimentConfig& cfg);
ExperimentOutput mirror_energy(const ExperimentConfig& cfg);
ExperimentOutput solovev_accuracy(const ExperimentConfig& cfg);
ExperimentOutput solovev_energy(const ExperimentConfig& cfg);
ExperimentOutput work_table(const ExperimentConfig& cfg);
ExperimentOutput trajectory(const ExperimentConfig& cfg);

/// Up to `count` distinct step indices in [0, n_steps], log-spaced, always
/// including 0 and n_steps, ascending.
std::vector<std::int64_t> log_spaced_indices(std::int64_t n_steps, int count);

/// Runs job(i) for i in [0, n) on `threads` workers (0: hardware concurrency).
/// The first exception thrown by a job is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job);

}  // namespace harness
