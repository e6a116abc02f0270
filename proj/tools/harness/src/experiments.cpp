#include "harness/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <bgsdc/diagnostics.hpp>
#include <bgsdc/errors.hpp>
#include <bgsdc/integrators.hpp>
#include <bgsdc/stepper.hpp>

namespace harness {

using bgsdc::MethodConfig;
using bgsdc::ParticleState;
using bgsdc::RunOptions;
using bgsdc::RunRecord;
using bgsdc::Vec3;

// ---------------------------------------------------------------------------
// Utilities

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        job(i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::int64_t> log_spaced_indices(std::int64_t n_steps, int count) {
  if (n_steps < 1 || count < 2) throw std::invalid_argument("log_spaced_indices: need n_steps >= 1 and count >= 2");
  std::set<std::int64_t> picked{0, n_steps};
  const double top = std::log(static_cast<double>(n_steps));
  for (int i = 0; i < count - 1; ++i) {
    const double e = top * static_cast<double>(i) / static_cast<double>(count - 2);
    picked.insert(std::clamp<std::int64_t>(std::llround(std::exp(e)), 1, n_steps));
  }
  return {picked.begin(), picked.end()};
}

namespace {

ParticleState initial_state(const ParticleConfig& p) { return {p.x, p.v, 0.0}; }

/// Runs that only need the endpoints and the energy history.
RunOptions endpoints_only(std::int64_t n_steps) {
  RunOptions o;
  o.record_stride = static_cast<std::size_t>(n_steps);
  return o;
}

std::string iterations_cell(const MethodConfig& m) { return m.iterations_label(); }

Cell method_cell(const MethodConfig& m) { return std::string(bgsdc::to_string(m.method)); }

Cell m_cell(const MethodConfig& m) { return static_cast<std::int64_t>(m.M); }

const ParticleConfig& single_particle(const ExperimentConfig& cfg) {
  if (cfg.particles.size() != 1) {
    throw ConfigError(std::string(to_string(cfg.command)) + " takes exactly one [particle]");
  }
  return cfg.particles.front();
}

/// Pairwise orders aligned with the finer resolution of each pair; empty
/// where either error is not positive.
std::vector<Cell> pairwise_orders(const std::vector<double>& h, const std::vector<double>& err) {
  std::vector<Cell> out(h.size());
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (err[i] > 0.0 && err[i - 1] > 0.0) out[i] = std::log(err[i] / err[i - 1]) / std::log(h[i] / h[i - 1]);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// gyro-validate

ExperimentOutput gyro_validate(const ExperimentConfig& cfg) {
  if (cfg.field.type != FieldType::Uniform) throw ConfigError("gyro-validate needs a uniform field");
  if (bgsdc::norm(cfg.field.E_uniform) != 0.0) throw ConfigError("gyro-validate needs E = 0");
  if (bgsdc::norm(cfg.field.B_uniform) == 0.0) throw ConfigError("gyro-validate needs B != 0");
  const ParticleConfig& p = single_particle(cfg);
  const auto field = cfg.field.make();
  const double alpha = cfg.field.alpha();
  const double omega = cfg.field.omega();
  const ParticleState exact = bgsdc::gyro_analytic(initial_state(p), cfg.t_end, cfg.field.B_uniform, alpha);

  const std::size_t L = cfg.dt_ladder.size();
  struct Result {
    double err_x = 0.0, err_v = 0.0;
    std::int64_t f_evals = 0;
  };
  std::vector<Result> results(cfg.methods.size() * L);
  parallel_for(results.size(), cfg.threads, [&](std::size_t job) {
    const MethodConfig& m = cfg.methods[job / L];
    const double dt = cfg.dt_ladder[job % L];
    const RunRecord rec = bgsdc::run_trajectory(initial_state(p), dt, steps_for(cfg.t_end, dt), *field, alpha, m,
                                                endpoints_only(steps_for(cfg.t_end, dt)));
    const ParticleState& end = rec.states.back();
    results[job] = {bgsdc::norm(end.x - exact.x), bgsdc::norm(end.v - exact.v), rec.work.f_evals};
  });

  ExperimentOutput out;
  out.table.header = {"method", "M", "iterations", "dt", "dt_omega", "error_x", "error_v", "order_x", "order_v",
                      "f_evals"};
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    const MethodConfig& m = cfg.methods[k];
    std::vector<double> ex(L), ev(L);
    for (std::size_t i = 0; i < L; ++i) {
      ex[i] = results[k * L + i].err_x;
      ev[i] = results[k * L + i].err_v;
    }
    const auto ox = pairwise_orders(cfg.dt_ladder, ex);
    const auto ov = pairwise_orders(cfg.dt_ladder, ev);
    for (std::size_t i = 0; i < L; ++i) {
      const double dt = cfg.dt_ladder[i];
      out.table.add_row({method_cell(m), m_cell(m), iterations_cell(m), dt, dt * omega, ex[i], ev[i], ox[i], ov[i],
                         results[k * L + i].f_evals});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// mirror-convergence

ExperimentOutput mirror_convergence(const ExperimentConfig& cfg) {
  const ParticleConfig& p = single_particle(cfg);
  const auto field = cfg.field.make();
  const double alpha = cfg.field.alpha();
  const double omega = cfg.field.omega();
  const std::size_t L = cfg.dt_ladder.size();

  struct Result {
    Vec3 x_end;
    std::int64_t f_evals = 0;
  };
  std::vector<Result> results(cfg.methods.size() * L);
  parallel_for(results.size(), cfg.threads, [&](std::size_t job) {
    const MethodConfig& m = cfg.methods[job / L];
    const double dt = cfg.dt_ladder[job % L];
    const std::int64_t N = steps_for(cfg.t_end, dt);
    const RunRecord rec = bgsdc::run_trajectory(initial_state(p), dt, N, *field, alpha, m, endpoints_only(N));
    results[job] = {rec.states.back().x, rec.work.f_evals};
  });

  ExperimentOutput out;
  out.table.header = {"method",   "M",       "K_gmres", "K_picard",   "dt_omega",
                      "error_x",  "order_p", "f_evals", "error_norm", "K_sweeps"};
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    const MethodConfig& m = cfg.methods[k];
    std::vector<Vec3> finals(L);
    for (std::size_t i = 0; i < L; ++i) finals[i] = results[k * L + i].x_end;
    // Self-convergence: row i compares resolution i with the next finer one.
    std::vector<Cell> err(L), err_norm(L), order(L);
    if (L >= 2) {
      const auto e = bgsdc::self_convergence(finals);
      const auto en = bgsdc::self_convergence_norm(finals);
      for (std::size_t i = 0; i + 1 < L; ++i) {
        err[i] = e[i];
        err_norm[i] = en[i];
      }
      for (std::size_t i = 1; i + 1 < L; ++i) {
        if (e[i] > 0.0 && e[i - 1] > 0.0) {
          order[i] = std::log(e[i] / e[i - 1]) / std::log(cfg.dt_ladder[i] / cfg.dt_ladder[i - 1]);
        }
      }
    }
    for (std::size_t i = 0; i < L; ++i) {
      const bool sdc = m.method == bgsdc::Method::BorisSdc;
      out.table.add_row({method_cell(m), m_cell(m), static_cast<std::int64_t>(m.K_gmres),
                         static_cast<std::int64_t>(m.K_picard), cfg.dt_ladder[i] * omega, err[i], order[i],
                         results[k * L + i].f_evals, err_norm[i],
                         sdc ? Cell{static_cast<std::int64_t>(m.K_sweeps)} : Cell{}});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// mirror-reflections

ExperimentOutput mirror_reflections(const ExperimentConfig& cfg) {
  const ParticleConfig& p = single_particle(cfg);
  const auto field = cfg.field.make();
  const double alpha = cfg.field.alpha();

  auto scan_run = [&](const MethodConfig& m, double dt, std::int64_t* f_evals) {
    const std::int64_t N = steps_for(cfg.t_end, dt);
    const bgsdc::NodeSet nodes = m.is_collocation() ? bgsdc::lobatto_nodes(m.M) : bgsdc::NodeSet{{0.0, 1.0}};
    bgsdc::ReflectionDetector detector(nodes, dt, *field);
    RunOptions o = endpoints_only(N);
    o.node_observer = [&](std::size_t n, double t0, const bgsdc::NodeSolution& U) { detector.add(n, t0, U); };
    const RunRecord rec = bgsdc::run_trajectory(initial_state(p), dt, N, *field, alpha, m, o);
    if (f_evals != nullptr) *f_evals = rec.work.f_evals;
    return detector.scan();
  };

  std::optional<double> B_ref;
  std::vector<double> B_ref_events;
  if (cfg.b_reference == BReference::Adiabatic) {
    try {
      B_ref = bgsdc::b_ref_adiabatic(p.x, p.v, *field);
    } catch (const std::domain_error& e) {
      throw ConfigError(std::string("adiabatic B_ref undefined: ") + e.what());
    }
  } else {
    const bgsdc::ReflectionScan ref = scan_run(cfg.reference.method, cfg.reference.dt, nullptr);
    for (const auto& e : ref.events) B_ref_events.push_back(e.B_at_ref);
  }

  const std::size_t L = cfg.dt_ladder.size();
  struct Result {
    bgsdc::ReflectionScan scan;
    std::int64_t f_evals = 0;
  };
  std::vector<Result> results(cfg.methods.size() * L);
  parallel_for(results.size(), cfg.threads, [&](std::size_t job) {
    Result& r = results[job];
    r.scan = scan_run(cfg.methods[job / L], cfg.dt_ladder[job % L], &r.f_evals);
  });

  ExperimentOutput out;
  out.table.header = {"method", "M", "iterations", "dt", "f_evals", "sigma_B", "n_reflections", "B_ref_used"};
  for (std::size_t job = 0; job < results.size(); ++job) {
    const MethodConfig& m = cfg.methods[job / L];
    const auto& events = results[job].scan.events;
    Cell sigma;
    if (!events.empty()) {
      if (B_ref) {
        sigma = bgsdc::sigma_B(events, *B_ref);
      } else {
        if (events.size() != B_ref_events.size()) {
          throw bgsdc::NumericalError(m.label() + " at dt " + format_number(cfg.dt_ladder[job % L]) + " found " +
                                      std::to_string(events.size()) + " reflections, the reference run found " +
                                      std::to_string(B_ref_events.size()));
        }
        sigma = bgsdc::sigma_B(events, B_ref_events);
      }
    }
    out.table.add_row({method_cell(m), m_cell(m), iterations_cell(m), cfg.dt_ladder[job % L], results[job].f_evals,
                       sigma, static_cast<std::int64_t>(events.size()), B_ref ? Cell{*B_ref} : Cell{}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Energy series

namespace {

struct EnergyJob {
  std::size_t particle;
  std::size_t method;
};

std::vector<std::vector<double>> energy_series(const ExperimentConfig& cfg, const std::vector<EnergyJob>& jobs) {
  const auto field = cfg.field.make();
  const double alpha = cfg.field.alpha();
  std::vector<std::vector<double>> series(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    const RunRecord rec = bgsdc::run_trajectory(initial_state(cfg.particles[jobs[j].particle]), cfg.dt, cfg.n_steps,
                                                *field, alpha, cfg.methods[jobs[j].method],
                                                endpoints_only(cfg.n_steps));
    series[j] = bgsdc::relative_energy_series(rec).relative_error;
  });
  return series;
}

}  // namespace

ExperimentOutput mirror_energy(const ExperimentConfig& cfg) {
  single_particle(cfg);
  std::vector<EnergyJob> jobs;
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) jobs.push_back({0, k});
  const auto series = energy_series(cfg, jobs);
  const auto picks = log_spaced_indices(cfg.n_steps, cfg.samples);

  ExperimentOutput out;
  out.table.header = {"method", "M", "iterations", "step_index", "rel_energy_error"};
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const MethodConfig& m = cfg.methods[jobs[j].method];
    for (std::int64_t n : picks) {
      out.table.add_row({method_cell(m), m_cell(m), iterations_cell(m), n, series[j][static_cast<std::size_t>(n)]});
    }
  }
  return out;
}

ExperimentOutput solovev_energy(const ExperimentConfig& cfg) {
  std::vector<EnergyJob> jobs;
  for (std::size_t i = 0; i < cfg.particles.size(); ++i) {
    for (std::size_t k = 0; k < cfg.methods.size(); ++k) jobs.push_back({i, k});
  }
  const auto series = energy_series(cfg, jobs);
  const auto picks = log_spaced_indices(cfg.n_steps, cfg.samples);

  ExperimentOutput out;
  out.table.header = {"particle", "method", "M", "iterations", "step_index", "rel_energy_error"};
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const MethodConfig& m = cfg.methods[jobs[j].method];
    for (std::int64_t n : picks) {
      out.table.add_row({cfg.particles[jobs[j].particle].name, method_cell(m), m_cell(m), iterations_cell(m), n,
                         series[j][static_cast<std::size_t>(n)]});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// solovev-accuracy

ExperimentOutput solovev_accuracy(const ExperimentConfig& cfg) {
  const auto field = cfg.field.make();
  const double alpha = cfg.field.alpha();
  const double h_ref = cfg.reference.dt;
  const std::int64_t N_ref = steps_for(cfg.t_end, h_ref);

  // Store the reference only on the coarsest grid shared by every run.
  std::int64_t stride = 0;
  for (double h : cfg.dt_ladder) stride = std::gcd(stride, std::llround(h / h_ref));
  stride = std::max<std::int64_t>(stride, 1);

  std::vector<RunRecord> refs(cfg.particles.size());
  parallel_for(refs.size(), cfg.threads, [&](std::size_t i) {
    RunOptions o;
    o.record_stride = static_cast<std::size_t>(stride);
    refs[i] = bgsdc::run_trajectory(initial_state(cfg.particles[i]), h_ref, N_ref, *field, alpha,
                                    cfg.reference.method, o);
  });

  const std::size_t L = cfg.dt_ladder.size();
  const std::size_t per_particle = cfg.methods.size() * L;
  struct Result {
    double d_max = 0.0;
    std::int64_t f_evals = 0;
  };
  std::vector<Result> results(cfg.particles.size() * per_particle);
  parallel_for(results.size(), cfg.threads, [&](std::size_t job) {
    const std::size_t i = job / per_particle;
    const MethodConfig& m = cfg.methods[(job % per_particle) / L];
    const double dt = cfg.dt_ladder[job % L];
    const std::int64_t N = steps_for(cfg.t_end, dt);
    bgsdc::DefectAccumulator acc(refs[i]);
    RunOptions o = endpoints_only(N);
    o.observer = [&acc](const ParticleState& s) { acc.add(s); };
    const RunRecord rec = bgsdc::run_trajectory(initial_state(cfg.particles[i]), dt, N, *field, alpha, m, o);
    results[job] = {acc.value(), rec.work.f_evals};
  });

  ExperimentOutput out;
  out.table.header = {"particle", "method", "M", "iterations", "dt_ns", "d_max_m", "f_evals"};
  for (std::size_t i = 0; i < cfg.particles.size(); ++i) {
    const std::string& name = cfg.particles[i].name;
    const MethodConfig& rm = cfg.reference.method;
    out.table.add_row({name, "reference:" + std::string(bgsdc::to_string(rm.method)), m_cell(rm),
                       iterations_cell(rm), h_ref * 1e9, bgsdc::trajectory_defect(refs[i], refs[i]),
                       refs[i].work.f_evals});
    for (std::size_t r = 0; r < per_particle; ++r) {
      const MethodConfig& m = cfg.methods[r / L];
      const Result& res = results[i * per_particle + r];
      out.table.add_row({name, method_cell(m), m_cell(m), iterations_cell(m), cfg.dt_ladder[r % L] * 1e9, res.d_max,
                         res.f_evals});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// work-table

ExperimentOutput work_table(const ExperimentConfig& cfg) {
  const ParticleConfig& p = single_particle(cfg);
  const auto field = cfg.field.make();
  const double alpha = cfg.field.alpha();
  const std::size_t L = cfg.n_steps_ladder.size();
  std::vector<std::int64_t> measured(cfg.methods.size() * L);
  parallel_for(measured.size(), cfg.threads, [&](std::size_t job) {
    const std::int64_t N = cfg.n_steps_ladder[job % L];
    measured[job] =
        bgsdc::run_trajectory(initial_state(p), cfg.dt, N, *field, alpha, cfg.methods[job / L], endpoints_only(N))
            .work.f_evals;
  });

  ExperimentOutput out;
  out.table.header = {"method",          "M",                  "K_gmres",         "K_picard",
                      "n_steps",         "predicted_serial",   "predicted_parallel", "measured_f_evals"};
  for (std::size_t job = 0; job < measured.size(); ++job) {
    const MethodConfig& m = cfg.methods[job / L];
    const std::int64_t N = cfg.n_steps_ladder[job % L];
    const bool bgsdc_method = m.method == bgsdc::Method::Bgsdc;
    out.table.add_row({method_cell(m), m_cell(m), static_cast<std::int64_t>(m.K_gmres),
                       static_cast<std::int64_t>(m.K_picard), N, bgsdc::predicted_work(m, N),
                       bgsdc_method ? Cell{bgsdc::predicted_work_parallel(N, m.M, m.K_picard, cfg.tau_overhead)}
                                    : Cell{},
                       measured[job]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// trajectory

ExperimentOutput trajectory(const ExperimentConfig& cfg) {
  const ParticleConfig& p = single_particle(cfg);
  const auto field = cfg.field.make();
  const double alpha = cfg.field.alpha();
  const double dt = cfg.t_end / static_cast<double>(cfg.n_steps);

  std::vector<RunRecord> records(cfg.methods.size());
  parallel_for(records.size(), cfg.threads, [&](std::size_t k) {
    RunOptions o;
    o.retain_nodes = cfg.retain_nodes;
    records[k] = bgsdc::run_trajectory(initial_state(p), dt, cfg.n_steps, *field, alpha, cfg.methods[k], o);
  });

  ExperimentOutput out;
  out.table.header = {"method", "M", "iterations", "step_index", "t", "x", "y", "z", "vx", "vy", "vz", "energy"};
  if (cfg.retain_nodes) {
    out.extra = Table{{"method", "M", "iterations", "step_index", "node", "tau", "t", "x", "y", "z", "vx", "vy", "vz"},
                      {}};
  }
  for (std::size_t k = 0; k < records.size(); ++k) {
    const MethodConfig& m = cfg.methods[k];
    const RunRecord& rec = records[k];
    for (std::size_t n = 0; n < rec.states.size(); ++n) {
      const ParticleState& s = rec.states[n];
      out.table.add_row({method_cell(m), m_cell(m), iterations_cell(m), static_cast<std::int64_t>(n), s.t, s.x.x,
                         s.x.y, s.x.z, s.v.x, s.v.y, s.v.z, rec.energy[n]});
    }
    if (!out.extra) continue;
    for (std::size_t n = 0; n < rec.node_data.size(); ++n) {
      const bgsdc::NodeSolution& U = rec.node_data[n];
      for (std::size_t j = 0; j < U.size(); ++j) {
        const double tau = rec.nodes.taus[j];
        out.extra->add_row({method_cell(m), m_cell(m), iterations_cell(m), static_cast<std::int64_t>(n),
                            static_cast<std::int64_t>(j), tau, rec.states[n].t + tau * dt, U.xs[j].x, U.xs[j].y,
                            U.xs[j].z, U.vs[j].x, U.vs[j].y, U.vs[j].z});
      }
    }
  }
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.command) {
    case Command::GyroValidate: return gyro_validate(cfg);
    case Command::MirrorConvergence: return mirror_convergence(cfg);
    case Command::MirrorReflections: return mirror_reflections(cfg);
    case Command::MirrorEnergy: return mirror_energy(cfg);
    case Command::SolovevAccuracy: return solovev_accuracy(cfg);
    case Command::SolovevEnergy: return solovev_energy(cfg);
    case Command::WorkTable: return work_table(cfg);
    case Command::Trajectory: return trajectory(cfg);
  }
  throw ConfigError("unknown command");
}

}  // namespace harness
