#include "bgsdc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bgsdc {

PitchDecomposition pitch_decompose(const Vec3& v, const Vec3& B) {
  const double B_norm = norm(B);
  const double v_norm = norm(v);
  if (B_norm == 0.0) throw std::invalid_argument("pitch_decompose: zero magnetic field");
  if (v_norm == 0.0) throw std::invalid_argument("pitch_decompose: zero velocity");
  PitchDecomposition p;
  p.v_par = dot(v, B) / B_norm;
  p.v_perp = std::sqrt(std::max(0.0, v_norm * v_norm - p.v_par * p.v_par));
  p.pitch_angle = std::asin(std::min(1.0, p.v_perp / v_norm));
  return p;
}

double b_ref_adiabatic(const Vec3& x0, const Vec3& v0, const FieldModel& field) {
  const Vec3 B = field.B_at(x0);
  const PitchDecomposition p = pitch_decompose(v0, B);
  if (p.v_perp == 0.0) throw std::domain_error("b_ref_adiabatic: velocity parallel to B, no turning point");
  return norm(B) * norm2(v0) / (p.v_perp * p.v_perp);
}

namespace {

double v_parallel(const Vec3& x, const Vec3& v, const FieldModel& field) {
  const Vec3 B = field.B_at(x);
  const double B_norm = norm(B);
  return B_norm == 0.0 ? 0.0 : dot(v, B) / B_norm;
}

}  // namespace

ReflectionDetector::ReflectionDetector(NodeSet nodes, double dt, const FieldModel& field)
    : nodes_(std::move(nodes)), dt_(dt), field_(&field), vpar_(nodes_.size()) {}

void ReflectionDetector::add(std::size_t step_index, double t_start, const NodeSolution& U) {
  const std::size_t M = nodes_.size();
  if (U.size() != M) throw std::invalid_argument("detect_reflections: node data does not match the node set");
  for (std::size_t m = 0; m < M; ++m) vpar_[m] = v_parallel(U.xs[m], U.vs[m], *field_);
  if (vpar_.front() * vpar_.back() >= 0.0) return;

  const std::span<const double> values(vpar_);
  double lo = 0.0;
  double hi = 1.0;
  double f_lo = lagrange_eval(values, nodes_, lo);
  const double f_hi = lagrange_eval(values, nodes_, hi);
  if (f_lo * f_hi >= 0.0) {
    ++scan_.skipped;
    return;
  }
  for (int it = 0; it < kBisectionMaxIterations && hi - lo > kBisectionTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = lagrange_eval(values, nodes_, mid);
    if (f_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  const double s = 0.5 * (lo + hi);
  ReflectionEvent ev;
  ev.step_index = step_index;
  ev.t_ref = t_start + s * dt_;
  ev.x_ref = lagrange_eval(std::span<const Vec3>(U.xs), nodes_, s);
  ev.B_at_ref = norm(field_->B_at(ev.x_ref));
  scan_.events.push_back(ev);
}

ReflectionScan detect_reflections(std::span<const NodeSolution> node_data, std::span<const double> step_start_times,
                                  double dt, const NodeSet& nodes, const FieldModel& field) {
  if (step_start_times.size() != node_data.size()) {
    throw std::invalid_argument("detect_reflections: one start time per step required");
  }
  ReflectionDetector detector(nodes, dt, field);
  for (std::size_t n = 0; n < node_data.size(); ++n) detector.add(n, step_start_times[n], node_data[n]);
  return detector.scan();
}

ReflectionScan detect_reflections(const RunRecord& record, const FieldModel& field) {
  if (record.node_data.size() != record.steps() || record.states.empty()) {
    throw std::invalid_argument("detect_reflections: run was recorded without node data");
  }
  std::vector<double> t0(record.steps());
  for (std::size_t n = 0; n < t0.size(); ++n) t0[n] = record.states.front().t + static_cast<double>(n) * record.dt;
  return detect_reflections(record.node_data, t0, record.dt, record.nodes, field);
}

double sigma_B(std::span<const ReflectionEvent> events, double B_reference) {
  if (events.empty()) throw std::invalid_argument("sigma_B: no reflection events");
  double sum = 0.0;
  for (const ReflectionEvent& e : events) sum += (B_reference - e.B_at_ref) * (B_reference - e.B_at_ref);
  return std::sqrt(sum / static_cast<double>(events.size()));
}

double sigma_B(std::span<const ReflectionEvent> events, std::span<const double> B_reference) {
  if (events.empty()) throw std::invalid_argument("sigma_B: no reflection events");
  if (events.size() != B_reference.size()) {
    throw std::invalid_argument("sigma_B: reflection count differs from the reference (" +
                                std::to_string(events.size()) + " vs " + std::to_string(B_reference.size()) + ")");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const double d = B_reference[i] - events[i].B_at_ref;
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(events.size()));
}

DefectAccumulator::DefectAccumulator(const RunRecord& reference) : reference_(&reference) {
  if (reference.states.empty()) throw std::invalid_argument("trajectory_defect: empty reference");
}

void DefectAccumulator::add(const ParticleState& s) {
  const auto& ref = reference_->states;
  const double pos = (s.t - ref.front().t) / reference_->sample_interval();
  const double idx = std::round(pos);
  if (std::abs(pos - idx) > 1e-6 || idx < 0.0 || idx >= static_cast<double>(ref.size()) ||
      std::abs(ref[static_cast<std::size_t>(idx)].t - s.t) > 1e-6 * reference_->dt) {
    throw std::invalid_argument("trajectory_defect: time " + std::to_string(s.t) + " is not on the reference grid");
  }
  const Vec3 d = s.x - ref[static_cast<std::size_t>(idx)].x;
  worst_ = std::max({worst_, std::abs(d.x), std::abs(d.y), std::abs(d.z)});
}

double trajectory_defect(const RunRecord& run, const RunRecord& reference) {
  if (run.states.empty()) throw std::invalid_argument("trajectory_defect: empty run");
  DefectAccumulator acc(reference);
  for (const ParticleState& s : run.states) acc.add(s);
  return acc.value();
}

namespace {

void check_ladder(std::span<const double> step_sizes, std::span<const double> errors) {
  if (step_sizes.size() != errors.size()) throw std::invalid_argument("step sizes and errors differ in length");
  if (step_sizes.size() < 2) throw std::invalid_argument("need at least two resolutions");
  for (double e : errors) {
    if (!(e > 0.0)) throw std::invalid_argument("errors must be positive");
  }
  for (double h : step_sizes) {
    if (!(h > 0.0)) throw std::invalid_argument("step sizes must be positive");
  }
}

}  // namespace

std::vector<double> convergence_order(std::span<const double> step_sizes, std::span<const double> errors) {
  check_ladder(step_sizes, errors);
  std::vector<double> p;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (!(step_sizes[i + 1] < step_sizes[i])) throw std::invalid_argument("step sizes must decrease strictly");
    p.push_back(std::log(errors[i + 1] / errors[i]) / std::log(step_sizes[i + 1] / step_sizes[i]));
  }
  return p;
}

double fitted_order(std::span<const double> step_sizes, std::span<const double> errors) {
  check_ladder(step_sizes, errors);
  const auto n = static_cast<double>(errors.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double lx = std::log(step_sizes[i]);
    const double ly = std::log(errors[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> self_convergence(std::span<const Vec3> final_positions) {
  if (final_positions.size() < 2) throw std::invalid_argument("self_convergence: need at least two runs");
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < final_positions.size(); ++i) {
    const double xi = final_positions[i].x;
    if (xi == 0.0) throw std::invalid_argument("self_convergence: zero reference component");
    out.push_back(std::abs(xi - final_positions[i + 1].x) / std::abs(xi));
  }
  return out;
}

std::vector<double> self_convergence_norm(std::span<const Vec3> final_positions) {
  if (final_positions.size() < 2) throw std::invalid_argument("self_convergence: need at least two runs");
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < final_positions.size(); ++i) {
    const double n = norm(final_positions[i]);
    if (n == 0.0) throw std::invalid_argument("self_convergence: zero reference position");
    out.push_back(norm(final_positions[i] - final_positions[i + 1]) / n);
  }
  return out;
}

namespace {

EnergySeries relative_from(std::vector<double> H) {
  if (H.empty()) throw std::invalid_argument("energy series is empty");
  if (H.front() == 0.0) throw std::domain_error("relative energy error undefined for zero initial energy");
  EnergySeries s;
  s.relative_error.reserve(H.size());
  for (double h : H) s.relative_error.push_back(std::abs(h - H.front()) / std::abs(H.front()));
  s.H = std::move(H);
  return s;
}

}  // namespace

EnergySeries relative_energy_series(const RunRecord& record) { return relative_from(record.energy); }

EnergySeries relative_energy_series(const RunRecord& record, const FieldModel& field, double alpha) {
  if (record.record_stride != 1) throw std::invalid_argument("energy recomputation needs every step stored");
  const bool staggered = record.config.method == Method::StaggeredBoris;
  std::vector<double> H;
  H.reserve(record.states.size());
  for (std::size_t n = 0; n < record.states.size(); ++n) {
    const Vec3& v = staggered ? record.half_step_velocities.at(n) : record.states[n].v;
    H.push_back(total_energy(record.states[n].x, v, field, alpha));
  }
  return relative_from(std::move(H));
}

bool bounded_two_halves(std::span<const double> rel_errors, double factor) {
  if (rel_errors.size() < 3) throw std::invalid_argument("bounded_two_halves: series too short");
  const std::size_t mid = 1 + (rel_errors.size() - 1) / 2;
  const double first = *std::max_element(rel_errors.begin() + 1, rel_errors.begin() + static_cast<long>(mid));
  const double second = *std::max_element(rel_errors.begin() + static_cast<long>(mid), rel_errors.end());
  return second <= factor * first;
}

}  // namespace bgsdc
