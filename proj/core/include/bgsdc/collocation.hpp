#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bgsdc/vec3.hpp"

namespace bgsdc {

/// Dense row-major M x M matrix. Only used for the small per-step tables.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Gauss-Lobatto nodes on the unit interval: taus.front() == 0, taus.back() == 1.
struct NodeSet {
  std::vector<double> taus;

  std::size_t size() const { return taus.size(); }
};

inline constexpr int kMinNodes = 2;
inline constexpr int kMaxNodes = 12;

/// Endpoints plus the roots of P'_{M-1}, mapped to [0, 1]. Valid for 2 <= M <= 12.
NodeSet lobatto_nodes(int M);

struct QuadratureWeights {
  SquareMatrix Q;             // Q(m, j) = dt * integral_0^{tau_m} l_j(s) ds
  std::vector<double> q_end;  // full-interval weights, last row of Q for Lobatto nodes
};

/// Node-to-node integration weights from the moment (Vandermonde) system.
/// Throws NumericalError if the moment solve residual exceeds 1e-10.
QuadratureWeights quad_weights(const NodeSet& nodes, double dt);

/// Sweep matrices. QdE/QdI are the explicit and implicit Euler-type
/// lower-triangular integrators, QdT their average (trapezoidal) and QdE2
/// the entrywise square of QdE.
struct QDeltaTables {
  SquareMatrix QdE;
  SquareMatrix QdI;
  SquareMatrix QdT;
  SquareMatrix QdE2;
};

QDeltaTables qdelta_tables(const NodeSet& nodes, double dt);

/// Everything one time step of length dt needs.
struct CollocationTables {
  NodeSet nodes;
  double dt = 0.0;
  SquareMatrix Q;
  std::vector<double> q_end;
  std::vector<double> dtau;  // dtau[m] = dt * (tau_m - tau_{m-1}), tau_{-1} = 0
  SquareMatrix QdE;
  SquareMatrix QdI;
  SquareMatrix QdT;
  SquareMatrix QdE2;

  std::size_t size() const { return nodes.size(); }
};

CollocationTables make_tables(const NodeSet& nodes, double dt);

/// Barycentric weights 1 / prod_{k != j} (tau_j - tau_k).
std::vector<double> barycentric_weights(const NodeSet& nodes);

/// Evaluates the degree M-1 interpolant through (tau_m, values[m]) at s.
template <class T>
T lagrange_eval(std::span<const T> values, const NodeSet& nodes, double s) {
  const std::vector<double> w = barycentric_weights(nodes);
  T numerator{};
  double denominator = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double diff = s - nodes.taus[j];
    if (diff == 0.0) return values[j];
    const double c = w[j] / diff;
    numerator += values[j] * c;
    denominator += c;
  }
  return numerator / denominator;
}

}  // namespace bgsdc
