#include "bgsdc/collocation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bgsdc/errors.hpp"

namespace bgsdc {

namespace {

constexpr double kNewtonTolerance = 1e-14;
constexpr int kNewtonMaxIterations = 100;
constexpr double kMomentResidualLimit = 1e-10;

// P_n(x), P'_n(x), P''_n(x) for |x| < 1.
struct LegendreValues {
  double p;
  double dp;
  double ddp;
};

LegendreValues legendre(int n, double x) {
  double p_prev = 1.0;
  double p = x;
  for (int k = 2; k <= n; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    p_prev = p;
    p = p_next;
  }
  const double one_minus_x2 = 1.0 - x * x;
  const double dp = n * (p_prev - x * p) / one_minus_x2;
  const double ddp = (2.0 * x * dp - n * (n + 1.0) * p) / one_minus_x2;
  return {p, dp, ddp};
}

// Gaussian elimination with partial pivoting on a small dense system.
// P_0(x) .. P_{count-1}(x) by the three-term recurrence.
std::vector<double> legendre_values(double x, std::size_t count) {
  std::vector<double> p(count, 1.0);
  if (count > 1) p[1] = x;
  for (std::size_t k = 2; k < count; ++k) {
    const double kk = static_cast<double>(k);
    p[k] = ((2.0 * kk - 1.0) * x * p[k - 1] - (kk - 1.0) * p[k - 2]) / kk;
  }
  return p;
}

std::vector<double> dense_solve(std::vector<double> A, std::vector<double> b, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(A[i * n + k]) > std::abs(A[pivot * n + k])) pivot = i;
    }
    if (A[pivot * n + k] == 0.0) throw NumericalError("singular moment system");
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A[k * n + j], A[pivot * n + j]);
      std::swap(b[k], b[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = A[i * n + k] / A[k * n + k];
      for (std::size_t j = k; j < n; ++j) A[i * n + j] -= factor * A[k * n + j];
      b[i] -= factor * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double sum = b[i];
    for (std::size_t j = i + 1; j < n; ++j) sum -= A[i * n + j] * x[j];
    x[i] = sum / A[i * n + i];
  }
  return x;
}

}  // namespace

NodeSet lobatto_nodes(int M) {
  if (M < kMinNodes || M > kMaxNodes) {
    throw std::invalid_argument("Gauss-Lobatto node count must be in [2, 12], got " + std::to_string(M));
  }
  const int n = M - 1;
  std::vector<double> roots(M);
  roots.front() = -1.0;
  roots.back() = 1.0;
  for (int k = 1; k < n; ++k) {
    double x = -std::cos(std::numbers::pi * k / n);
    double step = 1.0;
    int it = 0;
    for (; it < kNewtonMaxIterations && std::abs(step) > kNewtonTolerance; ++it) {
      const LegendreValues lv = legendre(n, x);
      step = lv.dp / lv.ddp;
      x -= step;
    }
    if (std::abs(step) > 1e3 * kNewtonTolerance) {
      throw NumericalError("Newton iteration for Lobatto node did not converge");
    }
    roots[k] = x;
  }
  NodeSet nodes;
  nodes.taus.resize(M);
  for (int m = 0; m < M; ++m) nodes.taus[m] = 0.5 * (roots[m] + 1.0);
  // Enforce exact endpoint values and mirror symmetry.
  for (int m = 0; m < M / 2; ++m) {
    const double lower = 0.5 * (nodes.taus[m] + (1.0 - nodes.taus[M - 1 - m]));
    nodes.taus[m] = lower;
    nodes.taus[M - 1 - m] = 1.0 - lower;
  }
  if (M % 2 == 1) nodes.taus[M / 2] = 0.5;
  nodes.taus.front() = 0.0;
  nodes.taus.back() = 1.0;
  return nodes;
}

QuadratureWeights quad_weights(const NodeSet& nodes, double dt) {
  const std::size_t M = nodes.size();
  // Moments in the shifted Legendre basis P_k(2s - 1), which stays well
  // conditioned where plain monomials lose digits for M >= 8.
  std::vector<double> V(M * M);
  for (std::size_t j = 0; j < M; ++j) {
    const std::vector<double> p = legendre_values(2.0 * nodes.taus[j] - 1.0, M);
    for (std::size_t k = 0; k < M; ++k) V[k * M + j] = p[k];
  }

  QuadratureWeights out{SquareMatrix(M), std::vector<double>(M)};
  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> moments(M);
    // int_0^tau P_k(2s - 1) ds = (P_{k+1}(y) - P_{k-1}(y)) / (2 (2k + 1)), y = 2 tau - 1.
    const double y = 2.0 * nodes.taus[m] - 1.0;
    const std::vector<double> p = legendre_values(y, M + 1);
    moments[0] = nodes.taus[m];
    for (std::size_t k = 1; k < M; ++k) {
      moments[k] = (p[k + 1] - p[k - 1]) / (2.0 * static_cast<double>(2 * k + 1));
    }
    const std::vector<double> w = dense_solve(V, moments, M);

    double residual = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      double s = -moments[k];
      for (std::size_t j = 0; j < M; ++j) s += V[k * M + j] * w[j];
      residual = std::max(residual, std::abs(s));
    }
    if (residual > kMomentResidualLimit) {
      throw NumericalError("moment system residual " + std::to_string(residual) + " exceeds 1e-10");
    }
    for (std::size_t j = 0; j < M; ++j) out.Q(m, j) = dt * w[j];
  }
  for (std::size_t j = 0; j < M; ++j) out.q_end[j] = out.Q(M - 1, j);
  return out;
}

QDeltaTables qdelta_tables(const NodeSet& nodes, double dt) {
  const std::size_t M = nodes.size();
  std::vector<double> dtau(M);
  double previous = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    dtau[m] = dt * (nodes.taus[m] - previous);
    previous = nodes.taus[m];
  }

  QDeltaTables t{SquareMatrix(M), SquareMatrix(M), SquareMatrix(M), SquareMatrix(M)};
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t j = 0; j < m; ++j) t.QdE(m, j) = dtau[j + 1];
    for (std::size_t j = 0; j <= m; ++j) t.QdI(m, j) = dtau[j];
  }
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t j = 0; j < M; ++j) {
      t.QdT(m, j) = 0.5 * (t.QdE(m, j) + t.QdI(m, j));
      t.QdE2(m, j) = t.QdE(m, j) * t.QdE(m, j);
    }
  }
  return t;
}

CollocationTables make_tables(const NodeSet& nodes, double dt) {
  QuadratureWeights w = quad_weights(nodes, dt);
  QDeltaTables d = qdelta_tables(nodes, dt);

  CollocationTables t;
  t.nodes = nodes;
  t.dt = dt;
  t.Q = std::move(w.Q);
  t.q_end = std::move(w.q_end);
  t.dtau.resize(nodes.size());
  double previous = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    t.dtau[m] = dt * (nodes.taus[m] - previous);
    previous = nodes.taus[m];
  }
  t.QdE = std::move(d.QdE);
  t.QdI = std::move(d.QdI);
  t.QdT = std::move(d.QdT);
  t.QdE2 = std::move(d.QdE2);
  return t;
}

std::vector<double> barycentric_weights(const NodeSet& nodes) {
  const std::size_t M = nodes.size();
  std::vector<double> w(M, 1.0);
  for (std::size_t j = 0; j < M; ++j) {
    for (std::size_t k = 0; k < M; ++k) {
      if (k != j) w[j] /= (nodes.taus[j] - nodes.taus[k]);
    }
  }
  return w;
}

}  // namespace bgsdc
