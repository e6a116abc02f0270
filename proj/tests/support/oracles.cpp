#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

std::vector<double> lobatto_nodes(int M) {
  if (M < 2) throw std::invalid_argument("lobatto_nodes: M >= 2");
  std::vector<double> taus{0.0};
  const int n = M - 2;
  if (n > 0) {
    // Symmetric Jacobi matrix of the Gegenbauer family with lambda = 3/2.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double kk = k;
      const double b = std::sqrt(kk * (kk + 2.0) / (4.0 * (kk + 1.5) * (kk + 0.5)));
      J(k - 1, k) = J(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    for (int k = 0; k < n; ++k) taus.push_back(0.5 * (es.eigenvalues()(k) + 1.0));
  }
  taus.push_back(1.0);
  std::sort(taus.begin(), taus.end());
  return taus;
}

GaussRule gauss_legendre(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double kk = k;
    J(k - 1, k) = J(k, k - 1) = kk / std::sqrt(4.0 * kk * kk - 1.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  GaussRule rule;
  for (int k = 0; k < n; ++k) {
    rule.nodes.push_back(0.5 * (es.eigenvalues()(k) + 1.0));
    const double v0 = es.eigenvectors()(0, k);
    rule.weights.push_back(v0 * v0);  // 2 v0^2 on [-1, 1], halved for [0, 1]
  }
  return rule;
}

namespace {

double lagrange_basis(const std::vector<double>& taus, std::size_t j, double s) {
  double p = 1.0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (k != j) p *= (s - taus[k]) / (taus[j] - taus[k]);
  }
  return p;
}

}  // namespace

Eigen::MatrixXd integration_matrix(const std::vector<double>& taus, double dt) {
  const auto M = static_cast<Eigen::Index>(taus.size());
  const GaussRule rule = gauss_legendre(static_cast<int>(taus.size()) + 2);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(M, M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double upper = taus[static_cast<std::size_t>(m)];
    for (Eigen::Index j = 0; j < M; ++j) {
      double sum = 0.0;
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        sum += rule.weights[g] * upper * lagrange_basis(taus, static_cast<std::size_t>(j), upper * rule.nodes[g]);
      }
      Q(m, j) = dt * sum;
    }
  }
  return Q;
}

Eigen::Matrix3d cross_right(const Vec3& B) {
  // v x B = -B x v
  Eigen::Matrix3d K;
  K << 0.0, B.z, -B.y,  //
      -B.z, 0.0, B.x,   //
      B.y, -B.x, 0.0;
  return K;
}

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }
Vec3 to_vec3(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }

Eigen::VectorXd to_eigen(const bgsdc::NodeSolution& U) {
  const auto M = static_cast<Eigen::Index>(U.size());
  Eigen::VectorXd flat(6 * M);
  for (Eigen::Index m = 0; m < M; ++m) {
    flat.segment<3>(3 * m) = to_eigen(U.xs[static_cast<std::size_t>(m)]);
    flat.segment<3>(3 * M + 3 * m) = to_eigen(U.vs[static_cast<std::size_t>(m)]);
  }
  return flat;
}

bgsdc::NodeSolution to_nodes(const Eigen::VectorXd& flat) {
  const Eigen::Index M = flat.size() / 6;
  bgsdc::NodeSolution U(static_cast<std::size_t>(M));
  for (Eigen::Index m = 0; m < M; ++m) {
    U.xs[static_cast<std::size_t>(m)] = to_vec3(flat.segment<3>(3 * m));
    U.vs[static_cast<std::size_t>(m)] = to_vec3(flat.segment<3>(3 * M + 3 * m));
  }
  return U;
}

Phase gyro_expm(const Vec3& x0, const Vec3& v0, const Vec3& B, double alpha, double t) {
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
  A.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
  A.block<3, 3>(3, 3) = alpha * cross_right(B);
  const Eigen::Matrix<double, 6, 6> E = (A * t).exp();
  Eigen::Matrix<double, 6, 1> y0;
  y0 << to_eigen(x0), to_eigen(v0);
  const Eigen::Matrix<double, 6, 1> y = E * y0;
  return {to_vec3(y.head<3>()), to_vec3(y.tail<3>())};
}

Eigen::MatrixXd block_operator(const Eigen::MatrixXd& SX_v, const Eigen::MatrixXd& SX_f, const Eigen::MatrixXd& SV_f,
                               const std::vector<Vec3>& Bs, double alpha) {
  const auto M = static_cast<Eigen::Index>(Bs.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(6 * M, 6 * M);
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index j = 0; j < M; ++j) {
      const Eigen::Matrix3d Kj = alpha * cross_right(Bs[static_cast<std::size_t>(j)]);
      // x_m row: - SX_v(m,j) v_j - SX_f(m,j) K_j v_j
      A.block<3, 3>(3 * m, 3 * M + 3 * j) -= SX_v(m, j) * Eigen::Matrix3d::Identity() + SX_f(m, j) * Kj;
      // v_m row: - SV_f(m,j) K_j v_j
      A.block<3, 3>(3 * M + 3 * m, 3 * M + 3 * j) -= SV_f(m, j) * Kj;
    }
  }
  return A;
}

Eigen::VectorXd block_constant(const Eigen::MatrixXd& SX_f, const Eigen::MatrixXd& SV_f, const std::vector<Vec3>& Es,
                               double alpha) {
  const auto M = static_cast<Eigen::Index>(Es.size());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6 * M);
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index j = 0; j < M; ++j) {
      const Eigen::Vector3d e = alpha * to_eigen(Es[static_cast<std::size_t>(j)]);
      c.segment<3>(3 * m) += SX_f(m, j) * e;
      c.segment<3>(3 * M + 3 * m) += SV_f(m, j) * e;
    }
  }
  return c;
}

QDeltaDense qdelta_dense(const std::vector<double>& taus, double dt) {
  const auto M = static_cast<Eigen::Index>(taus.size());
  Eigen::VectorXd d(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    d(m) = dt * (taus[static_cast<std::size_t>(m)] - (m == 0 ? 0.0 : taus[static_cast<std::size_t>(m - 1)]));
  }
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(M, M);
  Eigen::MatrixXd I = Eigen::MatrixXd::Zero(M, M);
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index j = 0; j < m; ++j) E(m, j) = d(j + 1);
    for (Eigen::Index j = 0; j <= m; ++j) I(m, j) = d(j);
  }
  return {E, E.cwiseProduct(E), 0.5 * (E + I)};
}

bgsdc::NodeSolution collocation_solve(const Vec3& x0, const Vec3& v0, const std::vector<double>& taus, double dt,
                                      const Vec3& B, const Vec3& E, double alpha) {
  const auto M = static_cast<Eigen::Index>(taus.size());
  const Eigen::MatrixXd Q = integration_matrix(taus, dt);
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(M, M);
  const std::vector<Vec3> Bs(static_cast<std::size_t>(M), B);
  const std::vector<Vec3> Es(static_cast<std::size_t>(M), E);
  const Eigen::MatrixXd A = block_operator(Q, Z, Q, Bs, alpha);
  Eigen::VectorXd rhs = to_eigen(bgsdc::NodeSolution::uniform(static_cast<std::size_t>(M), x0, v0));
  // The position rows integrate velocities only; E enters through the v rows.
  rhs += block_constant(Z, Q, Es, alpha);
  return to_nodes(A.fullPivLu().solve(rhs));
}

Phase collocation_update(const bgsdc::NodeSolution& U, const Vec3& x0, const Vec3& v0,
                         const std::vector<double>& taus, double dt, const Vec3& B, const Vec3& E, double alpha) {
  const Eigen::MatrixXd Q = integration_matrix(taus, dt);
  const Eigen::Index last = Q.rows() - 1;
  Eigen::Vector3d x = to_eigen(x0);
  Eigen::Vector3d v = to_eigen(v0);
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    const Eigen::Vector3d vj = to_eigen(U.vs[static_cast<std::size_t>(j)]);
    x += Q(last, j) * vj;
    v += Q(last, j) * alpha * (to_eigen(E) + cross_right(B) * vj);
  }
  return {to_vec3(x), to_vec3(v)};
}

Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const double a = u(rng);
  const double b = u(rng);
  const double c = u(rng);
  return {a, b, c};
}

}  // namespace oracle
