#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bgsdc {

/// Matrix-free linear operator on flat vectors of fixed dimension.
using LinearMap = std::function<std::vector<double>(std::span<const double>)>;

struct KrylovResult {
  std::vector<double> solution;
  /// |rhs - A x_k| for k = 0..iterations_used (least-squares estimate).
  std::vector<double> residual_history;
  int iterations_used = 0;
  /// The Krylov space became invariant; the solution is exact up to rounding.
  bool breakdown = false;
};

inline constexpr double kArnoldiBreakdown = 1e-14;

/// Unrestarted GMRES with modified Gram-Schmidt and Givens rotations.
/// Stops after max_iter iterations or once the residual drops to abs_tol,
/// which defaults to 1e-14 |rhs|.
KrylovResult gmres_solve(const LinearMap& apply, std::span<const double> rhs, std::span<const double> x0,
                         int max_iter, std::optional<double> abs_tol = std::nullopt);

}  // namespace bgsdc
