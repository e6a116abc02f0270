#include "bgsdc/gmres.hpp"

#include <cmath>
#include <stdexcept>

namespace bgsdc {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace

KrylovResult gmres_solve(const LinearMap& apply, std::span<const double> rhs, std::span<const double> x0,
                         int max_iter, std::optional<double> abs_tol) {
  const std::size_t n = rhs.size();
  if (x0.size() != n) throw std::invalid_argument("gmres: initial guess and rhs differ in length");
  if (max_iter < 0) throw std::invalid_argument("gmres: max_iter must be non-negative");
  if (abs_tol && *abs_tol < 0.0) throw std::invalid_argument("gmres: abs_tol must be non-negative");
  const double tol = abs_tol.value_or(1e-14 * norm(rhs));

  KrylovResult result;
  result.solution.assign(x0.begin(), x0.end());

  std::vector<double> r = apply(x0);
  if (r.size() != n) throw std::invalid_argument("gmres: operator changed the vector length");
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  const double beta = norm(r);
  result.residual_history.push_back(beta);
  if (beta <= tol || max_iter == 0) return result;

  const auto k_max = static_cast<std::size_t>(max_iter);
  std::vector<std::vector<double>> V;
  V.reserve(k_max + 1);
  for (double& ri : r) ri /= beta;
  V.push_back(std::move(r));

  // H is stored column by column; column k has k + 2 entries.
  std::vector<std::vector<double>> H;
  std::vector<double> cs, sn;
  std::vector<double> g{beta};

  std::size_t k = 0;
  while (k < k_max) {
    std::vector<double> w = apply(V[k]);
    std::vector<double> h(k + 2, 0.0);
    const double w_norm0 = norm(w);
    for (std::size_t j = 0; j <= k; ++j) {
      h[j] = dot(w, V[j]);
      axpy(-h[j], V[j], w);
    }
    double w_norm = norm(w);
    if (w_norm < 1e-3 * w_norm0) {
      for (std::size_t j = 0; j <= k; ++j) {
        const double c = dot(w, V[j]);
        h[j] += c;
        axpy(-c, V[j], w);
      }
      w_norm = norm(w);
    }
    h[k + 1] = w_norm;

    for (std::size_t j = 0; j < k; ++j) {
      const double t = cs[j] * h[j] + sn[j] * h[j + 1];
      h[j + 1] = -sn[j] * h[j] + cs[j] * h[j + 1];
      h[j] = t;
    }
    const double denom = std::hypot(h[k], h[k + 1]);
    const double c = denom == 0.0 ? 1.0 : h[k] / denom;
    const double s = denom == 0.0 ? 0.0 : h[k + 1] / denom;
    cs.push_back(c);
    sn.push_back(s);
    h[k] = denom;
    h[k + 1] = 0.0;
    g.push_back(-s * g[k]);
    g[k] *= c;
    H.push_back(std::move(h));
    ++k;

    result.residual_history.push_back(std::abs(g[k]));
    if (w_norm < kArnoldiBreakdown) {
      result.breakdown = true;
      break;
    }
    if (std::abs(g[k]) <= tol) break;
    if (k < k_max) {
      for (double& wi : w) wi /= w_norm;
      V.push_back(std::move(w));
    }
  }

  // Back substitution for the k x k upper-triangular system.
  std::vector<double> y(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double s = g[i];
    for (std::size_t j = i + 1; j < k; ++j) s -= H[j][i] * y[j];
    y[i] = H[i][i] == 0.0 ? 0.0 : s / H[i][i];
  }
  for (std::size_t j = 0; j < k; ++j) axpy(y[j], V[j], result.solution);
  result.iterations_used = static_cast<int>(k);
  return result;
}

}  // namespace bgsdc
