#include "common/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "common/errors.hpp"

namespace gfomlb {
namespace {

// Orthonormal Hermite polynomials under N(0,1):
// p_{k+1}(x) = (x p_k(x) - sqrt(k) p_{k-1}(x)) / sqrt(k+1).
// Returns p_n(x), p_{n-1}(x) and sum_{k<n} p_k(x)^2.
struct HermiteEval {
  double pn;
  double pn1;
  double sumsq;
};

HermiteEval hermite_eval(int n, double x) {
  double prev = 0.0;
  double cur = 1.0;
  double sumsq = 0.0;
  for (int k = 0; k < n; ++k) {
    sumsq += cur * cur;
    double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
    prev = cur;
    cur = next;
  }
  return {cur, prev, sumsq};
}

GaussQuadrature build_hermite(int order) {
  if (order < 1) throw ConfigError("Gauss-Hermite order must be positive");
  // Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes.
  Mat jacobi = Mat::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k - 1, k) = jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(jacobi, Eigen::EigenvaluesOnly);
  std::vector<double> nodes(es.eigenvalues().data(), es.eigenvalues().data() + order);

  // Newton polish on p_n, then Christoffel weights 1 / sum p_k^2.
  GaussQuadrature q;
  q.order = order;
  q.nodes.resize(order);
  q.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = nodes[i];
    for (int it = 0; it < 4; ++it) {
      HermiteEval h = hermite_eval(order, x);
      double deriv = std::sqrt(static_cast<double>(order)) * h.pn1;
      if (deriv == 0.0) break;
      x -= h.pn / deriv;
    }
    q.nodes[i] = x;
    q.weights[i] = 1.0 / hermite_eval(order, x).sumsq;
  }
  // Enforce exact symmetry of the rule.
  for (int i = 0; i < order / 2; ++i) {
    int j = order - 1 - i;
    double x = 0.5 * (q.nodes[j] - q.nodes[i]);
    double w = 0.5 * (q.weights[i] + q.weights[j]);
    q.nodes[i] = -x;
    q.nodes[j] = x;
    q.weights[i] = q.weights[j] = w;
  }
  if (order % 2 == 1) q.nodes[order / 2] = 0.0;
  double total = 0.0;
  for (double w : q.weights) total += w;
  for (double& w : q.weights) w /= total;
  return q;
}

GaussQuadrature build_grid(int points) {
  if (points < 3) throw ConfigError("grid quadrature needs at least 3 points");
  GaussQuadrature q;
  q.order = points;
  q.nodes.resize(points);
  q.weights.resize(points);
  const double half = 9.0;
  const double step = 2.0 * half / (points - 1);
  double total = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -half + step * i;
    q.nodes[i] = x;
    q.weights[i] = std::exp(-0.5 * x * x);
    total += q.weights[i];
  }
  for (double& w : q.weights) w /= total;
  return q;
}

TensorQuadrature build_tensor(int dim, const GaussQuadrature& base) {
  const int order = static_cast<int>(base.nodes.size());
  TensorQuadrature t;
  t.dim = dim;
  long count = 1;
  for (int d = 0; d < dim; ++d) count *= order;
  t.nodes.resize(dim, count);
  t.weights.resize(count);
  for (long idx = 0; idx < count; ++idx) {
    long rest = idx;
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      int k = static_cast<int>(rest % order);
      rest /= order;
      t.nodes(d, idx) = base.nodes[k];
      w *= base.weights[k];
    }
    t.weights[idx] = w;
  }
  return t;
}

}  // namespace

const GaussQuadrature& gaussian_grid(int points) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussQuadrature>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(points);
  if (it == cache.end()) {
    it = cache.emplace(points, std::make_unique<GaussQuadrature>(build_grid(points))).first;
  }
  return *it->second;
}

const TensorQuadrature& gaussian_grid_tensor(int dim, int points) {
  if (dim < 1 || dim > 4) throw ConfigError("tensor quadrature supports dimensions 1..4");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<TensorQuadrature>> cache;
  const GaussQuadrature& base = gaussian_grid(points);
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, points);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  return *cache.emplace(key, std::make_unique<TensorQuadrature>(build_tensor(dim, base)))
              .first->second;
}

const GaussQuadrature& gauss_hermite(int order) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussQuadrature>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, std::make_unique<GaussQuadrature>(build_hermite(order))).first;
  }
  return *it->second;
}

int default_tensor_order(int dim) {
  switch (dim) {
    case 1: return 61;
    case 2: return 41;
    case 3: return 15;
    case 4: return 9;
    default: throw ConfigError("tensor quadrature supports dimensions 1..4");
  }
}

const TensorQuadrature& gauss_hermite_tensor(int dim, int order) {
  if (dim < 1 || dim > 4) throw ConfigError("tensor quadrature supports dimensions 1..4");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<TensorQuadrature>> cache;
  const GaussQuadrature& base = gauss_hermite(order);
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  return *cache.emplace(key, std::make_unique<TensorQuadrature>(build_tensor(dim, base)))
              .first->second;
}

}  // namespace gfomlb
