#include "pspin/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>

#include "pspin/logsumexp.hpp"

namespace pspin {

namespace {

// Christoffel weight 1 / sum_{k<n} p_k(x)^2 with the orthonormal
// probabilists' Hermite polynomials, evaluated with running rescaling so the
// far-tail weights stay accurate down to underflow.  The squared first
// eigenvector components of the Jacobi matrix give the same numbers in exact
// arithmetic but bottom out at eigensolver noise around 1e-30.
double christoffel_weight(double x, int order) {
  LogAccumulator sum;
  sum.add(0.0);  // p_0 = 1
  double prev = 1.0, cur = x, log_off = 0.0;
  if (x != 0.0) sum.add(2.0 * std::log(std::abs(x)));
  for (int k = 1; k < order - 1; ++k) {
    double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                  std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
    double m = std::max(std::abs(prev), std::abs(cur));
    if (m > 1e150) {
      prev /= m;
      cur /= m;
      log_off += std::log(m);
    }
    if (cur != 0.0) {
      sum.add(2.0 * (log_off + std::log(std::abs(cur))));
    }
  }
  return std::exp(-sum.log_value());
}

}  // namespace

QuadratureRule hermite_rule(int order) {
  if (order < 1 || order > 512) {
    throw InvalidParams("hermite_rule: order must be in [1, 512]");
  }
  static std::mutex cache_mutex;
  static std::map<int, QuadratureRule> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
  }
  QuadratureRule rule;
  rule.order = order;
  if (order == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
  } else {

    // Jacobi matrix of the probabilists' Hermite polynomials: zero diagonal,
    // off-diagonal sqrt(k).  Eigenvalues are the nodes.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
      double b = std::sqrt(static_cast<double>(k));
      jacobi(k, k - 1) = b;
      jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    rule.nodes.resize(order);
    rule.weights.resize(order);
    double total = 0.0;
    for (int i = 0; i < order; ++i) {
      rule.nodes[i] = es.eigenvalues()(i);
      rule.weights[i] = christoffel_weight(rule.nodes[i], order);
      total += rule.weights[i];
    }
    for (double& w : rule.weights) w /= total;
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache.emplace(order, rule);
  return rule;
}

}  // namespace pspin
