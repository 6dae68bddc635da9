#include "pspin/gaussian.hpp"

#include <cmath>
#include <vector>

#include "pspin/logsumexp.hpp"
#include "pspin/rng.hpp"

namespace pspin {

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd m) : entries(std::move(m)) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw InvalidParams("CovarianceMatrix: square matrix of dim >= 1 required");
  }
  double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym != 0.0) {
    throw InvalidParams("CovarianceMatrix: not symmetric");
  }
}

PsdFactor psd_factor(const CovarianceMatrix& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.entries);
  const auto& ev = es.eigenvalues();
  double emax = ev.maxCoeff();
  double scale = std::max(emax, 0.0);
  if (ev.minCoeff() < -1e-8 * std::max(scale, 1e-300)) {
    throw NotPsdError("psd_factor: matrix is not positive semidefinite");
  }
  int dim = c.dim();
  double cut = 1e-10 * scale;
  std::vector<int> keep;
  for (int i = dim - 1; i >= 0; --i) {  // descending eigenvalue order
    if (ev(i) > cut) keep.push_back(i);
  }
  PsdFactor out;
  out.rank = static_cast<int>(keep.size());
  out.factor.resize(dim, out.rank);
  for (int j = 0; j < out.rank; ++j) {
    out.factor.col(j) = es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
  }
  return out;
}

double expect_1d(const std::function<double(double)>& f, double variance,
                 const QuadratureRule& rule) {
  if (variance < 0) throw InvalidParams("expect_1d: negative variance");
  if (variance == 0.0) return f(0.0);
  double sd = std::sqrt(variance);
  double acc = 0.0;
  for (int i = 0; i < rule.order; ++i) {
    acc += rule.weights[i] * f(sd * rule.nodes[i]);
  }
  return acc;
}

double log_expect_1d(const std::function<double(double)>& log_f,
                     double variance, const QuadratureRule& rule) {
  if (variance < 0) throw InvalidParams("log_expect_1d: negative variance");
  if (variance == 0.0) return log_f(0.0);
  double sd = std::sqrt(variance);
  LogAccumulator acc;
  for (int i = 0; i < rule.order; ++i) {
    acc.add(std::log(rule.weights[i]) + log_f(sd * rule.nodes[i]));
  }
  return acc.log_value();
}

namespace {

// Visit every tensor-product node of `rule` in `rank` dimensions, passing the
// log-weight and the mapped point z = F * x.
template <typename Visitor>
void tensor_visit(const PsdFactor& fac, const QuadratureRule& rule,
                  Visitor&& visit) {
  int r = fac.rank;
  std::vector<int> idx(r, 0);
  Eigen::VectorXd x(r);
  for (;;) {
    double logw = 0.0;
    for (int d = 0; d < r; ++d) {
      x(d) = rule.nodes[idx[d]];
      logw += std::log(rule.weights[idx[d]]);
    }
    visit(logw, Eigen::VectorXd(fac.factor * x));
    int d = 0;
    while (d < r && ++idx[d] == rule.order) idx[d++] = 0;
    if (d == r) break;
  }
}

}  // namespace

double expect_nd(const std::function<double(const Eigen::VectorXd&)>& f,
                 const CovarianceMatrix& c, const QuadratureRule& rule,
                 const NdExpectOptions& opts) {
  PsdFactor fac = psd_factor(c);
  if (fac.rank == 0) return f(Eigen::VectorXd::Zero(c.dim()));
  if (fac.rank <= 4) {
    double acc = 0.0;
    tensor_visit(fac, rule, [&](double logw, const Eigen::VectorXd& z) {
      acc += std::exp(logw) * f(z);
    });
    return acc;
  }
  // Monte Carlo fallback; draws keyed by sample index.
  CounterRng rng(opts.seed, 0x6e64657870ULL);
  Eigen::VectorXd x(fac.rank);
  double acc = 0.0;
  for (uint64_t s = 0; s < opts.mc_samples; ++s) {
    for (int d = 0; d < fac.rank; ++d) {
      x(d) = rng.gaussian(s * static_cast<uint64_t>(fac.rank) + d);
    }
    acc += f(fac.factor * x);
  }
  return acc / static_cast<double>(opts.mc_samples);
}

double log_expect_nd(
    const std::function<double(const Eigen::VectorXd&)>& log_f,
    const CovarianceMatrix& c, const QuadratureRule& rule,
    const NdExpectOptions& opts) {
  PsdFactor fac = psd_factor(c);
  if (fac.rank == 0) return log_f(Eigen::VectorXd::Zero(c.dim()));
  if (fac.rank <= 4) {
    LogAccumulator acc;
    tensor_visit(fac, rule, [&](double logw, const Eigen::VectorXd& z) {
      acc.add(logw + log_f(z));
    });
    return acc.log_value();
  }
  CounterRng rng(opts.seed, 0x6e64657870ULL);
  Eigen::VectorXd x(fac.rank);
  LogAccumulator acc;
  for (uint64_t s = 0; s < opts.mc_samples; ++s) {
    for (int d = 0; d < fac.rank; ++d) {
      x(d) = rng.gaussian(s * static_cast<uint64_t>(fac.rank) + d);
    }
    acc.add(log_f(fac.factor * x));
  }
  return acc.log_value() - std::log(static_cast<double>(opts.mc_samples));
}

double log_expect_ch_pow(double a, double h, double variance) {
  double prev = kNegInf;
  for (int order = 64; order <= 512; order *= 2) {
    double cur = log_expect_1d([&](double z) { return a * log_cosh(z + h); },
                               variance, hermite_rule(order));
    if (std::isfinite(prev) &&
        std::abs(cur - prev) <= 1e-12 * std::max(1.0, std::abs(cur))) {
      return cur;
    }
    prev = cur;
  }
  return prev;
}

}  // namespace pspin
