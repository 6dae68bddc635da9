#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "pspin/errors.hpp"
#include "pspin/quadrature.hpp"

namespace pspin {

struct CovarianceMatrix {
  Eigen::MatrixXd entries;

  CovarianceMatrix() = default;
  explicit CovarianceMatrix(Eigen::MatrixXd m);

  int dim() const { return static_cast<int>(entries.rows()); }
};

// F with F * F^T = C, columns only for the numerically nonzero eigenvalues
// (eigenvalue > 1e-10 * max).  Throws NotPsdError when the smallest
// eigenvalue is below -1e-8 * max.
struct PsdFactor {
  Eigen::MatrixXd factor;  // dim x rank
  int rank = 0;
};

PsdFactor psd_factor(const CovarianceMatrix& c);

// E f(sqrt(variance) * x) under the standard normal; variance = 0 evaluates
// f(0) exactly.
double expect_1d(const std::function<double(double)>& f, double variance,
                 const QuadratureRule& rule);

// log E exp(log_f(z)), z ~ N(0, variance), evaluated with max-shift.
double log_expect_1d(const std::function<double(double)>& log_f,
                     double variance, const QuadratureRule& rule);

// E f(z), z ~ N(0, C).  Tensorized quadrature on the rank-reduced factor when
// rank <= 4 (a rank-1 covariance collapses to a single 1-D rule); Monte Carlo
// with mc_samples counter-based draws otherwise.
struct NdExpectOptions {
  uint64_t mc_samples = 1'000'000;
  uint64_t seed = 0;
};

double expect_nd(const std::function<double(const Eigen::VectorXd&)>& f,
                 const CovarianceMatrix& c, const QuadratureRule& rule,
                 const NdExpectOptions& opts = {});

double log_expect_nd(
    const std::function<double(const Eigen::VectorXd&)>& log_f,
    const CovarianceMatrix& c, const QuadratureRule& rule,
    const NdExpectOptions& opts = {});

// log E ch^a(z + h), z ~ N(0, variance).  Order doubles from 64 until the
// relative change is below 1e-12 (cap 512).
double log_expect_ch_pow(double a, double h, double variance);

// log cosh with no overflow.
inline double log_cosh(double x) {
  double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

}  // namespace pspin
