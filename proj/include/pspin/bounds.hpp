#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pspin/gaussian.hpp"
#include "pspin/model.hpp"

namespace pspin {

// Requested |u|_p is zero, so the scaling s is undefined.
struct ZeroVectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Element of C_n: symmetric, unit diagonal, entries in [-1,1], PSD.
struct OverlapMatrix {
  Eigen::MatrixXd u;

  OverlapMatrix() = default;
  explicit OverlapMatrix(Eigen::MatrixXd m);

  int n() const { return static_cast<int>(u.rows()); }
};

// Couplings lambda_{l,l'} for 1 <= l < l' <= n, upper triangle row-major.
struct CouplingVector {
  int n = 0;
  std::vector<double> values;
  double box = 30.0;

  CouplingVector() = default;
  explicit CouplingVector(int n_) : n(n_), values(n_ * (n_ - 1) / 2, 0.0) {}

  static int index(int n, int l, int lp) {  // 0-based, l < lp
    return l * n - l * (l + 1) / 2 + (lp - l - 1);
  }
  double at(int l, int lp) const { return values[index(n, l, lp)]; }
  double& at(int l, int lp) { return values[index(n, l, lp)]; }
  int size() const { return static_cast<int>(values.size()); }

  // gamma over n+1 replicas with gamma_{l,n+1} = 0.
  CouplingVector zero_extended() const;
};

// The block matrix W = [[U, u_vec], [u_vec^T, 1]].
struct ConstraintBlock {
  OverlapMatrix U;
  Eigen::VectorXd u_vec;

  ConstraintBlock() = default;
  ConstraintBlock(OverlapMatrix U_, Eigen::VectorXd u_vec_);

  int n() const { return U.n(); }
  Eigen::MatrixXd W() const;
};

// The rank-one P of the p-spin construction:
//   s = |u|_p^{-1/2},  P = [[s^2 u u^T, u], [u^T, s^-2]],
//   Q = s^2 u u^T,  q = |u|_p.
struct PConstruction {
  double s = 0.0;
  double q = 0.0;
  Eigen::VectorXd u_vec;
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  // z_l = a_l z coefficients derived from the covariance factorization:
  // a_l = xi'(u_l) / xi'(|u|_p).
  Eigen::VectorXd a_derived;
  // The literal display a_l = xi'(s^2) xi'(u_l), kept as a diagnostic; it
  // disagrees with the covariance-consistent coefficients above.
  Eigen::VectorXd a_literal;
};

PConstruction construct_P(const Eigen::VectorXd& u_vec,
                          const ModelParams& params,
                          bool allow_zero_vector = false);

// scale * u u^T with exactly symmetric entries (a plain Eigen outer product
// can differ in the last ulp across the diagonal).
Eigen::MatrixXd symmetric_outer(const Eigen::VectorXd& u, double scale = 1.0);

// log Phi_n(z, lambda) = log sum over sign vectors of
// exp(sum_l eps_l (z_l + h) + sum_{l<l'} lambda_{l,l'} eps_l eps_l').
// Explicit 2^n enumeration; n <= 16.
double phi_n_log(const Eigen::VectorXd& z, const CouplingVector& lambda,
                 double h);

// psi(Q, lambda) of the n-replica lower bound; Q is the Gaussian covariance
// before applying xi' entrywise.  Requires n <= a.
double psi_value(const OverlapMatrix& U, const CovarianceMatrix& Q,
                 const CouplingVector& lambda, const ModelParams& params,
                 int order = 128);

struct CouplingOpt {
  CouplingVector coupling;
  double value = 0.0;      // objective at the optimum (psi or Psi)
  double grad_norm = 0.0;  // sup-norm of the gradient
  Eigen::MatrixXd hessian;
  bool converged = false;
  int iterations = 0;
};

// Newton minimization of lambda -> psi(Q, lambda).  Requires all off-diagonal
// |u_{l,l'}| < 1 - 1e-9; glue first otherwise.
CouplingOpt psi_inf_lambda(const OverlapMatrix& U, const CovarianceMatrix& Q,
                           const ModelParams& params, int order = 128);

// Psi(P, gamma) of the (n+1)-replica upper bound.  Requires a <= n+1.
double Psi_value(const ConstraintBlock& block, const CovarianceMatrix& P,
                 const CouplingVector& gamma, const ModelParams& params,
                 int order = 128);

// Newton minimization of gamma -> Psi(P, gamma), seeded at `seed`.
CouplingOpt Psi_inf_gamma(const ConstraintBlock& block,
                          const CovarianceMatrix& P,
                          const CouplingVector& seed,
                          const ModelParams& params, int order = 128);

// I + II + III regrouping of the first line of Psi; the sum reproduces the
// first line as an algebraic identity, and III = 0 at the canonical P.
struct Decomposition {
  double I = 0.0;
  double II = 0.0;
  double III = 0.0;
  double first_line = 0.0;  // direct evaluation, for the identity check
};

Decomposition decompose_I_II_III(const ConstraintBlock& block,
                                 const Eigen::MatrixXd& P,
                                 const ModelParams& params);

// rhs - lhs of the Hoelder factorization bound; >= 0, and > 0 exactly under
// the strictness conditions.
double holder_gap(const Eigen::VectorXd& u_vec, const CouplingVector& lambda,
                  const ModelParams& params, int order = 128);

struct Strictness {
  bool strict = false;
  std::string reason;
};

// strict iff the |u_l| are not all equal (1e-12) or h != 0 and the target
// coordinate is negative.
Strictness strictness_check(const Eigen::VectorXd& u_vec,
                            const ModelParams& params, int target_index = 0);

struct GlueResult {
  OverlapMatrix reduced;
  std::vector<int> group;          // class of each original replica
  std::vector<int> sign;           // relative sign within the class
  std::vector<double> field_weight;  // signed h multiplicity per class
};

// Merge replicas tied by off-diagonal entries with |u| >= 1 - 1e-9.
GlueResult glue_coordinates(const OverlapMatrix& U);

struct BoundReport {
  int n = 0;
  double q = 0.0;                 // |u|_p
  double psi_inf = 0.0;           // inf_lambda psi(Q, lambda)
  double rs_q = 0.0;              // RS(|u|_p)
  double Psi_at_embedding = 0.0;  // Psi(P, zero-extended lambda0)
  double Psi_inf = 0.0;           // inf_gamma Psi(P, gamma)
  double holder_gap = 0.0;
  bool strict = false;
  std::string strict_reason;
  bool chain_ok = false;
  double margin_embedding = 0.0;  // (n/(n+1))(psi_inf + rs_q) - Psi_at_embedding
  double margin_psi = 0.0;        // n RS(q) - psi_inf
  double margin_Psi = 0.0;        // n RS(q) - Psi_inf
  double lambda_grad_norm = 0.0;
  std::vector<double> psi_at_trial_Qs;
};

// End-to-end verification of the inequality chain at the canonical P.  The
// off-diagonal entries of U default to u_l * u_l' (which keeps W PSD);
// trial_Qs are extra covariances at which psi is evaluated and reported.
BoundReport chain_verify(const Eigen::VectorXd& u_vec, int target_index,
                         const ModelParams& params,
                         const std::vector<CovarianceMatrix>& trial_Qs = {},
                         int order = 128);

// Constant-vector convenience: u_vec = (u, ..., u) with n coordinates.
BoundReport chain_verify(double u, int n, const ModelParams& params,
                         const std::vector<CovarianceMatrix>& trial_Qs = {},
                         int order = 128);

}  // namespace pspin
