#include "pspin/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "pspin/logsumexp.hpp"
#include "pspin/rs.hpp"

namespace pspin {

namespace {

Eigen::MatrixXd xi_prime_entrywise(const Eigen::MatrixXd& m,
                                   const ModelParams& params) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(i, j) = params.xi_prime(m(i, j));
    }
  }
  return out;
}

// Tensor quadrature order shrinks with the covariance rank to keep the node
// count bounded.
int effective_order(int order, int rank) {
  if (rank <= 2) return order;
  if (rank == 3) return std::min(order, 48);
  return std::min(order, 24);
}

// Shared evaluation core for the coupled objectives
//   G(c) = -sum_e c_e t_e + (1/m) log E Phi_k^m(z, c),   z ~ N(0, C).
// The z-dependent energies are cached per quadrature node, so repeated
// evaluations during Newton iterations only touch the coupling part.
class CouplingObjective {
 public:
  CouplingObjective(int k, double m, double h, Eigen::VectorXd targets,
                    const CovarianceMatrix& c, int order)
      : k_(k), m_(m), targets_(std::move(targets)), n_pairs_(k * (k - 1) / 2) {
    if (k_ < 1 || k_ > 16) throw InvalidParams("CouplingObjective: k out of range");
    PsdFactor fac = psd_factor(c);
    QuadratureRule rule = hermite_rule(effective_order(order, std::max(fac.rank, 1)));

    masks_ = 1 << k_;
    pair_prod_.resize(static_cast<size_t>(masks_) * n_pairs_);
    for (int mask = 0; mask < masks_; ++mask) {
      int e = 0;
      for (int l = 0; l < k_; ++l) {
        for (int lp = l + 1; lp < k_; ++lp, ++e) {
          int sl = (mask >> l) & 1 ? 1 : -1;
          int slp = (mask >> lp) & 1 ? 1 : -1;
          pair_prod_[static_cast<size_t>(mask) * n_pairs_ + e] =
              static_cast<int8_t>(sl * slp);
        }
      }
    }

    // enumerate tensor nodes of the rank-reduced factor
    int r = fac.rank;
    size_t n_nodes = 1;
    for (int d = 0; d < r; ++d) n_nodes *= rule.order;
    log_w_.reserve(n_nodes);
    z_part_.reserve(n_nodes * masks_);
    std::vector<int> idx(std::max(r, 1), 0);
    Eigen::VectorXd x(r), z(k_);
    for (size_t node = 0; node < n_nodes; ++node) {
      double logw = 0.0;
      for (int d = 0; d < r; ++d) {
        x(d) = rule.nodes[idx[d]];
        logw += std::log(rule.weights[idx[d]]);
      }
      z = r > 0 ? Eigen::VectorXd(fac.factor * x) : Eigen::VectorXd::Zero(k_);
      log_w_.push_back(logw);
      for (int mask = 0; mask < masks_; ++mask) {
        double s = 0.0;
        for (int l = 0; l < k_; ++l) {
          s += ((mask >> l) & 1 ? 1.0 : -1.0) * (z(l) + h);
        }
        z_part_.push_back(s);
      }
      int d = 0;
      while (d < r && ++idx[d] == rule.order) idx[d++] = 0;
    }
  }

  int n_pairs() const { return n_pairs_; }

  // value of (1/m) log E Phi^m plus the coupling term; gradient/hessian
  // optional.
  double eval(const CouplingVector& coupling, Eigen::VectorXd* grad,
              Eigen::MatrixXd* hess) const {
    const size_t n_nodes = log_w_.size();
    std::vector<double> energy(masks_), omega(masks_);
    Eigen::VectorXd node_a(n_pairs_);
    Eigen::MatrixXd node_b;
    if (hess) node_b.resize(n_pairs_, n_pairs_);

    double shift = kNegInf;
    double den = 0.0;
    Eigen::VectorXd num_a = Eigen::VectorXd::Zero(n_pairs_);
    Eigen::MatrixXd num_aa, num_b;
    if (hess) {
      num_aa = Eigen::MatrixXd::Zero(n_pairs_, n_pairs_);
      num_b = Eigen::MatrixXd::Zero(n_pairs_, n_pairs_);
    }

    for (size_t node = 0; node < n_nodes; ++node) {
      const double* zp = &z_part_[node * masks_];
      double emax = kNegInf;
      for (int mask = 0; mask < masks_; ++mask) {
        double s = zp[mask];
        const int8_t* pp = &pair_prod_[static_cast<size_t>(mask) * n_pairs_];
        for (int e = 0; e < n_pairs_; ++e) s += coupling.values[e] * pp[e];
        energy[mask] = s;
        emax = std::max(emax, s);
      }
      double acc = 0.0;
      for (int mask = 0; mask < masks_; ++mask) acc += std::exp(energy[mask] - emax);
      double log_phi = emax + std::log(acc);

      double ell = log_w_[node] + m_ * log_phi;
      if (ell > shift) {
        double rescale = std::isfinite(shift) ? std::exp(shift - ell) : 0.0;
        den *= rescale;
        if (grad || hess) num_a *= rescale;
        if (hess) {
          num_aa *= rescale;
          num_b *= rescale;
        }
        shift = ell;
      }
      double w = std::exp(ell - shift);
      den += w;

      if (grad || hess) {
        for (int mask = 0; mask < masks_; ++mask) {
          omega[mask] = std::exp(energy[mask] - log_phi);
        }
        node_a.setZero();
        for (int mask = 0; mask < masks_; ++mask) {
          const int8_t* pp = &pair_prod_[static_cast<size_t>(mask) * n_pairs_];
          for (int e = 0; e < n_pairs_; ++e) node_a(e) += omega[mask] * pp[e];
        }
        num_a += w * node_a;
        if (hess) {
          node_b.setZero();
          for (int mask = 0; mask < masks_; ++mask) {
            const int8_t* pp = &pair_prod_[static_cast<size_t>(mask) * n_pairs_];
            for (int e = 0; e < n_pairs_; ++e) {
              for (int f = e; f < n_pairs_; ++f) {
                node_b(e, f) += omega[mask] * pp[e] * pp[f];
              }
            }
          }
          num_aa += w * (node_a * node_a.transpose());
          num_b += w * node_b;
        }
      }
    }

    double log_expect = shift + std::log(den);
    double value = -coupling_dot(coupling) + log_expect / m_;
    if (grad) {
      *grad = num_a / den - targets_;
    }
    if (hess) {
      Eigen::MatrixXd b_full = num_b / den;
      for (int e = 0; e < n_pairs_; ++e) {
        for (int f = 0; f < e; ++f) b_full(e, f) = b_full(f, e);
      }
      Eigen::VectorXd abar = num_a / den;
      *hess = (m_ - 1.0) * (num_aa / den) + b_full -
              m_ * (abar * abar.transpose());
    }
    return value;
  }

 private:
  double coupling_dot(const CouplingVector& c) const {
    double s = 0.0;
    for (int e = 0; e < n_pairs_; ++e) s += c.values[e] * targets_(e);
    return s;
  }

  int k_;
  double m_;
  Eigen::VectorXd targets_;
  int n_pairs_;
  int masks_ = 0;
  std::vector<int8_t> pair_prod_;
  std::vector<double> log_w_;
  std::vector<double> z_part_;
};

Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m) {
  int k = static_cast<int>(m.rows());
  Eigen::VectorXd out(k * (k - 1) / 2);
  int e = 0;
  for (int l = 0; l < k; ++l) {
    for (int lp = l + 1; lp < k; ++lp, ++e) out(e) = m(l, lp);
  }
  return out;
}

// Damped Newton with backtracking on a CouplingObjective.
CouplingOpt newton_minimize(const CouplingObjective& obj,
                            const CouplingVector& start) {
  CouplingOpt result;
  CouplingVector lam = start;
  const int max_iter = 200;
  Eigen::VectorXd grad(obj.n_pairs());
  Eigen::MatrixXd hess(obj.n_pairs(), obj.n_pairs());
  double value = obj.eval(lam, &grad, &hess);

  for (int it = 0; it < max_iter; ++it) {
    result.iterations = it;
    double gnorm = grad.lpNorm<Eigen::Infinity>();
    if (gnorm <= 1e-10) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd dir;
    double tau = 0.0;
    for (;;) {
      Eigen::MatrixXd hd = hess;
      if (tau > 0.0) hd.diagonal().array() += tau;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hd);
      dir = ldlt.solve(-grad);
      if (ldlt.info() == Eigen::Success && grad.dot(dir) < 0.0) break;
      tau = tau == 0.0 ? 1e-8 : tau * 10.0;
      if (tau > 1e8) {
        dir = -grad;  // steepest descent fallback
        break;
      }
    }
    double slope = grad.dot(dir);
    double alpha = 1.0;
    CouplingVector trial = lam;
    double trial_value = value;
    bool accepted = false;
    while (alpha > 1e-12) {
      for (int e = 0; e < obj.n_pairs(); ++e) {
        trial.values[e] = std::clamp(lam.values[e] + alpha * dir(e),
                                     -lam.box, lam.box);
      }
      trial_value = obj.eval(trial, nullptr, nullptr);
      if (trial_value <= value + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha /= 2.0;
    }
    if (!accepted && trial_value >= value) break;  // stalled
    lam = trial;
    value = obj.eval(lam, &grad, &hess);
  }

  result.coupling = lam;
  result.value = value;
  result.grad_norm = grad.lpNorm<Eigen::Infinity>();
  result.hessian = hess;
  return result;
}

// lambda-independent first term of psi.
double psi_first_term(const OverlapMatrix& U, const Eigen::MatrixXd& q,
                      const ModelParams& params) {
  const int n = U.n();
  double acc = 0.0;
  for (int l = 0; l < n; ++l) {
    for (int lp = 0; lp < n; ++lp) {
      acc += params.xi(U.u(l, lp)) - U.u(l, lp) * params.xi_prime(q(l, lp)) +
             (1.0 - params.a / n) * params.theta(q(l, lp));
    }
  }
  return acc / 2.0;
}

double Psi_first_term(const Eigen::MatrixXd& w, const Eigen::MatrixXd& pm,
                      const ModelParams& params) {
  const int k = static_cast<int>(w.rows());  // n+1
  const int n = k - 1;
  double acc = 0.0;
  for (int l = 0; l < k; ++l) {
    for (int lp = 0; lp < k; ++lp) {
      acc += params.xi(w(l, lp)) - w(l, lp) * params.xi_prime(pm(l, lp)) +
             (1.0 - params.a / k) * params.theta(pm(l, lp));
    }
  }
  return 0.5 * acc * n / k;
}

}  // namespace

OverlapMatrix::OverlapMatrix(Eigen::MatrixXd m) : u(std::move(m)) {
  if (u.rows() != u.cols() || u.rows() < 1) {
    throw InvalidParams("OverlapMatrix: square matrix required");
  }
  double asym = (u - u.transpose()).cwiseAbs().maxCoeff();
  if (asym != 0.0) throw InvalidParams("OverlapMatrix: not symmetric");
  for (int l = 0; l < n(); ++l) {
    if (u(l, l) != 1.0) throw InvalidParams("OverlapMatrix: diagonal must be 1");
  }
  if (u.cwiseAbs().maxCoeff() > 1.0 + 1e-12) {
    throw InvalidParams("OverlapMatrix: entries must lie in [-1,1]");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(u);
  double emax = std::max(es.eigenvalues().maxCoeff(), 1.0);
  if (es.eigenvalues().minCoeff() < -1e-12 * emax * n()) {
    throw NotPsdError("OverlapMatrix: not PSD");
  }
}

CouplingVector CouplingVector::zero_extended() const {
  CouplingVector out(n + 1);
  out.box = box;
  for (int l = 0; l < n; ++l) {
    for (int lp = l + 1; lp < n; ++lp) {
      out.at(l, lp) = at(l, lp);
    }
  }
  return out;
}

ConstraintBlock::ConstraintBlock(OverlapMatrix U_, Eigen::VectorXd u_vec_)
    : U(std::move(U_)), u_vec(std::move(u_vec_)) {
  if (u_vec.size() != U.n()) {
    throw InvalidParams("ConstraintBlock: dimension mismatch");
  }
}

Eigen::MatrixXd ConstraintBlock::W() const {
  int nn = n();
  Eigen::MatrixXd w(nn + 1, nn + 1);
  w.topLeftCorner(nn, nn) = U.u;
  w.topRightCorner(nn, 1) = u_vec;
  w.bottomLeftCorner(1, nn) = u_vec.transpose();
  w(nn, nn) = 1.0;
  return w;
}

PConstruction construct_P(const Eigen::VectorXd& u_vec,
                          const ModelParams& params, bool allow_zero_vector) {
  const int n = static_cast<int>(u_vec.size());
  if (n < 1) throw InvalidParams("construct_P: empty vector");
  const int p = params.mixture.p;
  double mean_pow = 0.0;
  for (int l = 0; l < n; ++l) mean_pow += MixtureSpec::abs_pow(u_vec(l), p);
  mean_pow /= n;
  double norm_p = mean_pow > 0.0 ? std::pow(mean_pow, 1.0 / p) : 0.0;

  PConstruction out;
  out.u_vec = u_vec;
  if (norm_p == 0.0) {
    if (!allow_zero_vector) {
      throw ZeroVectorError("construct_P: |u|_p = 0, s is undefined");
    }
    out.s = 0.0;
    out.q = 0.0;
    out.Q = Eigen::MatrixXd::Zero(n, n);
    out.P = Eigen::MatrixXd::Zero(n + 1, n + 1);
    out.a_derived = Eigen::VectorXd::Zero(n);
    out.a_literal = Eigen::VectorXd::Zero(n);
    return out;
  }

  out.q = norm_p;
  out.s = 1.0 / std::sqrt(norm_p);
  double s2 = out.s * out.s;
  out.Q = symmetric_outer(u_vec, s2);
  out.P.resize(n + 1, n + 1);
  out.P.topLeftCorner(n, n) = out.Q;
  out.P.topRightCorner(n, 1) = u_vec;
  out.P.bottomLeftCorner(1, n) = u_vec.transpose();
  out.P(n, n) = 1.0 / s2;

  out.a_derived.resize(n);
  out.a_literal.resize(n);
  double xi_q = params.xi_prime(out.q);
  for (int l = 0; l < n; ++l) {
    out.a_derived(l) = params.xi_prime(u_vec(l)) / xi_q;
    out.a_literal(l) = params.xi_prime(s2) * params.xi_prime(u_vec(l));
  }
  return out;
}

Eigen::MatrixXd symmetric_outer(const Eigen::VectorXd& u, double scale) {
  const int n = static_cast<int>(u.size());
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      out(i, j) = out(j, i) = scale * u(i) * u(j);
    }
  }
  return out;
}

double phi_n_log(const Eigen::VectorXd& z, const CouplingVector& lambda,
                 double h) {
  const int n = static_cast<int>(z.size());
  if (n < 1 || n > 16) throw InvalidParams("phi_n_log: n must be in [1, 16]");
  if (lambda.n != n) throw InvalidParams("phi_n_log: coupling size mismatch");
  const int masks = 1 << n;
  std::vector<double> energy(masks);
  for (int mask = 0; mask < masks; ++mask) {
    double s = 0.0;
    for (int l = 0; l < n; ++l) {
      s += ((mask >> l) & 1 ? 1.0 : -1.0) * (z(l) + h);
    }
    for (int l = 0; l < n; ++l) {
      for (int lp = l + 1; lp < n; ++lp) {
        int sl = (mask >> l) & 1 ? 1 : -1;
        int slp = (mask >> lp) & 1 ? 1 : -1;
        s += lambda.at(l, lp) * sl * slp;
      }
    }
    energy[mask] = s;
  }
  return log_sum_exp(energy);
}

double psi_value(const OverlapMatrix& U, const CovarianceMatrix& Q,
                 const CouplingVector& lambda, const ModelParams& params,
                 int order) {
  const int n = U.n();
  if (Q.dim() != n || lambda.n != n) {
    throw InvalidParams("psi_value: dimension mismatch");
  }
  if (n > params.a) throw InvalidParams("psi_value: requires n <= a");
  CovarianceMatrix xq(xi_prime_entrywise(Q.entries, params));
  CouplingObjective obj(n, params.a / n, params.h, upper_triangle(U.u), xq,
                        order);
  return psi_first_term(U, Q.entries, params) + obj.eval(lambda, nullptr, nullptr);
}

CouplingOpt psi_inf_lambda(const OverlapMatrix& U, const CovarianceMatrix& Q,
                           const ModelParams& params, int order) {
  const int n = U.n();
  if (n > params.a) throw InvalidParams("psi_inf_lambda: requires n <= a");
  for (int l = 0; l < n; ++l) {
    for (int lp = l + 1; lp < n; ++lp) {
      if (std::abs(U.u(l, lp)) >= 1.0 - 1e-9) {
        throw InconsistentGluing(
            "psi_inf_lambda: |u| = 1 constraint present; apply "
            "glue_coordinates first");
      }
    }
  }
  CovarianceMatrix xq(xi_prime_entrywise(Q.entries, params));
  CouplingObjective obj(n, params.a / n, params.h, upper_triangle(U.u), xq,
                        order);
  CouplingOpt opt = newton_minimize(obj, CouplingVector(n));
  opt.value += psi_first_term(U, Q.entries, params);
  return opt;
}

double Psi_value(const ConstraintBlock& block, const CovarianceMatrix& P,
                 const CouplingVector& gamma, const ModelParams& params,
                 int order) {
  const int n = block.n();
  const int k = n + 1;
  if (P.dim() != k || gamma.n != k) {
    throw InvalidParams("Psi_value: dimension mismatch");
  }
  if (params.a > k) throw InvalidParams("Psi_value: requires a <= n+1");
  Eigen::MatrixXd w = block.W();
  CovarianceMatrix xp(xi_prime_entrywise(P.entries, params));
  CouplingObjective obj(k, params.a / k, params.h, upper_triangle(w), xp,
                        order);
  double scale = static_cast<double>(n) / k;
  return Psi_first_term(w, P.entries, params) +
         scale * obj.eval(gamma, nullptr, nullptr);
}

CouplingOpt Psi_inf_gamma(const ConstraintBlock& block,
                          const CovarianceMatrix& P,
                          const CouplingVector& seed,
                          const ModelParams& params, int order) {
  const int n = block.n();
  const int k = n + 1;
  if (params.a > k) throw InvalidParams("Psi_inf_gamma: requires a <= n+1");
  Eigen::MatrixXd w = block.W();
  CovarianceMatrix xp(xi_prime_entrywise(P.entries, params));
  CouplingObjective obj(k, params.a / k, params.h, upper_triangle(w), xp,
                        order);
  CouplingOpt opt = newton_minimize(obj, seed);
  double scale = static_cast<double>(n) / k;
  opt.value = Psi_first_term(w, P.entries, params) + scale * opt.value;
  return opt;
}

Decomposition decompose_I_II_III(const ConstraintBlock& block,
                                 const Eigen::MatrixXd& P,
                                 const ModelParams& params) {
  const int n = block.n();
  const int k = n + 1;
  if (P.rows() != k || P.cols() != k) {
    throw InvalidParams("decompose_I_II_III: dimension mismatch");
  }
  const double a = params.a;
  const double frac = static_cast<double>(n) / k;
  Decomposition d;

  double acc = 0.0;
  for (int l = 0; l < n; ++l) {
    for (int lp = 0; lp < n; ++lp) {
      acc += params.xi(block.U.u(l, lp)) -
             block.U.u(l, lp) * params.xi_prime(P(l, lp)) +
             (1.0 - a / n) * params.theta(P(l, lp));
    }
  }
  d.I = 0.5 * frac * acc;

  d.II = 0.5 * frac *
         (params.xi(1.0) - params.xi_prime(P(n, n)) +
          (1.0 - a) * params.theta(P(n, n)));

  double t1 = params.theta(P(n, n));
  double t2 = 0.0;
  for (int l = 0; l < n; ++l) {
    for (int lp = 0; lp < n; ++lp) t2 += params.theta(P(l, lp));
  }
  t2 /= static_cast<double>(n) * n;
  double t3 = 0.0, t4 = 0.0;
  for (int l = 0; l < n; ++l) {
    t3 += params.theta(P(l, n));
    t4 += params.xi(block.u_vec(l)) -
          block.u_vec(l) * params.xi_prime(P(l, n)) + params.theta(P(l, n));
  }
  d.III = 0.5 * a * frac * frac *
          (t1 + t2 - 2.0 / n * t3 + 2.0 * k / (n * a) * t4);

  d.first_line = Psi_first_term(block.W(), P, params);
  return d;
}

double holder_gap(const Eigen::VectorXd& u_vec, const CouplingVector& lambda,
                  const ModelParams& params, int order) {
  const int n = static_cast<int>(u_vec.size());
  if (lambda.n != n) throw InvalidParams("holder_gap: dimension mismatch");
  PConstruction pc = construct_P(u_vec, params);
  const double a = params.a;
  const int k = n + 1;

  CovarianceMatrix xp(xi_prime_entrywise(pc.P, params));
  CouplingObjective up(k, a / k, params.h,
                       Eigen::VectorXd::Zero(k * (k - 1) / 2), xp, order);
  double lhs = (static_cast<double>(n) / k) * up.eval(lambda.zero_extended(),
                                                      nullptr, nullptr);

  CovarianceMatrix xq(xi_prime_entrywise(pc.Q, params));
  CouplingObjective low(n, a / n, params.h,
                        Eigen::VectorXd::Zero(n * (n - 1) / 2), xq, order);
  double log_low = low.eval(lambda, nullptr, nullptr);  // (n/a) log E Phi_n^{a/n}
  double log_ch = std::log(2.0) +
                  log_expect_ch_pow(a, params.h, params.xi_prime(pc.q)) / a;
  double rhs = (static_cast<double>(n) / k) * (log_low + log_ch);
  return rhs - lhs;
}

Strictness strictness_check(const Eigen::VectorXd& u_vec,
                            const ModelParams& params, int target_index) {
  Strictness s;
  double lo = u_vec.cwiseAbs().minCoeff();
  double hi = u_vec.cwiseAbs().maxCoeff();
  if (hi - lo > 1e-12) {
    s.strict = true;
    s.reason = "moduli |u_l| are not all equal";
    return s;
  }
  if (params.h != 0.0 && u_vec(target_index) < 0.0) {
    s.strict = true;
    s.reason = "h != 0 and target u < 0";
    return s;
  }
  s.strict = false;
  s.reason = "all |u_l| equal and (h = 0 or target u >= 0)";
  return s;
}

GlueResult glue_coordinates(const OverlapMatrix& U) {
  const int n = U.n();
  std::vector<int> parent(n), rank_uf(n, 0), rel_sign(n, 1);
  std::iota(parent.begin(), parent.end(), 0);

  // find with path compression, tracking sign relative to the root
  std::function<int(int)> find = [&](int x) -> int {
    if (parent[x] == x) return x;
    int root = find(parent[x]);
    rel_sign[x] *= rel_sign[parent[x]];
    parent[x] = root;
    return root;
  };

  bool any = false;
  for (int l = 0; l < n; ++l) {
    for (int lp = l + 1; lp < n; ++lp) {
      double u = U.u(l, lp);
      if (std::abs(u) < 1.0 - 1e-9) continue;
      any = true;
      int want = u > 0 ? 1 : -1;
      int x = l, y = lp;
      int rx = find(x), ry = find(y);
      if (rx == ry) {
        if (rel_sign[x] * rel_sign[y] != want) {
          throw InconsistentGluing("glue_coordinates: contradictory signs");
        }
        continue;
      }
      if (rank_uf[rx] < rank_uf[ry]) {
        std::swap(rx, ry);
        std::swap(x, y);
      }
      parent[ry] = rx;
      rel_sign[ry] = want * rel_sign[x] * rel_sign[y];
      if (rank_uf[rx] == rank_uf[ry]) ++rank_uf[rx];
    }
  }
  if (!any) {
    throw InvalidParams("glue_coordinates: no |u| = 1 constraint present");
  }

  // flatten and enumerate classes in order of first appearance
  std::vector<int> root_of(n), class_of(n, -1);
  std::vector<int> reps;
  for (int l = 0; l < n; ++l) root_of[l] = find(l);
  for (int l = 0; l < n; ++l) {
    bool seen = false;
    for (int r : reps) {
      if (r == root_of[l]) seen = true;
    }
    if (!seen) reps.push_back(root_of[l]);
  }
  int m = static_cast<int>(reps.size());
  for (int l = 0; l < n; ++l) {
    for (int c = 0; c < m; ++c) {
      if (root_of[l] == reps[c]) class_of[l] = c;
    }
  }

  GlueResult out;
  out.group = class_of;
  out.sign.resize(n);
  for (int l = 0; l < n; ++l) out.sign[l] = rel_sign[l];
  out.field_weight.assign(m, 0.0);
  for (int l = 0; l < n; ++l) out.field_weight[class_of[l]] += rel_sign[l];

  Eigen::MatrixXd red = Eigen::MatrixXd::Identity(m, m);
  for (int c = 0; c < m; ++c) {
    for (int cp = c + 1; cp < m; ++cp) {
      // representative pair value, sign-corrected
      double v = U.u(reps[c], reps[cp]) * rel_sign[reps[c]] * rel_sign[reps[cp]];
      red(c, cp) = red(cp, c) = v;
    }
  }
  out.reduced = OverlapMatrix(red);
  return out;
}

BoundReport chain_verify(const Eigen::VectorXd& u_vec, int target_index,
                         const ModelParams& params,
                         const std::vector<CovarianceMatrix>& trial_Qs,
                         int order) {
  const int n = static_cast<int>(u_vec.size());
  if (target_index < 0 || target_index >= n) {
    throw InvalidParams("chain_verify: target_index out of range");
  }
  if (n > params.a || params.a > n + 1) {
    throw InvalidParams("chain_verify: requires n <= a <= n+1");
  }

  PConstruction pc = construct_P(u_vec, params);

  // Documented sweep choice for the U block: u_{l,l'} = u_l u_l', which keeps
  // W = [[U, u], [u^T, 1]] PSD.
  Eigen::MatrixXd ub = symmetric_outer(u_vec);
  ub.diagonal().setOnes();
  OverlapMatrix U(ub);
  ConstraintBlock block(U, u_vec);

  BoundReport report;
  report.n = n;
  report.q = pc.q;

  CovarianceMatrix Q(pc.Q);
  CouplingOpt lam = psi_inf_lambda(U, Q, params, order);
  report.psi_inf = lam.value;
  report.lambda_grad_norm = lam.grad_norm;

  report.rs_q = rs_value(pc.q, params);

  CovarianceMatrix P(pc.P);
  CouplingVector gamma_emb = lam.coupling.zero_extended();
  report.Psi_at_embedding = Psi_value(block, P, gamma_emb, params, order);
  CouplingOpt gam = Psi_inf_gamma(block, P, gamma_emb, params, order);
  report.Psi_inf = std::min(gam.value, report.Psi_at_embedding);

  report.holder_gap = holder_gap(u_vec, lam.coupling, params, order);
  Strictness st = strictness_check(u_vec, params, target_index);
  report.strict = st.strict;
  report.strict_reason = st.reason;

  double frac = static_cast<double>(n) / (n + 1);
  report.margin_embedding =
      frac * (report.psi_inf + report.rs_q) - report.Psi_at_embedding;
  report.margin_psi = n * report.rs_q - report.psi_inf;
  report.margin_Psi = n * report.rs_q - report.Psi_inf;

  for (const auto& tq : trial_Qs) {
    CouplingOpt t = psi_inf_lambda(U, tq, params, order);
    report.psi_at_trial_Qs.push_back(t.value);
  }

  report.chain_ok = report.margin_embedding >= -1e-8 &&
                    report.margin_Psi >= -1e-8 &&
                    report.holder_gap >= -1e-9 &&
                    (!report.strict || report.holder_gap > 0.0);
  return report;
}

BoundReport chain_verify(double u, int n, const ModelParams& params,
                         const std::vector<CovarianceMatrix>& trial_Qs,
                         int order) {
  return chain_verify(Eigen::VectorXd::Constant(n, u), 0, params, trial_Qs,
                      order);
}

}  // namespace pspin
