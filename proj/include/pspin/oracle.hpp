#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pspin/model.hpp"

namespace pspin {

// Number of per-site pattern histograms, multichoose(2^m, N); saturates at
// the cap used for budget checks.
double histogram_count(int m, int N);

// Nearest feasible overlap count k (k = N mod 2) to u*N; ties resolved
// toward the smaller |k|.
int snap_overlap(double u, int N);

// Exact annealed moment along the Guerra path:
// (1/(Nm)) log E Z_t^m with per-site fields of variance xi'(q) at weight 1-t.
// t = 1 recovers E Z_N^m.  m <= 4 and multichoose(2^m, N) <= 1e9.
double annealed_moment_exact(int N, int m, const ModelParams& params, double t,
                             double q);

struct OverlapConstraint {
  int l = 0;
  int lp = 1;   // replica pair, 0-based, l < lp
  double u = 0.0;  // snapped to the nearest feasible k/N
};

// log E of the constrained m-replica product partition function; throws
// InfeasibleConstraint when no histogram matches.
double constrained_moment_exact(int N, int m,
                                const std::vector<OverlapConstraint>& constraints,
                                const ModelParams& params, double t, double q);

struct TiltedOverlapDistribution {
  int N = 0;
  int a = 0;
  double t = 1.0;
  double q = 0.0;
  std::vector<int> ks;             // feasible overlap counts, ascending
  std::vector<double> log_probs;   // log E' <I(R12 = k/N)>, -inf if massless

  double prob(int k) const;
  double log_prob(int k) const;
};

// probs(k) = E Z^{a-2} Z_2(k/N) / E Z^a for integer a in {2,3,4}; histogram
// budgets a=2: N <= 400, a=3: N <= 40, a=4: N <= 16.
TiltedOverlapDistribution tilted_overlap_distribution(int N,
                                                      const ModelParams& params,
                                                      double t, double q);

// E'<Delta(R12, q0)> at interpolation time t (integer a).
double tilted_delta_expectation(int N, double t, const ModelParams& params,
                                double q0);

// The four moments of the Theorem-1 Hoelder chain at a = 4:
//   m1 = E'<Delta(R12)^2>        m2 = E'<Delta(R12) Delta(R13)>
//   m3 = E'<Delta(R12) Delta(R34)>   m4 = (E'<Delta(R12)>)^2
struct HolderChain {
  double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

HolderChain holder_chain_check(int N, const ModelParams& params, double t,
                               double q0);

struct RatePoint {
  int N = 0;
  int k = 0;
  double log_prob = 0.0;
  double rate = 0.0;  // -(1/N) log prob
};

std::vector<RatePoint> rate_function(const std::vector<int>& N_list, double u,
                                     const ModelParams& params, double t = 1.0,
                                     double q = 0.0);

// Enumeration core, exposed for tests: visits every m-replica pattern
// histogram of N sites with the exact log-weight of E exp(sum_l H_t(sigma^l))
// including the multinomial coefficient and field term.  `overlaps` holds
// the integer overlap counts N*R_{l,l'} in (0,1),(0,2),...,(m-1,m) order.
using HistogramVisitor =
    std::function<void(double log_weight, std::span<const int> overlaps)>;

void enumerate_histograms(int N, int m, const ModelParams& params, double t,
                          double q, const HistogramVisitor& visit);

}  // namespace pspin
