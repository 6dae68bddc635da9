#include "pspin/oracle.hpp"

#include <cmath>

#include "pspin/logsumexp.hpp"

namespace pspin {

namespace {

constexpr double kMaxHistograms = 1e9;

int pair_count(int m) { return m * (m - 1) / 2; }

int require_integer_a(const ModelParams& params) {
  double a = params.a;
  int ia = static_cast<int>(std::lround(a));
  if (std::abs(a - ia) > 0.0) {
    throw InvalidParams("exact oracle requires integer a");
  }
  return ia;
}

void check_tilt_budget(int a, int N) {
  int cap;
  switch (a) {
    case 2: cap = 400; break;
    case 3: cap = 40; break;
    case 4: cap = 16; break;
    default:
      throw InvalidParams("tilted oracle requires a in {2,3,4}");
  }
  if (N > cap) throw BudgetExceeded("tilted oracle: N exceeds budget for this a");
}

struct Enumerator {
  int N, m, K, npairs;
  const HistogramVisitor* visit;
  std::vector<int> pair_prod;  // [j * npairs + e]
  std::vector<int> colsum;     // per pattern
  std::vector<double> lg;      // lgamma(c + 1)
  std::vector<double> pair_term;  // indexed by overlap count + N
  double base = 0.0;           // log N! + diagonal covariance term
  double h = 0.0;

  std::vector<int> ov;
  int mag = 0;
  double coef = 0.0;

  void leaf() {
    double logw = base + coef + h * mag;
    for (int e = 0; e < npairs; ++e) logw += pair_term[ov[e] + N];
    (*visit)(logw, std::span<const int>(ov));
  }

  void rec(int j, int rem) {
    if (j == K - 1) {
      apply(j, rem);
      leaf();
      unapply(j, rem);
      return;
    }
    for (int c = 0; c <= rem; ++c) {
      apply(j, c);
      rec(j + 1, rem - c);
      unapply(j, c);
    }
  }

  void apply(int j, int c) {
    coef -= lg[c];
    mag += c * colsum[j];
    const int* pp = &pair_prod[static_cast<size_t>(j) * npairs];
    for (int e = 0; e < npairs; ++e) ov[e] += c * pp[e];
  }

  void unapply(int j, int c) {
    coef += lg[c];
    mag -= c * colsum[j];
    const int* pp = &pair_prod[static_cast<size_t>(j) * npairs];
    for (int e = 0; e < npairs; ++e) ov[e] -= c * pp[e];
  }
};

}  // namespace

double histogram_count(int m, int N) {
  int K = 1 << m;
  return std::exp(std::lgamma(N + K) - std::lgamma(N + 1.0) - std::lgamma(K));
}

int snap_overlap(double u, int N) {
  double target = u * N;
  int best = -N;
  double best_dist = std::abs(target - best);
  for (int k = -N + 2; k <= N; k += 2) {
    double dist = std::abs(target - k);
    if (dist < best_dist - 1e-12 ||
        (std::abs(dist - best_dist) <= 1e-12 && std::abs(k) < std::abs(best))) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

void enumerate_histograms(int N, int m, const ModelParams& params, double t,
                          double q, const HistogramVisitor& visit) {
  if (m < 1 || m > 4) throw InvalidParams("enumerate_histograms: m must be in [1,4]");
  if (N < 1) throw InvalidParams("enumerate_histograms: N must be >= 1");
  if (t < 0.0 || t > 1.0) throw InvalidParams("enumerate_histograms: t in [0,1]");
  if (histogram_count(m, N) > kMaxHistograms) {
    throw BudgetExceeded("enumerate_histograms: histogram budget exceeded");
  }

  Enumerator en;
  en.N = N;
  en.m = m;
  en.K = 1 << m;
  en.npairs = pair_count(m);
  en.visit = &visit;
  en.h = params.h;

  en.pair_prod.resize(static_cast<size_t>(en.K) * en.npairs);
  en.colsum.resize(en.K);
  for (int j = 0; j < en.K; ++j) {
    int cs = 0;
    for (int l = 0; l < m; ++l) cs += (j >> l) & 1 ? 1 : -1;
    en.colsum[j] = cs;
    int e = 0;
    for (int l = 0; l < m; ++l) {
      for (int lp = l + 1; lp < m; ++lp, ++e) {
        int sl = (j >> l) & 1 ? 1 : -1;
        int slp = (j >> lp) & 1 ? 1 : -1;
        en.pair_prod[static_cast<size_t>(j) * en.npairs + e] = sl * slp;
      }
    }
  }

  en.lg.resize(N + 1);
  for (int c = 0; c <= N; ++c) en.lg[c] = std::lgamma(c + 1.0);

  double xq = params.xi_prime(q);
  en.pair_term.resize(2 * N + 1);
  for (int k = -N; k <= N; ++k) {
    en.pair_term[k + N] =
        t * N * params.xi(static_cast<double>(k) / N) + (1.0 - t) * xq * k;
  }
  en.base = std::lgamma(N + 1.0) +
            N * (m / 2.0) * (t * params.xi(1.0) + (1.0 - t) * xq);

  en.ov.assign(en.npairs, 0);
  en.rec(0, N);
}

double annealed_moment_exact(int N, int m, const ModelParams& params, double t,
                             double q) {
  LogAccumulator acc;
  enumerate_histograms(N, m, params, t, q,
                       [&](double logw, std::span<const int>) { acc.add(logw); });
  return acc.log_value() / (static_cast<double>(N) * m);
}

double constrained_moment_exact(int N, int m,
                                const std::vector<OverlapConstraint>& constraints,
                                const ModelParams& params, double t, double q) {
  std::vector<std::pair<int, int>> snapped;  // pair index -> target count
  for (const auto& c : constraints) {
    if (c.l < 0 || c.lp >= m || c.l >= c.lp) {
      throw InvalidParams("constrained_moment_exact: bad replica pair");
    }
    int e = c.l * m - c.l * (c.l + 1) / 2 + (c.lp - c.l - 1);
    snapped.emplace_back(e, snap_overlap(c.u, N));
  }
  LogAccumulator acc;
  bool matched = false;
  enumerate_histograms(N, m, params, t, q,
                       [&](double logw, std::span<const int> ov) {
                         for (const auto& [e, k] : snapped) {
                           if (ov[e] != k) return;
                         }
                         matched = true;
                         acc.add(logw);
                       });
  if (!matched) {
    throw InfeasibleConstraint("constrained_moment_exact: no histogram matches");
  }
  return acc.log_value();
}

double TiltedOverlapDistribution::log_prob(int k) const {
  for (size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == k) return log_probs[i];
  }
  return kNegInf;
}

double TiltedOverlapDistribution::prob(int k) const {
  return std::exp(log_prob(k));
}

TiltedOverlapDistribution tilted_overlap_distribution(int N,
                                                      const ModelParams& params,
                                                      double t, double q) {
  int a = require_integer_a(params);
  check_tilt_budget(a, N);

  std::vector<LogAccumulator> bins(2 * N + 1);
  LogAccumulator total;
  enumerate_histograms(N, a, params, t, q,
                       [&](double logw, std::span<const int> ov) {
                         bins[ov[0] + N].add(logw);
                         total.add(logw);
                       });

  TiltedOverlapDistribution dist;
  dist.N = N;
  dist.a = a;
  dist.t = t;
  dist.q = q;
  double den = total.log_value();
  for (int k = -N; k <= N; k += 2) {
    dist.ks.push_back(k);
    dist.log_probs.push_back(bins[k + N].log_value() - den);
  }
  return dist;
}

double tilted_delta_expectation(int N, double t, const ModelParams& params,
                                double q0) {
  TiltedOverlapDistribution dist = tilted_overlap_distribution(N, params, t, q0);
  double acc = 0.0;
  for (size_t i = 0; i < dist.ks.size(); ++i) {
    double lp = dist.log_probs[i];
    if (lp == kNegInf) continue;
    acc += std::exp(lp) *
           params.delta(static_cast<double>(dist.ks[i]) / N, q0);
  }
  return acc;
}

HolderChain holder_chain_check(int N, const ModelParams& params, double t,
                               double q0) {
  int a = require_integer_a(params);
  if (a != 4) throw InvalidParams("holder_chain_check: requires a = 4");
  if (N > 16) throw BudgetExceeded("holder_chain_check: N <= 16 required");

  // pair order for m = 4: (01)(02)(03)(12)(13)(23) -> R12 = ov[0],
  // R13 = ov[1], R34 = ov[5]
  LogAccumulator den, n1, n2, n3, n4;
  enumerate_histograms(
      N, 4, params, t, q0, [&](double logw, std::span<const int> ov) {
        den.add(logw);
        double d12 = params.delta(static_cast<double>(ov[0]) / N, q0);
        double d13 = params.delta(static_cast<double>(ov[1]) / N, q0);
        double d34 = params.delta(static_cast<double>(ov[5]) / N, q0);
        if (d12 > 0.0) {
          double l12 = std::log(d12);
          n1.add(logw + 2.0 * l12);
          n4.add(logw + l12);
          if (d13 > 0.0) n2.add(logw + l12 + std::log(d13));
          if (d34 > 0.0) n3.add(logw + l12 + std::log(d34));
        }
      });

  double d = den.log_value();
  HolderChain chain;
  chain.m1 = std::exp(n1.log_value() - d);
  chain.m2 = std::exp(n2.log_value() - d);
  chain.m3 = std::exp(n3.log_value() - d);
  chain.m4 = std::exp(2.0 * (n4.log_value() - d));
  return chain;
}

std::vector<RatePoint> rate_function(const std::vector<int>& N_list, double u,
                                     const ModelParams& params, double t,
                                     double q) {
  std::vector<RatePoint> out;
  for (int N : N_list) {
    TiltedOverlapDistribution dist = tilted_overlap_distribution(N, params, t, q);
    RatePoint pt;
    pt.N = N;
    pt.k = snap_overlap(u, N);
    pt.log_prob = dist.log_prob(pt.k);
    pt.rate = -pt.log_prob / N;
    out.push_back(pt);
  }
  return out;
}

}  // namespace pspin
