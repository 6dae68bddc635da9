#include "pspin/mc.hpp"

#include <bit>
#include <cmath>
#include <future>

#include "pspin/logsumexp.hpp"
#include "pspin/oracle.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

int magnetization(uint32_t mask, int N) {
  return 2 * std::popcount(mask) - N;
}

// Full O(N^p) evaluation of H(sigma)/scale for one configuration.
double raw_energy(const std::vector<double>& g, uint32_t mask, int N, int p) {
  double acc = 0.0;
  size_t total = g.size();
  for (size_t t = 0; t < total; ++t) {
    int prod = 1;
    size_t rem = t;
    for (int d = 0; d < p; ++d) {
      int i = static_cast<int>(rem % N);
      rem /= N;
      prod *= (mask >> i) & 1 ? 1 : -1;
    }
    acc += g[t] * prod;
  }
  return acc;
}

// Change of the raw (unscaled) energy when spin j flips, evaluated at the
// configuration before the flip.  Tuples containing j an odd number of times
// change sign.
double flip_delta_raw(const std::vector<double>& g, uint32_t mask, int j,
                      int N, int p) {
  double sj = (mask >> j) & 1 ? 1.0 : -1.0;
  double inner = 0.0;
  if (p == 2) {
    for (int i = 0; i < N; ++i) {
      if (i == j) continue;
      double si = (mask >> i) & 1 ? 1.0 : -1.0;
      inner += (g[static_cast<size_t>(j) * N + i] +
                g[static_cast<size_t>(i) * N + j]) * si;
    }
  } else {  // p == 3
    size_t NN = static_cast<size_t>(N) * N;
    for (int i = 0; i < N; ++i) {
      if (i == j) continue;
      double si = (mask >> i) & 1 ? 1.0 : -1.0;
      for (int k = 0; k < N; ++k) {
        if (k == j) continue;
        double sk = (mask >> k) & 1 ? 1.0 : -1.0;
        inner += (g[static_cast<size_t>(j) * NN + static_cast<size_t>(i) * N + k] +
                  g[static_cast<size_t>(i) * NN + static_cast<size_t>(j) * N + k] +
                  g[static_cast<size_t>(i) * NN + static_cast<size_t>(k) * N + j]) *
                 si * sk;
      }
    }
    inner += g[static_cast<size_t>(j) * NN + static_cast<size_t>(j) * N + j];
  }
  return -2.0 * sj * inner;
}

template <typename Fn>
void run_indexed(uint64_t count, int n_threads, Fn&& fn) {
  if (n_threads <= 1 || count < 2) {
    for (uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  uint64_t chunk = (count + n_threads - 1) / n_threads;
  std::vector<std::future<void>> futures;
  for (int t = 0; t < n_threads; ++t) {
    uint64_t lo = t * chunk;
    uint64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    futures.push_back(std::async(std::launch::async, [lo, hi, &fn] {
      for (uint64_t i = lo; i < hi; ++i) fn(i);
    }));
  }
  for (auto& f : futures) f.get();
}

}  // namespace

double DisorderSample::log_z(double h) const {
  LogAccumulator acc;
  uint32_t total = 1u << N;
  for (uint32_t mask = 0; mask < total; ++mask) {
    acc.add(energies[mask] + h * magnetization(mask, N));
  }
  return acc.log_value();
}

DisorderSample sample_energies(int N, const ModelParams& params, uint64_t seed,
                               uint64_t sample_index) {
  const int p = params.mixture.p;
  if (p <= 3) {
    if (N < 1 || N > 20) throw BudgetExceeded("sample_energies: N <= 20 for p <= 3");
  } else {
    if (N < 1 || N > 12) throw BudgetExceeded("sample_energies: N <= 12 for p >= 4");
  }

  size_t tensor_size = 1;
  for (int d = 0; d < p; ++d) tensor_size *= N;
  std::vector<double> g(tensor_size);
  CounterRng rng(seed, sample_index);
  for (size_t t = 0; t < tensor_size; ++t) g[t] = rng.gaussian(t);

  double scale = params.mixture.beta /
                 std::pow(static_cast<double>(N), (p - 1) / 2.0);

  DisorderSample out;
  out.N = N;
  out.energies.resize(1u << N);

  if (p > 3) {
    uint32_t total = 1u << N;
    for (uint32_t mask = 0; mask < total; ++mask) {
      out.energies[mask] = scale * raw_energy(g, mask, N, p);
    }
    return out;
  }

  // Gray-code walk: configuration at step s is gray(s) = s ^ (s >> 1).
  uint32_t total = 1u << N;
  uint32_t cfg = 0;
  double raw = raw_energy(g, cfg, N, p);
  out.energies[cfg] = scale * raw;
  for (uint32_t s = 1; s < total; ++s) {
    int j = std::countr_zero(s);
    raw += flip_delta_raw(g, cfg, j, N, p);
    cfg ^= 1u << j;
    out.energies[cfg] = scale * raw;
  }
  return out;
}

McEstimate moment_mc(int N, double a, uint64_t n_samples, uint64_t seed,
                     const ModelParams& params, int n_threads) {
  if (a < 1.0) throw InvalidParams("moment_mc: a must be >= 1");
  if (n_samples < 2) throw InvalidParams("moment_mc: need at least 2 samples");

  std::vector<double> log_za(n_samples);  // a * log Z per sample
  run_indexed(n_samples, n_threads, [&](uint64_t s) {
    DisorderSample sample = sample_energies(N, params, seed, s);
    log_za[s] = a * sample.log_z(params.h);
  });

  // shifted mean of Z^a and delete-one jackknife for the log
  double shift = kNegInf;
  for (double x : log_za) shift = std::max(shift, x);
  const double S = static_cast<double>(n_samples);
  std::vector<double> x(n_samples);
  for (uint64_t s = 0; s < n_samples; ++s) x[s] = std::exp(log_za[s] - shift);
  double total = pairwise_sum(x);
  double scale = 1.0 / (N * a);

  McEstimate est;
  est.estimator_kind = "plain";
  est.n_samples = n_samples;
  est.mean = scale * (shift + std::log(total / S));

  double sum_sq = 0.0;
  for (double v : x) sum_sq += v * v;
  est.ess = total * total / sum_sq;
  est.ci_valid = est.ess >= 30.0;

  double theta_bar = 0.0;
  std::vector<double> theta(n_samples);
  for (uint64_t s = 0; s < n_samples; ++s) {
    theta[s] = scale * (shift + std::log((total - x[s]) / (S - 1.0)));
    theta_bar += theta[s];
  }
  theta_bar /= S;
  double var = 0.0;
  for (double th : theta) var += (th - theta_bar) * (th - theta_bar);
  est.stderr_ = std::sqrt((S - 1.0) / S * var);

  double mean_x = total / S;
  double var_x = 0.0;
  for (double v : x) var_x += (v - mean_x) * (v - mean_x);
  var_x /= (S - 1.0);
  est.bias_warning = std::sqrt(var_x / S) > 0.1 * mean_x;
  return est;
}

double constrained_pair_sum(const DisorderSample& sample, int k, double h) {
  const int N = sample.N;
  if (N > 13) throw BudgetExceeded("constrained_pair_sum: N <= 13 required");
  if ((N - k) % 2 != 0 || k < -N || k > N) return kNegInf;
  int flips = (N - k) / 2;  // Hamming distance between the two configurations

  uint32_t total = 1u << N;
  std::vector<double> e(total);
  double emax = kNegInf;
  for (uint32_t mask = 0; mask < total; ++mask) {
    e[mask] = sample.energies[mask] + h * magnetization(mask, N);
    emax = std::max(emax, e[mask]);
  }
  double shift = 2.0 * emax;
  double acc = 0.0;
  for (uint32_t d = 0; d < total; ++d) {
    if (std::popcount(d) != flips) continue;
    for (uint32_t mask = 0; mask < total; ++mask) {
      acc += std::exp(e[mask] + e[mask ^ d] - shift);
    }
  }
  return acc > 0.0 ? shift + std::log(acc) : kNegInf;
}

McEstimate tilted_overlap_mc(int N, double a, double u, uint64_t n_samples,
                             uint64_t seed, const ModelParams& params,
                             int n_threads) {
  if (a < 1.0) throw InvalidParams("tilted_overlap_mc: a must be >= 1");
  if (N > 13) throw BudgetExceeded("tilted_overlap_mc: N <= 13 required");
  if (n_samples < 2) throw InvalidParams("tilted_overlap_mc: need >= 2 samples");
  int k = snap_overlap(u, N);

  std::vector<double> log_num(n_samples), log_den(n_samples);
  run_indexed(n_samples, n_threads, [&](uint64_t s) {
    DisorderSample sample = sample_energies(N, params, seed, s);
    double lz = sample.log_z(params.h);
    log_den[s] = a * lz;
    double lz2 = constrained_pair_sum(sample, k, params.h);
    log_num[s] = (a - 2.0) * lz + lz2;
  });

  double shift_n = kNegInf, shift_d = kNegInf;
  for (double v : log_num) shift_n = std::max(shift_n, v);
  for (double v : log_den) shift_d = std::max(shift_d, v);

  const double S = static_cast<double>(n_samples);
  std::vector<double> xn(n_samples), xd(n_samples);
  for (uint64_t s = 0; s < n_samples; ++s) {
    xn[s] = std::isfinite(shift_n) ? std::exp(log_num[s] - shift_n) : 0.0;
    xd[s] = std::exp(log_den[s] - shift_d);
  }
  double tn = pairwise_sum(xn), td = pairwise_sum(xd);

  McEstimate est;
  est.estimator_kind = "ratio";
  est.n_samples = n_samples;
  est.mean = std::isfinite(shift_n) && tn > 0.0
                 ? std::exp(shift_n - shift_d + std::log(tn) - std::log(td))
                 : 0.0;

  // delta-method standard error of the ratio of means
  double nbar = tn / S, dbar = td / S;
  double var_n = 0.0, var_d = 0.0, cov = 0.0;
  for (uint64_t s = 0; s < n_samples; ++s) {
    var_n += (xn[s] - nbar) * (xn[s] - nbar);
    var_d += (xd[s] - dbar) * (xd[s] - dbar);
    cov += (xn[s] - nbar) * (xd[s] - dbar);
  }
  var_n /= (S - 1.0);
  var_d /= (S - 1.0);
  cov /= (S - 1.0);
  double r = nbar / dbar;
  double var_r = (var_n - 2.0 * r * cov + r * r * var_d) / (dbar * dbar * S);
  est.stderr_ = std::exp(shift_n - shift_d) * std::sqrt(std::max(var_r, 0.0));

  double sum_sq = 0.0;
  for (double v : xd) sum_sq += v * v;
  est.ess = td * td / sum_sq;
  est.ci_valid = est.ess >= 30.0;
  est.bias_warning = !est.ci_valid;
  return est;
}

}  // namespace pspin
