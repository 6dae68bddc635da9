#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pspin/model.hpp"

namespace pspin {

// One disorder draw: all 2^N Hamiltonian values H_N(sigma), exact.
struct DisorderSample {
  int N = 0;
  std::vector<double> energies;  // indexed by configuration bitmask

  // log Z = log sum_sigma exp(H(sigma) + h * sum_i sigma_i)
  double log_z(double h) const;
};

// Couplings are i.i.d. standard Gaussians over all N^p ordered index tuples,
// drawn from a counter-based stream keyed by (seed, sample_index).  Energies
// are filled by Gray-code single-spin flips (cost 2^N * N^{p-1}) for p <= 3;
// p >= 4 falls back to direct evaluation with N <= 12.
DisorderSample sample_energies(int N, const ModelParams& params, uint64_t seed,
                               uint64_t sample_index = 0);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  uint64_t n_samples = 0;
  std::string estimator_kind;  // "plain" or "ratio"
  double ess = 0.0;            // effective sample size of the weights
  bool ci_valid = true;        // false when ess < 30
  bool bias_warning = false;
};

// (1/(Na)) log E Z^a by a plain mean of Z^a over disorder samples; jackknife
// standard error for the log.
McEstimate moment_mc(int N, double a, uint64_t n_samples, uint64_t seed,
                     const ModelParams& params, int n_threads = 1);

// log of the pair partition function restricted to overlap count k:
// log sum over {sigma1, sigma2 : sum sigma1 sigma2 = k}.  Returns -inf for
// infeasible parity.  N <= 13.
double constrained_pair_sum(const DisorderSample& sample, int k, double h);

// Ratio estimator E[Z^{a-2} Z_2(u_N)] / E[Z^a] with common disorder samples
// in numerator and denominator; delta-method standard error.
McEstimate tilted_overlap_mc(int N, double a, double u, uint64_t n_samples,
                             uint64_t seed, const ModelParams& params,
                             int n_threads = 1);

}  // namespace pspin
