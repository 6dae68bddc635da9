#include <doctest.h>

#include <cmath>
#include <vector>

#include "pspin/logsumexp.hpp"
#include "pspin/oracle.hpp"

using namespace pspin;

namespace {

// Independent check: direct sum over all (2^N)^m replica tuples using the
// Gaussian moment formula, no histogram lumping.
double brute_force_log_moment(int N, int m, const ModelParams& params, double t,
                              double q) {
  const int masks = 1 << N;
  const double xq = params.xi_prime(q);
  std::vector<double> terms;
  std::vector<int> sigma(m);
  std::vector<double> logws;
  size_t total = 1;
  for (int l = 0; l < m; ++l) total *= masks;
  for (size_t tup = 0; tup < total; ++tup) {
    size_t rest = tup;
    for (int l = 0; l < m; ++l) {
      sigma[l] = static_cast<int>(rest % masks);
      rest /= masks;
    }
    double logw = N * (m / 2.0) * (t * params.xi(1.0) + (1.0 - t) * xq);
    int mag = 0;
    for (int l = 0; l < m; ++l) {
      mag += 2 * __builtin_popcount(sigma[l]) - N;
    }
    logw += params.h * mag;
    for (int l = 0; l < m; ++l) {
      for (int lp = l + 1; lp < m; ++lp) {
        int ov = N - 2 * __builtin_popcount(sigma[l] ^ sigma[lp]);
        logw += t * N * params.xi(static_cast<double>(ov) / N) +
                (1.0 - t) * xq * ov;
      }
    }
    logws.push_back(logw);
  }
  return log_sum_exp(logws);
}

double binom(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                  std::lgamma(n - k + 1.0));
}

}  // namespace

TEST_CASE("histogram_count basic values") {
  CHECK(histogram_count(1, 3) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(histogram_count(2, 2) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(histogram_count(2, 1) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("snap_overlap respects parity and tie-breaking") {
  CHECK(snap_overlap(0.5, 4) == 2);
  CHECK(snap_overlap(1.0, 6) == 6);
  CHECK(snap_overlap(-1.0, 6) == -6);
  CHECK(snap_overlap(0.25, 4) == 0);    // tie between 0 and 2 -> smaller |k|
  CHECK(std::abs(snap_overlap(0.0, 5)) == 1);
  CHECK(snap_overlap(0.0, 4) == 0);
  CHECK(snap_overlap(0.3, 5) == 1);
}

TEST_CASE("annealed moments match direct tuple enumeration") {
  ModelParams params(MixtureSpec(2, 0.6), 0.3, 2.0);
  for (int m = 1; m <= 3; ++m) {
    for (int N : {2, 3, 4}) {
      double direct = brute_force_log_moment(N, m, params, 0.7, 0.2);
      double lumped = annealed_moment_exact(N, m, params, 0.7, 0.2);
      CHECK(lumped == doctest::Approx(direct / (N * m)).epsilon(1e-11));
    }
  }
  // p = 3, pure endpoint t = 1
  ModelParams p3(MixtureSpec(3, 0.8), 0.1, 3.0);
  double direct = brute_force_log_moment(5, 2, p3, 1.0, 0.0);
  CHECK(annealed_moment_exact(5, 2, p3, 1.0, 0.0) ==
        doctest::Approx(direct / 10.0).epsilon(1e-11));
}

TEST_CASE("one-replica moment has a closed form") {
  // (1/N) log E Z = log 2 + log ch h + xi(1)/2
  for (int N : {3, 8, 20}) {
    ModelParams params(MixtureSpec(2, 0.7), 0.4, 1.0);
    double expected = std::log(2.0) + std::log(std::cosh(0.4)) + 0.49 / 2.0;
    CHECK(annealed_moment_exact(N, 1, params, 1.0, 0.0) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("vanishing coupling gives the free entropy of independent spins") {
  ModelParams params(MixtureSpec(2, 1e-8), 0.3, 2.0);
  double expected = std::log(2.0) + std::log(std::cosh(0.3));
  CHECK(annealed_moment_exact(10, 2, params, 1.0, 0.0) ==
        doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("constrained moments partition the unconstrained one") {
  ModelParams params(MixtureSpec(2, 0.5), 0.2, 2.0);
  const int N = 6, m = 2;
  LogAccumulator acc;
  for (int k = -N; k <= N; k += 2) {
    OverlapConstraint c{0, 1, static_cast<double>(k) / N};
    acc.add(constrained_moment_exact(N, m, {c}, params, 1.0, 0.0));
  }
  double total = annealed_moment_exact(N, m, params, 1.0, 0.0) * N * m;
  CHECK(acc.log_value() == doctest::Approx(total).epsilon(1e-11));

  // diagonal constraint R12 = 1 forces identical replicas
  OverlapConstraint diag{0, 1, 1.0};
  double glued = constrained_moment_exact(N, m, {diag}, params, 1.0, 0.0);
  // sum over single configurations with doubled Hamiltonian:
  // E exp(2 H(sigma)) summed = 2^N terms of weight e^{2 N xi(1)} e^{2 h mag}
  LogAccumulator direct;
  for (int mask = 0; mask < (1 << N); ++mask) {
    int mag = 2 * __builtin_popcount(mask) - N;
    direct.add(2.0 * N * params.xi(1.0) + 2.0 * params.h * mag);
  }
  CHECK(glued == doctest::Approx(direct.log_value()).epsilon(1e-11));
}

TEST_CASE("infeasible constraints are rejected") {
  ModelParams params(MixtureSpec(2, 0.5), 0.0, 2.0);
  // R12 = 1 and R13 = 1 force R23 = 1; demanding R23 = -1 cannot match
  std::vector<OverlapConstraint> cs = {
      {0, 1, 1.0}, {0, 2, 1.0}, {1, 2, -1.0}};
  CHECK_THROWS_AS(constrained_moment_exact(4, 3, cs, params, 1.0, 0.0),
                  InfeasibleConstraint);
}

TEST_CASE("tilted overlap distribution is a probability law") {
  ModelParams params(MixtureSpec(2, 0.6), 0.25, 2.0);
  auto dist = tilted_overlap_distribution(12, params, 0.8, 0.1);
  double total = 0.0;
  for (int k : dist.ks) total += dist.prob(k);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // without a field the law is symmetric in k
  ModelParams sym(MixtureSpec(2, 0.6), 0.0, 2.0);
  auto ds = tilted_overlap_distribution(10, sym, 1.0, 0.0);
  for (int k : ds.ks) {
    CHECK(ds.log_prob(k) == doctest::Approx(ds.log_prob(-k)).epsilon(1e-11));
  }
}

TEST_CASE("tilted law matches the constrained moment ratio at a = 2") {
  ModelParams params(MixtureSpec(2, 0.5), 0.2, 2.0);
  const int N = 8;
  auto dist = tilted_overlap_distribution(N, params, 1.0, 0.0);
  double den = annealed_moment_exact(N, 2, params, 1.0, 0.0) * N * 2;
  for (int k : {-4, 0, 2, 8}) {
    OverlapConstraint c{0, 1, static_cast<double>(k) / N};
    double num = constrained_moment_exact(N, 2, {c}, params, 1.0, 0.0);
    CHECK(dist.log_prob(k) == doctest::Approx(num - den).epsilon(1e-11));
  }
}

TEST_CASE("free spins give the binomial overlap law") {
  ModelParams params(MixtureSpec(2, 1e-8), 0.0, 2.0);
  const int N = 10;
  auto dist = tilted_overlap_distribution(N, params, 1.0, 0.0);
  for (int k : dist.ks) {
    double expected = binom(N, (N + k) / 2) / std::pow(2.0, N);
    CHECK(dist.prob(k) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("tilted delta expectation is a nonnegative mixture") {
  ModelParams params(MixtureSpec(3, 0.7), 0.2, 3.0);
  const int N = 9;
  double v = tilted_delta_expectation(N, 0.6, params, 0.15);
  CHECK(v >= 0.0);
  // recompute from the distribution directly
  auto dist = tilted_overlap_distribution(N, params, 0.6, 0.15);
  double acc = 0.0;
  for (int k : dist.ks) {
    acc += dist.prob(k) * params.delta(static_cast<double>(k) / N, 0.15);
  }
  CHECK(v == doctest::Approx(acc).epsilon(1e-12));
}

TEST_CASE("holder chain moments are ordered") {
  ModelParams params(MixtureSpec(2, 0.5), 0.2, 4.0);
  HolderChain c = holder_chain_check(8, params, 0.8, 0.1);
  CHECK(c.m1 >= c.m2 - 1e-12);
  CHECK(c.m2 >= c.m3 - 1e-12);
  CHECK(c.m3 >= c.m4 - 1e-12);
  CHECK(c.m4 >= 0.0);
  // m4 is the square of the plain tilted expectation
  double tde = tilted_delta_expectation(8, 0.8, params, 0.1);
  CHECK(c.m4 == doctest::Approx(tde * tde).epsilon(1e-9));

  CHECK_THROWS_AS(holder_chain_check(8, ModelParams(MixtureSpec(2, 0.5), 0.0, 3.0),
                                     1.0, 0.0),
                  InvalidParams);
  CHECK_THROWS_AS(holder_chain_check(17, params, 1.0, 0.0), BudgetExceeded);
}

TEST_CASE("rate function recovers the binomial rate at zero coupling") {
  ModelParams params(MixtureSpec(2, 1e-8), 0.0, 2.0);
  auto pts = rate_function({8, 12}, 0.5, params);
  for (const auto& pt : pts) {
    int c = (pt.N + pt.k) / 2;
    double expected = -(std::log(binom(pt.N, c)) - pt.N * std::log(2.0)) / pt.N;
    CHECK(pt.rate == doctest::Approx(expected).epsilon(1e-7));
    CHECK(pt.k == snap_overlap(0.5, pt.N));
  }
}

TEST_CASE("budgets and validation") {
  ModelParams params(MixtureSpec(2, 0.5), 0.0, 2.5);
  CHECK_THROWS_AS(tilted_overlap_distribution(10, params, 1.0, 0.0),
                  InvalidParams);  // non-integer a
  ModelParams a3(MixtureSpec(2, 0.5), 0.0, 3.0);
  CHECK_THROWS_AS(tilted_overlap_distribution(41, a3, 1.0, 0.0),
                  BudgetExceeded);
  ModelParams a2(MixtureSpec(2, 0.5), 0.0, 2.0);
  CHECK_THROWS_AS(enumerate_histograms(2, 5, a2, 1.0, 0.0,
                                       [](double, std::span<const int>) {}),
                  InvalidParams);
}
