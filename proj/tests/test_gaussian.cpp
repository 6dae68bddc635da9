#include <doctest.h>

#include <cmath>

#include "pspin/gaussian.hpp"
#include "pspin/rng.hpp"

using namespace pspin;

TEST_CASE("hermite rule basics") {
  auto r1 = hermite_rule(1);
  CHECK(r1.nodes[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  auto r32 = hermite_rule(32);
  double w = 0.0, m2 = 0.0;
  for (int i = 0; i < 32; ++i) {
    w += r32.weights[i];
    m2 += r32.weights[i] * r32.nodes[i] * r32.nodes[i];
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));

  auto r64 = hermite_rule(64);
  double m4 = 0.0;
  for (int i = 0; i < 64; ++i) {
    m4 += r64.weights[i] * std::pow(r64.nodes[i], 4);
  }
  CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(hermite_rule(0), InvalidParams);
  CHECK_THROWS_AS(hermite_rule(513), InvalidParams);
}

TEST_CASE("hermite rule integrates high monomials") {
  // E x^{2k} = (2k-1)!!
  auto r = hermite_rule(24);
  double expected = 1.0;
  for (int k = 1; k <= 10; ++k) {
    expected *= (2 * k - 1);
    double acc = 0.0;
    for (int i = 0; i < r.order; ++i) {
      acc += r.weights[i] * std::pow(r.nodes[i], 2 * k);
    }
    CHECK(acc == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("psd_factor reconstructs and detects rank") {
  CovarianceMatrix id(Eigen::MatrixXd::Identity(3, 3));
  auto f = psd_factor(id);
  CHECK(f.rank == 3);
  CHECK(((f.factor * f.factor.transpose()) - id.entries).cwiseAbs().maxCoeff() <=
        1e-10);

  Eigen::VectorXd u(2);
  u << 0.6, -0.6;
  CovarianceMatrix outer(Eigen::MatrixXd(u * u.transpose()));
  auto f1 = psd_factor(outer);
  CHECK(f1.rank == 1);

  // random Wishart
  CounterRng rng(1, 2);
  Eigen::MatrixXd g(4, 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) g(i, j) = rng.gaussian(i * 4 + j);
  }
  Eigen::MatrixXd wis = g * g.transpose();
  CovarianceMatrix c(wis);
  auto fw = psd_factor(c);
  CHECK(((fw.factor * fw.factor.transpose()) - wis).cwiseAbs().maxCoeff() <=
        1e-10);

  Eigen::MatrixXd neg = Eigen::MatrixXd::Identity(2, 2);
  neg(1, 1) = -1.0;
  CHECK_THROWS_AS(psd_factor(CovarianceMatrix(neg)), NotPsdError);
}

TEST_CASE("expect_1d closed forms") {
  auto rule = hermite_rule(64);
  double h = 0.4;
  // variance 0 evaluates at the origin
  CHECK(expect_1d([&](double z) { return std::pow(std::cosh(z + h), 2.5); },
                  0.0, rule) ==
        doctest::Approx(std::pow(std::cosh(h), 2.5)).epsilon(1e-15));
  // E ch^2(z+h) = (1 + e^{2 s^2} ch(2h)) / 2
  for (double s2 : {0.3, 1.0, 2.0}) {
    double expected = (1.0 + std::exp(2.0 * s2) * std::cosh(2.0 * h)) / 2.0;
    double got = expect_1d(
        [&](double z) { return std::cosh(z + h) * std::cosh(z + h); }, s2,
        rule);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
  // odd integrand
  CHECK(std::abs(expect_1d([](double z) { return z; }, 1.3, rule)) <= 1e-14);
}

TEST_CASE("log_expect_ch_pow matches binomial closed forms") {
  // E ch^a(z+h) = 2^-a sum_j C(a,j) exp((a-2j) h + (a-2j)^2 var / 2)
  auto closed = [](int a, double h, double var) {
    double s = 0.0;
    for (int j = 0; j <= a; ++j) {
      double c = std::exp(std::lgamma(a + 1.0) - std::lgamma(j + 1.0) -
                          std::lgamma(a - j + 1.0));
      s += c * std::exp((a - 2 * j) * h + (a - 2 * j) * (a - 2 * j) * var / 2);
    }
    return std::log(s) - a * std::log(2.0);
  };
  for (int a : {1, 2, 4, 6}) {
    for (double h : {0.0, -1.0, 0.3}) {
      for (double var : {0.0625, 0.5, 2.0, 6.75}) {
        double got = log_expect_ch_pow(a, h, var);
        CHECK(got == doctest::Approx(closed(a, h, var)).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("log_expect_ch_pow is order-stable for fractional powers") {
  for (double a : {1.5, 2.5, 3.7}) {
    for (double var : {0.5, 2.0, 6.75}) {
      double adaptive = log_expect_ch_pow(a, 0.2, var);
      double v512 = log_expect_1d(
          [&](double z) { return a * log_cosh(z + 0.2); }, var,
          hermite_rule(512));
      CHECK(adaptive == doctest::Approx(v512).epsilon(1e-10));
    }
  }
}

TEST_CASE("expect_nd consistency and factorization") {
  auto rule = hermite_rule(64);
  double h = 0.3, s2 = 0.8;
  // 1-D consistency
  Eigen::MatrixXd c11(1, 1);
  c11 << s2;
  double nd = expect_nd(
      [&](const Eigen::VectorXd& z) { return std::cosh(z(0) + h); },
      CovarianceMatrix(c11), rule);
  double od = expect_1d([&](double z) { return std::cosh(z + h); }, s2, rule);
  CHECK(nd == doctest::Approx(od).epsilon(1e-13));

  // constant function integrates to one
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(3, 3);
  diag.diagonal() << 0.5, 1.0, 2.0;
  CHECK(expect_nd([](const Eigen::VectorXd&) { return 1.0; },
                  CovarianceMatrix(diag), rule) ==
        doctest::Approx(1.0).epsilon(1e-13));

  // diagonal covariance factorizes
  double prod = 1.0;
  for (int i = 0; i < 3; ++i) {
    prod *= expect_1d([&](double z) { return std::cosh(z + 0.1 * (i + 1)); },
                      diag(i, i), rule);
  }
  double joint = expect_nd(
      [&](const Eigen::VectorXd& z) {
        double f = 1.0;
        for (int i = 0; i < 3; ++i) f *= std::cosh(z(i) + 0.1 * (i + 1));
        return f;
      },
      CovarianceMatrix(diag), rule);
  CHECK(joint == doctest::Approx(prod).epsilon(1e-10));

  // rank-1 covariance collapses to a 1-D rule over z with z_l = a_l z
  Eigen::VectorXd al(3);
  al << 0.9, -0.4, 0.2;
  CovarianceMatrix rank1(Eigen::MatrixXd(al * al.transpose()));
  double joint1 = expect_nd(
      [&](const Eigen::VectorXd& z) {
        return std::cosh(z(0)) * std::cosh(z(1) + z(2));
      },
      rank1, rule);
  double collapsed = expect_1d(
      [&](double z) {
        return std::cosh(al(0) * z) * std::cosh(al(1) * z + al(2) * z);
      },
      1.0, rule);
  CHECK(joint1 == doctest::Approx(collapsed).epsilon(1e-12));
}

TEST_CASE("monte carlo fallback agrees with quadrature") {
  auto rule = hermite_rule(64);
  // 5x5 full-rank covariance forces the sampling path
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(5, 5) * 0.4;
  NdExpectOptions opts;
  opts.mc_samples = 1'000'000;
  opts.seed = 7;
  double mc = expect_nd(
      [](const Eigen::VectorXd& z) { return std::cosh(z.sum() * 0.3); },
      CovarianceMatrix(c), rule, opts);
  // independent closed form: E ch(0.3 * S), S ~ N(0, 2.0) => e^{0.09 * 2 / 2}
  double truth = std::exp(0.5 * 0.09 * 2.0);
  // 4 standard errors of a bounded-variance estimator at 1e6 samples
  CHECK(std::abs(mc - truth) < 4.0 * 1e-3);
}
