#include <doctest.h>

#include <cmath>

#include "pspin/rs.hpp"

using namespace pspin;

TEST_CASE("rs_value at q = 0") {
  for (int p : {2, 3, 4}) {
    ModelParams params(MixtureSpec(p, 0.7), 0.4, 2.3);
    double expected = std::log(2.0) + 0.7 * 0.7 / 2.0 +
                      std::log(std::cosh(0.4));
    CHECK(rs_value(0.0, params) == doctest::Approx(expected).epsilon(1e-13));
  }
  ModelParams simple(MixtureSpec(2, 1.0), 0.0, 2.0);
  CHECK(rs_value(0.0, simple) ==
        doctest::Approx(std::log(2.0) + 0.5).epsilon(1e-13));
}

TEST_CASE("rs_maximize finds q0 = 0 at high temperature") {
  ModelParams params(MixtureSpec(2, 0.3), 0.0, 2.0);
  RsReport rep = rs_maximize(params, 501);
  CHECK(rep.q0 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rep.q0 >= 0.0);

  // near-zero coupling: the value collapses to entropy + field (the
  // functional is flat to ~1e-12, so q0 itself is not meaningful here)
  ModelParams weak(MixtureSpec(2, 1e-6), 0.5, 2.0);
  RsReport wr = rs_maximize(weak, 301);
  CHECK(wr.value ==
        doctest::Approx(std::log(2.0) + std::log(std::cosh(0.5)))
            .epsilon(1e-9));
}

TEST_CASE("critical points: q = 0 behavior in h") {
  ModelParams h0(MixtureSpec(3, 0.6), 0.0, 2.0);
  auto roots0 = critical_points(h0);
  REQUIRE(!roots0.empty());
  CHECK(roots0.front().q == doctest::Approx(0.0).epsilon(1e-12));

  ModelParams h1(MixtureSpec(2, 0.3), 0.1, 2.0);
  auto roots1 = critical_points(h1);
  REQUIRE(!roots1.empty());
  for (const auto& r : roots1) CHECK(r.q > 1e-6);
  for (const auto& r : roots1) CHECK(r.residual <= 1e-10);
}

TEST_CASE("maximizer satisfies the critical point condition") {
  ModelParams params(MixtureSpec(2, 0.3), 0.1, 2.0);
  RsReport rep = rs_maximize(params, 501);
  auto roots = critical_points(params);
  REQUIRE(roots.size() == 1);
  CHECK(std::abs(rep.q0 - roots.front().q) <= 1e-7);

  // interior stationarity by central differences
  if (rep.q0 > 1e-6 && rep.q0 < 1.0 - 1e-6) {
    double eps = 1e-5;
    double d = (rs_value(rep.q0 + eps, params) -
                rs_value(rep.q0 - eps, params)) / (2 * eps);
    CHECK(std::abs(d) <= 1e-6);
  }
}

TEST_CASE("refined maximum dominates the scan grid") {
  ModelParams params(MixtureSpec(3, 0.9), 0.2, 2.5);
  RsReport rep = rs_maximize(params, 201);
  for (int i = 0; i <= 200; ++i) {
    double q = i / 200.0;
    CHECK(rep.value >= rs_value(q, params) - 1e-12);
  }
}

TEST_CASE("rs golden value, pinned by two quadrature orders") {
  // p=2, beta=0.3, h=0.1, a=2, q=0.05; frozen from the a=2 closed form
  // log2 + (xi(1) - xi'(q) - theta(q))/2 + log((1 + e^{2 xi'(q)} ch 2h)/2)/2
  ModelParams params(MixtureSpec(2, 0.3), 0.1, 2.0);
  double v = rs_value(0.05, params);
  CHECK(v == doctest::Approx(0.743091317594488).epsilon(1e-12));
}

TEST_CASE("rs_in_a_scan diagnostics") {
  // constant in a at vanishing coupling
  auto flat = rs_in_a_scan(MixtureSpec(2, 1e-7), 0.3, {1.0, 2.0, 3.5, 5.0}, 201);
  double ref = std::log(2.0) + std::log(std::cosh(0.3));
  for (const auto& row : flat) {
    CHECK(row.value == doctest::Approx(ref).epsilon(1e-10));
  }

  // each scan entry agrees with a direct maximization at that a
  std::vector<double> grid = {1.0, 1.8, 2.6, 3.4, 4.2, 5.0};
  auto scan = rs_in_a_scan(MixtureSpec(2, 0.5), 0.3, grid, 401);
  REQUIRE(scan.size() == grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    ModelParams pi(MixtureSpec(2, 0.5), 0.3, grid[i]);
    RsReport ri = rs_maximize(pi, 401);
    CHECK(scan[i].value == doctest::Approx(ri.value).epsilon(1e-10));
    CHECK(scan[i].q0 == doctest::Approx(ri.q0).epsilon(1e-7));
  }

  // at a=1 the functional is flat in q and equals the annealed value
  ModelParams a1(MixtureSpec(2, 0.2), 0.3, 1.0);
  RsReport rep = rs_maximize(a1, 301);
  double annealed = std::log(2.0) + 0.2 * 0.2 / 2.0 + std::log(std::cosh(0.3));
  CHECK(rep.value == doctest::Approx(annealed).epsilon(1e-10));
  CHECK(rs_value(0.4, a1) == doctest::Approx(annealed).epsilon(1e-10));
}
