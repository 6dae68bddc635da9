#include "pspin/rs.hpp"

#include <algorithm>
#include <cmath>

#include "pspin/gaussian.hpp"
#include "pspin/golden.hpp"
#include "pspin/logsumexp.hpp"

namespace pspin {

double rs_value(double q, const ModelParams& params) {
  if (q < 0.0 || q > 1.0) throw InvalidParams("rs_value: q must be in [0,1]");
  const double a = params.a;
  double head = std::log(2.0) +
                0.5 * (params.xi(1.0) - params.xi_prime(q) +
                       (1.0 - a) * params.theta(q));
  return head + log_expect_ch_pow(a, params.h, params.xi_prime(q)) / a;
}

namespace {

// E ch^a th^2 / E ch^a - q  at variance xi'(q); the critical point residual.
double critical_residual(double q, const ModelParams& params) {
  const double a = params.a;
  const double h = params.h;
  double var = params.xi_prime(q);
  QuadratureRule rule = hermite_rule(192);
  auto log_num = [&](double z) {
    double t = std::tanh(z + h);
    return a * log_cosh(z + h) + (t == 0.0 ? kNegInf : 2.0 * std::log(std::abs(t)));
  };
  auto log_den = [&](double z) { return a * log_cosh(z + h); };
  double ratio =
      std::exp(log_expect_1d(log_num, var, rule) - log_expect_1d(log_den, var, rule));
  return ratio - q;
}

}  // namespace

RsReport rs_maximize(const ModelParams& params, int grid) {
  if (grid < 101) throw InvalidParams("rs_maximize: grid must be >= 101");
  std::vector<double> qs(grid), vals(grid);
  for (int i = 0; i < grid; ++i) {
    qs[i] = static_cast<double>(i) / (grid - 1);
    vals[i] = rs_value(qs[i], params);
  }

  std::vector<LocalMax> candidates;
  for (int i = 0; i < grid; ++i) {
    bool left_ok = (i == 0) || vals[i] >= vals[i - 1];
    bool right_ok = (i == grid - 1) || vals[i] >= vals[i + 1];
    if (!(left_ok && right_ok)) continue;
    double lo = qs[std::max(i - 1, 0)];
    double hi = qs[std::min(i + 1, grid - 1)];
    double q_ref = golden_section_max(
        [&](double q) { return rs_value(q, params); }, lo, hi, 1e-11);
    double v_ref = rs_value(q_ref, params);
    // refined maximum never below the grid value
    if (v_ref < vals[i]) {
      q_ref = qs[i];
      v_ref = vals[i];
    }
    // skip duplicates from flat plateaus
    bool dup = false;
    for (const auto& c : candidates) {
      if (std::abs(c.q - q_ref) < 1e-7) dup = true;
    }
    if (!dup) candidates.push_back({q_ref, v_ref});
  }

  RsReport report;
  double best = kNegInf;
  for (const auto& c : candidates) best = std::max(best, c.value);
  for (const auto& c : candidates) {
    if (c.value >= best - 1e-9) report.maxima.push_back(c);
  }
  std::sort(report.maxima.begin(), report.maxima.end(),
            [](const LocalMax& x, const LocalMax& y) { return x.q < y.q; });
  report.q0 = report.maxima.front().q;
  report.value = best;
  report.unique_max = report.maxima.size() == 1;
  report.all_critical_points = critical_points(params);
  return report;
}

std::vector<CriticalPoint> critical_points(const ModelParams& params) {
  const int grid = 2001;
  std::vector<double> qs(grid), g(grid);
  for (int i = 0; i < grid; ++i) {
    qs[i] = static_cast<double>(i) / (grid - 1);
    g[i] = critical_residual(qs[i], params);
  }
  std::vector<CriticalPoint> roots;
  auto push_root = [&](double q) {
    double res = std::abs(critical_residual(q, params));
    for (const auto& r : roots) {
      if (std::abs(r.q - q) < 1e-9) return;
    }
    roots.push_back({q, res});
  };
  if (std::abs(g[0]) < 1e-12) push_root(0.0);
  for (int i = 0; i + 1 < grid; ++i) {
    if (g[i] == 0.0 && i > 0) {
      push_root(qs[i]);
      continue;
    }
    if (g[i] * g[i + 1] < 0.0) {
      double lo = qs[i], hi = qs[i + 1];
      double glo = g[i];
      while (hi - lo > 1e-12) {
        double mid = (lo + hi) / 2;
        double gm = critical_residual(mid, params);
        if (gm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (glo * gm < 0.0) {
          hi = mid;
        } else {
          lo = mid;
          glo = gm;
        }
      }
      push_root((lo + hi) / 2);
    }
  }
  if (std::abs(g[grid - 1]) < 1e-12) push_root(1.0);
  return roots;
}

std::vector<AScanRow> rs_in_a_scan(const MixtureSpec& mixture, double h,
                                   const std::vector<double>& a_grid,
                                   int grid) {
  std::vector<AScanRow> table;
  for (double a : a_grid) {
    if (a < 1.0 || a > 6.0) {
      throw InvalidParams("rs_in_a_scan: a_grid must lie in [1, 6]");
    }
    ModelParams params(mixture, h, a);
    RsReport rep = rs_maximize(params, grid);
    table.push_back({a, rep.q0, rep.value});
  }
  return table;
}

}  // namespace pspin
