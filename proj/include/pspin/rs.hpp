#pragma once

#include <vector>

#include "pspin/model.hpp"

namespace pspin {

struct CriticalPoint {
  double q = 0.0;
  double residual = 0.0;
};

struct LocalMax {
  double q = 0.0;
  double value = 0.0;
};

struct RsReport {
  double q0 = 0.0;     // primary maximizer (smallest q among ties)
  double value = 0.0;  // max_q RS(q)
  bool unique_max = true;
  std::vector<LocalMax> maxima;  // all local maxima within 1e-9 of the value
  std::vector<CriticalPoint> all_critical_points;
};

// RS(q) = log 2 + (xi(1) - xi'(q) + (1-a) theta(q))/2
//         + (1/a) log E ch^a(z+h),  z ~ N(0, xi'(q)).
double rs_value(double q, const ModelParams& params);

// Dense grid scan on [0,1] plus golden-section refinement around every local
// maximum.  grid >= 101 points.
RsReport rs_maximize(const ModelParams& params, int grid = 1001);

// Roots in [0,1] of  E ch^a th^2 / E ch^a - q  with z ~ N(0, xi'(q)),
// bracketing on a 2001-point grid and bisecting to 1e-12.
std::vector<CriticalPoint> critical_points(const ModelParams& params);

struct AScanRow {
  double a = 0.0;
  double q0 = 0.0;
  double value = 0.0;
};

// a |-> max_q RS(q; a) on a grid of a-values in [1, 6].
std::vector<AScanRow> rs_in_a_scan(const MixtureSpec& mixture, double h,
                                   const std::vector<double>& a_grid,
                                   int grid = 1001);

}  // namespace pspin
