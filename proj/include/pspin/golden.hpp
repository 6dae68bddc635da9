#pragma once

#include <cmath>
#include <functional>

namespace pspin {

// Golden-section maximization on [lo, hi]; returns the abscissa.
inline double golden_section_max(const std::function<double(double)>& f,
                                 double lo, double hi, double tol = 1e-10,
                                 int max_iter = 200) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
  }
  return (lo + hi) / 2.0;
}

}  // namespace pspin
