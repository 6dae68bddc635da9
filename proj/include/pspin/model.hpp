#pragma once

#include <cmath>
#include <cstdlib>

#include "pspin/errors.hpp"

namespace pspin {

// Pure p-spin mixture xi(x) = beta^2 |x|^p.
struct MixtureSpec {
  int p = 2;
  double beta = 1.0;

  MixtureSpec() = default;
  MixtureSpec(int p_, double beta_) : p(p_), beta(beta_) {
    if (p < 2) throw InvalidParams("MixtureSpec: p must be >= 2");
    if (!(beta > 0)) throw InvalidParams("MixtureSpec: beta must be > 0");
  }

  // |x|^e via exp(e*log|x|), with the x=0 branch returning 0 for e>0.
  static double abs_pow(double x, double e) {
    if (x == 0.0) return e == 0.0 ? 1.0 : 0.0;
    return std::exp(e * std::log(std::abs(x)));
  }

  double xi(double x) const { return beta * beta * abs_pow(x, p); }

  double xi_prime(double x) const {
    if (x == 0.0) return 0.0;
    double s = x > 0 ? 1.0 : -1.0;
    return p * beta * beta * abs_pow(x, p - 1) * s;
  }

  // theta(x) = x*xi'(x) - xi(x) = beta^2 (p-1) |x|^p
  double theta(double x) const { return beta * beta * (p - 1) * abs_pow(x, p); }

  // Delta(u,q) = xi(u) - u*xi'(q) + theta(q) >= 0
  double delta(double u, double q) const {
    return xi(u) - u * xi_prime(q) + theta(q);
  }
};

struct ModelParams {
  MixtureSpec mixture;
  double h = 0.0;  // external field
  double a = 1.0;  // moment exponent, >= 1
  int n = 1;       // replica count: n <= a < n+1 (n = a for integer a)

  ModelParams() = default;
  ModelParams(MixtureSpec mix, double h_, double a_) : mixture(mix), h(h_), a(a_) {
    if (!(a >= 1.0)) throw InvalidParams("ModelParams: a must be >= 1");
    n = static_cast<int>(std::floor(a));  // n <= a < n+1; n = a for integer a
  }

  double xi(double x) const { return mixture.xi(x); }
  double xi_prime(double x) const { return mixture.xi_prime(x); }
  double theta(double x) const { return mixture.theta(x); }
  double delta(double u, double q) const { return mixture.delta(u, q); }
};

}  // namespace pspin
