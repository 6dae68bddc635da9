#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace pspin {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double log_sum_exp(std::span<const double> args) {
  double m = kNegInf;
  for (double x : args) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : args) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Streaming log-sum-exp accumulator with running max rescaling.
class LogAccumulator {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term > max_) {
      if (std::isfinite(max_)) sum_ *= std::exp(max_ - log_term);
      max_ = log_term;
      sum_ += 1.0;
    } else {
      sum_ += std::exp(log_term - max_);
    }
  }

  void merge(const LogAccumulator& other) {
    if (other.sum_ == 0.0) return;
    if (other.max_ > max_) {
      if (sum_ > 0.0) sum_ *= std::exp(max_ - other.max_);
      max_ = other.max_;
      sum_ += other.sum_;
    } else {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    }
  }

  bool empty() const { return sum_ == 0.0; }
  double log_value() const { return empty() ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

// Pairwise (tree) summation in a fixed order.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

}  // namespace pspin
