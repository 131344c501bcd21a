#pragma once

// Small scalar numerics shared by every module: brackets, bisection,
// golden-section search, compensated sums, monotone cubic interpolation and
// panel quadrature.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace orlicz::numerics {

/// n points a, a*r, ..., b (n >= 2, 0 < a < b).
std::vector<double> geometric_grid(double a, double b, std::size_t n);

/// n points a, ..., b equally spaced.
std::vector<double> linear_grid(double a, double b, std::size_t n);

struct Bracket {
  double lo;
  double hi;
};

/// Doubles `hi` starting from `start` until `reached(hi)` holds. The search
/// stops at `cap`; on failure the returned `hi` is +infinity.
Bracket expand_upward(const std::function<bool(double)>& reached,
                      double start, double cap);

/// Locates the crossing of a nondecreasing function `g` through zero on
/// [lo, hi] where g(lo) <= 0 <= g(hi). Handles jumps: converges to the jump
/// location. Stops when hi - lo <= rel_tol * hi (or abs floor).
double bisect_increasing(const std::function<double(double)>& g, double lo,
                         double hi, double rel_tol = 4e-16,
                         int max_iter = 400);

/// Maximizer of a unimodal function on [lo, hi].
double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double rel_tol = 1e-15,
                          int max_iter = 300);

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_sum(std::span<const double> values);

/// Fritsch-Carlson monotone piecewise cubic Hermite interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }
  const std::vector<double>& slopes() const noexcept { return d_; }
  bool empty() const noexcept { return x_.empty(); }

 private:
  std::size_t interval(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

/// Adaptive Gauss-Kronrod (15-point) integral of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12);

}  // namespace orlicz::numerics
