#include "orlicz/numerics.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "orlicz/error.hpp"

namespace orlicz::numerics {

std::vector<double> geometric_grid(double a, double b, std::size_t n) {
  if (!(a > 0.0) || !(b > a) || n < 2) {
    throw Error(ErrorKind::InvalidArgument,
                "geometric grid needs 0 < a < b and n >= 2");
  }
  std::vector<double> grid(n);
  const double la = std::log(a);
  const double step = (std::log(b) - la) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::exp(la + step * static_cast<double>(i));
  }
  grid.front() = a;
  grid.back() = b;
  return grid;
}

std::vector<double> linear_grid(double a, double b, std::size_t n) {
  if (n < 2) {
    throw Error(ErrorKind::InvalidArgument, "linear grid needs n >= 2");
  }
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return grid;
}

Bracket expand_upward(const std::function<bool(double)>& reached, double start,
                      double cap) {
  double lo = 0.0;
  double hi = std::min(start, cap);
  while (!reached(hi)) {
    if (hi >= cap) {
      return {lo, std::numeric_limits<double>::infinity()};
    }
    lo = hi;
    hi = std::min(2.0 * hi, cap);
  }
  return {lo, hi};
}

double bisect_increasing(const std::function<double(double)>& g, double lo,
                         double hi, double rel_tol, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= rel_tol * std::abs(hi) ||
        hi - lo <= std::numeric_limits<double>::min()) {
      break;
    }
    if (g(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double golden_section_max(const std::function<double(double)>& f, double lo,
                          double hi, double rel_tol, int max_iter) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter; ++it) {
    if (b - a <= rel_tol * std::max(std::abs(a), std::abs(b))) break;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  // Endpoints are candidates too: a maximizer sitting on a kink at the
  // bracket edge is common for piecewise-affine pieces.
  double best = 0.5 * (a + b);
  double fbest = f(best);
  for (double cand : {lo, hi, c, d}) {
    const double fv = f(cand);
    if (fv > fbest) {
      fbest = fv;
      best = cand;
    }
  }
  return best;
}

double compensated_sum(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw Error(ErrorKind::InvalidArgument,
                "monotone cubic needs at least two matching knots");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) {
      throw Error(ErrorKind::InvalidArgument,
                  "monotone cubic knots must be strictly increasing");
    }
  }
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  }
  d_.assign(n, 0.0);
  d_[0] = delta[0];
  d_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = delta[i - 1];
    const double b = delta[i];
    if (a * b <= 0.0) {
      d_[i] = 0.0;
    } else {
      // Weighted harmonic mean (Fritsch-Butland form for uneven spacing).
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      const double w1 = 2.0 * h1 + h0;
      const double w2 = h1 + 2.0 * h0;
      d_[i] = (w1 + w2) / (w1 / a + w2 / b);
    }
  }
  // Three-point end slopes, limited to preserve monotonicity.
  if (n > 2) {
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) {
        s = 0.0;
      } else if (d0 * d1 <= 0.0 && std::abs(s) > 3.0 * std::abs(d0)) {
        s = 3.0 * d0;
      }
      return s;
    };
    d_[0] = end_slope(x_[1] - x_[0], x_[2] - x_[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(x_[n - 1] - x_[n - 2], x_[n - 2] - x_[n - 3],
                          delta[n - 2], delta[n - 3]);
  }
}

std::size_t MonotoneCubic::interval(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double dh00 = (6.0 * t2 - 6.0 * t) / h;
  const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
  const double dh11 = 3.0 * t2 - 2.0 * t;
  return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

double MonotoneCubic::second_derivative(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double d2h00 = (12.0 * t - 6.0) / (h * h);
  const double d2h10 = (6.0 * t - 4.0) / h;
  const double d2h01 = (-12.0 * t + 6.0) / (h * h);
  const double d2h11 = (6.0 * t - 2.0) / h;
  return d2h00 * y_[i] + d2h10 * d_[i] + d2h01 * y_[i + 1] + d2h11 * d_[i + 1];
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol) {
  if (b <= a) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(f, a, b, 12, rel_tol);
}

}  // namespace orlicz::numerics
