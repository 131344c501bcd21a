#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "orlicz/error.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/numerics.hpp"

using namespace orlicz;

namespace {

std::vector<NFunction> builtins() {
  return {NFunction::power(2.0), NFunction::power(1.3, 0.7), NFunction::zygmund(2.0, 1.5),
          NFunction::llogl(), NFunction::exp_conjugate(), NFunction::t_exp_t(),
          pathological_nfunction(2.0, 3.0)};
}

// sup_t (t s - B(t)) by brute force on a dense grid, refined once.
double brute_conjugate(const NFunction& b, double s, double tmax) {
  double best_t = 0.0;
  double best = 0.0;
  for (double t : numerics::linear_grid(0.0, tmax, 200001)) {
    const double v = t * s - b(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  const double h = tmax / 200000.0;
  for (double t : numerics::linear_grid(std::max(0.0, best_t - h), best_t + h, 20001)) {
    best = std::max(best, t * s - b(t));
  }
  return best;
}

}  // namespace

TEST_CASE("power values and derivatives") {
  const NFunction b = NFunction::power(3.0, 0.5);
  CHECK(b(2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(b.derivative(2.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(b.second_derivative(2.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(b(0.0) == 0.0);
}

TEST_CASE("t^2/2 is self-conjugate, t^p/p pairs with s^p'/p'") {
  const NFunction half = NFunction::power(2.0, 0.5);
  const NFunction c = conjugate(half);
  for (double s : {0.01, 0.5, 3.0, 40.0}) CHECK(c(s) == doctest::Approx(0.5 * s * s).epsilon(1e-12));
  const double p = 3.0;
  const double q = p / (p - 1.0);
  const NFunction cp = conjugate(NFunction::power(p, 1.0 / p));
  for (double s : {0.1, 1.0, 7.0}) {
    CHECK(cp(s) == doctest::Approx(std::pow(s, q) / q).epsilon(1e-12));
  }
}

TEST_CASE("numeric conjugates agree with a brute-force supremum") {
  for (const NFunction& b : {NFunction::zygmund(2.0, 1.0), NFunction::llogl(), NFunction::t_exp_t()}) {
    const NFunction c = conjugate(b);
    for (double s : {0.3, 2.0, 3.5}) {
      INFO(b.label(), " s=", s);
      CHECK(c(s) == doctest::Approx(brute_conjugate(b, s, 50.0)).epsilon(1e-7));
    }
  }
}

TEST_CASE("llogl and its conjugate near the origin use stable series") {
  const NFunction b = NFunction::llogl();
  for (double t : {1e-9, 1e-6, 1e-4}) {
    // (1+t)log(1+t) - t = t^2/2 - t^3/6 + t^4/12 - ...
    const double series = t * t / 2.0 - t * t * t / 6.0 + t * t * t * t / 12.0;
    CHECK(b(t) == doctest::Approx(series).epsilon(1e-10));
  }
  const NFunction e = NFunction::exp_conjugate();
  CHECK(e(1e-7) == doctest::Approx(std::expm1(1e-7) - 1e-7).epsilon(1e-9));
}

TEST_CASE("Fenchel-Young inequality and its equality case") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const NFunction& b : builtins()) {
    const NFunction c = conjugate(b);
    for (int i = 0; i < 30; ++i) {
      const double t = 0.05 + 5.0 * u(rng);
      const double s = 0.05 + 5.0 * u(rng);
      INFO(b.label(), " t=", t, " s=", s);
      CHECK(t * s <= b(t) + c(s) + 1e-9 * (1.0 + t * s));
    }
    for (double t : {0.3, 1.7, 4.0}) {
      const double s = b.derivative(t);
      INFO(b.label(), " t=", t);
      CHECK(t * s == doctest::Approx(b(t) + c(s)).epsilon(1e-8));
    }
  }
}

TEST_CASE("inverse undoes the function") {
  for (const NFunction& b : builtins()) {
    for (double y : {1e-6, 0.2, 3.0, 500.0}) {
      INFO(b.label(), " y=", y);
      CHECK(b(inverse(b, y)) == doctest::Approx(y).epsilon(1e-10));
    }
  }
}

TEST_CASE("every built-in kind passes the N-function checks") {
  for (const NFunction& b : builtins()) {
    INFO(b.label());
    CHECK(check_nfunction(b, 1e-3, 50.0).ok);
  }
}

TEST_CASE("Delta2 statistics") {
  const Delta2Stats pw = delta2_stats(NFunction::power(2.5), 1.0, 1e6, 100);
  CHECK(pw.ratio_max == doctest::Approx(std::pow(2.0, 2.5)).epsilon(1e-12));
  CHECK_FALSE(pw.unbounded_evidence);
  CHECK_FALSE(delta2_stats(NFunction::llogl(), 1.0, 1e6, 100).unbounded_evidence);
  // The chord construction forces B(2 a_i) = k_i B(a_i) with k_i -> infinity.
  CHECK(delta2_stats(pathological_nfunction(2.0, 3.0), 1.0, 1e6, 400).unbounded_evidence);
  CHECK(delta2_stats(NFunction::exp_conjugate(), 1.0, 300.0, 100).unbounded_evidence);
}

TEST_CASE("Simonenko indices") {
  const SimonenkoIndices pw = simonenko_indices(NFunction::power(3.0), 1e-3, 1e6);
  CHECK(pw.i_b == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(pw.s_b == doctest::Approx(3.0).epsilon(1e-9));
  // (1+t)log(1+t) - t has lower index 1, approached like L/(L-1) with
  // L = log t, so the scan has to reach far out (the cap is 1e300).
  const NFunction b = NFunction::llogl();
  const SimonenkoIndices ll = simonenko_indices(b, 1e-3, b.domain_cap());
  CHECK(ll.i_b <= 1.01);
  CHECK(ll.s_b == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("essential domination") {
  const auto eps = default_eps_grid();
  CHECK(dominates_much(NFunction::power(2.0), NFunction::power(3.0), eps, 1e6).dominates);
  CHECK_FALSE(dominates_much(NFunction::power(3.0), NFunction::power(2.0), eps, 1e6).dominates);
  // Same growth: P(t)/B(eps t) is constant, never tends to zero.
  CHECK_FALSE(dominates_much(NFunction::power(2.0), NFunction::power(2.0), eps, 1e6).dominates);
}

TEST_CASE("pathological construction") {
  const NFunction b = pathological_nfunction(2.0, 3.0);
  const PathologicalSegments& s = *b.segments();
  REQUIRE(s.k.size() >= 4);
  for (std::size_t i = 0; i < s.k.size(); ++i) {
    CHECK(b(2.0 * s.a[i]) / b(s.a[i]) == doctest::Approx(s.k[i]).epsilon(1e-12));
    if (i > 0) CHECK(s.k[i] > s.k[i - 1]);
  }
  for (double t : numerics::geometric_grid(1.0, 1e6, 3000)) {
    CHECK(b(t) >= t * t * (1.0 - 1e-12));
    CHECK(b(t) <= t * t * t * (1.0 + 1e-12));
  }
  CHECK_THROWS_AS(pathological_nfunction(3.0, 2.0), Error);
}

TEST_CASE("tabulated N-function reproduces its knots") {
  std::vector<double> t{0.0, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> v{0.0, 0.25, 1.0, 4.0, 16.0};
  const NFunction b = NFunction::tabulated(t, v);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(b(t[i]) == doctest::Approx(v[i]).epsilon(1e-14));
  // Power-law data interpolated in log-log coordinates is exact in between.
  CHECK(b(3.0) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK_THROWS_AS(NFunction::tabulated({0.0, 1.0, 0.5}, {0.0, 1.0, 2.0}), Error);
}

TEST_CASE("domain errors") {
  const NFunction e = NFunction::exp_conjugate();
  try {
    (void)e(1e4);
    FAIL("expected DomainCapExceeded");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::DomainCapExceeded);
  }
  CHECK_THROWS_AS((void)NFunction::power(2.0)(-1.0), Error);
  try {
    (void)NFunction::power(0.5);
    FAIL("expected InvalidExponents");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::InvalidExponents);
  }
}

TEST_CASE("JSON round trip and parse errors") {
  for (const NFunction& b : builtins()) {
    const NFunction r = NFunction::from_json(b.to_json());
    INFO(b.label());
    CHECK(r.kind() == b.kind());
    CHECK(r(1.7) == doctest::Approx(b(1.7)).epsilon(1e-14));
  }
  try {
    (void)NFunction::from_json({{"kind", "no-such-kind"}});
    FAIL("expected ParseError");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::ParseError);
  }
}
