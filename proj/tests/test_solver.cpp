#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orlicz/error.hpp"
#include "orlicz/norms.hpp"
#include "orlicz/solver.hpp"

using namespace orlicz;

namespace {

SampledField constant(int dim, std::size_t n, double v) {
  return SampledField::from_function(dim, n, 1.0, [v](std::span<const double>) { return v; });
}

// Dirichlet Green's function of the unit square, -Laplace G = delta_{x0}:
// sum_m 2 sin(m pi x) sin(m pi x0) sinh(m pi y<) sinh(m pi (1 - y>)) / (m pi sinh(m pi)),
// with the sinh ratio written in decaying exponentials.
double green(double x, double y, double x0, double y0) {
  const double lo = std::min(y, y0);
  const double hi = std::max(y, y0);
  double sum = 0.0;
  for (int m = 1; m <= 20000; ++m) {
    const double k = m * std::numbers::pi;
    const double a = k * lo;
    const double b = k * (1.0 - hi);
    const double ratio = std::exp(-k * (hi - lo)) * (-std::expm1(-2.0 * a)) *
                         (-std::expm1(-2.0 * b)) / (2.0 * (-std::expm1(-2.0 * k)));
    sum += 2.0 * std::sin(k * x) * std::sin(k * x0) * ratio / k;
  }
  return sum;
}

}  // namespace

TEST_CASE("zero datum gives the zero solution") {
  const SolveResult r = solve_approximate(OperatorSpec::potential(NFunction::power(3.0)), constant(1, 64, 0.0));
  CHECK(r.converged);
  CHECK(r.u.max_abs() == 0.0);
  const AprioriReport a = apriori_report(OperatorSpec::potential(NFunction::power(3.0)), r.u,
                                         constant(1, 64, 0.0), std::vector<double>{0.1, 1.0});
  for (const auto& row : a.rows) CHECK(row.lhs1 == 0.0);
}

TEST_CASE("quadratic case: -u'' = 1 has u = x(1-x)/2") {
  double prev = 0.0;
  for (std::size_t n : {64u, 128u}) {
    const SolveResult r = solve_approximate(OperatorSpec::potential(NFunction::power(2.0, 0.5)), constant(1, n, 1.0));
    REQUIRE(r.converged);
    double err = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double x = r.u.centre(c)[0];
      err = std::max(err, std::abs(r.u[c] - 0.5 * x * (1.0 - x)));
    }
    const double h = 1.0 / n;
    CHECK(err <= h * h);
    if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.02));
    prev = err;
  }
}

TEST_CASE("p = 4: u(1/2) = (3/4) 2^{-4/3}") {
  const std::size_t n = 512;
  const SolveResult r = solve_approximate(OperatorSpec::potential(NFunction::power(4.0, 0.25)), constant(1, n, 1.0));
  REQUIRE(r.converged);
  CHECK(0.5 * (r.u[n / 2 - 1] + r.u[n / 2]) == doctest::Approx(0.29764).epsilon(1e-3 / 0.29764));
  CHECK(r.energy_monotone);
}

TEST_CASE("a priori table for the quadratic case at t = |u|_inf") {
  const OperatorSpec op = OperatorSpec::potential(NFunction::power(2.0, 0.5));
  const SampledField f = constant(1, 512, 1.0);
  const SolveResult r = solve_approximate(op, f);
  const double t = r.u.max_abs() * (1.0 + 1e-12);
  const AprioriReport a = apriori_report(op, r.u, f, std::vector<double>{t});
  // int_0^1 (1/2 - x)^2 / 2 dx = 1/24; bound 2 t |f|_1 with t = 1/8.
  CHECK(a.rows[0].lhs1 == doctest::Approx(1.0 / 24.0).epsilon(1e-4));
  CHECK(a.rows[0].bound == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(a.ok);
}

TEST_CASE("solver invariants on random nonnegative data") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double p : {1.5, 2.0, 3.0}) {
    for (int dim : {1, 2}) {
      const std::size_t n = dim == 1 ? 96 : 24;
      SampledField f(dim, n, 1.0);
      for (double& v : f.raw()) v = 4.0 * u(rng);
      const OperatorSpec op = OperatorSpec::potential(NFunction::power(p));
      const SolveResult r = solve_approximate(op, f);
      INFO("p=", p, " dim=", dim);
      REQUIRE(r.converged);
      CHECK(r.energy_monotone);
      for (std::size_t k = 1; k < r.energy_history.size(); ++k) {
        CHECK(r.energy_history[k] <= r.energy_history[k - 1] + 1e-12 * std::abs(r.energy_history[0]));
      }
      CHECK(r.coercivity_gap >= -1e-12);
      for (double v : r.u.raw()) CHECK(v >= -r.tolerance);
      for (int i = 0; i < 10; ++i) {
        SampledField phi(dim, n, 1.0);
        for (std::size_t c = 0; c < phi.cells(); ++c) phi[c] = phi.is_boundary_cell(c) ? 0.0 : 2.0 * u(rng) - 1.0;
        CHECK(std::abs(weak_form_defect(op, r.u, f, phi)) <= 1e-7 * phi.max_abs() * f.l1_norm());
      }
    }
  }
}

TEST_CASE("z-perturbed flux: fixed point converges, coercivity holds") {
  const OperatorSpec op = OperatorSpec::z_perturbed(NFunction::power(2.5), 0.6);
  const SampledField f = SampledField::from_function(
      1, 128, 1.0, [](std::span<const double> x) { return 3.0 * std::sin(std::numbers::pi * x[0]); });
  const SolveResult r = solve_approximate(op, f);
  REQUIRE(r.converged);
  CHECK(r.outer_iterations > 1);
  CHECK(r.coercivity_gap >= 0.0);
  CHECK(std::abs(weak_form_defect(op, r.u, f, f)) <= 1e-7 * f.max_abs() * f.l1_norm());
}

TEST_CASE("custom flux equal to the potential flux reproduces the potential solve") {
  const NFunction b = NFunction::power(3.0);
  const OperatorSpec pot = OperatorSpec::potential(b);
  const OperatorSpec cus = OperatorSpec::custom(
      b, [b](const Vec2&, double, const Vec2& xi) {
        const double r = std::hypot(xi[0], xi[1]);
        if (r == 0.0) return Vec2{0.0, 0.0};
        const double s = b.derivative(r) / r;
        return Vec2{s * xi[0], s * xi[1]};
      },
      true);
  const SampledField f = constant(1, 64, 2.0);
  const SolveResult a = solve_approximate(pot, f);
  const SolveResult c = solve_approximate(cus, f);
  REQUIRE(c.converged);
  for (std::size_t i = 0; i < f.cells(); ++i) CHECK(c.u[i] == doctest::Approx(a.u[i]).epsilon(1e-7));
}

TEST_CASE("exponential growth solve stays inside the domain cap") {
  const SolveResult r = solve_approximate(OperatorSpec::potential(NFunction::t_exp_t()), constant(1, 128, 40.0));
  CHECK(r.converged);
  CHECK(r.u.max_abs() > 0.0);
}

TEST_CASE("non-convergence is reported and can be escalated") {
  SolverOptions opt;
  opt.max_newton = 1;
  const SolveResult r = solve_approximate(OperatorSpec::potential(NFunction::power(4.0)), constant(1, 64, 1.0), opt);
  CHECK_FALSE(r.converged);
  CHECK(r.u.max_abs() > 0.0);  // best iterate is still returned
  try {
    require_converged(r, "p=4");
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonConvergence);
  }
}

TEST_CASE("mollified measures keep their mass") {
  const std::vector<Atom> one{Atom{{0.5, 0.5}, 1.0}};
  for (int k : {4, 16, 64}) CHECK(mollify_measure(one, k, 2, 129, 1.0).l1_norm() == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<Atom> two{Atom{{0.3, 0.4}, 2.0}, Atom{{0.7, 0.6}, 3.0}};
  CHECK(mollify_measure(two, 8, 2, 64, 1.0).l1_norm() == doctest::Approx(5.0).epsilon(1e-12));
  try {
    (void)mollify_measure(std::vector<Atom>{Atom{{0.05, 0.5}, 1.0}}, 4, 2, 64, 1.0);
    FAIL("expected AtomTooCloseToBoundary");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AtomTooCloseToBoundary);
  }
}

TEST_CASE("weak-* pairing with 1 + x^2 converges to the point value") {
  // Radial mollifier, phi(x) = 1 + x^2: the pairing error is the second moment
  // of the kernel, O(1/k^2), plus quadrature.
  const std::vector<Atom> one{Atom{{0.4, 0.5}, 1.0}};
  double prev = 1.0;
  for (int k : {4, 8, 16}) {
    const SampledField fk = mollify_measure(one, k, 2, 257, 1.0);
    double s = 0.0;
    for (std::size_t c = 0; c < fk.cells(); ++c) {
      const double x = fk.centre(c)[0];
      s += fk[c] * (1.0 + x * x) * fk.cell_measure();
    }
    const double err = std::abs(s - 1.16);
    CHECK(err < prev);
    CHECK(err <= 1.0 / (k * k));
    prev = err;
  }
}

TEST_CASE("L1 approximation: clamping, zero data, smooth data") {
  const SampledField zero(1, 64, 1.0);
  CHECK(approximate_l1_data(zero, 8).f_k.max_abs() == 0.0);
  const SampledField f = SampledField::from_function(
      1, 512, 1.0, [](std::span<const double> x) { return 1.0 / std::sqrt(std::abs(x[0] - 0.5)); });
  const L1Approximation a = approximate_l1_data(f, 8);
  for (std::size_t c = 0; c < f.cells(); ++c) CHECK(std::abs(a.f_k[c]) <= 2.0 * std::abs(f[c]));
  const SampledField g = SampledField::from_function(
      1, 1024, 1.0, [](std::span<const double> x) { return 1.0 + std::cos(2.0 * std::numbers::pi * x[0]); });
  double prev = INFINITY;
  for (int k : {4, 8, 16}) {
    const double d = approximate_l1_data(g, k).l1_distance;
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("2-D Dirac datum approaches the Green's function away from the atom") {
  // B = t^2 means A = 2 xi, so u = G/2.
  const std::vector<Atom> one{Atom{{0.5, 0.5}, 1.0}};
  const SolveResult r = solve_approximate(OperatorSpec::potential(NFunction::power(2.0)),
                                          mollify_measure(one, 16, 2, 129, 1.0));
  REQUIRE(r.converged);
  double worst = 0.0;
  for (std::size_t c = 0; c < r.u.cells(); c += 7) {
    const auto x = r.u.centre(c);
    const double rad = std::hypot(x[0] - 0.5, x[1] - 0.5);
    if (rad < 0.2 || rad > 0.4) continue;
    const double g = 0.5 * green(x[0], x[1], 0.5, 0.5);
    worst = std::max(worst, std::abs(r.u[c] - g) / g);
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("convergence study on smooth bounded data") {
  ProblemSpec p;
  p.dim = 1;
  p.n = 256;
  p.l1_datum = SampledField::from_function(
      1, 256, 1.0, [](std::span<const double> x) { return 1.0 + std::sin(3.0 * x[0]); });
  p.mollifier_levels = {4, 8, 16};
  const ConvergenceStudy cs = convergence_study(OperatorSpec::potential(NFunction::power(2.5)), p);
  CHECK(cs.cauchy_decreasing);
  CHECK(cs.solves.size() == 3);
  // |{|u| >= l}| <= C l / B(l) with C stable across levels.
  const double lo = *std::min_element(cs.tail_constant.begin(), cs.tail_constant.end());
  const double hi = *std::max_element(cs.tail_constant.begin(), cs.tail_constant.end());
  CHECK(hi / lo <= 1.2);
  p.mollifier_levels = {4, 8};
  CHECK_THROWS_AS(convergence_study(OperatorSpec::potential(NFunction::power(2.5)), p), Error);
}

TEST_CASE("uniqueness experiment") {
  const SampledField f = SampledField::from_function(
      1, 128, 1.0, [](std::span<const double> x) { return 1.0 / std::sqrt(std::abs(x[0] - 0.5)); });
  const std::vector<int> levels{8, 32, 128};
  OperatorSpec op = OperatorSpec::potential(NFunction::power(2.0, 0.5));
  const UniquenessResult u = uniqueness_experiment(op, f, levels);
  CHECK(u.monotone);
  // At k = n the kernel is a single cell and T_k f = f: identical sequences.
  CHECK(u.final_discrepancy == doctest::Approx(0.0).epsilon(1e-12));
  op.strongly_monotone = false;
  try {
    (void)uniqueness_experiment(op, f, levels);
    FAIL("expected NotStronglyMonotone");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotStronglyMonotone);
  }
}

TEST_CASE("weak quasi-norm of the 3-D radial field 1/|x|") {
  // p = 2, N = 3: |{u > l}| = (4 pi / 3) l^{-3}, finite against t^3.
  auto quasi = [](std::size_t n) {
    const double h = 2.0 / n;
    std::vector<double> mags;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const double x = -1.0 + (i + 0.5) * h, y = -1.0 + (j + 0.5) * h, z = -1.0 + (k + 0.5) * h;
          mags.push_back(1.0 / std::sqrt(x * x + y * y + z * z));
        }
    return weak_marcinkiewicz(NFunction::power(3.0), mags, h * h * h);
  };
  const double a = quasi(32);
  const double b = quasi(64);
  CHECK(std::isfinite(b));
  CHECK(b / a == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("regularity verdict flags growth under refinement") {
  std::vector<RegularityMeasures> grids(3);
  for (std::size_t i = 0; i < 3; ++i) {
    grids[i].n = 64u << i;
    grids[i].u_sup = 1.0 + 0.5 * i;
    grids[i].grad_b = 1.0;
  }
  CHECK_FALSE(regularity_verdict(grids, true).finite_stable);
  for (auto& g : grids) g.u_sup = 1.0;
  const RegularityReport ok = regularity_verdict(grids, true);
  CHECK(ok.finite_stable);
  CHECK(ok.verdict == "finite/stable");
}

TEST_CASE("problem spec parsing") {
  const ProblemSpec p = ProblemSpec::from_json(
      {{"dim", 2}, {"n", 33}, {"datum", {{"type", "atomic"}, {"atoms", {{{"x", {0.5, 0.5}}, {"weight", 2.0}}}}}}});
  CHECK(p.datum_mass() == 2.0);
  try {
    (void)ProblemSpec::from_json({{"dim", 1}, {"datum", {{"type", "l1"}, {"expression", "nope"}}}});
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
  CHECK_THROWS_AS(ProblemSpec::from_json({{"dim", 1}, {"mollifier_levels", {8, 4, 16}},
                                          {"datum", {{"type", "l1"}}}}),
                  Error);
}
