#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "orlicz/embedding.hpp"
#include "orlicz/error.hpp"

using namespace orlicz;

TEST_CASE("growth classes of powers") {
  CHECK(growth_class(NFunction::power(5.0), 3).growth == GrowthClass::Fast);
  CHECK(growth_class(NFunction::power(2.0), 3).growth == GrowthClass::Slow);
  CHECK(growth_class(NFunction::power(3.0), 3).growth == GrowthClass::Undetermined);
  const GrowthEvidence forced = growth_class(NFunction::power(3.0), 3, GrowthClass::Slow);
  CHECK(forced.overridden);
  CHECK(forced.growth == GrowthClass::Slow);
}

TEST_CASE("t exp t grows faster than any power") {
  CHECK(growth_class(NFunction::t_exp_t(), 3).growth == GrowthClass::Fast);
  CHECK(growth_class(NFunction::t_exp_t(), 2).growth == GrowthClass::Fast);
}

TEST_CASE("borderline growth needs an override") {
  try {
    (void)embedding_functions(NFunction::power(3.0), 3);
    FAIL("expected UndeterminedGrowth");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UndeterminedGrowth);
  }
  CHECK_NOTHROW((void)embedding_functions(NFunction::power(3.0), 3, GrowthClass::Slow));
}

TEST_CASE("B_3 for t^2 is t^6/16") {
  const EmbeddingData e = embedding_functions(NFunction::power(2.0), 3);
  for (double t : {0.5, 1.0, 2.0, 3.0}) {
    CHECK(e.B_N(t) == doctest::Approx(std::pow(t, 6) / 16.0).epsilon(1e-4));
  }
  for (double s : {1e-3, 0.5, 20.0}) CHECK(e.H_N_inverse(e.H_N(s)) == doctest::Approx(s).epsilon(1e-9));
}

TEST_CASE("origin normalization") {
  const NFunction b = normalize_origin(NFunction::power(3.0));
  CHECK(b(0.5) == doctest::Approx(0.5));
  CHECK(b(2.0) == doctest::Approx(8.0));
  // (t / t^3)^{1/2} = 1/t is not integrable at 0 for N = 3, so B is normalized.
  CHECK(embedding_functions(NFunction::power(3.0), 3, GrowthClass::Slow).origin_normalized);
  CHECK_FALSE(embedding_functions(NFunction::power(2.0), 3).origin_normalized);
}

TEST_CASE("regularity targets: constants and branches") {
  const double K = 2.0;
  const double diam = std::sqrt(2.0);
  const RegularityTargets slow = regularity_targets(NFunction::power(1.5), 2, K, diam);
  CHECK(slow.growth == GrowthClass::Slow);
  CHECK(slow.c1 == doctest::Approx(1.0 / (4.0 * diam)));
  CHECK(slow.K_bar == doctest::Approx(2.0 * std::max(K, K * K)));  // N' = 2
  CHECK(slow.c_bar == doctest::Approx(std::pow(K, -0.5)));
  CHECK(slow.Phi2.has_value());
  CHECK(slow.Psi2.has_value());
  CHECK_FALSE(slow.u_bounded_expected);

  const RegularityTargets fast = regularity_targets(NFunction::power(4.0), 2, K, diam);
  CHECK(fast.growth == GrowthClass::Fast);
  CHECK(fast.u_bounded_expected);
  CHECK_FALSE(fast.Phi2.has_value());

  for (const RegularityTargets* t : {&slow, &fast}) {
    for (double r : {0.5, 2.0, 8.0}) {
      CHECK(std::isfinite(t->Phi1(r)));
      CHECK(t->Phi1(r) > 0.0);
      CHECK(t->Psi1(r) > 0.0);
    }
  }
}

TEST_CASE("Poincare-type inequalities on a bump") {
  const SampledField u = SampledField::from_function(2, 48, 1.0, [](std::span<const double> x) {
    return std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
  });
  // Cells next to the boundary are O(h) but not zero: rebuild with exact zeros there.
  SampledField v = u;
  for (std::size_t c = 0; c < v.cells(); ++c) {
    if (v.is_boundary_cell(c)) v[c] = 0.0;
  }
  const SampledField g = discrete_gradient(v);
  const InequalityCheck p = poincare_check(NFunction::power(2.0), v, g, 2);
  CHECK(p.lhs <= p.rhs);
  const InequalityCheck sp = sobolev_poincare_check(NFunction::power(1.5), v, g, 2);
  CHECK(sp.lhs <= sp.rhs);
  CHECK_THROWS_AS(poincare_check(NFunction::power(2.0), u, g, 2), Error);
}
