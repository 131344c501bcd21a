#include "orlicz/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "orlicz/embedding.hpp"
#include "orlicz/error.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/norms.hpp"
#include "orlicz/numerics.hpp"
#include "orlicz/operator.hpp"
#include "orlicz/solver.hpp"

namespace orlicz::verify {

nlohmann::json Tolerances::to_json() const {
  return {{"conjugate_rel", conjugate_rel},
          {"biconjugate_rel", biconjugate_rel},
          {"pathological_ratio_rel", pathological_ratio_rel},
          {"luxemburg_closed_form_rel", luxemburg_closed_form_rel},
          {"luxemburg_property_rel", luxemburg_property_rel},
          {"rearrangement_integral_rel", rearrangement_integral_rel},
          {"marcinkiewicz_abs", marcinkiewicz_abs},
          {"embedding_value_abs", embedding_value_abs},
          {"embedding_slope_abs", embedding_slope_abs},
          {"p4_midpoint_abs", p4_midpoint_abs},
          {"quadratic_order_min", quadratic_order_min},
          {"apriori_slack", apriori_slack},
          {"weak_star_rel", weak_star_rel},
          {"regularity_spread", regularity_spread},
          {"uniqueness_abs", uniqueness_abs},
          {"sup_variation", sup_variation},
          {"test_function_rel", test_function_rel},
          {"runtime_budget_s", std::vector<double>(budget + 1, budget + 12)}};
}

const Tolerances& tolerances() {
  static const Tolerances t;
  return t;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

SampledField constant_field(int dim, std::size_t n, double extent, double v) {
  return SampledField::from_function(dim, n, extent, [v](std::span<const double>) { return v; });
}

// ---------------------------------------------------------------- calculus

CriterionResult conjugate_pair(std::uint64_t) {
  CriterionResult r{1, "conjugate pair (1+s)log(1+s)-s <-> e^s-s-1", false, "", 0, {}};
  const NFunction conj = conjugate(NFunction::llogl());
  double worst = 0.0;
  for (double s : numerics::geometric_grid(0.01, 20.0, 30)) {
    worst = std::max(worst, rel_err(conj(s), std::expm1(s) - s));
  }
  r.passed = worst <= tolerances().conjugate_rel;
  r.detail = "max rel err " + fmt(worst) + " over 30 points in [0.01, 20]";
  r.data = {{"max_rel_err", worst}};
  return r;
}

NFunction tabulated_example() {
  std::vector<double> t{0.0};
  std::vector<double> v{0.0};
  for (double x : numerics::geometric_grid(1e-3, 1e3, 61)) {
    t.push_back(x);
    v.push_back(x * x * (1.0 + std::log1p(x)));
  }
  return NFunction::tabulated(std::move(t), std::move(v));
}

CriterionResult biconjugate(std::uint64_t) {
  CriterionResult r{2, "biconjugate identity for built-in kinds", false, "", 0, {}};
  struct Case {
    NFunction b;
    double lo, hi;
  };
  const std::vector<Case> cases = {
      {NFunction::power(2.5), 0.05, 20.0},
      {NFunction::power(1.5, 2.0), 0.05, 20.0},
      {NFunction::zygmund(2.0, 1.0), 0.05, 20.0},
      {NFunction::llogl(), 0.05, 20.0},
      {NFunction::exp_conjugate(), 0.05, 20.0},
      {NFunction::t_exp_t(), 0.05, 20.0},
      {pathological_nfunction(2.0, 3.0), 1.5, 1000.0},
      {tabulated_example(), 0.05, 20.0},
  };
  double worst = 0.0;
  nlohmann::json per_kind = nlohmann::json::object();
  for (const auto& c : cases) {
    const NFunction bb = conjugate(conjugate(c.b));
    double w = 0.0;
    for (double t : numerics::geometric_grid(c.lo, c.hi, 20)) w = std::max(w, rel_err(bb(t), c.b(t)));
    per_kind[c.b.label()] = w;
    worst = std::max(worst, w);
  }
  r.passed = worst <= tolerances().biconjugate_rel;
  r.detail = "max rel err " + fmt(worst) + " over " + std::to_string(cases.size()) + " kinds";
  r.data = per_kind;
  return r;
}

CriterionResult pathological(std::uint64_t) {
  CriterionResult r{3, "pathological N-function fails Delta2", false, "", 0, {}};
  const NFunction b = pathological_nfunction(2.0, 3.0);
  const PathologicalSegments& seg = *b.segments();
  bool sandwich = true;
  for (double t : numerics::geometric_grid(1.0, 1e6, 20000)) {
    const double v = b(t);
    if (v < t * t * (1.0 - 1e-12) || v > t * t * t * (1.0 + 1e-12)) sandwich = false;
  }
  bool ratios = seg.k.size() >= 4;
  bool increasing = ratios;
  double worst = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(4, seg.k.size()); ++i) {
    const double ratio = b(2.0 * seg.a[i]) / b(seg.a[i]);
    const double e = rel_err(ratio, seg.k[i]);
    worst = std::max(worst, e);
    if (e > tolerances().pathological_ratio_rel) ratios = false;
    if (i > 0 && !(seg.k[i] > seg.k[i - 1])) increasing = false;
    rows.push_back({{"a", seg.a[i]}, {"k", seg.k[i]}, {"ratio", ratio}});
  }
  r.passed = sandwich && ratios && increasing;
  r.detail = std::string("t^2<=B<=t^3 ") + (sandwich ? "ok" : "VIOLATED") +
             ", B(2a_i)/B(a_i)=k_i max rel err " + fmt(worst) + ", k_i increasing " +
             (increasing ? "yes" : "no");
  r.data = {{"segments", rows}, {"sandwich", sandwich}};
  return r;
}

// ------------------------------------------------------------------- norms

NFunction random_nfunction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (rng() % 5) {
    case 0: return NFunction::power(1.2 + 2.8 * u(rng), 0.5 + u(rng));
    case 1: return NFunction::zygmund(1.5 + 2.0 * u(rng), 2.0 * u(rng));
    case 2: return NFunction::llogl();
    case 3: return NFunction::exp_conjugate();
    default: return NFunction::t_exp_t();
  }
}

// Independent inverse: bisection on B itself.
double inverse_oracle(const NFunction& b, double y) {
  double lo = 0.0;
  double hi = 1.0;
  while (b(hi) < y) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (b(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CriterionResult luxemburg(std::uint64_t seed) {
  CriterionResult r{4, "Luxemburg norm closed form and properties", false, "", 0, {}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_closed = 0.0;
  for (int i = 0; i < 10; ++i) {
    const NFunction b = random_nfunction(rng);
    const int dim = 1 + static_cast<int>(rng() % 2);
    const double extent = 0.5 + 1.5 * u(rng);
    const double c = std::pow(10.0, -1.0 + 2.0 * u(rng));
    const double m = std::pow(extent, dim);
    const double want = c / inverse_oracle(b, 1.0 / m);
    const double got = luxemburg_norm(b, constant_field(dim, 12, extent, c));
    worst_closed = std::max(worst_closed, rel_err(got, want));
  }
  double worst_homog = 0.0;
  double worst_unit = 0.0;
  for (int i = 0; i < 100; ++i) {
    const NFunction b = random_nfunction(rng);
    const int dim = 1 + static_cast<int>(rng() % 2);
    const std::size_t n = 4 + rng() % 29;
    SampledField f(dim, n, 0.5 + u(rng));
    for (double& v : f.raw()) v = u(rng) < 0.2 ? 0.0 : (u(rng) - 0.3) * 5.0;
    const double norm = luxemburg_norm(b, f);
    if (norm == 0.0) continue;
    const double lambda = (u(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -1.0 + 1.5 * u(rng));
    SampledField g = f;
    for (double& v : g.raw()) v *= lambda;
    worst_homog = std::max(worst_homog, rel_err(luxemburg_norm(b, g), std::abs(lambda) * norm));
    worst_unit = std::max(worst_unit, std::abs(modular(b, f, norm) - 1.0));
  }
  const auto& tol = tolerances();
  r.passed = worst_closed <= tol.luxemburg_closed_form_rel &&
             worst_homog <= tol.luxemburg_property_rel && worst_unit <= tol.luxemburg_property_rel;
  r.detail = "closed form " + fmt(worst_closed) + ", homogeneity " + fmt(worst_homog) +
             ", |modular at norm - 1| " + fmt(worst_unit);
  r.data = {{"closed_form", worst_closed}, {"homogeneity", worst_homog}, {"unit_modular", worst_unit}};
  return r;
}

CriterionResult rearrangement(std::uint64_t seed) {
  CriterionResult r{5, "rearrangement and Marcinkiewicz norm", false, "", 0, {}};
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool equimeasurable = true;
  double worst_integral = 0.0;
  for (int i = 0; i < 100; ++i) {
    SampledField f(1 + static_cast<int>(rng() % 2), 8 + rng() % 57, 1.0);
    for (double& v : f.raw()) v = std::pow(10.0, 4.0 * u(rng) - 2.0) * (u(rng) - 0.5);
    const RearrangementProfile prof = rearrange(f);
    std::vector<double> mags = f.magnitudes();
    std::sort(mags.begin(), mags.end(), std::greater<>());
    if (mags != prof.fstar) equimeasurable = false;
    const double a = numerics::compensated_sum(mags);
    const double b = numerics::compensated_sum(prof.fstar);
    worst_integral = std::max(worst_integral, rel_err(b, a));
  }
  // f*(s) = s^{-1/2} on (0, 1): sup_s f**(s) / phi^{-1}(1/s) = 2 for phi = t^2.
  nlohmann::json norms = nlohmann::json::array();
  bool profile_ok = true;
  for (std::size_t n : {16384u, 65536u, 262144u}) {
    const SampledField f = SampledField::from_function(
        1, n, 1.0, [](std::span<const double> x) { return 1.0 / std::sqrt(x[0]); });
    const double m = marcinkiewicz_norm(NFunction::power(2.0), f).norm;
    norms.push_back(m);
    if (std::abs(m - 2.0) > tolerances().marcinkiewicz_abs) profile_ok = false;
  }
  r.passed = equimeasurable && worst_integral <= tolerances().rearrangement_integral_rel && profile_ok;
  r.detail = std::string("equimeasurable ") + (equimeasurable ? "yes" : "no") +
             ", integral rel err " + fmt(worst_integral) + ", s^-1/2 norms " + norms.dump();
  r.data = {{"integral_rel_err", worst_integral}, {"profile_norms", norms}};
  return r;
}

// --------------------------------------------------------------- embedding

CriterionResult embedding(std::uint64_t) {
  CriterionResult r{6, "Sobolev-Orlicz embedding functions", false, "", 0, {}};
  const auto& tol = tolerances();
  // Power(2), N = 3: B_3(t) = t^6 / 16.
  const EmbeddingData e23 = embedding_functions(NFunction::power(2.0), 3);
  const double b3 = e23.B_N(2.0);
  const bool value_ok = std::abs(b3 - std::pow(2.0, 6) / 16.0) <= tol.embedding_value_abs;
  bool slopes_ok = true;
  nlohmann::json slopes = nlohmann::json::array();
  for (auto [p, N] : {std::pair{1.5, 2}, std::pair{2.0, 3}, std::pair{3.0, 4}}) {
    const EmbeddingData e = embedding_functions(NFunction::power(p), N);
    const double t2 = std::min(10.0, 0.5 * e.B_N_cap());
    const double t1 = 1e-2 * t2;
    const double slope = std::log(e.B_N(t2) / e.B_N(t1)) / std::log(t2 / t1);
    const double want = N * p / (N - p);
    slopes.push_back({{"p", p}, {"N", N}, {"slope", slope}, {"expected", want}});
    if (std::abs(slope - want) > tol.embedding_slope_abs) slopes_ok = false;
  }
  int classified = 0;
  int wrong = 0;
  for (double p : {1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0}) {
    for (int N : {2, 3, 4, 5}) {
      if (std::abs(p - N) < 0.25) continue;
      const GrowthClass want = p > N ? GrowthClass::Fast : GrowthClass::Slow;
      ++classified;
      if (growth_class(NFunction::power(p), N).growth != want) ++wrong;
    }
  }
  r.passed = value_ok && slopes_ok && wrong == 0;
  r.detail = "B_3(2)=" + fmt(b3) + ", slopes " + (slopes_ok ? "ok" : "OFF") + ", growth " +
             std::to_string(classified - wrong) + "/" + std::to_string(classified) + " correct";
  r.data = {{"B3_at_2", b3}, {"slopes", slopes}, {"misclassified", wrong}};
  return r;
}

// ------------------------------------------------------------------ solver

struct Instance {
  std::string name;
  OperatorSpec op;
  SampledField f;
  SolveResult result;
};

// Invariants every accepted solve must satisfy; returns a failure message or "".
std::string solve_invariants(const Instance& in, std::mt19937_64& rng) {
  const SolveResult& s = in.result;
  if (!s.converged) return in.name + ": not converged (" + s.note + ")";
  if (in.op.form == FluxForm::PotentialGradient && !s.energy_monotone) {
    return in.name + ": energy increased";
  }
  const double scale = std::max(1.0, std::abs(s.coercivity_gap));
  if (s.coercivity_gap < -1e-9 * scale) return in.name + ": discrete coercivity violated";
  bool nonneg = true;
  for (double v : in.f.raw()) nonneg = nonneg && v >= 0.0;
  if (nonneg && in.op.form == FluxForm::PotentialGradient) {
    for (double v : s.u.raw()) {
      if (v < -s.tolerance) return in.name + ": minimum principle violated";
    }
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    SampledField phi(in.f.dim(), in.f.n(), in.f.extent());
    for (std::size_t c = 0; c < phi.cells(); ++c) phi[c] = phi.is_boundary_cell(c) ? 0.0 : u(rng);
    const double defect = weak_form_defect(in.op, s.u, in.f, phi);
    if (std::abs(defect) > tolerances().test_function_rel * phi.max_abs() * in.f.l1_norm()) {
      return in.name + ": weak-form defect " + fmt(defect);
    }
  }
  return "";
}

Instance make_instance(std::string name, OperatorSpec op, SampledField f) {
  Instance in{std::move(name), std::move(op), std::move(f), {}};
  in.result = solve_approximate(in.op, in.f);
  return in;
}

// Simpson's rule on int_0^{1/2} (1/2 - x)^{1/3} dx after x = 1/2 - w^3.
double p4_midpoint_oracle() {
  const double wmax = std::cbrt(0.5);
  const int m = 2000;
  const double h = wmax / m;
  auto g = [](double w) { return 3.0 * w * w * w; };
  double s = g(0.0) + g(wmax);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return s * h / 3.0;
}

CriterionResult solver_oracles(std::uint64_t seed) {
  CriterionResult r{7, "1-D solver oracles", false, "", 0, {}};
  const auto& tol = tolerances();
  std::mt19937_64 rng(seed + 2);
  std::string failures;

  const std::size_t n = 512;
  Instance p4 = make_instance("p=4", OperatorSpec::potential(NFunction::power(4.0, 0.25)),
                              constant_field(1, n, 1.0, 1.0));
  const double mid = 0.5 * (p4.result.u[n / 2 - 1] + p4.result.u[n / 2]);
  const double oracle = p4_midpoint_oracle();
  const bool mid_ok = std::abs(mid - oracle) <= tol.p4_midpoint_abs;
  failures += solve_invariants(p4, rng);

  std::vector<double> errors;
  for (std::size_t m : {128u, 256u, 512u}) {
    Instance q = make_instance("quadratic n=" + std::to_string(m),
                               OperatorSpec::potential(NFunction::power(2.0, 0.5)),
                               constant_field(1, m, 1.0, 1.0));
    double err = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const double x = q.f.centre(c)[0];
      err = std::max(err, std::abs(q.result.u[c] - 0.5 * x * (1.0 - x)));
    }
    errors.push_back(err);
    const std::string inv = solve_invariants(q, rng);
    if (!inv.empty()) failures += (failures.empty() ? "" : "; ") + inv;
  }
  const double order1 = std::log2(errors[0] / errors[1]);
  const double order2 = std::log2(errors[1] / errors[2]);
  const bool order_ok = order1 >= tol.quadratic_order_min && order2 >= tol.quadratic_order_min;
  r.passed = mid_ok && order_ok && failures.empty();
  r.detail = "u(1/2)=" + fmt(mid) + " vs " + fmt(oracle) + ", observed orders " + fmt(order1) +
             ", " + fmt(order2) + (failures.empty() ? ", invariants ok" : ", " + failures);
  r.data = {{"p4_midpoint", mid},
            {"oracle", oracle},
            {"quadratic_errors", errors},
            {"orders", {order1, order2}}};
  return r;
}

CriterionResult apriori(std::uint64_t seed) {
  CriterionResult r{8, "a priori estimate with c0 = 2/d0", false, "", 0, {}};
  std::mt19937_64 rng(seed + 3);
  auto bump_f = [](std::span<const double> x) { return 1.0 + std::sin(std::numbers::pi * x[0]); };
  std::vector<Instance> instances;
  for (std::size_t m : {128u, 256u, 512u}) {
    instances.push_back(make_instance("quadratic n=" + std::to_string(m),
                                      OperatorSpec::potential(NFunction::power(2.0, 0.5)),
                                      constant_field(1, m, 1.0, 1.0)));
  }
  instances.push_back(make_instance("p=4", OperatorSpec::potential(NFunction::power(4.0, 0.25)),
                                    constant_field(1, 512, 1.0, 1.0)));
  instances.push_back(make_instance("p=1.5", OperatorSpec::potential(NFunction::power(1.5)),
                                    SampledField::from_function(1, 256, 1.0, bump_f)));
  instances.push_back(make_instance("z-perturbed p=3", OperatorSpec::z_perturbed(NFunction::power(3.0), 0.5),
                                    SampledField::from_function(1, 256, 1.0, bump_f)));
  instances.push_back(make_instance("t exp t", OperatorSpec::potential(NFunction::t_exp_t()),
                                    constant_field(1, 256, 1.0, 10.0)));
  {
    const std::vector<Atom> atom{Atom{{0.5, 0.5}, 1.0}};
    instances.push_back(make_instance("2-D Dirac k=16", OperatorSpec::potential(NFunction::power(2.0)),
                                      mollify_measure(atom, 16, 2, 65, 1.0)));
  }
  std::string failures;
  double worst_ratio = 0.0;
  nlohmann::json rows = nlohmann::json::array();
  for (const Instance& in : instances) {
    const std::string inv = solve_invariants(in, rng);
    if (!inv.empty()) failures += (failures.empty() ? "" : "; ") + inv;
    const double sup = in.result.u.max_abs();
    const std::vector<double> levels = {1e-3 * sup, 0.1 * sup, 0.5 * sup, sup, 2.0 * sup};
    const AprioriReport rep = apriori_report(in.op, in.result.u, in.f, levels);
    for (const AprioriRow& row : rep.rows) {
      if (row.bound > 0.0) worst_ratio = std::max(worst_ratio, row.lhs1 / row.bound);
    }
    if (!rep.ok) failures += (failures.empty() ? "" : "; ") + in.name + ": bound exceeded";
    rows.push_back({{"instance", in.name},
                    {"d0", in.op.d0},
                    {"divided_convention_holds", rep.divided_holds},
                    {"multiplied_convention_holds", rep.multiplied_holds}});
  }
  r.passed = failures.empty() && worst_ratio <= tolerances().apriori_slack;
  r.detail = std::to_string(instances.size()) + " instances x 5 levels, max lhs/bound " +
             fmt(worst_ratio) + (failures.empty() ? "" : ", " + failures);
  r.data = {{"max_ratio", worst_ratio}, {"instances", rows}};
  return r;
}

CriterionResult measure_data(std::uint64_t) {
  CriterionResult r{9, "2-D Dirac datum: weak-*, Cauchy, regularity", false, "", 0, {}};
  const auto& tol = tolerances();
  const OperatorSpec op = OperatorSpec::potential(NFunction::power(2.0));
  const std::vector<Atom> atom{Atom{{0.5, 0.5}, 1.0}};

  const SampledField f16 = mollify_measure(atom, 16, 2, 129, 1.0);
  const std::vector<std::function<double(double, double)>> tests = {
      [](double x, double) { return 1.0 + x * x; },
      [](double x, double y) { return std::cos(x) * std::exp(y); },
      [](double x, double y) {
        return 1.0 + std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
      }};
  double worst_pair = 0.0;
  for (const auto& phi : tests) {
    numerics::CompensatedSum s;
    for (std::size_t c = 0; c < f16.cells(); ++c) {
      const auto x = f16.centre(c);
      s.add(f16[c] * phi(x[0], x[1]) * f16.cell_measure());
    }
    worst_pair = std::max(worst_pair, rel_err(s.value(), phi(0.5, 0.5)));
  }

  ProblemSpec problem;
  problem.dim = 2;
  problem.n = 129;
  problem.datum = DatumKind::AtomicMeasure;
  problem.atoms = atom;
  problem.mollifier_levels = {4, 8, 16};
  const ConvergenceStudy cs = convergence_study(op, problem);

  // Refinement: the mollifier radius shrinks with the grid (four cells).
  const RegularityTargets targets =
      regularity_targets(op.B, 2, 2.0 * problem.datum_mass(), std::sqrt(2.0));
  std::vector<RegularityMeasures> grids;
  for (std::size_t n : {65u, 129u, 257u}) {
    const int k = static_cast<int>((n - 1) / 4);
    const SolveResult s = solve_approximate(op, mollify_measure(atom, k, 2, n, 1.0));
    require_converged(s, "Dirac n=" + std::to_string(n));
    grids.push_back(regularity_measures(s.u, discrete_gradient(s.u), op.B, &targets));
  }
  const RegularityReport rep = regularity_verdict(grids, false, tol.regularity_spread);
  r.passed = worst_pair <= tol.weak_star_rel && cs.cauchy_decreasing && rep.finite_stable;
  r.detail = "weak-* rel err " + fmt(worst_pair) + ", Cauchy decreasing " +
             (cs.cauchy_decreasing ? "yes" : "no") + ", verdict " + rep.verdict + " (spreads " +
             fmt(rep.quantities["u_vs_Phi1"]["spread"].get<double>()) + ", " +
             fmt(rep.quantities["grad_vs_Psi1"]["spread"].get<double>()) + ")";
  r.data = {{"weak_star_rel_err", worst_pair}, {"convergence", cs.to_json()}, {"regularity", rep.to_json()}};
  return r;
}

CriterionResult uniqueness(std::uint64_t) {
  CriterionResult r{10, "uniqueness: mollifier vs truncation sequences", false, "", 0, {}};
  const std::size_t n = 512;
  const SampledField f = SampledField::from_function(
      1, n, 1.0, [](std::span<const double> x) { return 1.0 / std::sqrt(std::abs(x[0] - 0.5)); });
  const std::vector<int> levels = {4, 8, 16, 32, 64, 128, 256, 512};
  const UniquenessResult u =
      uniqueness_experiment(OperatorSpec::potential(NFunction::power(2.0, 0.5)), f, levels);
  r.passed = u.final_discrepancy <= tolerances().uniqueness_abs && u.monotone;
  std::string series;
  for (double d : u.discrepancy) series += (series.empty() ? "" : " ") + fmt(d);
  r.detail = "final " + fmt(u.final_discrepancy) + ", monotone " + (u.monotone ? "yes" : "no") +
             ", per level [" + series + "]";
  r.data = u.to_json();
  return r;
}

CriterionResult fast_growth(std::uint64_t) {
  CriterionResult r{11, "fast growth B = t e^t: bounded u", false, "", 0, {}};
  const OperatorSpec op = OperatorSpec::potential(NFunction::t_exp_t());
  std::vector<RegularityMeasures> grids;
  double lo = INFINITY;
  double hi = 0.0;
  for (std::size_t n : {128u, 256u, 512u}) {
    const SampledField f = SampledField::from_function(1, n, 1.0, [](std::span<const double> x) {
      return 10.0 * (1.0 + std::cos(2.0 * std::numbers::pi * x[0]));
    });
    const SolveResult s = solve_approximate(op, f);
    require_converged(s, "t exp t n=" + std::to_string(n));
    grids.push_back(regularity_measures(s.u, discrete_gradient(s.u), op.B, nullptr));
    lo = std::min(lo, s.u.max_abs());
    hi = std::max(hi, s.u.max_abs());
  }
  const double variation = (hi - lo) / hi;
  const RegularityReport rep = regularity_verdict(grids, true, tolerances().sup_variation);
  const bool grad_finite = rep.quantities["grad_vs_B"]["finite"].get<bool>();
  r.passed = variation < tolerances().sup_variation && grad_finite;
  r.detail = "sup|u| variation " + fmt(variation) + ", grad against B finite " +
             (grad_finite ? "yes" : "no");
  r.data = rep.to_json();
  return r;
}

}  // namespace

std::vector<int> suite_criteria(const std::string& suite) {
  if (suite == "calculus") return {1, 2, 3};
  if (suite == "norms") return {4, 5};
  if (suite == "embedding") return {6};
  if (suite == "solver") return {7, 8, 9, 10, 11};
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  throw Error(ErrorKind::InvalidArgument,
              "suite must be calculus|norms|embedding|solver|all, got '" + suite + "'");
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
  using Fn = CriterionResult (*)(std::uint64_t);
  static constexpr Fn table[] = {nullptr,       conjugate_pair, biconjugate,   pathological,
                                 luxemburg,     rearrangement,  embedding,     solver_oracles,
                                 apriori,       measure_data,   uniqueness,    fast_growth};
  static constexpr const char* names[] = {
      "",
      "conjugate pair (1+s)log(1+s)-s <-> e^s-s-1",
      "biconjugate identity for built-in kinds",
      "pathological N-function fails Delta2",
      "Luxemburg norm closed form and properties",
      "rearrangement and Marcinkiewicz norm",
      "Sobolev-Orlicz embedding functions",
      "1-D solver oracles",
      "a priori estimate with c0 = 2/d0",
      "2-D Dirac datum: weak-*, Cauchy, regularity",
      "uniqueness: mollifier vs truncation sequences",
      "fast growth B = t e^t: bounded u"};
  if (id < 1 || id > 11) throw Error(ErrorKind::InvalidArgument, "criterion id out of range");
  const auto start = Clock::now();
  CriterionResult r;
  try {
    r = table[id](seed);
  } catch (const Error& e) {
    r.id = id;
    r.name = names[id];
    r.passed = false;
    r.detail = e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (r.seconds > tolerances().budget[id]) {
    r.passed = false;
    r.detail += ", runtime " + fmt(r.seconds) + " s over budget " + fmt(tolerances().budget[id]);
  }
  return r;
}

std::vector<CriterionResult> run_suite(const std::string& suite, std::uint64_t seed) {
  std::vector<CriterionResult> out;
  for (int id : suite_criteria(suite)) out.push_back(run_criterion(id, seed));
  return out;
}

}  // namespace orlicz::verify
