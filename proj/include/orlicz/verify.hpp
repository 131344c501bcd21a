#pragma once

// The acceptance checks, grouped into suites. Each check builds its own
// oracle from closed forms or plain quadrature, so it does not lean on the
// code path it is checking.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace orlicz::verify {

/// Pinned tolerances and runtime budgets (seconds).
struct Tolerances {
  double conjugate_rel = 1e-5;
  double biconjugate_rel = 1e-6;
  double pathological_ratio_rel = 1e-12;
  double luxemburg_closed_form_rel = 1e-7;
  double luxemburg_property_rel = 1e-8;
  double rearrangement_integral_rel = 1e-12;
  double marcinkiewicz_abs = 0.01;
  double embedding_value_abs = 1e-3;
  double embedding_slope_abs = 0.05;
  double p4_midpoint_abs = 1e-3;
  double quadratic_order_min = 1.9;
  double apriori_slack = 1.1;
  double weak_star_rel = 0.05;
  double regularity_spread = 0.2;
  double uniqueness_abs = 1e-6;
  double sup_variation = 0.02;
  double test_function_rel = 1e-7;
  double budget[12] = {0, 1, 5, 2, 5, 5, 10, 30, 30, 180, 60, 60};

  nlohmann::json to_json() const;
};

const Tolerances& tolerances();

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  nlohmann::json data;  // deterministic numbers behind the verdict
};

/// calculus, norms, embedding, solver or all.
std::vector<int> suite_criteria(const std::string& suite);

CriterionResult run_criterion(int id, std::uint64_t seed);
std::vector<CriterionResult> run_suite(const std::string& suite, std::uint64_t seed);

}  // namespace orlicz::verify
