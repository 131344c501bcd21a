#pragma once

// Finite-difference realization of the approximation scheme: regularize the
// datum, solve the approximate problems with zero Dirichlet data, and measure
// the a priori, convergence, uniqueness and level-set quantities.
//
// Discretization: for every cell and every choice of one-sided differences
// (forward/backward per axis) the energy density B(|D u|) is weighted by
// h^dim / 2^dim; ghost cells outside the box carry -u (odd reflection). For
// B(t) = t^2/2 this is the standard cell-centred five-point scheme.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orlicz/embedding.hpp"
#include "orlicz/field.hpp"
#include "orlicz/operator.hpp"

namespace orlicz {

struct Atom {
  Vec2 x{0.0, 0.0};
  double weight = 1.0;
};

enum class DatumKind { L1Sample, AtomicMeasure };
enum class ApproximationMode { MollifySequence, TwoSequenceUniqueness };

struct ProblemSpec {
  int dim = 1;
  std::size_t n = 128;
  double extent = 1.0;
  DatumKind datum = DatumKind::L1Sample;
  SampledField l1_datum;
  std::vector<Atom> atoms;
  std::vector<int> mollifier_levels{4, 8, 16};
  std::vector<double> truncation_levels{0.01, 0.1, 1.0};
  ApproximationMode mode = ApproximationMode::MollifySequence;
  /// Extra grid sizes for the refinement-stability verdict.
  std::vector<std::size_t> refinements;
  std::uint64_t seed = 7;

  /// Validates level ordering and datum presence.
  void validate() const;
  double datum_mass() const;

  /// The datum is either {"type": "atomic", "atoms": [{"x": [..], "weight": w}]}
  /// or {"type": "l1", "expression": "..."} with expressions from a fixed
  /// catalogue (see tools/README section of the project README).
  static ProblemSpec from_json(const nlohmann::json& spec);
};

/// Standard bump exp(-1/(1-|x|^2)) on |x| < 1, unnormalized.
double bump(double r);

/// Sum of weight * k^N rho(k |x - x_a|), normalized per atom on the grid so
/// each atom keeps its weight exactly.
SampledField mollify_measure(std::span<const Atom> atoms, int k, int dim, std::size_t n,
                             double extent);

struct L1Approximation {
  SampledField f_k;
  double l1_distance = 0.0;
};

/// Convolution with the radius-1/k bump (zero extension outside the box,
/// weights normalized on the infinite lattice), then clamped so that
/// |f_k| <= 2|f| where f != 0.
L1Approximation approximate_l1_data(const SampledField& f, int k);

struct SolverOptions {
  double rel_tol = 1e-9;       // residual max-norm / ||f||_inf
  int max_newton = 200;
  int max_outer = 400;         // z-perturbed fixed point
  double relaxation = 0.5;
  double eps_scale = 1e-8;     // regularization eps = eps_scale * h
  int polish_steps = 2;
};

struct SolveResult {
  SampledField u;
  double residual = 0.0;      // max-norm of the strong-form residual
  double tolerance = 0.0;
  int newton_iterations = 0;
  int outer_iterations = 0;
  bool converged = false;
  bool energy_monotone = true;
  std::vector<double> energy_history;
  double coercivity_gap = 0.0;  // sum A.D u - d0 sum B(|D u|), weighted
  std::string note;
};

SolveResult solve_approximate(const OperatorSpec& op, const SampledField& f,
                              const SolverOptions& options = {});

/// Throws NonConvergence (with `context`) unless the solve converged.
void require_converged(const SolveResult& r, const std::string& context);

/// Discrete energy sum w B(|D u|) - sum f u h^dim (potential forms only).
double discrete_energy(const OperatorSpec& op, const SampledField& u, const SampledField& f);

/// sum w A(x, u, D u) . D phi - sum f phi h^dim.
double weak_form_defect(const OperatorSpec& op, const SampledField& u,
                        const SampledField& f, const SampledField& phi);

/// Weighted stencil sum of B(|D u|) over the terms owned by cells with
/// |u| < t: the discrete int_{|u| < t} B(|grad u|).
double truncated_gradient_modular(const NFunction& b, const SampledField& u, double t);

struct AprioriRow {
  double t = 0.0;
  double lhs1 = 0.0;
  double bound = 0.0;  // c0 t ||f||_1
  bool lhs1_ok = true;
  double lhs2_divided = 0.0;    // int conj(B)(|A| / d)
  double lhs2_multiplied = 0.0; // int conj(B)(d |A|)
};

struct AprioriReport {
  double c0 = 0.0;
  double f_l1 = 0.0;
  double d = 0.0;
  double slack = 1.1;
  std::vector<AprioriRow> rows;
  bool ok = true;  // every lhs1 within slack * bound
  bool divided_holds = true;      // lhs2 / d convention within slack * bound
  bool multiplied_holds = true;   // lhs2 * d convention within slack * bound
  /// lhs2 <= c0 t ||f||_1 + c1 P(t) + c2 fitted per convention.
  double fit_c1_divided = 0.0, fit_c2_divided = 0.0;
  double fit_c1_multiplied = 0.0, fit_c2_multiplied = 0.0;
  nlohmann::json to_json() const;
};

AprioriReport apriori_report(const OperatorSpec& op, const SampledField& u,
                             const SampledField& f, std::span<const double> truncation_levels);

struct ConvergenceStudy {
  std::vector<int> levels;
  std::vector<SampledField> data;
  std::vector<SolveResult> solves;
  std::vector<double> taus;
  /// cauchy[tau][j][m] = |{|u_j - u_m| > tau}|.
  std::vector<std::vector<std::vector<double>>> cauchy;
  bool cauchy_decreasing = true;
  std::vector<double> tail_constant;  // per level: max_l |{|u| >= l}| B(l) / l
  double flux_consistency = 0.0;      // dual norm of the finest residual
  nlohmann::json to_json() const;
};

ConvergenceStudy convergence_study(const OperatorSpec& op, const ProblemSpec& problem,
                                   const SolverOptions& options = {},
                                   std::span<const double> taus = {});

struct UniquenessResult {
  std::vector<int> levels;
  std::vector<double> discrepancy;           // max |u1 - u2| per level
  std::vector<double> gradient_discrepancy;  // max |grad u1 - grad u2|
  double final_discrepancy = 0.0;
  double final_gradient_discrepancy = 0.0;
  bool monotone = true;
  nlohmann::json to_json() const;
};

/// Compares the mollifier sequence with the truncation sequence T_k f.
UniquenessResult uniqueness_experiment(const OperatorSpec& op, const SampledField& f,
                                       std::span<const int> levels,
                                       const SolverOptions& options = {});

struct RegularityMeasures {
  std::size_t n = 0;
  double u_sup = 0.0;
  double u_phi1 = 0.0;
  double grad_psi1 = 0.0;
  std::optional<double> u_phi2;
  std::optional<double> grad_psi2;
  double grad_b = 0.0;  // weak quasi-norm of |grad u| against B
};

RegularityMeasures regularity_measures(const SampledField& u, const SampledField& grad_u,
                                       const NFunction& b,
                                       const RegularityTargets* targets);

struct RegularityReport {
  std::vector<RegularityMeasures> grids;
  /// name -> {"values": [...], "spread": max/min, "stable": bool}
  nlohmann::json quantities;
  bool finite_stable = true;
  std::string verdict;
  nlohmann::json to_json() const;
};

/// "finite/stable" when every tracked quantity is finite and its max/min
/// ratio across grids stays within 1 + tolerance.
RegularityReport regularity_verdict(std::span<const RegularityMeasures> grids,
                                    bool track_sup, double tolerance = 0.2);

}  // namespace orlicz
