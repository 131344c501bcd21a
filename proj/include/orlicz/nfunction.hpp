#pragma once

// N-functions: convex growth functions B with B(t)/t -> 0 at the origin and
// B(t)/t -> infinity at infinity, together with the calculus the rest of the
// library needs (Young conjugation, inversion, growth diagnostics).

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace orlicz {

enum class NKind {
  Power,
  Zygmund,
  LLogL,
  ExpConjugate,
  TExpT,
  Pathological,
  Tabulated,
  Conjugate,
  OriginNormalized,
  Custom,
};

std::string to_string(NKind kind);

/// The explicit non-doubling construction: B(t) = t^p except on chords
/// (a_i, b_i) where it follows the affine map through (a_i, a_i^p).
struct PathologicalSegments {
  double p = 0.0;
  double q = 0.0;
  std::vector<int> k;          // exponents k_i
  std::vector<double> a;       // a_i = 2^{k_i}
  std::vector<double> b;       // chord / power re-intersection
  std::vector<double> slope;   // 2^{(p-1)k_i} (k_i - 1)

  /// f_i(t) = 2^{p k_i} + slope_i (t - 2^{k_i}).
  double chord(std::size_t i, double t) const;
};

/// Callables backing an NFunction. Only `value` is mandatory.
struct NFunctionParts {
  std::function<double(double)> value;
  std::function<double(double)> derivative;         // right derivative
  std::function<double(double)> second_derivative;  // may be empty
  std::function<double(double)> inverse;            // may be empty
  double domain_cap = 1e12;
  bool smooth = true;  // false when B' has jumps or B is only C^1
  std::vector<double> breakpoints;
};

/// Immutable, cheaply copyable handle to an N-function.
class NFunction {
 public:
  static NFunction power(double p, double scale = 1.0);
  /// t^p log^beta(1 + t), p > 1, beta >= 0.
  static NFunction zygmund(double p, double beta);
  /// (1 + t) log(1 + t) - t.
  static NFunction llogl();
  /// exp(t) - t - 1.
  static NFunction exp_conjugate();
  /// t (exp(t) - 1): the N-function representative of t exp(t).
  static NFunction t_exp_t();
  /// Knots (t_i, B_i) with t_0 = 0, B_0 = 0, both strictly increasing.
  static NFunction tabulated(std::vector<double> t, std::vector<double> values);
  static NFunction custom(std::string label, NFunctionParts parts);
  /// Used by the calculus to tag derived objects (conjugates, normalizations).
  static NFunction derived(NKind kind, std::string label, NFunctionParts parts,
                           nlohmann::json params = {},
                           std::optional<NFunction> base = std::nullopt);
  static NFunction pathological(PathologicalSegments segments, double domain_cap);

  /// Parses {"kind": ..., "params": {...}}.
  static NFunction from_json(const nlohmann::json& spec);
  nlohmann::json to_json() const;

  NKind kind() const;
  const std::string& label() const;
  const nlohmann::json& params() const;

  /// B(t); throws DomainCapExceeded for t > domain_cap.
  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;
  bool has_closed_form_inverse() const;
  double closed_form_inverse(double y) const;

  double domain_cap() const;
  bool smooth() const;
  std::span<const double> breakpoints() const;
  const PathologicalSegments* segments() const;
  const NFunction* base() const;

 private:
  struct Impl;
  explicit NFunction(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// B(t) with the domain check.
double evaluate(const NFunction& b, double t);

struct ConjugatePoint {
  double value = 0.0;   // sup_t (t s - B(t))
  double argmax = 0.0;  // maximizer t*(s); also the derivative of the conjugate
};

/// Single-point Young conjugate. Throws SupremumOutOfRange when the maximizer
/// would leave [0, domain_cap].
ConjugatePoint conjugate_point(const NFunction& b, double s);

/// The conjugate as an NFunction (Tabulated input stays Tabulated).
NFunction conjugate(const NFunction& b);

/// t with B(t) = y to relative accuracy 1e-10 (bisection on an expanding
/// geometric bracket unless a closed form exists).
double inverse(const NFunction& b, double y);

struct Delta2Stats {
  double ratio_max = 0.0;
  std::vector<double> s;
  std::vector<double> ratio_series;  // B(2s)/B(s)
  /// Grid evidence only: true when the series keeps growing across the grid.
  bool unbounded_evidence = false;
};

Delta2Stats delta2_stats(const NFunction& b, double s0, double smax,
                         std::size_t n);

struct SimonenkoIndices {
  double i_b = 0.0;  // inf t B'(t) / B(t) over the grid
  double s_b = 0.0;  // sup over the grid
};

SimonenkoIndices simonenko_indices(const NFunction& b, double t0, double tmax,
                                   std::size_t points_per_decade = 200);

struct DominationTail {
  double eps = 0.0;
  std::vector<double> t;
  std::vector<double> ratio;  // P(t) / B(eps t)
  bool decreasing = false;
};

struct DominationEvidence {
  bool dominates = false;
  std::vector<DominationTail> tails;
};

/// Numeric evidence for P << B: every tail of P(t)/B(eps t) must be
/// nonincreasing and fall by at least a factor 1/tolerance over the tail.
DominationEvidence dominates_much(const NFunction& p, const NFunction& b,
                                  std::span<const double> eps_grid,
                                  double tmax, double tolerance = 1e-3);

/// Default eps grid used by the CLI and the duality checks.
std::vector<double> default_eps_grid();

/// Non-doubling N-function trapped between t^p and t^q, segments generated up
/// to `domain_cap`.
NFunction pathological_nfunction(double p, double q, double domain_cap = 1e12);

/// max over pairs of |xi . eta| - B(|xi|) - conj(B)(|eta|).
double fenchel_young_check(
    const NFunction& b,
    std::span<const std::pair<std::vector<double>, std::vector<double>>> samples);

struct ConvexityReport {
  bool ok = true;
  double max_violation = 0.0;
};

/// Sampled check of the N-function invariants on a geometric grid in
/// [t0, tmax]: B(0) = 0, strict increase, midpoint convexity.
ConvexityReport check_nfunction(const NFunction& b, double t0, double tmax,
                                std::size_t n = 200, double tol = 1e-9);

}  // namespace orlicz
