#pragma once

// Growth at infinity, the Sobolev-Orlicz embedding functions H_N, B_N,
// phi_N, the level-set targets built from them, and sampled Sobolev-Poincare
// and Poincare checks.

#include <optional>
#include <string>
#include <vector>

#include "orlicz/field.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/numerics.hpp"

namespace orlicz {

/// B^0: t B(1) on [0, 1], B(t) beyond. Kink at t = 1.
NFunction normalize_origin(const NFunction& b);

enum class GrowthClass { Slow, Fast, Undetermined };

std::string to_string(GrowthClass g);
GrowthClass growth_class_from_string(const std::string& s);

struct GrowthEvidence {
  GrowthClass growth = GrowthClass::Undetermined;
  bool overridden = false;
  std::vector<double> T;           // 2^j
  std::vector<double> integral;    // int_1^T (t / B(t))^{1/(N-1)} dt
  std::vector<double> increments;  // I(2T) - I(T)
  std::vector<double> ratios;      // successive increment ratios
};

/// Fast when the last five increment ratios are all below 0.9, Slow when
/// they all exceed 1.1, Undetermined otherwise (p = N sits in between).
GrowthEvidence growth_class(const NFunction& b, int N,
                            std::optional<GrowthClass> override_class = std::nullopt);

class EmbeddingData {
 public:
  int N = 0;
  double Nprime = 0.0;
  GrowthEvidence growth;
  bool origin_normalized = false;
  NFunction b_used = NFunction::power(2.0);
  std::vector<double> s;    // knots
  std::vector<double> H;    // H_N(s_i)
  std::vector<double> phi;  // phi_N(s_i) = H_N(s_i)^{N'}

  double H_N(double s) const;
  double H_N_inverse(double h) const;
  double B_N(double t) const;
  double phi_N(double s) const;
  /// Largest argument B_N accepts: H_N at the last knot.
  double B_N_cap() const { return H.back(); }

  /// Called once the tables are filled.
  void build_interpolant();

 private:
  numerics::MonotoneCubic log_H_;  // log H against log s
};

/// 512 log-spaced knots on [1e-6, domain_cap]. B is normalized at the origin
/// when the integral near zero would diverge. Throws UndeterminedGrowth when
/// the class is undetermined and no override is given.
EmbeddingData embedding_functions(const NFunction& b, int N,
                                  std::optional<GrowthClass> override_class = std::nullopt);

struct RegularityTargets {
  int N = 0;
  double K = 0.0;
  double K_bar = 0.0;
  double c1 = 0.0;
  double c_bar = 0.0;
  GrowthClass growth = GrowthClass::Undetermined;
  NFunction Phi1 = NFunction::power(2.0);
  NFunction Psi1 = NFunction::power(2.0);
  std::optional<NFunction> Phi2;  // slow growth only
  std::optional<NFunction> Psi2;
  bool u_bounded_expected = false;  // fast growth: u in L^infinity
  NFunction gradient_fast_target = NFunction::power(2.0);
  std::vector<std::string> notes;
};

/// c1 = 1/(4 diam), K_bar = 2 max{K, K^{N'}}. The auxiliary phi inside Psi1
/// equates the two tail bounds of the level-set argument:
/// phi(r) = K r Phi1(r).
RegularityTargets regularity_targets(const NFunction& b, int N, double K, double diam,
                                     std::optional<GrowthClass> override_class = std::nullopt);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// lhs = (int B^{N'}(c1 |u|))^{1/N'} (sup for N = 1), rhs = int B(|grad u|).
InequalityCheck sobolev_poincare_check(const NFunction& b, const SampledField& u,
                                       const SampledField& grad_u, int N,
                                       std::optional<double> c1 = std::nullopt);

/// lhs = int B(c1 |u|), rhs = int B(|grad u|).
InequalityCheck poincare_check(const NFunction& b, const SampledField& u,
                               const SampledField& grad_u, int N,
                               std::optional<double> c1 = std::nullopt);

/// Diameter of the box [0, L]^dim.
double box_diameter(const SampledField& f);

}  // namespace orlicz
