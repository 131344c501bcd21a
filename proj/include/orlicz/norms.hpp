#pragma once

// Modulars, Luxemburg norms, truncations, rearrangements and
// Orlicz-Marcinkiewicz quasi-norms of sampled fields. Integrals are midpoint
// sums over cells, so every value carries an O(h^2) quadrature error.

#include <vector>

#include "orlicz/field.hpp"
#include "orlicz/nfunction.hpp"

namespace orlicz {

/// sum_cells B(|f| / lambda) * cell_measure. Vector fields use |f| per cell.
double modular(const NFunction& b, const SampledField& f, double lambda);

/// inf{lambda > 0 : modular(b, f, lambda) <= 1}; the returned lambda always
/// satisfies the modular bound.
double luxemburg_norm(const NFunction& b, const SampledField& f, double rel_tol = 1e-10);

struct HolderCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

/// |sum xi . eta| against 2 ||xi||_B ||eta||_{conj B}.
HolderCheck holder_check(const NFunction& b, const SampledField& xi,
                         const SampledField& eta, double tol = 1e-9);

/// Pointwise clamp of u to [-t, t].
SampledField truncate(const SampledField& u, double t);

/// grad_u masked to zero where |u| >= t.
SampledField gradient_truncated(const SampledField& u, const SampledField& grad_u,
                                double t);

struct RearrangementProfile {
  double cell_measure = 0.0;
  std::vector<double> fstar;      // f* on [j m, (j+1) m), nonincreasing
  std::vector<double> fstarstar;  // f** at the right step boundaries (j+1) m

  double total_measure() const { return cell_measure * static_cast<double>(fstar.size()); }
  /// f*(s), right-continuous; 0 beyond the total measure.
  double fstar_at(double s) const;
  /// f**(s) = (1/s) int_0^s f*, with f**(0) = f*(0).
  double fstarstar_at(double s) const;
};

RearrangementProfile rearrange(const SampledField& f);

struct MarcinkiewiczNorm {
  double norm = 0.0;
  /// True when some step boundaries were skipped because 1/s left phi's range.
  bool range_truncated = false;
};

/// sup over step boundaries s of f**(s) / phi^{-1}(1/s).
MarcinkiewiczNorm marcinkiewicz_norm(const NFunction& phi, const SampledField& f);

/// Tail estimator of limsup_t t / phi^{-1}(1/|{|f| > t}|): the max over the
/// top `tail_fraction` of distinct levels, skipping levels whose super-level
/// set is empty.
double weak_marcinkiewicz(const NFunction& phi, const SampledField& f,
                          double tail_fraction = 0.2);

/// Same estimator on raw magnitudes with a uniform cell measure.
double weak_marcinkiewicz(const NFunction& phi, const std::vector<double>& magnitudes,
                          double cell_measure, double tail_fraction = 0.2);

}  // namespace orlicz
