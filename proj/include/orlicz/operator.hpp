#pragma once

// The flux A(x, z, xi) of the monotone problem together with its growth data
// and sampled checks of coercivity, growth, A(x, z, 0) = 0 and monotonicity.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orlicz/field.hpp"
#include "orlicz/nfunction.hpp"

namespace orlicz {

using Vec2 = std::array<double, 2>;
using FluxFn = std::function<Vec2(const Vec2& x, double z, const Vec2& xi)>;

enum class FluxForm { PotentialGradient, ZPerturbed, Custom };

std::string to_string(FluxForm form);

struct OperatorSpec {
  NFunction B = NFunction::power(2.0);
  NFunction P = NFunction::llogl();
  std::optional<SampledField> K_field;
  double d0 = 1.0;
  /// Growth constant; 0 means "calibrate from samples".
  double d = 0.0;
  FluxForm form = FluxForm::PotentialGradient;
  double theta = 0.0;
  bool strongly_monotone = true;
  FluxFn custom_flux;

  /// A = B'(|xi|) xi / |xi|, d0 = 1.
  static OperatorSpec potential(NFunction b);
  /// A = (1 + theta arctan(z) / pi) B'(|xi|) xi / |xi|, |theta| < 1,
  /// d0 = 1 - |theta| / 2.
  static OperatorSpec z_perturbed(NFunction b, double theta);
  static OperatorSpec custom(NFunction b, FluxFn flux, bool strongly_monotone);

  /// {"form": "potential"|"z_perturbed", "theta", "d0", "d",
  ///  "strongly_monotone", "nfunction": {...}, "p_function": {...}}
  static OperatorSpec from_json(const nlohmann::json& spec);
  nlohmann::json to_json() const;

  /// Scalar multiplier of the potential flux: 1 + theta arctan(z) / pi.
  double z_coefficient(double z) const;
  /// Flux with |xi| replaced by sqrt(|xi|^2 + eps^2) inside B'(|xi|)/|xi|.
  Vec2 flux(const Vec2& x, double z, const Vec2& xi, double eps = 0.0) const;
  double K_at(const Vec2& x) const;
};

struct OperatorValidation {
  std::size_t samples = 0;
  bool coercive = true;
  bool growth = true;
  bool vanishes_at_zero = true;
  bool monotone = true;
  bool strictly_monotone = true;
  bool k_field_in_E = true;
  double worst_coercivity = 0.0;   // min of (A.xi - d0 B(|xi|)) / max(1, B)
  double worst_monotonicity = 0.0; // min of (A(xi) - A(eta)).(xi - eta)
  double max_flux_at_zero = 0.0;
  double d_admissible = 0.0;       // largest d for which the growth bound held
  double d_used = 0.0;
  std::vector<std::string> notes;

  bool ok() const {
    return coercive && growth && vanishes_at_zero && monotone && k_field_in_E;
  }
  nlohmann::json to_json() const;
};

/// Random samples with x in the box, z in [-10, 10], |xi| in [0, xi_max].
/// The growth bound is calibrated: d_admissible is reported and op.d (when
/// nonzero) is checked against it.
OperatorValidation validate_operator(const OperatorSpec& op, int dim, double extent = 1.0,
                                     std::uint64_t seed = 7, std::size_t samples = 400,
                                     double xi_max = 10.0);

/// op with d set to the calibrated value when it was left at 0.
OperatorSpec calibrated(const OperatorSpec& op, int dim, double extent = 1.0,
                        std::uint64_t seed = 7);

}  // namespace orlicz
