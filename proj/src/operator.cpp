#include "orlicz/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "orlicz/error.hpp"

namespace orlicz {

std::string to_string(FluxForm form) {
  switch (form) {
    case FluxForm::PotentialGradient: return "potential";
    case FluxForm::ZPerturbed: return "z_perturbed";
    case FluxForm::Custom: return "custom";
  }
  return "custom";
}

OperatorSpec OperatorSpec::potential(NFunction b) {
  OperatorSpec op;
  op.B = std::move(b);
  return op;
}

OperatorSpec OperatorSpec::z_perturbed(NFunction b, double theta) {
  if (!(std::abs(theta) < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "z-perturbation needs |theta| < 1");
  }
  OperatorSpec op;
  op.B = std::move(b);
  op.form = FluxForm::ZPerturbed;
  op.theta = theta;
  op.d0 = 1.0 - std::abs(theta) / 2.0;
  return op;
}

OperatorSpec OperatorSpec::custom(NFunction b, FluxFn flux, bool strongly_monotone) {
  OperatorSpec op;
  op.B = std::move(b);
  op.form = FluxForm::Custom;
  op.custom_flux = std::move(flux);
  op.strongly_monotone = strongly_monotone;
  return op;
}

OperatorSpec OperatorSpec::from_json(const nlohmann::json& spec) {
  try {
    OperatorSpec op;
    const NFunction b = spec.contains("nfunction") ? NFunction::from_json(spec.at("nfunction"))
                                                   : NFunction::power(2.0);
    const std::string form = spec.value("form", "potential");
    if (form == "potential") {
      op = potential(b);
    } else if (form == "z_perturbed") {
      op = z_perturbed(b, spec.value("theta", 0.5));
    } else {
      throw Error(ErrorKind::ParseError, "operator form must be potential|z_perturbed");
    }
    if (spec.contains("p_function")) op.P = NFunction::from_json(spec.at("p_function"));
    op.d0 = spec.value("d0", op.d0);
    op.d = spec.value("d", 0.0);
    op.strongly_monotone = spec.value("strongly_monotone", true);
    return op;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("operator spec: ") + e.what());
  }
}

nlohmann::json OperatorSpec::to_json() const {
  return {{"form", to_string(form)},   {"theta", theta},
          {"d0", d0},                  {"d", d},
          {"strongly_monotone", strongly_monotone},
          {"nfunction", B.to_json()},  {"p_function", P.to_json()},
          {"has_K_field", K_field.has_value()}};
}

double OperatorSpec::z_coefficient(double z) const {
  return form == FluxForm::ZPerturbed ? 1.0 + theta * std::atan(z) / std::numbers::pi : 1.0;
}

Vec2 OperatorSpec::flux(const Vec2& x, double z, const Vec2& xi, double eps) const {
  if (form == FluxForm::Custom) return custom_flux(x, z, xi);
  const double norm2 = xi[0] * xi[0] + xi[1] * xi[1];
  const double r = std::sqrt(norm2 + eps * eps);
  if (r == 0.0) return {0.0, 0.0};
  const double scale = z_coefficient(z) * B.derivative(r) / r;
  return {scale * xi[0], scale * xi[1]};
}

double OperatorSpec::K_at(const Vec2& x) const {
  if (!K_field) return 0.0;
  const auto& k = *K_field;
  const double h = k.h();
  auto clampi = [&](double v) {
    const long i = static_cast<long>(std::floor(v / h));
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(k.n()) - 1));
  };
  const std::size_t i = clampi(x[0]);
  const std::size_t c = k.dim() == 1 ? i : i + k.n() * clampi(x[1]);
  return std::abs(k[c]);
}

nlohmann::json OperatorValidation::to_json() const {
  return {{"samples", samples},
          {"coercive", coercive},
          {"growth", growth},
          {"vanishes_at_zero", vanishes_at_zero},
          {"monotone", monotone},
          {"strictly_monotone", strictly_monotone},
          {"k_field_in_E", k_field_in_E},
          {"worst_coercivity", worst_coercivity},
          {"worst_monotonicity", worst_monotonicity},
          {"max_flux_at_zero", max_flux_at_zero},
          {"d_admissible", d_admissible},
          {"d_used", d_used},
          {"notes", notes},
          {"ok", ok()}};
}

OperatorValidation validate_operator(const OperatorSpec& op, int dim, double extent,
                                     std::uint64_t seed, std::size_t samples,
                                     double xi_max) {
  OperatorValidation out;
  out.samples = samples;
  out.worst_coercivity = std::numeric_limits<double>::infinity();
  out.worst_monotonicity = std::numeric_limits<double>::infinity();
  out.d_admissible = std::numeric_limits<double>::infinity();
  xi_max = std::min(xi_max, 0.5 * op.B.domain_cap());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const NFunction b_conj = conjugate(op.B);
  const NFunction p_conj = conjugate(op.P);
  auto random_vec = [&](double scale) {
    // Mix of log-uniform and uniform magnitudes, so both ends get samples.
    const double mag = unit(rng) < 0.5 ? scale * std::pow(10.0, -6.0 * unit(rng))
                                       : scale * unit(rng);
    if (dim == 1) return Vec2{unit(rng) < 0.5 ? -mag : mag, 0.0};
    const double ang = 2.0 * std::numbers::pi * unit(rng);
    return Vec2{mag * std::cos(ang), mag * std::sin(ang)};
  };
  auto dot = [](const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; };
  auto norm = [&](const Vec2& a) { return std::sqrt(dot(a, a)); };
  for (std::size_t i = 0; i < samples; ++i) {
    const Vec2 x{extent * unit(rng), dim == 2 ? extent * unit(rng) : 0.0};
    const double z = 20.0 * unit(rng) - 10.0;
    const Vec2 xi = random_vec(xi_max);
    const Vec2 eta = random_vec(xi_max);
    const Vec2 a = op.flux(x, z, xi);
    const double bxi = op.B(norm(xi));
    const double coer = (dot(a, xi) - op.d0 * bxi) / std::max(1.0, bxi);
    out.worst_coercivity = std::min(out.worst_coercivity, coer);
    if (coer < -1e-9) out.coercive = false;

    const double na = norm(a);
    if (na > 0.0) {
      const double budget = inverse(b_conj, bxi) +
                            inverse(p_conj, op.B(std::min(std::abs(z), op.B.domain_cap()))) +
                            op.K_at(x);
      out.d_admissible = std::min(out.d_admissible, budget / (3.0 * na));
    }

    const Vec2 a0 = op.flux(x, z, {0.0, 0.0});
    out.max_flux_at_zero = std::max(out.max_flux_at_zero, norm(a0));
    if (norm(a0) > 1e-14) out.vanishes_at_zero = false;

    const Vec2 ae = op.flux(x, z, eta);
    const Vec2 diff{xi[0] - eta[0], xi[1] - eta[1]};
    const double mono = dot({a[0] - ae[0], a[1] - ae[1]}, diff);
    const double scale = std::max(1.0, norm(a) * norm(diff) + norm(ae) * norm(diff));
    out.worst_monotonicity = std::min(out.worst_monotonicity, mono / scale);
    if (mono < -1e-12 * scale) out.monotone = false;
    if (norm(diff) > 0.0 && !(mono > 0.0)) out.strictly_monotone = false;
  }
  if (op.strongly_monotone && !out.strictly_monotone) {
    out.monotone = false;
    out.notes.push_back("declared strongly monotone but a sampled pair was not strict");
  }
  if (op.d > 0.0) {
    out.d_used = op.d;
    out.growth = op.d <= out.d_admissible * (1.0 + 1e-9);
  } else {
    out.d_used = out.d_admissible;
    out.notes.push_back("growth constant d calibrated from samples on |xi| <= " +
                        std::to_string(xi_max));
  }
  if (op.K_field) {
    // Finite modular of conj(B)(|K| / lambda) over lambda = 2^-5 .. 2^5.
    for (int e = -5; e <= 5 && out.k_field_in_E; ++e) {
      const double lambda = std::ldexp(1.0, e);
      try {
        double total = 0.0;
        for (double v : op.K_field->magnitudes()) total += b_conj(v / lambda);
        if (!std::isfinite(total)) out.k_field_in_E = false;
      } catch (const Error&) {
        out.k_field_in_E = false;
      }
    }
  }
  return out;
}

OperatorSpec calibrated(const OperatorSpec& op, int dim, double extent, std::uint64_t seed) {
  if (op.d > 0.0) return op;
  OperatorSpec out = op;
  out.d = validate_operator(op, dim, extent, seed, 200).d_admissible;
  return out;
}

}  // namespace orlicz
