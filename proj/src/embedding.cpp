#include "orlicz/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orlicz/error.hpp"

namespace orlicz {

namespace {

constexpr std::size_t kKnots = 512;
constexpr double kFirstKnot = 1e-6;

// Largest r <= hi with f(r) finite (f finite at lo).
double finite_cap(const std::function<double(double)>& f, double lo, double hi) {
  if (std::isfinite(f(hi))) return hi;
  for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-9; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (std::isfinite(f(mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

// Exponent alpha with g(t) ~ t^alpha between a and b.
double local_exponent(const std::function<double(double)>& g, double a, double b) {
  return std::log(g(b) / g(a)) / std::log(b / a);
}

}  // namespace

NFunction normalize_origin(const NFunction& b) {
  const double b1 = b(1.0);
  NFunctionParts parts;
  parts.value = [b, b1](double t) { return t <= 1.0 ? t * b1 : b(t); };
  parts.derivative = [b, b1](double t) { return t < 1.0 ? b1 : b.derivative(t); };
  parts.second_derivative = [b](double t) {
    return t < 1.0 ? 0.0 : b.second_derivative(t);
  };
  parts.domain_cap = b.domain_cap();
  parts.smooth = false;
  parts.breakpoints.push_back(1.0);
  for (double bp : b.breakpoints()) {
    if (bp > 1.0) parts.breakpoints.push_back(bp);
  }
  return NFunction::derived(NKind::OriginNormalized, b.label() + "^0", std::move(parts),
                            {{"of", b.to_json()}}, b);
}

std::string to_string(GrowthClass g) {
  switch (g) {
    case GrowthClass::Slow: return "slow";
    case GrowthClass::Fast: return "fast";
    case GrowthClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

GrowthClass growth_class_from_string(const std::string& s) {
  if (s == "slow") return GrowthClass::Slow;
  if (s == "fast") return GrowthClass::Fast;
  if (s == "undetermined") return GrowthClass::Undetermined;
  throw Error(ErrorKind::ParseError, "growth class must be slow|fast, got '" + s + "'");
}

GrowthEvidence growth_class(const NFunction& b, int N,
                            std::optional<GrowthClass> override_class) {
  if (N < 2) throw Error(ErrorKind::InvalidArgument, "growth class needs N >= 2");
  const double expo = 1.0 / (N - 1.0);
  auto g = [&b, expo](double t) { return std::pow(t / b(t), expo); };
  const int J = std::min(40, static_cast<int>(std::floor(std::log2(b.domain_cap()))));
  if (J < 7) {
    throw Error(ErrorKind::InvalidArgument, "domain cap too small for growth test");
  }
  GrowthEvidence ev;
  double total = 0.0;
  for (int j = 1; j <= J; ++j) {
    const double lo = std::ldexp(1.0, j - 1);
    const double hi = std::ldexp(1.0, j);
    const double inc = numerics::integrate(g, lo, hi, 1e-10);
    total += inc;
    ev.T.push_back(hi);
    ev.integral.push_back(total);
    ev.increments.push_back(inc);
    if (j > 1) {
      const double prev = ev.increments[ev.increments.size() - 2];
      ev.ratios.push_back(prev > 0.0 ? inc / prev : 0.0);
    }
  }
  const auto last = ev.ratios.end() - 5;
  const bool fast = std::all_of(last, ev.ratios.end(), [](double r) { return r < 0.9; });
  const bool slow = std::all_of(last, ev.ratios.end(), [](double r) { return r > 1.1; });
  ev.growth = fast ? GrowthClass::Fast : slow ? GrowthClass::Slow : GrowthClass::Undetermined;
  if (override_class) {
    ev.growth = *override_class;
    ev.overridden = true;
  }
  return ev;
}

double EmbeddingData::H_N(double x) const {
  if (x <= 0.0) return 0.0;
  if (x > s.back() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::DomainCapExceeded, "H_N beyond the last knot");
  }
  if (x < s.front()) {
    // Power law continued from the first two knots.
    const double slope = std::log(H[1] / H[0]) / std::log(s[1] / s[0]);
    return H.front() * std::pow(x / s.front(), slope);
  }
  return std::exp(log_H_(std::log(x)));
}

double EmbeddingData::H_N_inverse(double h) const {
  if (h <= 0.0) return 0.0;
  if (h > H.back() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::DomainCapExceeded, "B_N argument beyond the table range");
  }
  if (h >= H.back()) return s.back();
  if (h < H.front()) {
    const double slope = std::log(H[1] / H[0]) / std::log(s[1] / s[0]);
    return s.front() * std::pow(h / H.front(), 1.0 / slope);
  }
  const auto it = std::lower_bound(H.begin(), H.end(), h);
  const auto i = static_cast<std::size_t>(it - H.begin());
  if (*it == h) return s[i];
  const double lh = std::log(h);
  const double x = numerics::bisect_increasing(
      [this, lh](double ls) { return log_H_(ls) - lh; }, std::log(s[i - 1]),
      std::log(s[i]), 1e-16);
  return std::exp(x);
}

double EmbeddingData::B_N(double t) const { return b_used(H_N_inverse(t)); }

double EmbeddingData::phi_N(double x) const { return std::pow(H_N(x), Nprime); }

void EmbeddingData::build_interpolant() {
  std::vector<double> ls(s.size());
  std::vector<double> lh(H.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    ls[i] = std::log(s[i]);
    lh[i] = std::log(H[i]);
  }
  log_H_ = numerics::MonotoneCubic(std::move(ls), std::move(lh));
}

EmbeddingData embedding_functions(const NFunction& b, int N,
                                  std::optional<GrowthClass> override_class) {
  EmbeddingData out;
  out.N = N;
  out.Nprime = static_cast<double>(N) / (N - 1.0);
  out.growth = growth_class(b, N, override_class);
  if (out.growth.growth == GrowthClass::Undetermined) {
    throw Error(ErrorKind::UndeterminedGrowth,
                "growth of " + b.label() + " for N=" + std::to_string(N) +
                    " is undetermined; pass an explicit override (slow|fast)");
  }
  const double expo = 1.0 / (N - 1.0);
  auto integrand_of = [expo](const NFunction& f) {
    return [f, expo](double t) { return std::pow(t / f(t), expo); };
  };
  // Normalize at the origin only when the integral near zero diverges.
  const double alpha_b =
      local_exponent(integrand_of(b), 0.1 * kFirstKnot, kFirstKnot);
  out.origin_normalized = alpha_b <= -1.0 + 1e-3;
  out.b_used = out.origin_normalized ? normalize_origin(b) : b;
  const auto g = integrand_of(out.b_used);
  const double alpha = out.origin_normalized
                           ? 0.0
                           : local_exponent(g, 0.1 * kFirstKnot, kFirstKnot);

  out.s = numerics::geometric_grid(kFirstKnot, out.b_used.domain_cap(), kKnots);
  std::vector<double> cuts(out.b_used.breakpoints().begin(),
                           out.b_used.breakpoints().end());
  double total = out.s.front() * g(out.s.front()) / (alpha + 1.0);
  out.phi.push_back(total);
  for (std::size_t i = 1; i < out.s.size(); ++i) {
    double lo = out.s[i - 1];
    const double hi = out.s[i];
    for (double c : cuts) {
      if (c > lo && c < hi) {
        total += numerics::integrate(g, lo, c, 1e-12);
        lo = c;
      }
    }
    total += numerics::integrate(g, lo, hi, 1e-12);
    out.phi.push_back(total);
  }
  for (double v : out.phi) out.H.push_back(std::pow(v, 1.0 / out.Nprime));
  out.build_interpolant();
  return out;
}

RegularityTargets regularity_targets(const NFunction& b, int N, double K, double diam,
                                     std::optional<GrowthClass> override_class) {
  if (N < 2) throw Error(ErrorKind::InvalidArgument, "regularity targets need N >= 2");
  if (!(K > 0.0) || !(diam > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "regularity targets need K > 0, diam > 0");
  }
  RegularityTargets out;
  out.N = N;
  out.K = K;
  const double np = static_cast<double>(N) / (N - 1.0);
  out.c1 = 1.0 / (4.0 * diam);
  out.K_bar = 2.0 * std::max(K, std::pow(K, np));
  out.c_bar = 1.0 / std::pow(K, 1.0 / N);
  const double c1 = out.c1;

  auto phi1_value = [b, c1, K, np](double r) {
    return r <= 0.0 ? 0.0 : std::pow(b(c1 * r) / (K * r), np);
  };
  const double phi1_cap = finite_cap(
      [&](double r) { return K * r * phi1_value(r); }, 1.0, b.domain_cap() / c1);
  NFunctionParts p1;
  p1.value = phi1_value;
  p1.domain_cap = phi1_cap;
  p1.smooth = false;
  out.Phi1 = NFunction::custom("Phi1", std::move(p1));

  // Auxiliary phi equating (K r / B(c1 r))^{N'} with K r / s.
  NFunctionParts aux;
  aux.value = [phi1_value, K](double r) { return K * r * phi1_value(r); };
  aux.domain_cap = phi1_cap;
  aux.smooth = false;
  const NFunction phi_aux = NFunction::custom("phi", std::move(aux));
  const double y_max = phi_aux(phi1_cap);
  const double psi1_cap =
      b(b.domain_cap()) <= y_max ? b.domain_cap() : inverse(b, y_max);
  const double kbar = out.K_bar;
  NFunctionParts q1;
  q1.value = [b, phi_aux, kbar](double r) {
    if (r <= 0.0) return 0.0;
    const double y = b(r);
    return y / (kbar * inverse(phi_aux, y));
  };
  q1.domain_cap = psi1_cap;
  q1.smooth = false;
  out.Psi1 = NFunction::custom("Psi1", std::move(q1));
  out.notes.push_back(
      "Psi1 uses phi(r) = K r Phi1(r), the level where both tail bounds agree");

  const GrowthEvidence ev = growth_class(b, N, override_class);
  out.growth = ev.growth;
  if (out.growth == GrowthClass::Slow) {
    const auto emb = std::make_shared<EmbeddingData>(embedding_functions(b, N, override_class));
    const double cbar = out.c_bar;
    NFunctionParts p2;
    p2.value = [emb, cbar, np](double r) {
      return r <= 0.0 ? 0.0 : emb->B_N(cbar * std::pow(r, 1.0 / np)) / r;
    };
    p2.domain_cap = std::pow(emb->B_N_cap() / cbar, np);
    p2.smooth = false;
    out.Phi2 = NFunction::custom("Phi2", std::move(p2));
    NFunctionParts q2;
    q2.value = [emb, b](double r) { return r <= 0.0 ? 0.0 : b(r) / emb->phi_N(r); };
    q2.domain_cap = std::min(b.domain_cap(), emb->s.back());
    q2.smooth = false;
    out.Psi2 = NFunction::custom("Psi2", std::move(q2));
  } else if (out.growth == GrowthClass::Fast) {
    out.u_bounded_expected = true;
    out.gradient_fast_target = b;
  } else {
    out.notes.push_back("growth undetermined: Phi2/Psi2 and the L-infinity target are not "
                        "produced; pass an override to force a class");
  }
  return out;
}

double box_diameter(const SampledField& f) {
  return f.extent() * std::sqrt(static_cast<double>(f.dim()));
}

namespace {

void require_zero_boundary(const SampledField& u) {
  for (std::size_t c = 0; c < u.cells(); ++c) {
    if (u.is_boundary_cell(c) && std::abs(u[c]) > 1e-12) {
      throw Error(ErrorKind::BoundaryNotZero,
                  "boundary cell " + std::to_string(c) + " holds " + std::to_string(u[c]));
    }
  }
}

double gradient_modular(const NFunction& b, const SampledField& grad_u) {
  numerics::CompensatedSum acc;
  for (double v : grad_u.magnitudes()) acc.add(b(v));
  return acc.value() * grad_u.cell_measure();
}

}  // namespace

InequalityCheck sobolev_poincare_check(const NFunction& b, const SampledField& u,
                                       const SampledField& grad_u, int N,
                                       std::optional<double> c1) {
  u.require_same_grid(grad_u);
  require_zero_boundary(u);
  const double c = c1.value_or(1.0 / (4.0 * box_diameter(u)));
  InequalityCheck out;
  if (N == 1) {
    for (std::size_t i = 0; i < u.cells(); ++i) out.lhs = std::max(out.lhs, b(c * std::abs(u[i])));
  } else {
    const double np = static_cast<double>(N) / (N - 1.0);
    numerics::CompensatedSum acc;
    for (std::size_t i = 0; i < u.cells(); ++i) acc.add(std::pow(b(c * std::abs(u[i])), np));
    out.lhs = std::pow(acc.value() * u.cell_measure(), 1.0 / np);
  }
  out.rhs = gradient_modular(b, grad_u);
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

InequalityCheck poincare_check(const NFunction& b, const SampledField& u,
                               const SampledField& grad_u, int /*N*/,
                               std::optional<double> c1) {
  u.require_same_grid(grad_u);
  require_zero_boundary(u);
  const double c = c1.value_or(1.0 / (4.0 * box_diameter(u)));
  InequalityCheck out;
  numerics::CompensatedSum acc;
  for (std::size_t i = 0; i < u.cells(); ++i) acc.add(b(c * std::abs(u[i])));
  out.lhs = acc.value() * u.cell_measure();
  out.rhs = gradient_modular(b, grad_u);
  out.ratio = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
  return out;
}

}  // namespace orlicz
