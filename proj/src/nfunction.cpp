#include "orlicz/nfunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orlicz/error.hpp"
#include "orlicz/numerics.hpp"

namespace orlicz {

namespace {

constexpr double kPolynomialCap = 1e12;
constexpr double kExponentialCap = 700.0;
// t(e^t - 1) has B'(700) beyond the double range; keep its slope finite.
constexpr double kTExpTCap = 690.0;
// (1+t)log(1+t) - t grows slower than any power; its range stays finite far
// beyond the polynomial cap.
constexpr double kLLogLCap = 1e300;

double numeric_derivative(const std::function<double(double)>& f, double t,
                          double cap) {
  const double h = 1e-6 * std::max(t, 1e-6);
  const double lo = std::max(0.0, t - h);
  const double hi = std::min(cap, t + h);
  return (f(hi) - f(lo)) / (hi - lo);
}

// (1+t)log(1+t) - t = sum_{n>=2} (-1)^n t^n / (n (n-1)).
double llogl_value(double t) {
  if (t < 1e-2) {
    double term = t;
    double sum = 0.0;
    for (int n = 2; n < 14; ++n) {
      term *= -t;
      sum += term / static_cast<double>(n * (n - 1));
    }
    return -sum;
  }
  return (1.0 + t) * std::log1p(t) - t;
}

// exp(t) - t - 1 = sum_{n>=2} t^n / n!.
double exp_conjugate_value(double t) {
  if (t < 1e-2) {
    double term = t;
    double sum = 0.0;
    for (int n = 2; n < 14; ++n) {
      term *= t / static_cast<double>(n);
      sum += term;
    }
    return sum;
  }
  return std::expm1(t) - t;
}

}  // namespace

std::string to_string(NKind kind) {
  switch (kind) {
    case NKind::Power: return "power";
    case NKind::Zygmund: return "zygmund";
    case NKind::LLogL: return "llogl";
    case NKind::ExpConjugate: return "exp_conjugate";
    case NKind::TExpT: return "t_exp_t";
    case NKind::Pathological: return "pathological";
    case NKind::Tabulated: return "tabulated";
    case NKind::Conjugate: return "conjugate";
    case NKind::OriginNormalized: return "origin_normalized";
    case NKind::Custom: return "custom";
  }
  return "unknown";
}

double PathologicalSegments::chord(std::size_t i, double t) const {
  return std::pow(2.0, p * k[i]) + slope[i] * (t - a[i]);
}

struct NFunction::Impl {
  NKind kind = NKind::Custom;
  std::string label;
  nlohmann::json params;
  NFunctionParts parts;
  std::optional<PathologicalSegments> segments;
  std::optional<NFunction> base;
  std::optional<numerics::MonotoneCubic> table;
};

NFunction::NFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

NFunction NFunction::derived(NKind kind, std::string label, NFunctionParts parts,
                             nlohmann::json params, std::optional<NFunction> base) {
  auto impl = std::make_shared<Impl>();
  impl->kind = kind;
  impl->label = std::move(label);
  impl->params = std::move(params);
  impl->parts = std::move(parts);
  impl->base = std::move(base);
  return NFunction(std::move(impl));
}

NFunction NFunction::custom(std::string label, NFunctionParts parts) {
  return derived(NKind::Custom, std::move(label), std::move(parts));
}

NFunction NFunction::power(double p, double scale) {
  if (!(p > 1.0) || !(scale > 0.0)) {
    throw Error(ErrorKind::InvalidExponents, "power needs p > 1 and scale > 0");
  }
  NFunctionParts parts;
  parts.value = [p, scale](double t) { return scale * std::pow(t, p); };
  parts.derivative = [p, scale](double t) {
    return scale * p * std::pow(t, p - 1.0);
  };
  parts.second_derivative = [p, scale](double t) {
    return scale * p * (p - 1.0) * std::pow(t, p - 2.0);
  };
  parts.inverse = [p, scale](double y) {
    const double x = y / scale;
    return p == 3.0 ? std::cbrt(x) : p == 2.0 ? std::sqrt(x) : std::pow(x, 1.0 / p);
  };
  parts.domain_cap = kPolynomialCap;
  std::string label = scale == 1.0 ? "t^" + std::to_string(p)
                                   : std::to_string(scale) + "*t^" + std::to_string(p);
  return derived(NKind::Power, std::move(label), std::move(parts),
                 {{"p", p}, {"scale", scale}});
}

NFunction NFunction::zygmund(double p, double beta) {
  if (!(p > 1.0) || !(beta >= 0.0)) {
    throw Error(ErrorKind::InvalidExponents, "zygmund needs p > 1, beta >= 0");
  }
  NFunctionParts parts;
  parts.value = [p, beta](double t) {
    return std::pow(t, p) * std::pow(std::log1p(t), beta);
  };
  parts.derivative = [p, beta](double t) {
    if (t <= 0.0) return 0.0;
    const double l = std::log1p(t);
    return p * std::pow(t, p - 1.0) * std::pow(l, beta) +
           beta * std::pow(t, p) * std::pow(l, beta - 1.0) / (1.0 + t);
  };
  parts.second_derivative = [p, beta](double t) {
    if (t <= 0.0) return 0.0;
    const double l = std::log1p(t);
    const double u = 1.0 + t;
    return p * (p - 1.0) * std::pow(t, p - 2.0) * std::pow(l, beta) +
           2.0 * p * beta * std::pow(t, p - 1.0) * std::pow(l, beta - 1.0) / u +
           beta * (beta - 1.0) * std::pow(t, p) * std::pow(l, beta - 2.0) / (u * u) -
           beta * std::pow(t, p) * std::pow(l, beta - 1.0) / (u * u);
  };
  parts.domain_cap = kPolynomialCap;
  return derived(NKind::Zygmund,
                 "t^" + std::to_string(p) + " log^" + std::to_string(beta) + "(1+t)",
                 std::move(parts), {{"p", p}, {"beta", beta}});
}

NFunction NFunction::llogl() {
  NFunctionParts parts;
  parts.value = llogl_value;
  parts.derivative = [](double t) { return std::log1p(t); };
  parts.second_derivative = [](double t) { return 1.0 / (1.0 + t); };
  parts.domain_cap = kLLogLCap;
  return derived(NKind::LLogL, "(1+t)log(1+t)-t", std::move(parts),
                 nlohmann::json::object());
}

NFunction NFunction::exp_conjugate() {
  NFunctionParts parts;
  parts.value = exp_conjugate_value;
  parts.derivative = [](double t) { return std::expm1(t); };
  parts.second_derivative = [](double t) { return std::exp(t); };
  parts.domain_cap = kExponentialCap;
  return derived(NKind::ExpConjugate, "exp(t)-t-1", std::move(parts),
                 nlohmann::json::object());
}

NFunction NFunction::t_exp_t() {
  NFunctionParts parts;
  parts.value = [](double t) { return t * std::expm1(t); };
  parts.derivative = [](double t) { return std::expm1(t) + t * std::exp(t); };
  parts.second_derivative = [](double t) { return (2.0 + t) * std::exp(t); };
  parts.domain_cap = kTExpTCap;
  return derived(NKind::TExpT, "t(exp(t)-1)", std::move(parts),
                 nlohmann::json::object());
}

NFunction NFunction::tabulated(std::vector<double> t, std::vector<double> values) {
  if (t.size() < 3 || t.size() != values.size()) {
    throw Error(ErrorKind::InvalidArgument, "tabulated needs >= 3 matching knots");
  }
  if (t.front() != 0.0 || values.front() != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "tabulated knots must start at (0, 0)");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1]) || !(values[i] > values[i - 1])) {
      throw Error(ErrorKind::InvalidArgument,
                  "tabulated knots must be strictly increasing in t and B");
    }
  }
  // Interpolate log B against log t on the positive knots; power-law
  // extrapolation towards the origin.
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 1; i < t.size(); ++i) {
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(values[i]));
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = NKind::Tabulated;
  impl->label = "tabulated";
  nlohmann::json knots = nlohmann::json::array();
  for (std::size_t i = 0; i < t.size(); ++i) knots.push_back({t[i], values[i]});
  impl->params = {{"knots", knots}};
  impl->table.emplace(lx, ly);
  const numerics::MonotoneCubic* table = &*impl->table;
  const double t1 = t[1];
  const double b1 = values[1];
  const double slope0 = std::max(table->derivative(lx.front()), 1.0);
  NFunctionParts parts;
  parts.value = [table, t1, b1, slope0](double x) {
    if (x <= 0.0) return 0.0;
    if (x < t1) return b1 * std::pow(x / t1, slope0);
    return std::exp((*table)(std::log(x)));
  };
  parts.derivative = [table, t1, b1, slope0](double x) {
    if (x <= 0.0) return 0.0;
    if (x < t1) return b1 * slope0 * std::pow(x / t1, slope0 - 1.0) / t1;
    const double lxv = std::log(x);
    return std::exp((*table)(lxv)) * table->derivative(lxv) / x;
  };
  parts.second_derivative = [table, t1, b1, slope0](double x) {
    if (x <= 0.0) return 0.0;
    if (x < t1) {
      return b1 * slope0 * (slope0 - 1.0) * std::pow(x / t1, slope0 - 2.0) / (t1 * t1);
    }
    const double lxv = std::log(x);
    const double g = table->derivative(lxv);
    const double g2 = table->second_derivative(lxv);
    return std::exp((*table)(lxv)) * (g * g - g + g2) / (x * x);
  };
  parts.domain_cap = t.back();
  parts.smooth = false;
  impl->parts = std::move(parts);
  return NFunction(std::move(impl));
}

NFunction NFunction::pathological(PathologicalSegments segs, double domain_cap) {
  auto impl = std::make_shared<Impl>();
  impl->kind = NKind::Pathological;
  impl->label = "pathological(p=" + std::to_string(segs.p) +
                ", q=" + std::to_string(segs.q) + ")";
  impl->params = {{"p", segs.p}, {"q", segs.q}, {"domain_cap", domain_cap}};
  impl->segments = std::move(segs);
  const PathologicalSegments* s = &*impl->segments;
  // Index of the chord whose half-open interval [a_i, b_i) contains t.
  auto locate = [s](double t) -> std::optional<std::size_t> {
    auto it = std::upper_bound(s->a.begin(), s->a.end(), t);
    if (it == s->a.begin()) return std::nullopt;
    const auto i = static_cast<std::size_t>(it - s->a.begin()) - 1;
    if (t < s->b[i]) return i;
    return std::nullopt;
  };
  NFunctionParts parts;
  parts.value = [s, locate](double t) {
    if (auto i = locate(t); i && t > s->a[*i]) return s->chord(*i, t);
    return std::pow(t, s->p);
  };
  parts.derivative = [s, locate](double t) {
    if (auto i = locate(t)) return s->slope[*i];
    return s->p * std::pow(t, s->p - 1.0);
  };
  parts.second_derivative = [s, locate](double t) {
    if (locate(t)) return 0.0;
    return s->p * (s->p - 1.0) * std::pow(t, s->p - 2.0);
  };
  parts.domain_cap = domain_cap;
  parts.smooth = false;
  for (std::size_t i = 0; i < s->a.size(); ++i) {
    if (s->a[i] <= domain_cap) parts.breakpoints.push_back(s->a[i]);
    if (s->b[i] <= domain_cap) parts.breakpoints.push_back(s->b[i]);
  }
  impl->parts = std::move(parts);
  return NFunction(std::move(impl));
}

NFunction NFunction::from_json(const nlohmann::json& spec) {
  try {
    const std::string kind = spec.at("kind").get<std::string>();
    const nlohmann::json params =
        spec.contains("params") ? spec.at("params") : nlohmann::json::object();
    if (kind == "power") {
      return power(params.at("p").get<double>(), params.value("scale", 1.0));
    }
    if (kind == "zygmund") {
      return zygmund(params.at("p").get<double>(), params.value("beta", 1.0));
    }
    if (kind == "llogl") return llogl();
    if (kind == "exp_conjugate") return exp_conjugate();
    if (kind == "t_exp_t") return t_exp_t();
    if (kind == "pathological") {
      return pathological_nfunction(params.at("p").get<double>(),
                                    params.at("q").get<double>(),
                                    params.value("domain_cap", kPolynomialCap));
    }
    if (kind == "tabulated") {
      std::vector<double> t;
      std::vector<double> v;
      for (const auto& knot : params.at("knots")) {
        t.push_back(knot.at(0).get<double>());
        v.push_back(knot.at(1).get<double>());
      }
      return tabulated(std::move(t), std::move(v));
    }
    throw Error(ErrorKind::ParseError, "unknown N-function kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("N-function spec: ") + e.what());
  }
}

nlohmann::json NFunction::to_json() const {
  nlohmann::json out = {{"kind", to_string(kind())}, {"params", params()}};
  out["label"] = label();
  out["domain_cap"] = domain_cap();
  return out;
}

NKind NFunction::kind() const { return impl_->kind; }
const std::string& NFunction::label() const { return impl_->label; }
const nlohmann::json& NFunction::params() const { return impl_->params; }

double NFunction::operator()(double t) const {
  if (!(t >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "N-function argument must be >= 0");
  }
  if (t > impl_->parts.domain_cap * (1.0 + 1e-12)) {
    throw Error(ErrorKind::DomainCapExceeded,
                impl_->label + " evaluated at " + std::to_string(t) +
                    " beyond cap " + std::to_string(impl_->parts.domain_cap));
  }
  if (t == 0.0) return 0.0;
  return impl_->parts.value(t);
}

double NFunction::derivative(double t) const {
  const double cap = impl_->parts.domain_cap;
  if (t > cap * (1.0 + 1e-12)) {
    throw Error(ErrorKind::DomainCapExceeded, impl_->label + " derivative beyond cap");
  }
  if (impl_->parts.derivative) return impl_->parts.derivative(std::max(t, 0.0));
  return numeric_derivative(impl_->parts.value, t, cap);
}

double NFunction::second_derivative(double t) const {
  const double cap = impl_->parts.domain_cap;
  if (impl_->parts.second_derivative) {
    return impl_->parts.second_derivative(std::max(t, 0.0));
  }
  return numeric_derivative([this](double x) { return derivative(x); }, t, cap);
}

bool NFunction::has_closed_form_inverse() const {
  return static_cast<bool>(impl_->parts.inverse);
}

double NFunction::closed_form_inverse(double y) const { return impl_->parts.inverse(y); }

double NFunction::domain_cap() const { return impl_->parts.domain_cap; }
bool NFunction::smooth() const { return impl_->parts.smooth; }

std::span<const double> NFunction::breakpoints() const {
  return impl_->parts.breakpoints;
}

const PathologicalSegments* NFunction::segments() const {
  return impl_->segments ? &*impl_->segments : nullptr;
}

const NFunction* NFunction::base() const {
  return impl_->base ? &*impl_->base : nullptr;
}

double evaluate(const NFunction& b, double t) { return b(t); }

ConjugatePoint conjugate_point(const NFunction& b, double s) {
  if (!(s > 0.0)) return {};
  const double cap = b.domain_cap();
  const double slope_cap = b.derivative(cap);
  if (s > slope_cap) {
    throw Error(ErrorKind::SupremumOutOfRange,
                "slope " + std::to_string(s) + " beyond " + std::to_string(slope_cap) +
                    " for " + b.label());
  }
  if (b.kind() == NKind::Power) {
    const double p = b.params().at("p").get<double>();
    const double scale = b.params().at("scale").get<double>();
    const double t = std::pow(s / (p * scale), 1.0 / (p - 1.0));
    return {s * t * (1.0 - 1.0 / p), t};
  }
  auto reached = [&b, s](double t) { return b.derivative(t) >= s; };
  const numerics::Bracket br = numerics::expand_upward(reached, std::min(1.0, cap), cap);
  if (!std::isfinite(br.hi)) {
    throw Error(ErrorKind::SupremumOutOfRange, "maximizer beyond domain cap");
  }
  double t_star = 0.0;
  if (b.smooth()) {
    t_star = numerics::bisect_increasing(
        [&b, s](double t) { return b.derivative(t) - s; }, br.lo, br.hi);
  } else {
    t_star = numerics::golden_section_max(
        [&b, s](double t) { return t * s - b(t); }, br.lo, br.hi);
  }
  const double value = std::max(0.0, t_star * s - b(t_star));
  return {value, t_star};
}

namespace {

NFunction conjugate_tabulated(const NFunction& b) {
  const auto& knots = b.params().at("knots");
  const std::size_t n = knots.size();
  const double t1 = knots.at(1).at(0).get<double>();
  const double s_lo = b.derivative(t1);
  const double s_hi = b.derivative(b.domain_cap()) * (1.0 - 1e-12);
  std::vector<double> s = {0.0};
  std::vector<double> v = {0.0};
  for (double si : numerics::geometric_grid(std::max(s_lo, 1e-300), s_hi,
                                            std::max<std::size_t>(8 * n, 512))) {
    const double value = conjugate_point(b, si).value;
    if (value > v.back() && si > s.back()) {
      s.push_back(si);
      v.push_back(value);
    }
  }
  return NFunction::tabulated(std::move(s), std::move(v));
}

}  // namespace

NFunction conjugate(const NFunction& b) {
  if (b.kind() == NKind::Tabulated) return conjugate_tabulated(b);
  NFunctionParts parts;
  parts.value = [b](double s) { return conjugate_point(b, s).value; };
  parts.derivative = [b](double s) { return conjugate_point(b, s).argmax; };
  parts.second_derivative = [b](double s) {
    const double t = conjugate_point(b, s).argmax;
    const double curv = b.second_derivative(t);
    if (curv > 0.0 && std::isfinite(curv)) return 1.0 / curv;
    return std::numeric_limits<double>::infinity();
  };
  parts.domain_cap = b.derivative(b.domain_cap());
  parts.smooth = b.smooth();
  return NFunction::derived(NKind::Conjugate, "conj[" + b.label() + "]",
                            std::move(parts), {{"of", b.to_json()}}, b);
}

double inverse(const NFunction& b, double y) {
  if (!(y >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "inverse needs y >= 0");
  }
  if (y == 0.0) return 0.0;
  const double cap = b.domain_cap();
  const double y_cap = b(cap);
  if (y > y_cap * (1.0 + 1e-12)) {
    throw Error(ErrorKind::DomainCapExceeded,
                "inverse of " + b.label() + " at " + std::to_string(y) +
                    " beyond range " + std::to_string(y_cap));
  }
  if (b.has_closed_form_inverse()) return b.closed_form_inverse(y);
  if (y >= y_cap) return cap;
  double lo = std::min(1.0, cap);
  double hi = lo;
  if (b(lo) >= y) {
    while (b(lo) >= y && lo > 1e-300) {
      hi = lo;
      lo *= 0.5;
    }
  } else {
    while (b(hi) < y) {
      lo = hi;
      hi = std::min(2.0 * hi, cap);
    }
  }
  return numerics::bisect_increasing([&b, y](double t) { return b(t) - y; }, lo, hi,
                                     1e-16);
}

Delta2Stats delta2_stats(const NFunction& b, double s0, double smax, std::size_t n) {
  if (!(s0 > 0.0) || !(smax > s0) || n < 2) {
    throw Error(ErrorKind::InvalidArgument, "delta2_stats needs 0 < s0 < smax, n >= 2");
  }
  if (2.0 * smax > b.domain_cap() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::DomainCapExceeded, "delta2_stats needs 2 smax <= domain cap");
  }
  Delta2Stats out;
  out.s = numerics::geometric_grid(s0, smax, n);
  for (double s : out.s) {
    const double r = b(2.0 * s) / b(s);
    out.ratio_series.push_back(r);
    out.ratio_max = std::max(out.ratio_max, r);
  }
  // Evidence: the running maximum keeps growing across three windows.
  if (n >= 3) {
    const std::size_t w = n / 3;
    auto window_max = [&](std::size_t from, std::size_t to) {
      return *std::max_element(out.ratio_series.begin() + static_cast<long>(from),
                               out.ratio_series.begin() + static_cast<long>(to));
    };
    const double m1 = window_max(0, w);
    const double m2 = window_max(w, 2 * w);
    const double m3 = window_max(2 * w, n);
    out.unbounded_evidence = m2 > m1 * (1.0 + 1e-9) && m3 > m2 * (1.0 + 1e-9);
  }
  return out;
}

SimonenkoIndices simonenko_indices(const NFunction& b, double t0, double tmax,
                                   std::size_t points_per_decade) {
  if (!(t0 > 0.0) || !(tmax > t0)) {
    throw Error(ErrorKind::InvalidArgument, "simonenko_indices needs 0 < t0 < tmax");
  }
  const double decades = std::log10(tmax / t0);
  const auto n = static_cast<std::size_t>(
      std::max(2.0, std::ceil(decades * static_cast<double>(points_per_decade))));
  std::vector<double> grid = numerics::geometric_grid(t0, tmax, n);
  for (double bp : b.breakpoints()) {
    for (double t : {bp * (1.0 - 1e-9), bp * (1.0 + 1e-9)}) {
      if (t >= t0 && t <= tmax) grid.push_back(t);
    }
  }
  SimonenkoIndices out{std::numeric_limits<double>::infinity(), 0.0};
  for (double t : grid) {
    const double value = b(t);
    if (!(value > 0.0)) continue;
    const double r = t * b.derivative(t) / value;
    out.i_b = std::min(out.i_b, r);
    out.s_b = std::max(out.s_b, r);
  }
  return out;
}

std::vector<double> default_eps_grid() { return {1.0, 0.5, 0.25, 0.1}; }

DominationEvidence dominates_much(const NFunction& p, const NFunction& b,
                                  std::span<const double> eps_grid, double tmax,
                                  double tolerance) {
  DominationEvidence out;
  out.dominates = !eps_grid.empty();
  const double t_hi = std::min(tmax, p.domain_cap());
  for (double eps : eps_grid) {
    DominationTail tail;
    tail.eps = eps;
    const double t_top = std::min(t_hi, b.domain_cap() / eps);
    if (!(t_top > 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "dominates_much needs tmax > 1");
    }
    for (double t : numerics::geometric_grid(1.0, t_top, 121)) {
      const double denom = b(eps * t);
      if (!(denom > 0.0)) continue;
      tail.t.push_back(t);
      tail.ratio.push_back(p(t) / denom);
    }
    const std::size_t start = tail.ratio.size() / 2;
    bool monotone = tail.ratio.size() >= 4;
    for (std::size_t j = start + 1; j < tail.ratio.size(); ++j) {
      if (tail.ratio[j] > tail.ratio[j - 1] * (1.0 + 1e-12)) monotone = false;
    }
    tail.decreasing = monotone && tail.ratio.back() <= tolerance * tail.ratio[start];
    out.dominates = out.dominates && tail.decreasing;
    out.tails.push_back(std::move(tail));
  }
  return out;
}

NFunction pathological_nfunction(double p, double q, double domain_cap) {
  if (!(p > 1.0) || !(q > p) || !std::isfinite(q)) {
    throw Error(ErrorKind::InvalidExponents, "pathological needs 1 < p < q < inf");
  }
  PathologicalSegments segs;
  segs.p = p;
  segs.q = q;
  // Minimal k_1 with k_1 > 2^p and ((k_1 - 1)/q)^{1/k_1} <= 2^{q-p}.
  int k = static_cast<int>(std::floor(std::pow(2.0, p))) + 1;
  while (std::pow((k - 1.0) / q, 1.0 / k) > std::pow(2.0, q - p)) ++k;
  while (true) {
    const double a = std::ldexp(1.0, k);
    if (a > domain_cap) break;
    const double slope = std::pow(2.0, (p - 1.0) * k) * (k - 1.0);
    const double base = std::pow(2.0, p * k);
    auto gap = [=](double t) { return std::pow(t, p) - (base + slope * (t - a)); };
    // The chord sits above t^p on (a, b) and t^p is convex, so the gap is
    // negative at 2a and crosses zero exactly once beyond it.
    double lo = 2.0 * a;
    double hi = 4.0 * a;
    while (gap(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
    }
    const double b = numerics::bisect_increasing(gap, lo, hi, 1e-16);
    segs.k.push_back(k);
    segs.a.push_back(a);
    segs.b.push_back(b);
    segs.slope.push_back(slope);
    int next = static_cast<int>(std::ceil(std::log2(b)));
    while (std::ldexp(1.0, next) < b) ++next;
    while (std::ldexp(1.0, next - 1) >= b) --next;
    k = std::max(next, k + 1);
  }
  return NFunction::pathological(std::move(segs), domain_cap);
}

double fenchel_young_check(
    const NFunction& b,
    std::span<const std::pair<std::vector<double>, std::vector<double>>> samples) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [xi, eta] : samples) {
    if (xi.size() != eta.size()) {
      throw Error(ErrorKind::InvalidArgument, "Fenchel-Young pair dimension mismatch");
    }
    double dot = 0.0;
    double nx = 0.0;
    double ne = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      dot += xi[i] * eta[i];
      nx += xi[i] * xi[i];
      ne += eta[i] * eta[i];
    }
    const double violation =
        std::abs(dot) - b(std::sqrt(nx)) - conjugate_point(b, std::sqrt(ne)).value;
    worst = std::max(worst, violation);
  }
  return samples.empty() ? 0.0 : worst;
}

ConvexityReport check_nfunction(const NFunction& b, double t0, double tmax,
                                std::size_t n, double tol) {
  ConvexityReport out;
  if (b(0.0) != 0.0) {
    out.ok = false;
    out.max_violation = std::abs(b(0.0));
  }
  const std::vector<double> grid = numerics::geometric_grid(t0, tmax, n);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = b(grid[i]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(values[i] > values[i - 1])) {
      out.ok = false;
      out.max_violation = std::max(out.max_violation, values[i - 1] - values[i]);
    }
  }
  for (std::size_t i = 0; i + 2 < grid.size(); ++i) {
    for (std::size_t step : {std::size_t{1}, std::size_t{2}}) {
      const double t1 = grid[i];
      const double t2 = grid[i + step];
      for (double theta : {0.25, 0.5, 0.75}) {
        const double mid = b(theta * t1 + (1.0 - theta) * t2);
        const double chord = theta * values[i] + (1.0 - theta) * values[i + step];
        const double excess = (mid - chord) / std::max(1.0, std::abs(chord));
        if (excess > tol) {
          out.ok = false;
          out.max_violation = std::max(out.max_violation, excess);
        }
      }
    }
  }
  return out;
}

}  // namespace orlicz
