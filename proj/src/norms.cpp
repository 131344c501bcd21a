#include "orlicz/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "orlicz/error.hpp"
#include "orlicz/numerics.hpp"

namespace orlicz {

namespace {

double modular_of(const NFunction& b, const std::vector<double>& mags, double cm,
                  double lambda) {
  numerics::CompensatedSum acc;
  for (double v : mags) acc.add(b(v / lambda));
  return acc.value() * cm;
}

}  // namespace

double modular(const NFunction& b, const SampledField& f, double lambda) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "modular needs lambda > 0");
  }
  return modular_of(b, f.magnitudes(), f.cell_measure(), lambda);
}

double luxemburg_norm(const NFunction& b, const SampledField& f, double rel_tol) {
  const std::vector<double> mags = f.magnitudes();
  const double peak = *std::max_element(mags.begin(), mags.end());
  if (!(peak > 0.0)) return 0.0;
  const double cm = f.cell_measure();
  const double cap = b.domain_cap();
  auto mod = [&](double lambda) {
    if (peak / lambda > cap) return std::numeric_limits<double>::infinity();
    return modular_of(b, mags, cm, lambda);
  };
  double hi = peak;
  while (mod(hi) > 1.0) hi *= 2.0;
  double lo = hi;
  while (mod(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
  }
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (mod(mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

HolderCheck holder_check(const NFunction& b, const SampledField& xi,
                         const SampledField& eta, double tol) {
  xi.require_same_grid(eta);
  if (xi.components() != eta.components()) {
    throw Error(ErrorKind::GridMismatch, "component counts differ");
  }
  numerics::CompensatedSum acc;
  for (std::size_t c = 0; c < xi.cells(); ++c) {
    for (std::size_t k = 0; k < xi.components(); ++k) acc.add(xi.at(c, k) * eta.at(c, k));
  }
  HolderCheck out;
  out.lhs = std::abs(acc.value()) * xi.cell_measure();
  const double nx = luxemburg_norm(b, xi);
  const double ne = nx > 0.0 ? luxemburg_norm(conjugate(b), eta) : 0.0;
  out.rhs = 2.0 * nx * ne;
  out.ok = out.lhs <= out.rhs + tol * std::max(1.0, out.rhs);
  return out;
}

SampledField truncate(const SampledField& u, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "truncation level must be > 0");
  SampledField out = u;
  for (double& v : out.raw()) v = std::clamp(v, -t, t);
  return out;
}

SampledField gradient_truncated(const SampledField& u, const SampledField& grad_u,
                                double t) {
  u.require_same_grid(grad_u);
  SampledField out = grad_u;
  for (std::size_t c = 0; c < u.cells(); ++c) {
    if (std::abs(u[c]) >= t) {
      for (std::size_t k = 0; k < out.components(); ++k) out.at(c, k) = 0.0;
    }
  }
  return out;
}

double RearrangementProfile::fstar_at(double s) const {
  if (fstar.empty() || s >= total_measure()) return 0.0;
  const auto j = static_cast<std::size_t>(std::max(0.0, std::floor(s / cell_measure)));
  return fstar[std::min(j, fstar.size() - 1)];
}

double RearrangementProfile::fstarstar_at(double s) const {
  if (fstar.empty()) return 0.0;
  if (s <= 0.0) return fstar.front();
  const double total = total_measure();
  if (s >= total) return fstarstar.back() * total / s;
  const auto j = static_cast<std::size_t>(std::floor(s / cell_measure));
  const double before = j == 0 ? 0.0 : fstarstar[j - 1] * static_cast<double>(j) * cell_measure;
  return (before + fstar[j] * (s - static_cast<double>(j) * cell_measure)) / s;
}

RearrangementProfile rearrange(const SampledField& f) {
  if (f.components() != 1) {
    throw Error(ErrorKind::InvalidArgument, "rearrangement needs a scalar field");
  }
  RearrangementProfile out;
  out.cell_measure = f.cell_measure();
  out.fstar = f.magnitudes();
  // stable_sort keeps ties in index order.
  std::stable_sort(out.fstar.begin(), out.fstar.end(), std::greater<>());
  out.fstarstar.resize(out.fstar.size());
  numerics::CompensatedSum acc;
  for (std::size_t j = 0; j < out.fstar.size(); ++j) {
    acc.add(out.fstar[j]);
    out.fstarstar[j] = acc.value() / static_cast<double>(j + 1);
  }
  return out;
}

MarcinkiewiczNorm marcinkiewicz_norm(const NFunction& phi, const SampledField& f) {
  const RearrangementProfile prof = rearrange(f);
  MarcinkiewiczNorm out;
  if (prof.fstar.empty() || !(prof.fstar.front() > 0.0)) return out;
  const double range = phi(phi.domain_cap());
  for (std::size_t j = 0; j < prof.fstar.size(); ++j) {
    const double s = static_cast<double>(j + 1) * prof.cell_measure;
    const double y = 1.0 / s;
    if (y > range) {
      out.range_truncated = true;
      continue;
    }
    out.norm = std::max(out.norm, prof.fstarstar[j] / inverse(phi, y));
  }
  return out;
}

double weak_marcinkiewicz(const NFunction& phi, const std::vector<double>& magnitudes,
                          double cell_measure, double tail_fraction) {
  if (!(tail_fraction > 0.0) || !(tail_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "tail_fraction must lie in (0, 1)");
  }
  std::vector<double> sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Distinct levels (descending) with the count of samples strictly above.
  std::vector<std::pair<double, std::size_t>> levels;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (levels.empty() || sorted[i] < levels.back().first) levels.emplace_back(sorted[i], i);
  }
  if (levels.size() < 3) {
    throw Error(ErrorKind::EmptyTail, "fewer than 3 distinct levels");
  }
  const auto top = std::max<std::size_t>(
      2, static_cast<std::size_t>(
             std::ceil(tail_fraction * static_cast<double>(levels.size()))));
  const double range = phi(phi.domain_cap());
  double best = 0.0;
  for (std::size_t i = 0; i < std::min(top, levels.size()); ++i) {
    const auto [t, above] = levels[i];
    if (above == 0 || !(t > 0.0)) continue;
    const double m = static_cast<double>(above) * cell_measure;
    if (1.0 / m > range) continue;
    best = std::max(best, t / inverse(phi, 1.0 / m));
  }
  return best;
}

double weak_marcinkiewicz(const NFunction& phi, const SampledField& f,
                          double tail_fraction) {
  return weak_marcinkiewicz(phi, f.magnitudes(), f.cell_measure(), tail_fraction);
}

}  // namespace orlicz
