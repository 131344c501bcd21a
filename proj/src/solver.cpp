#include "orlicz/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "orlicz/error.hpp"
#include "orlicz/norms.hpp"
#include "orlicz/numerics.hpp"

namespace orlicz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct Entry {
  int idx = -1;
  double coef = 0.0;
};

// One energy term: a cell together with one choice of one-sided differences.
struct Term {
  std::size_t owner = 0;
  std::array<std::array<Entry, 2>, 2> comp{};
};

struct Stencil {
  int dim = 1;
  std::size_t n = 0;
  std::size_t cells = 0;
  double h = 0.0;
  double cell = 0.0;    // h^dim
  double weight = 0.0;  // h^dim / 2^dim
  std::vector<Term> terms;
  std::vector<Vec2> centres;
};

std::array<Entry, 2> one_sided(std::size_t c, std::size_t i, std::size_t stride,
                               std::size_t n, int side, double h) {
  const int ci = static_cast<int>(c);
  const int st = static_cast<int>(stride);
  if (side > 0) {
    if (i + 1 < n) return {Entry{ci + st, 1.0 / h}, Entry{ci, -1.0 / h}};
    return {Entry{ci, -2.0 / h}, Entry{}};
  }
  if (i > 0) return {Entry{ci, 1.0 / h}, Entry{ci - st, -1.0 / h}};
  return {Entry{ci, 2.0 / h}, Entry{}};
}

Stencil build_stencil(const SampledField& like) {
  Stencil s;
  s.dim = like.dim();
  s.n = like.n();
  s.cells = like.cells();
  s.h = like.h();
  s.cell = like.cell_measure();
  s.weight = s.cell / (s.dim == 1 ? 2.0 : 4.0);
  s.centres.resize(s.cells);
  for (std::size_t c = 0; c < s.cells; ++c) {
    const auto x = like.centre(c);
    s.centres[c] = {x[0], x[1]};
    const auto [i, j] = like.index2(c);
    for (int sx : {1, -1}) {
      if (s.dim == 1) {
        Term t;
        t.owner = c;
        t.comp[0] = one_sided(c, i, 1, s.n, sx, s.h);
        s.terms.push_back(t);
        continue;
      }
      for (int sy : {1, -1}) {
        Term t;
        t.owner = c;
        t.comp[0] = one_sided(c, i, 1, s.n, sx, s.h);
        t.comp[1] = one_sided(c, j, s.n, s.n, sy, s.h);
        s.terms.push_back(t);
      }
    }
  }
  return s;
}

Vec2 term_gradient(const Term& t, const double* u) {
  Vec2 g{0.0, 0.0};
  for (int k = 0; k < 2; ++k) {
    for (const Entry& e : t.comp[static_cast<std::size_t>(k)]) {
      if (e.idx >= 0) g[static_cast<std::size_t>(k)] += e.coef * u[e.idx];
    }
  }
  return g;
}

bool exponential_kind(const NFunction& b) {
  return b.kind() == NKind::ExpConjugate || b.kind() == NKind::TExpT;
}

struct Assembly {
  double energy = 0.0;     // regularized energy (potential forms)
  double abs_scale = 0.0;  // sum of magnitudes entering the energy
  std::vector<double> grad;
  std::vector<Triplet> triplets;
  // Same Hessian with B'' raised to B'(r)/r where it is smaller; this
  // majorizes the energy for sublinear fluxes. Empty when identical.
  std::vector<Triplet> majorant;
};

// Energy, gradient and (optionally) Hessian of the frozen-coefficient problem.
// For custom fluxes `energy` is unused and the Jacobian comes from finite
// differences of the flux in xi.
class Discretization {
 public:
  Discretization(const OperatorSpec& op, const SampledField& like, double eps)
      : op_(op), st_(build_stencil(like)), eps_(eps) {}

  const Stencil& stencil() const { return st_; }
  double eps() const { return eps_; }

  // Returns +inf when a gradient leaves the domain of B.
  double energy(const std::vector<double>& u, const std::vector<double>& f,
                const std::vector<double>& a) const {
    numerics::CompensatedSum acc;
    const double cap = op_.B.domain_cap();
    for (const Term& t : st_.terms) {
      const Vec2 g = term_gradient(t, u.data());
      const double r = std::sqrt(g[0] * g[0] + g[1] * g[1] + eps_ * eps_);
      if (!(r <= cap)) return kInf;
      acc.add(st_.weight * a[t.owner] * op_.B(r));
    }
    for (std::size_t c = 0; c < st_.cells; ++c) acc.add(-f[c] * u[c] * st_.cell);
    const double e = acc.value();
    return std::isfinite(e) ? e : kInf;
  }

  Assembly assemble(const std::vector<double>& u, const std::vector<double>& f,
                    const std::vector<double>& a, bool hessian) const {
    Assembly out;
    out.grad.assign(st_.cells, 0.0);
    if (hessian) out.triplets.reserve(st_.terms.size() * (st_.dim == 1 ? 4 : 16));
    numerics::CompensatedSum acc;
    const bool custom = op_.form == FluxForm::Custom;
    std::vector<Triplet> major;
    bool differs = false;
    for (const Term& t : st_.terms) {
      const Vec2 g = term_gradient(t, u.data());
      Vec2 flux{0.0, 0.0};
      std::array<std::array<double, 2>, 2> jac{};
      std::array<std::array<double, 2>, 2> mjac{};
      if (!custom) {
        const double r = std::sqrt(g[0] * g[0] + g[1] * g[1] + eps_ * eps_);
        const double scale = st_.weight * a[t.owner];
        const double bval = op_.B(r);
        const double d1 = op_.B.derivative(r);
        acc.add(scale * bval);
        out.abs_scale += std::abs(scale * bval);
        const double phi1 = d1 / r;
        flux = {scale * phi1 * g[0], scale * phi1 * g[1]};
        if (hessian) {
          const double d2 = op_.B.second_derivative(r);
          const double radial = (d2 - phi1) / (r * r);
          const double mradial = std::max(radial, 0.0);
          differs = differs || radial < 0.0;
          for (std::size_t k = 0; k < 2; ++k) {
            for (std::size_t l = 0; l < 2; ++l) {
              jac[k][l] = scale * ((k == l ? phi1 : 0.0) + radial * g[k] * g[l]);
              mjac[k][l] = scale * ((k == l ? phi1 : 0.0) + mradial * g[k] * g[l]);
            }
          }
        }
      } else {
        const Vec2& x = st_.centres[t.owner];
        const double z = u[t.owner];
        const Vec2 af = op_.flux(x, z, g);
        flux = {st_.weight * af[0], st_.weight * af[1]};
        if (hessian) {
          for (std::size_t l = 0; l < static_cast<std::size_t>(st_.dim); ++l) {
            const double step = 1e-6 * std::max(1.0, std::abs(g[l]));
            Vec2 gp = g;
            Vec2 gm = g;
            gp[l] += step;
            gm[l] -= step;
            const Vec2 ap = op_.flux(x, z, gp);
            const Vec2 am = op_.flux(x, z, gm);
            for (std::size_t k = 0; k < 2; ++k) {
              jac[k][l] = st_.weight * (ap[k] - am[k]) / (2.0 * step);
            }
          }
        }
      }
      for (std::size_t k = 0; k < 2; ++k) {
        for (const Entry& e : t.comp[k]) {
          if (e.idx >= 0) out.grad[static_cast<std::size_t>(e.idx)] += flux[k] * e.coef;
        }
      }
      if (hessian) {
        for (std::size_t k = 0; k < 2; ++k) {
          for (const Entry& ek : t.comp[k]) {
            if (ek.idx < 0) continue;
            for (std::size_t l = 0; l < 2; ++l) {
              if (jac[k][l] == 0.0 && mjac[k][l] == 0.0) continue;
              for (const Entry& el : t.comp[l]) {
                if (el.idx < 0) continue;
                out.triplets.emplace_back(ek.idx, el.idx, jac[k][l] * ek.coef * el.coef);
                if (!custom) major.emplace_back(ek.idx, el.idx, mjac[k][l] * ek.coef * el.coef);
              }
            }
          }
        }
      }
    }
    for (std::size_t c = 0; c < st_.cells; ++c) {
      out.grad[c] -= f[c] * st_.cell;
      acc.add(-f[c] * u[c] * st_.cell);
      out.abs_scale += std::abs(f[c] * u[c] * st_.cell);
    }
    out.energy = acc.value();
    if (differs) out.majorant = std::move(major);
    return out;
  }

  double max_step_gradient(const std::vector<double>& du) const {
    double m = 0.0;
    for (const Term& t : st_.terms) {
      const Vec2 g = term_gradient(t, du.data());
      m = std::max(m, std::sqrt(g[0] * g[0] + g[1] * g[1]));
    }
    return m;
  }

  double max_gradient(const std::vector<double>& u) const { return max_step_gradient(u); }

 private:
  const OperatorSpec& op_;
  Stencil st_;
  double eps_;
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  numerics::CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

SpMat build_matrix(std::size_t n, const std::vector<Triplet>& trip) {
  SpMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

// The discrete Laplacian (Hessian of sum w |D u|^2 / 2).
SpMat laplacian(const SampledField& like) {
  const OperatorSpec quad = OperatorSpec::potential(NFunction::power(2.0, 0.5));
  const Discretization disc(quad, like, 0.0);
  const std::vector<double> zero(like.cells(), 0.0);
  const std::vector<double> ones(like.cells(), 1.0);
  // Hessian of a quadratic does not depend on u; assemble at a nonzero
  // point so that r > 0 everywhere in the formula.
  std::vector<double> probe(like.cells());
  for (std::size_t c = 0; c < probe.size(); ++c) probe[c] = 1.0 + 0.37 * static_cast<double>(c % 7);
  const Assembly as = disc.assemble(probe, zero, ones, true);
  return build_matrix(like.cells(), as.triplets);
}

struct NewtonOutcome {
  std::vector<double> u;
  double residual = kInf;
  int iterations = 0;
  bool converged = false;
  bool energy_monotone = true;
  std::vector<double> energy_history;
  std::string note;
};

class NewtonSolver {
 public:
  NewtonSolver(const OperatorSpec& op, const Discretization& disc, const SolverOptions& opt)
      : op_(op), disc_(disc), opt_(opt) {}

  NewtonOutcome run(const std::vector<double>& f, const std::vector<double>& a,
                    std::vector<double> u, double tol) const {
    const Stencil& st = disc_.stencil();
    const std::size_t n = st.cells;
    const bool custom = op_.form == FluxForm::Custom;
    const double trust = exponential_kind(op_.B) ? 1.0 : kInf;
    NewtonOutcome out;
    Assembly as = disc_.assemble(u, f, a, true);
    double res = max_abs(as.grad) / st.cell;
    out.u = u;
    out.residual = res;
    if (!custom) out.energy_history.push_back(as.energy);
    int polish = 0;
    for (int it = 0; it < opt_.max_newton; ++it) {
      if (res == 0.0) break;
      if (res <= tol) {
        if (polish >= opt_.polish_steps) break;
        ++polish;
      }
      out.iterations = it + 1;
      std::vector<double> du = solve_step(as.triplets, as.grad, n, custom);
      if (du.empty()) {
        if (res > tol) out.note = "linear solve failed";
        break;
      }
      std::optional<Candidate> cand = line_search(as, du, u, f, a, res, trust);
      // Newton on a sublinear flux flips the sign of small gradients and can
      // cycle; the majorant step from the same point cannot.
      if (!as.majorant.empty() && (!cand || cand->res > res)) {
        const std::vector<double> dm = solve_step(as.majorant, as.grad, n, false);
        if (!dm.empty()) {
          std::optional<Candidate> alt = line_search(as, dm, u, f, a, res, trust);
          if (alt && (!cand || alt->res < cand->res)) cand = std::move(alt);
        }
      }
      if (!cand) {
        if (res > tol) out.note = "line search stalled";
        break;
      }
      Assembly& next = cand->as;
      const double next_res = cand->res;
      std::vector<double>& trial = cand->u;
      if (!custom) {
        const double prev = out.energy_history.back();
        if (next.energy > prev + 1e-12 * std::max(1.0, next.abs_scale)) {
          out.energy_monotone = false;
        }
        out.energy_history.push_back(next.energy);
      }
      u = trial;
      as = std::move(next);
      res = next_res;
      if (res <= out.residual) {
        out.u = u;
        out.residual = res;
      }
    }
    out.converged = out.residual <= tol;
    return out;
  }

 private:
  struct Candidate {
    std::vector<double> u;
    Assembly as;
    double res = kInf;
  };

  std::optional<Candidate> line_search(const Assembly& as, std::vector<double> du,
                                       const std::vector<double>& u,
                                       const std::vector<double>& f,
                                       const std::vector<double>& a, double res,
                                       double trust) const {
    const std::size_t n = u.size();
    const double cell = disc_.stencil().cell;
    const bool custom = op_.form == FluxForm::Custom;
    const double step_grad = disc_.max_step_gradient(du);
    if (step_grad > trust) {
      for (double& v : du) v *= trust / step_grad;
    }
    const double slope = dot(as.grad, du);
    Candidate c;
    c.u.resize(n);
    double alpha = 1.0;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) c.u[i] = u[i] + alpha * du[i];
      if (!custom) {
        const double e1 = disc_.energy(c.u, f, a);
        if (!std::isfinite(e1)) continue;
        const bool armijo = e1 <= as.energy + 1e-4 * alpha * slope;
        const bool flat = std::abs(e1 - as.energy) <= 1e-12 * std::max(1.0, as.abs_scale);
        if (armijo || flat) {
          c.as = disc_.assemble(c.u, f, a, true);
          c.res = max_abs(c.as.grad) / cell;
          if (armijo || c.res < res) return c;
        }
      } else {
        c.as = disc_.assemble(c.u, f, a, true);
        c.res = max_abs(c.as.grad) / cell;
        if (std::isfinite(c.res) && c.res < (1.0 - 1e-4 * alpha) * res) return c;
      }
    }
    return std::nullopt;
  }

  std::vector<double> solve_step(const std::vector<Triplet>& triplets,
                                 const std::vector<double>& grad, std::size_t n,
                                 bool custom) const {
    SpMat hmat = build_matrix(n, triplets);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) rhs[static_cast<Eigen::Index>(i)] = -grad[i];
    double diag_max = 0.0;
    for (Eigen::Index i = 0; i < hmat.rows(); ++i) {
      diag_max = std::max(diag_max, std::abs(hmat.coeff(i, i)));
    }
    double shift = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
      SpMat m = hmat;
      if (shift > 0.0) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m.coeffRef(i, i) += shift;
      }
      Eigen::VectorXd x;
      bool ok = false;
      if (custom) {
        Eigen::SparseLU<SpMat> lu;
        lu.compute(m);
        if (lu.info() == Eigen::Success) {
          x = lu.solve(rhs);
          ok = lu.info() == Eigen::Success;
        }
      } else {
        Eigen::SimplicialLDLT<SpMat> ldlt;
        ldlt.compute(m);
        if (ldlt.info() == Eigen::Success) {
          x = ldlt.solve(rhs);
          ok = ldlt.info() == Eigen::Success && x.allFinite() && x.dot(rhs) > 0.0;
        }
      }
      if (ok && x.allFinite()) {
        return std::vector<double>(x.data(), x.data() + x.size());
      }
      // Levenberg shift for (near-)singular Hessians, e.g. B''(0) = 0.
      shift = shift == 0.0 ? 1e-12 * std::max(diag_max, 1e-300) : shift * 100.0;
    }
    return {};
  }

  const OperatorSpec& op_;
  const Discretization& disc_;
  const SolverOptions& opt_;
};

// Solution of the linear (B = t^2/2) problem, rescaled to minimize the energy.
std::vector<double> initial_guess(const Discretization& disc, const SampledField& like,
                                  const std::vector<double>& f,
                                  const std::vector<double>& a) {
  const std::size_t n = like.cells();
  const SpMat lap = laplacian(like);
  Eigen::SimplicialLDLT<SpMat> ldlt(lap);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    rhs[static_cast<Eigen::Index>(i)] = f[i] * like.cell_measure();
  }
  const Eigen::VectorXd v = ldlt.solve(rhs);
  std::vector<double> base(v.data(), v.data() + v.size());
  auto scaled_energy = [&](double ls) {
    std::vector<double> w(n);
    const double s = std::exp(ls);
    for (std::size_t i = 0; i < n; ++i) w[i] = s * base[i];
    return disc.energy(w, f, a);
  };
  double best_ls = 0.0;
  double best_e = kInf;
  for (double ls = std::log(1e-6); ls <= std::log(1e6); ls += 0.25) {
    const double e = scaled_energy(ls);
    if (e < best_e) {
      best_e = e;
      best_ls = ls;
    }
  }
  if (std::isfinite(best_e)) {
    best_ls = numerics::golden_section_max(
        [&](double ls) {
          const double e = scaled_energy(ls);
          return std::isfinite(e) ? -e : -kInf;
        },
        best_ls - 0.25, best_ls + 0.25, 1e-6, 60);
  } else {
    best_ls = std::log(1e-6);
  }
  for (double& x : base) x *= std::exp(best_ls);
  return base;
}

std::vector<double> z_coefficients(const OperatorSpec& op, const std::vector<double>& u) {
  std::vector<double> a(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) a[i] = op.z_coefficient(u[i]);
  return a;
}

double eps_for(const SampledField& like, const SolverOptions& opt) {
  return opt.eps_scale * like.h();
}

}  // namespace

double bump(double r) {
  if (!(r < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

void ProblemSpec::validate() const {
  if (dim != 1 && dim != 2) throw Error(ErrorKind::InvalidArgument, "dim must be 1 or 2");
  if (!std::is_sorted(mollifier_levels.begin(), mollifier_levels.end()) ||
      std::adjacent_find(mollifier_levels.begin(), mollifier_levels.end()) !=
          mollifier_levels.end()) {
    throw Error(ErrorKind::InvalidArgument, "mollifier levels must be increasing");
  }
  if (!std::is_sorted(truncation_levels.begin(), truncation_levels.end()) ||
      std::adjacent_find(truncation_levels.begin(), truncation_levels.end()) !=
          truncation_levels.end()) {
    throw Error(ErrorKind::InvalidArgument, "truncation levels must be increasing");
  }
  if (datum == DatumKind::AtomicMeasure && atoms.empty()) {
    throw Error(ErrorKind::InvalidArgument, "atomic datum without atoms");
  }
  if (datum == DatumKind::L1Sample &&
      (l1_datum.cells() == 0 || l1_datum.dim() != dim || l1_datum.n() != n)) {
    throw Error(ErrorKind::GridMismatch, "L1 datum does not match the problem grid");
  }
}

double ProblemSpec::datum_mass() const {
  if (datum == DatumKind::AtomicMeasure) {
    double m = 0.0;
    for (const Atom& a : atoms) m += std::abs(a.weight);
    return m;
  }
  return l1_datum.l1_norm();
}

ProblemSpec ProblemSpec::from_json(const nlohmann::json& spec) {
  try {
    ProblemSpec p;
    p.dim = spec.value("dim", 1);
    p.n = spec.value("n", std::size_t{128});
    p.extent = spec.value("extent", 1.0);
    if (spec.contains("mollifier_levels")) {
      p.mollifier_levels = spec.at("mollifier_levels").get<std::vector<int>>();
    }
    if (spec.contains("truncation_levels")) {
      p.truncation_levels = spec.at("truncation_levels").get<std::vector<double>>();
    }
    if (spec.contains("refinements")) {
      p.refinements = spec.at("refinements").get<std::vector<std::size_t>>();
    }
    p.seed = spec.value("seed", std::uint64_t{7});
    const std::string mode = spec.value("approximation_mode", "mollify");
    if (mode == "mollify") {
      p.mode = ApproximationMode::MollifySequence;
    } else if (mode == "two_sequence") {
      p.mode = ApproximationMode::TwoSequenceUniqueness;
    } else {
      throw Error(ErrorKind::ParseError, "approximation_mode must be mollify|two_sequence");
    }
    const auto& datum = spec.at("datum");
    const std::string type = datum.at("type").get<std::string>();
    if (type == "atomic") {
      p.datum = DatumKind::AtomicMeasure;
      for (const auto& a : datum.at("atoms")) {
        Atom atom;
        const auto x = a.at("x").get<std::vector<double>>();
        atom.x = {x.at(0), x.size() > 1 ? x[1] : 0.0};
        atom.weight = a.value("weight", 1.0);
        p.atoms.push_back(atom);
      }
    } else if (type == "l1") {
      p.datum = DatumKind::L1Sample;
      const std::string expr = datum.value("expression", "constant");
      if (expr == "constant") {
        const double v = datum.value("value", 1.0);
        p.l1_datum = SampledField::from_function(p.dim, p.n, p.extent,
                                                 [v](std::span<const double>) { return v; });
      } else if (expr == "inverse_power") {
        // |x - centre|^{-exponent}
        const auto centre = datum.value("centre", std::vector<double>{0.5 * p.extent, 0.5 * p.extent});
        const double expo = datum.value("exponent", 0.5);
        p.l1_datum = SampledField::from_function(
            p.dim, p.n, p.extent, [centre, expo](std::span<const double> x) {
              double r2 = 0.0;
              for (std::size_t k = 0; k < x.size(); ++k) {
                r2 += (x[k] - centre.at(k)) * (x[k] - centre.at(k));
              }
              return std::pow(std::sqrt(r2), -expo);
            });
      } else if (expr == "csv") {
        std::ifstream in(datum.at("path").get<std::string>());
        if (!in) throw Error(ErrorKind::ParseError, "cannot open datum CSV");
        p.l1_datum = read_field_csv(in);
      } else {
        throw Error(ErrorKind::ParseError,
                    "l1 expression must be constant|inverse_power|csv, got '" + expr + "'");
      }
    } else {
      throw Error(ErrorKind::ParseError, "datum type must be atomic|l1");
    }
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("problem spec: ") + e.what());
  }
}

SampledField mollify_measure(std::span<const Atom> atoms, int k, int dim, std::size_t n,
                             double extent) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "mollifier level must be >= 1");
  SampledField out(dim, n, extent);
  const double radius = 1.0 / k;
  const double cm = out.cell_measure();
  std::vector<double> w(out.cells());
  for (const Atom& atom : atoms) {
    double dist = kInf;
    for (int a = 0; a < dim; ++a) {
      const double x = atom.x[static_cast<std::size_t>(a)];
      dist = std::min({dist, x, extent - x});
    }
    if (!(dist > 0.0) || !(k * dist > 1.0)) {
      throw Error(ErrorKind::AtomTooCloseToBoundary,
                  "atom at distance " + std::to_string(dist) + " with k=" + std::to_string(k));
    }
    double total = 0.0;
    std::size_t nearest = 0;
    double nearest_d = kInf;
    for (std::size_t c = 0; c < out.cells(); ++c) {
      const auto x = out.centre(c);
      const double dx = x[0] - atom.x[0];
      const double dy = dim == 2 ? x[1] - atom.x[1] : 0.0;
      const double r = std::sqrt(dx * dx + dy * dy);
      if (r < nearest_d) {
        nearest_d = r;
        nearest = c;
      }
      w[c] = bump(r / radius);
      total += w[c];
    }
    if (total <= 0.0) {
      out[nearest] += atom.weight / cm;
      continue;
    }
    for (std::size_t c = 0; c < out.cells(); ++c) {
      if (w[c] > 0.0) out[c] += atom.weight * w[c] / (total * cm);
    }
  }
  return out;
}

L1Approximation approximate_l1_data(const SampledField& f, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "mollifier level must be >= 1");
  if (f.components() != 1) throw Error(ErrorKind::InvalidArgument, "scalar datum expected");
  const double h = f.h();
  const double radius = 1.0 / k;
  const long m = static_cast<long>(std::floor(radius / h));
  const int dim = f.dim();
  const long n = static_cast<long>(f.n());
  // Kernel on lattice offsets, normalized over the whole lattice.
  std::vector<double> kernel;
  std::vector<std::array<long, 2>> offsets;
  double total = 0.0;
  for (long dy = dim == 2 ? -m : 0; dy <= (dim == 2 ? m : 0); ++dy) {
    for (long dx = -m; dx <= m; ++dx) {
      const double r = h * std::sqrt(static_cast<double>(dx * dx + dy * dy)) / radius;
      const double w = bump(r);
      if (w <= 0.0) continue;
      kernel.push_back(w);
      offsets.push_back({dx, dy});
      total += w;
    }
  }
  L1Approximation out{SampledField(dim, f.n(), f.extent()), 0.0};
  for (std::size_t c = 0; c < f.cells(); ++c) {
    const auto [ii, jj] = f.index2(c);
    const long i = static_cast<long>(ii);
    const long j = static_cast<long>(jj);
    double acc = 0.0;
    for (std::size_t q = 0; q < kernel.size(); ++q) {
      const long a = i + offsets[q][0];
      const long b = j + offsets[q][1];
      if (a < 0 || a >= n || b < 0 || (dim == 2 && b >= n)) continue;
      acc += kernel[q] * f[static_cast<std::size_t>(a + (dim == 2 ? b * n : 0))];
    }
    double v = acc / total;
    const double bound = 2.0 * std::abs(f[c]);
    if (f[c] != 0.0) v = std::clamp(v, -bound, bound);
    out.f_k[c] = v;
  }
  numerics::CompensatedSum dist;
  for (std::size_t c = 0; c < f.cells(); ++c) dist.add(std::abs(out.f_k[c] - f[c]));
  out.l1_distance = dist.value() * f.cell_measure();
  return out;
}

SolveResult solve_approximate(const OperatorSpec& op, const SampledField& f,
                              const SolverOptions& options) {
  if (f.components() != 1) throw Error(ErrorKind::InvalidArgument, "scalar datum expected");
  SolveResult result;
  result.u = SampledField(f.dim(), f.n(), f.extent());
  const double f_inf = f.max_abs();
  result.tolerance = options.rel_tol * f_inf;
  if (f_inf == 0.0) {
    result.converged = true;
    result.note = "zero datum";
    return result;
  }
  const Discretization disc(op, f, eps_for(f, options));
  const NewtonSolver newton(op, disc, options);
  const std::vector<double>& fv = f.raw();
  std::vector<double> ones(f.cells(), 1.0);

  NewtonOutcome outcome;
  if (op.form == FluxForm::ZPerturbed) {
    // Outer fixed point on the z-coefficient around an inner Newton solve.
    std::vector<double> u = newton.run(fv, ones, initial_guess(disc, f, fv, ones),
                                       result.tolerance).u;
    bool done = false;
    int total_newton = 0;
    for (int outer = 0; outer < options.max_outer && !done; ++outer) {
      const std::vector<double> a = z_coefficients(op, u);
      NewtonOutcome inner = newton.run(fv, a, u, 0.1 * result.tolerance);
      total_newton += inner.iterations;
      for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = (1.0 - options.relaxation) * u[i] + options.relaxation * inner.u[i];
      }
      const std::vector<double> a_now = z_coefficients(op, u);
      const Assembly as = disc.assemble(u, fv, a_now, false);
      const double res = max_abs(as.grad) / disc.stencil().cell;
      result.outer_iterations = outer + 1;
      outcome.u = u;
      outcome.residual = res;
      done = res <= result.tolerance;
    }
    outcome.iterations = total_newton;
    outcome.converged = done;
  } else {
    outcome = newton.run(fv, ones, initial_guess(disc, f, fv, ones), result.tolerance);
  }
  result.u.raw() = outcome.u;
  result.residual = outcome.residual;
  result.newton_iterations = outcome.iterations;
  result.converged = outcome.converged;
  result.energy_monotone = outcome.energy_monotone;
  result.energy_history = outcome.energy_history;
  result.note = outcome.note;
  if (!result.converged && result.note.empty()) result.note = "iteration limit reached";

  // Discrete coercivity: sum w A(D u).D u - d0 sum w B(|D u|).
  numerics::CompensatedSum gap;
  const Stencil& st = disc.stencil();
  for (const Term& t : st.terms) {
    const Vec2 g = term_gradient(t, result.u.raw().data());
    const Vec2 a = op.flux(st.centres[t.owner], result.u[t.owner], g);
    gap.add(st.weight * (a[0] * g[0] + a[1] * g[1] -
                         op.d0 * op.B(std::sqrt(g[0] * g[0] + g[1] * g[1]))));
  }
  result.coercivity_gap = gap.value();
  return result;
}

void require_converged(const SolveResult& r, const std::string& context) {
  if (!r.converged) {
    throw Error(ErrorKind::NonConvergence,
                context + ": residual " + std::to_string(r.residual) + " above " +
                    std::to_string(r.tolerance) + " (" + r.note + ")");
  }
}

double discrete_energy(const OperatorSpec& op, const SampledField& u, const SampledField& f) {
  u.require_same_grid(f);
  const Discretization disc(op, u, 0.0);
  const std::vector<double> a = z_coefficients(op, u.raw());
  return disc.energy(u.raw(), f.raw(), a);
}

double weak_form_defect(const OperatorSpec& op, const SampledField& u,
                        const SampledField& f, const SampledField& phi) {
  u.require_same_grid(f);
  u.require_same_grid(phi);
  const Stencil st = build_stencil(u);
  const double eps = SolverOptions{}.eps_scale * u.h();
  numerics::CompensatedSum acc;
  for (const Term& t : st.terms) {
    const Vec2 g = term_gradient(t, u.raw().data());
    const Vec2 gp = term_gradient(t, phi.raw().data());
    const Vec2 a = op.flux(st.centres[t.owner], u[t.owner], g, eps);
    acc.add(st.weight * (a[0] * gp[0] + a[1] * gp[1]));
  }
  for (std::size_t c = 0; c < u.cells(); ++c) acc.add(-f[c] * phi[c] * st.cell);
  return acc.value();
}

double truncated_gradient_modular(const NFunction& b, const SampledField& u, double t) {
  const Stencil st = build_stencil(u);
  numerics::CompensatedSum acc;
  for (const Term& term : st.terms) {
    if (!(std::abs(u[term.owner]) < t)) continue;
    const Vec2 g = term_gradient(term, u.raw().data());
    acc.add(st.weight * b(std::sqrt(g[0] * g[0] + g[1] * g[1])));
  }
  return acc.value();
}

nlohmann::json AprioriReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"t", r.t},
                         {"lhs1", r.lhs1},
                         {"bound", r.bound},
                         {"lhs1_ok", r.lhs1_ok},
                         {"lhs2_divided", r.lhs2_divided},
                         {"lhs2_multiplied", r.lhs2_multiplied}});
  }
  return {{"c0", c0},
          {"f_l1", f_l1},
          {"d", d},
          {"slack", slack},
          {"rows", rows_json},
          {"ok", ok},
          {"divided_convention_holds", divided_holds},
          {"multiplied_convention_holds", multiplied_holds},
          {"fit_divided", {{"c1", fit_c1_divided}, {"c2", fit_c2_divided}}},
          {"fit_multiplied", {{"c1", fit_c1_multiplied}, {"c2", fit_c2_multiplied}}}};
}

namespace {

// Smallest c2 = excess at the lowest level, then the smallest c1 covering the rest.
std::pair<double, double> fit_constants(const std::vector<double>& excess,
                                        const std::vector<double>& p_values) {
  if (excess.empty()) return {0.0, 0.0};
  const double c2 = std::max(0.0, excess.front());
  double c1 = 0.0;
  for (std::size_t i = 0; i < excess.size(); ++i) {
    const double rest = excess[i] - c2;
    if (rest > 0.0 && p_values[i] > 0.0) c1 = std::max(c1, rest / p_values[i]);
  }
  return {c1, c2};
}

}  // namespace

AprioriReport apriori_report(const OperatorSpec& op, const SampledField& u,
                             const SampledField& f, std::span<const double> truncation_levels) {
  u.require_same_grid(f);
  AprioriReport rep;
  rep.c0 = 2.0 / op.d0;
  rep.f_l1 = f.l1_norm();
  rep.d = op.d > 0.0 ? op.d : calibrated(op, u.dim(), u.extent()).d;
  const NFunction b_conj = conjugate(op.B);
  const Stencil st = build_stencil(u);
  std::vector<double> ex_div;
  std::vector<double> ex_mul;
  std::vector<double> p_vals;
  for (double t : truncation_levels) {
    AprioriRow row;
    row.t = t;
    row.bound = rep.c0 * t * rep.f_l1;
    numerics::CompensatedSum l1;
    numerics::CompensatedSum l2d;
    numerics::CompensatedSum l2m;
    for (const Term& term : st.terms) {
      if (!(std::abs(u[term.owner]) < t)) continue;
      const Vec2 g = term_gradient(term, u.raw().data());
      l1.add(st.weight * op.B(std::sqrt(g[0] * g[0] + g[1] * g[1])));
      const Vec2 a = op.flux(st.centres[term.owner], u[term.owner], g);
      const double na = std::sqrt(a[0] * a[0] + a[1] * a[1]);
      auto conj_or_inf = [&](double s) {
        try {
          return b_conj(s);
        } catch (const Error&) {
          return kInf;
        }
      };
      l2d.add(st.weight * conj_or_inf(na / rep.d));
      l2m.add(st.weight * conj_or_inf(na * rep.d));
    }
    row.lhs1 = l1.value();
    row.lhs2_divided = l2d.value();
    row.lhs2_multiplied = l2m.value();
    row.lhs1_ok = row.lhs1 <= rep.slack * row.bound + 1e-14;
    rep.ok = rep.ok && row.lhs1_ok;
    rep.divided_holds = rep.divided_holds && row.lhs2_divided <= rep.slack * row.bound + 1e-14;
    rep.multiplied_holds =
        rep.multiplied_holds && row.lhs2_multiplied <= rep.slack * row.bound + 1e-14;
    ex_div.push_back(row.lhs2_divided - row.bound);
    ex_mul.push_back(row.lhs2_multiplied - row.bound);
    p_vals.push_back(op.P(std::min(t, op.P.domain_cap())));
    rep.rows.push_back(row);
  }
  std::tie(rep.fit_c1_divided, rep.fit_c2_divided) = fit_constants(ex_div, p_vals);
  std::tie(rep.fit_c1_multiplied, rep.fit_c2_multiplied) = fit_constants(ex_mul, p_vals);
  return rep;
}

nlohmann::json ConvergenceStudy::to_json() const {
  nlohmann::json out;
  out["levels"] = levels;
  nlohmann::json s = nlohmann::json::array();
  for (const auto& r : solves) {
    s.push_back({{"residual", r.residual},
                 {"tolerance", r.tolerance},
                 {"newton_iterations", r.newton_iterations},
                 {"converged", r.converged},
                 {"u_sup", r.u.max_abs()}});
  }
  out["solves"] = s;
  out["taus"] = taus;
  out["cauchy"] = cauchy;
  out["cauchy_decreasing"] = cauchy_decreasing;
  out["tail_constant"] = tail_constant;
  out["flux_consistency"] = flux_consistency;
  return out;
}

ConvergenceStudy convergence_study(const OperatorSpec& op, const ProblemSpec& problem,
                                   const SolverOptions& options, std::span<const double> taus) {
  problem.validate();
  if (problem.mollifier_levels.size() < 3) {
    throw Error(ErrorKind::InvalidArgument, "convergence study needs >= 3 levels");
  }
  ConvergenceStudy cs;
  cs.levels = problem.mollifier_levels;
  for (int k : cs.levels) {
    SampledField fk =
        problem.datum == DatumKind::AtomicMeasure
            ? mollify_measure(problem.atoms, k, problem.dim, problem.n, problem.extent)
            : approximate_l1_data(problem.l1_datum, k).f_k;
    SolveResult r = solve_approximate(op, fk, options);
    require_converged(r, "level k=" + std::to_string(k));
    cs.data.push_back(std::move(fk));
    cs.solves.push_back(std::move(r));
  }
  const SampledField& finest = cs.solves.back().u;
  const double usup = finest.max_abs();
  if (taus.empty()) {
    cs.taus = {1e-3 * usup, 1e-2 * usup, 1e-1 * usup};
  } else {
    cs.taus.assign(taus.begin(), taus.end());
  }
  const std::size_t L = cs.levels.size();
  const double cm = finest.cell_measure();
  for (double tau : cs.taus) {
    std::vector<std::vector<double>> mat(L, std::vector<double>(L, 0.0));
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t m = j + 1; m < L; ++m) {
        std::size_t count = 0;
        for (std::size_t c = 0; c < finest.cells(); ++c) {
          if (std::abs(cs.solves[j].u[c] - cs.solves[m].u[c]) > tau) ++count;
        }
        mat[j][m] = mat[m][j] = static_cast<double>(count) * cm;
      }
    }
    for (std::size_t j = 0; j + 2 < L; ++j) {
      const double a = mat[j][j + 1];
      const double b = mat[j + 1][j + 2];
      if (!(b < a) && !(a == 0.0 && b == 0.0)) cs.cauchy_decreasing = false;
    }
    cs.cauchy.push_back(std::move(mat));
  }
  // Chebyshev-type tail: |{|u| >= l}| <= C l / B(l).
  for (const SolveResult& r : cs.solves) {
    const double top = r.u.max_abs();
    double c_fit = 0.0;
    if (top > 0.0) {
      for (double l : numerics::geometric_grid(0.05 * top, top, 24)) {
        std::size_t count = 0;
        for (double v : r.u.raw()) {
          if (std::abs(v) >= l) ++count;
        }
        const double meas = static_cast<double>(count) * cm;
        c_fit = std::max(c_fit, meas * op.B(l) / l);
      }
    }
    cs.tail_constant.push_back(c_fit);
  }
  // Dual norm sqrt(r^T L^{-1} r) of the finest weak residual.
  {
    const Discretization disc(op, finest, eps_for(finest, options));
    const std::vector<double> a = z_coefficients(op, finest.raw());
    const Assembly as = disc.assemble(finest.raw(), cs.data.back().raw(), a, false);
    const SpMat lap = laplacian(finest);
    Eigen::SimplicialLDLT<SpMat> ldlt(lap);
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(as.grad.data(),
                                                          static_cast<Eigen::Index>(as.grad.size()));
    const Eigen::VectorXd z = ldlt.solve(r);
    cs.flux_consistency = std::sqrt(std::max(0.0, r.dot(z)));
  }
  return cs;
}

nlohmann::json UniquenessResult::to_json() const {
  return {{"levels", levels},
          {"discrepancy", discrepancy},
          {"gradient_discrepancy", gradient_discrepancy},
          {"final_discrepancy", final_discrepancy},
          {"final_gradient_discrepancy", final_gradient_discrepancy},
          {"monotone", monotone}};
}

UniquenessResult uniqueness_experiment(const OperatorSpec& op, const SampledField& f,
                                       std::span<const int> levels,
                                       const SolverOptions& options) {
  if (!op.strongly_monotone) {
    throw Error(ErrorKind::NotStronglyMonotone,
                "uniqueness experiment needs a strongly monotone operator");
  }
  UniquenessResult out;
  for (int k : levels) {
    const SampledField f1 = approximate_l1_data(f, k).f_k;
    const SampledField f2 = truncate(f, static_cast<double>(k));
    const SolveResult r1 = solve_approximate(op, f1, options);
    const SolveResult r2 = solve_approximate(op, f2, options);
    require_converged(r1, "mollifier sequence k=" + std::to_string(k));
    require_converged(r2, "truncation sequence k=" + std::to_string(k));
    double du = 0.0;
    for (std::size_t c = 0; c < f.cells(); ++c) du = std::max(du, std::abs(r1.u[c] - r2.u[c]));
    const SampledField g1 = discrete_gradient(r1.u);
    const SampledField g2 = discrete_gradient(r2.u);
    double dg = 0.0;
    for (std::size_t c = 0; c < f.cells(); ++c) {
      double s = 0.0;
      for (std::size_t q = 0; q < g1.components(); ++q) {
        s += (g1.at(c, q) - g2.at(c, q)) * (g1.at(c, q) - g2.at(c, q));
      }
      dg = std::max(dg, std::sqrt(s));
    }
    out.levels.push_back(k);
    out.discrepancy.push_back(du);
    out.gradient_discrepancy.push_back(dg);
  }
  for (std::size_t i = 1; i < out.discrepancy.size(); ++i) {
    if (out.discrepancy[i] > out.discrepancy[i - 1]) out.monotone = false;
  }
  if (!out.discrepancy.empty()) {
    out.final_discrepancy = out.discrepancy.back();
    out.final_gradient_discrepancy = out.gradient_discrepancy.back();
  }
  return out;
}

RegularityMeasures regularity_measures(const SampledField& u, const SampledField& grad_u,
                                       const NFunction& b, const RegularityTargets* targets) {
  u.require_same_grid(grad_u);
  RegularityMeasures m;
  m.n = u.n();
  m.u_sup = u.max_abs();
  const std::vector<double> gmag = grad_u.magnitudes();
  const double cm = u.cell_measure();
  m.grad_b = weak_marcinkiewicz(b, gmag, cm);
  if (targets != nullptr) {
    m.u_phi1 = weak_marcinkiewicz(targets->Phi1, u);
    m.grad_psi1 = weak_marcinkiewicz(targets->Psi1, gmag, cm);
    if (targets->Phi2) m.u_phi2 = weak_marcinkiewicz(*targets->Phi2, u);
    if (targets->Psi2) m.grad_psi2 = weak_marcinkiewicz(*targets->Psi2, gmag, cm);
  }
  return m;
}

nlohmann::json RegularityReport::to_json() const {
  nlohmann::json g = nlohmann::json::array();
  for (const auto& m : grids) {
    nlohmann::json row = {{"n", m.n},           {"u_sup", m.u_sup},
                          {"u_phi1", m.u_phi1}, {"grad_psi1", m.grad_psi1},
                          {"grad_b", m.grad_b}};
    if (m.u_phi2) row["u_phi2"] = *m.u_phi2;
    if (m.grad_psi2) row["grad_psi2"] = *m.grad_psi2;
    g.push_back(row);
  }
  return {{"grids", g},
          {"quantities", quantities},
          {"finite_stable", finite_stable},
          {"verdict", verdict}};
}

RegularityReport regularity_verdict(std::span<const RegularityMeasures> grids, bool track_sup,
                                    double tolerance) {
  RegularityReport rep;
  rep.grids.assign(grids.begin(), grids.end());
  rep.quantities = nlohmann::json::object();
  auto track = [&](const std::string& name, const std::vector<double>& values) {
    double lo = kInf;
    double hi = 0.0;
    bool finite = true;
    for (double v : values) {
      finite = finite && std::isfinite(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double spread = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : kInf);
    const bool stable = finite && spread <= 1.0 + tolerance;
    rep.quantities[name] = {{"values", values}, {"spread", spread}, {"stable", stable}};
    rep.finite_stable = rep.finite_stable && stable;
  };
  auto collect = [&](auto getter) {
    std::vector<double> v;
    for (const auto& m : grids) v.push_back(getter(m));
    return v;
  };
  const bool has_targets =
      std::any_of(grids.begin(), grids.end(), [](const auto& m) { return m.u_phi1 > 0.0; });
  if (has_targets) {
    track("u_vs_Phi1", collect([](const RegularityMeasures& m) { return m.u_phi1; }));
    track("grad_vs_Psi1", collect([](const RegularityMeasures& m) { return m.grad_psi1; }));
  }
  if (!grids.empty() && grids.front().u_phi2) {
    track("u_vs_Phi2", collect([](const RegularityMeasures& m) { return m.u_phi2.value_or(kInf); }));
    track("grad_vs_Psi2",
          collect([](const RegularityMeasures& m) { return m.grad_psi2.value_or(kInf); }));
  }
  if (track_sup) {
    track("u_sup", collect([](const RegularityMeasures& m) { return m.u_sup; }));
    // Only finiteness is asked of the gradient against B in the bounded case.
    bool finite = true;
    for (const auto& m : grids) finite = finite && std::isfinite(m.grad_b);
    rep.quantities["grad_vs_B"] = {
        {"values", collect([](const RegularityMeasures& m) { return m.grad_b; })},
        {"finite", finite}};
    rep.finite_stable = rep.finite_stable && finite;
  }
  rep.verdict = rep.finite_stable ? "finite/stable" : "growing-under-refinement";
  return rep;
}

}  // namespace orlicz
