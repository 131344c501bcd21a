// orlicz_lab: N-function tables, field norms, embedding functions, the
// approximate-problem pipeline and the acceptance suites.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "orlicz/embedding.hpp"
#include "orlicz/error.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/norms.hpp"
#include "orlicz/numerics.hpp"
#include "orlicz/operator.hpp"
#include "orlicz/report.hpp"
#include "orlicz/solver.hpp"
#include "orlicz/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace orlicz;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports "line L, column C" in the message.
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

struct NfunFlags {
  std::string kind = "power";
  double p = 2.0;
  double q = 3.0;
  double beta = 1.0;
  double scale = 1.0;
  std::string spec;

  json as_json() const {
    if (!spec.empty()) return read_json_file(spec);
    json params = json::object();
    if (kind == "power") params = {{"p", p}, {"scale", scale}};
    if (kind == "zygmund") params = {{"p", p}, {"beta", beta}};
    if (kind == "pathological") params = {{"p", p}, {"q", q}};
    return {{"kind", kind}, {"params", params}};
  }
  NFunction build() const { return NFunction::from_json(as_json()); }

  void attach(CLI::App* app) {
    app->add_option("--kind", kind, "power|zygmund|llogl|exp_conjugate|t_exp_t|pathological");
    app->add_option("--p", p, "exponent p");
    app->add_option("--q", q, "upper exponent q (pathological)");
    app->add_option("--beta", beta, "log power (zygmund)");
    app->add_option("--scale", scale, "multiplier (power)");
    app->add_option("--spec", spec, "N-function JSON file (overrides --kind)");
  }
};

// "power:2.5", "zygmund:2:1", "llogl", ...
NFunction nfunction_from_compact(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) throw Error(ErrorKind::ParseError, "empty N-function name");
  json j = {{"kind", parts[0]}, {"params", json::object()}};
  try {
    if (parts[0] == "power" && parts.size() > 1) j["params"]["p"] = std::stod(parts[1]);
    if (parts[0] == "zygmund" && parts.size() > 2) {
      j["params"]["p"] = std::stod(parts[1]);
      j["params"]["beta"] = std::stod(parts[2]);
    }
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "bad N-function parameter in '" + s + "'");
  }
  return NFunction::from_json(j);
}

std::vector<double> column(const std::vector<double>& x, const std::function<double(double)>& f) {
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) {
    try {
      out.push_back(f(v));
    } catch (const Error&) {
      out.push_back(std::nan(""));
    }
  }
  return out;
}

json tolerance_set() { return verify::tolerances().to_json(); }

// ------------------------------------------------------------------- nfun

struct NfunCmd {
  NfunFlags nf;
  bool conj = false, delta2 = false, indices = false;
  std::string dominates;
  double tmin = 0.01, tmax = 100.0;
  std::size_t points = 41;

  int run(const fs::path& out_dir) const {
    const NFunction b = nf.build();
    const double hi = std::min(tmax, b.domain_cap());
    const auto t = numerics::geometric_grid(tmin, hi, points);
    json result = {{"nfunction", b.to_json()}};
    std::vector<std::string> header = {"t", "B", "dB"};
    std::vector<std::vector<double>> cols = {t, column(t, [&](double x) { return b(x); }),
                                             column(t, [&](double x) { return b.derivative(x); })};
    const ConvexityReport convex = check_nfunction(b, tmin, hi);
    result["convexity"] = {{"ok", convex.ok}, {"max_violation", convex.max_violation}};
    std::cout << b.label() << ": convexity " << (convex.ok ? "ok" : "VIOLATED") << "\n";
    if (conj) {
      const NFunction c = conjugate(b);
      header.insert(header.end(), {"s", "conjugate"});
      cols.push_back(t);
      cols.push_back(column(t, [&](double s) { return c(s); }));
      std::cout << "conjugate tabulated at " << t.size() << " slopes\n";
    }
    if (delta2) {
      const Delta2Stats d = delta2_stats(b, 1.0, std::min(1e6, 0.5 * b.domain_cap()), 200);
      result["delta2"] = {{"ratio_max", d.ratio_max},
                          {"unbounded_evidence", d.unbounded_evidence},
                          {"s", d.s},
                          {"ratio", d.ratio_series}};
      std::cout << "Delta2: max B(2s)/B(s) = " << d.ratio_max << "  "
                << (d.unbounded_evidence ? "NOT-Delta2 (ratio series unbounded)"
                                         : "bounded on the sampled range")
                << "\n";
    }
    if (indices) {
      const SimonenkoIndices si = simonenko_indices(b, 1e-3, b.domain_cap(), 20);
      result["indices"] = {{"i_B", si.i_b}, {"s_B", si.s_b}};
      std::cout << "Simonenko indices: i_B = " << si.i_b << ", s_B = " << si.s_b << "\n";
    }
    if (!dominates.empty()) {
      const NFunction p = nfunction_from_compact(dominates);
      const auto eps = default_eps_grid();
      const DominationEvidence ev = dominates_much(p, b, eps, 1e6);
      json tails = json::array();
      for (const auto& tl : ev.tails) tails.push_back({{"eps", tl.eps}, {"decreasing", tl.decreasing}});
      result["domination"] = {{"P", p.label()}, {"dominates", ev.dominates}, {"tails", tails}};
      std::cout << b.label() << (ev.dominates ? " dominates " : " does not dominate ")
                << p.label() << " essentially\n";
    }
    const json config = {{"command", "nfun"}, {"nfunction", nf.as_json()}, {"conjugate", conj},
                         {"delta2", delta2}, {"indices", indices}, {"dominates", dominates},
                         {"tmin", tmin}, {"tmax", tmax}, {"points", points}};
    report::write_json(out_dir / "nfun.json", report::envelope("nfun", config, tolerance_set(), result));
    report::write_text(out_dir / "nfun.csv", report::csv_table(header, cols));
    return convex.ok ? 0 : 1;
  }
};

// ------------------------------------------------------------------- norm

struct NormCmd {
  NfunFlags nf;
  std::string field;

  int run(const fs::path& out_dir) const {
    std::ifstream in(field);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open " + field);
    const SampledField f = read_field_csv(in);
    const NFunction b = nf.build();
    const double norm = luxemburg_norm(b, f);
    json modulars = json::array();
    if (norm > 0.0) {
      for (double m : {0.5, 1.0, 2.0}) {
        modulars.push_back({{"lambda", m * norm}, {"modular", modular(b, f, m * norm)}});
      }
    }
    const RearrangementProfile prof = rearrange(f);
    const MarcinkiewiczNorm mz = marcinkiewicz_norm(b, f);
    json weak = nullptr;
    try {
      weak = weak_marcinkiewicz(b, f);
    } catch (const Error& e) {
      weak = std::string(e.what());
    }
    const json result = {{"luxemburg_norm", norm},
                         {"modular", modulars},
                         {"marcinkiewicz", {{"norm", mz.norm}, {"range_truncated", mz.range_truncated}}},
                         {"weak_marcinkiewicz", weak},
                         {"measure", f.measure()},
                         {"cells", f.cells()}};
    std::cout << "Luxemburg norm " << norm << ", Marcinkiewicz " << mz.norm << "\n";
    std::vector<double> s(prof.fstar.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = (static_cast<double>(i) + 1.0) * prof.cell_measure;
    report::write_text(out_dir / "rearrangement.csv",
                       report::csv_table({"s", "fstar", "fstarstar"}, {s, prof.fstar, prof.fstarstar}));
    const json config = {{"command", "norm"}, {"field", field}, {"nfunction", nf.as_json()}};
    report::write_json(out_dir / "norm.json", report::envelope("norm", config, tolerance_set(), result));
    return 0;
  }
};

// ------------------------------------------------------------------ embed

struct EmbedCmd {
  NfunFlags nf;
  int N = 3;
  std::string growth;
  double K = 1.0;
  double diam = 1.0;

  int run(const fs::path& out_dir) const {
    const NFunction b = nf.build();
    std::optional<GrowthClass> override_class;
    if (!growth.empty()) override_class = growth_class_from_string(growth);
    EmbeddingData e;
    try {
      e = embedding_functions(b, N, override_class);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::UndeterminedGrowth) {
        std::cerr << err.what() << "\nhint: pass --growth slow|fast to override\n";
      }
      throw;
    }
    const RegularityTargets tg = regularity_targets(b, N, K, diam, override_class);
    std::cout << b.label() << ", N=" << N << ": growth " << to_string(e.growth.growth)
              << (e.growth.overridden ? " (override)" : "")
              << (e.origin_normalized ? ", normalized at the origin" : "") << "\n";

    std::vector<double> t = numerics::geometric_grid(1e-3, std::min(1e3, 0.5 * e.B_N_cap()), 61);
    std::vector<std::string> header = {"t", "B_N", "Phi1", "Psi1"};
    std::vector<std::vector<double>> cols = {
        t, column(t, [&](double x) { return e.B_N(x); }),
        column(t, [&](double x) { return tg.Phi1(x); }),
        column(t, [&](double x) { return tg.Psi1(x); })};
    if (tg.Phi2) {
      header.insert(header.end(), {"Phi2", "Psi2"});
      cols.push_back(column(t, [&](double x) { return (*tg.Phi2)(x); }));
      cols.push_back(column(t, [&](double x) { return (*tg.Psi2)(x); }));
    }
    report::write_text(out_dir / "embed_targets.csv", report::csv_table(header, cols));
    report::write_text(out_dir / "embed_tables.csv",
                       report::csv_table({"s", "H_N", "phi_N"}, {e.s, e.H, e.phi}));
    report::write_text(out_dir / "embed.svg",
                       report::svg_line_chart("B_N and targets", {{"B_N", t, cols[1]},
                                                                  {"Phi1", t, cols[2]},
                                                                  {"Psi1", t, cols[3]}},
                                              true, true));
    const json result = {{"growth", to_string(e.growth.growth)},
                         {"overridden", e.growth.overridden},
                         {"increment_ratios", e.growth.ratios},
                         {"origin_normalized", e.origin_normalized},
                         {"Nprime", e.Nprime},
                         {"targets", {{"K", tg.K}, {"K_bar", tg.K_bar}, {"c1", tg.c1}, {"c_bar", tg.c_bar},
                                      {"u_bounded_expected", tg.u_bounded_expected}, {"notes", tg.notes}}}};
    const json config = {{"command", "embed"}, {"nfunction", nf.as_json()}, {"N", N},
                         {"growth", growth}, {"K", K}, {"diam", diam}};
    report::write_json(out_dir / "embed.json", report::envelope("embed", config, tolerance_set(), result));
    return 0;
  }
};

// ------------------------------------------------------------------ solve

struct SolveCmd {
  std::string problem_path;

  int run(const fs::path& out_dir) const {
    const json spec = read_json_file(problem_path);
    OperatorSpec op = OperatorSpec::from_json(spec.value("operator", json::object()));
    const ProblemSpec problem = ProblemSpec::from_json(spec.at("problem"));
    std::vector<double> levels = spec.value("truncation_levels", problem.truncation_levels);
    json result;
    std::vector<std::string> flags;

    const ConvergenceStudy cs = convergence_study(op, problem);
    result["convergence"] = cs.to_json();
    const SolveResult& finest = cs.solves.back();
    for (std::size_t i = 0; i < cs.solves.size(); ++i) {
      const SolveResult& s = cs.solves[i];
      const std::string tag = "level k=" + std::to_string(cs.levels[i]);
      if (op.form == FluxForm::PotentialGradient && !s.energy_monotone) flags.push_back(tag + ": energy increased");
      if (s.coercivity_gap < -1e-9 * std::max(1.0, std::abs(s.coercivity_gap))) {
        flags.push_back(tag + ": discrete coercivity violated");
      }
    }
    std::cout << "solved " << cs.levels.size() << " levels, finest residual " << finest.residual
              << ", Cauchy decreasing " << (cs.cauchy_decreasing ? "yes" : "no") << "\n";

    op = calibrated(op, problem.dim, problem.extent, problem.seed);
    const OperatorValidation val = validate_operator(op, problem.dim, problem.extent, problem.seed);
    result["operator_validation"] = val.to_json();
    if (!val.ok()) flags.push_back("operator hypotheses failed on samples");

    const AprioriReport ap = apriori_report(op, finest.u, cs.data.back(), levels);
    result["apriori"] = ap.to_json();
    if (!ap.ok) flags.push_back("a priori bound exceeded");
    std::cout << "a priori: " << (ap.ok ? "within" : "EXCEEDS") << " 1.1 c0 t |f|_1; "
              << "second estimate holds with |A|/d: " << (ap.divided_holds ? "yes" : "no")
              << ", with d|A|: " << (ap.multiplied_holds ? "yes" : "no") << "\n";

    // Regularity over the finest grid plus any requested refinements.
    const double K = ap.c0 * ap.f_l1;
    std::optional<RegularityTargets> targets;
    if (problem.dim >= 2) {
      try {
        targets = regularity_targets(op.B, problem.dim, K, problem.extent * std::sqrt(problem.dim));
      } catch (const Error& e) {
        result["regularity_targets_error"] = e.what();
      }
    }
    std::vector<RegularityMeasures> grids;
    auto measure = [&](const SampledField& u) {
      grids.push_back(regularity_measures(u, discrete_gradient(u), op.B, targets ? &*targets : nullptr));
    };
    measure(finest.u);
    for (std::size_t n : problem.refinements) {
      ProblemSpec refined = problem;
      refined.n = n;
      const int k = problem.mollifier_levels.back();
      SampledField fk;
      if (problem.datum == DatumKind::AtomicMeasure) {
        fk = mollify_measure(problem.atoms, k, problem.dim, n, problem.extent);
      } else {
        // Resample the catalogue datum on the refined grid.
        json pj = spec.at("problem");
        pj["n"] = n;
        fk = approximate_l1_data(ProblemSpec::from_json(pj).l1_datum, k).f_k;
      }
      const SolveResult s = solve_approximate(op, fk);
      require_converged(s, "refinement n=" + std::to_string(n));
      measure(s.u);
    }
    const bool track_sup = !targets || targets->u_bounded_expected;
    if (grids.size() > 1) {
      const RegularityReport rep = regularity_verdict(grids, track_sup);
      result["regularity"] = rep.to_json();
      std::cout << "regularity verdict: " << rep.verdict << "\n";
    }
    result["flags"] = flags;

    std::ofstream csv(out_dir / "solution.csv");
    write_field_csv(csv, finest.u);
    // Distribution function of |u| against the targets.
    const auto prof = rearrange(finest.u);
    std::vector<double> lvl, meas;
    for (std::size_t i = 0; i < prof.fstar.size(); i += std::max<std::size_t>(1, prof.fstar.size() / 200)) {
      if (prof.fstar[i] <= 0.0) break;
      lvl.push_back(prof.fstar[i]);
      meas.push_back((static_cast<double>(i) + 1.0) * prof.cell_measure);
    }
    std::vector<report::Series> series = {{"|{|u| > l}|", lvl, meas}};
    if (targets) {
      std::vector<double> bound;
      const double scale = grids.front().u_phi1;
      for (double l : lvl) bound.push_back(1.0 / targets->Phi1(l / std::max(scale, 1e-300)));
      series.push_back({"1/Phi1(l/norm)", lvl, bound});
    }
    report::write_text(out_dir / "levelsets.svg", report::svg_line_chart("level sets of u", series, true, true));
    report::write_json(out_dir / "solve.json",
                       report::envelope("solve", {{"command", "solve"}, {"problem", spec}},
                                        tolerance_set(), result));
    for (const auto& f : flags) std::cout << "FLAG: " << f << "\n";
    return flags.empty() ? 0 : 1;
  }
};

// ----------------------------------------------------------------- verify

struct VerifyCmd {
  std::string suite = "all";
  std::uint64_t seed = 7;

  int run(const fs::path& out_dir) const {
    const auto results = verify::run_suite(suite, seed);
    json rows = json::array();
    int failed = 0;
    for (const auto& r : results) {
      std::printf("[%s] %2d %-48s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds, r.detail.c_str());
      // Runtime is left out so that the report is reproducible byte for byte.
      rows.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"data", r.data}});
      if (!r.passed) ++failed;
    }
    const json config = {{"command", "verify"}, {"suite", suite}, {"seed", seed}};
    report::write_json(out_dir / ("verify_" + suite + ".json"),
                       report::envelope("verify", config, tolerance_set(),
                                        {{"criteria", rows}, {"failed", failed}}));
    std::printf("%zu criteria, %d failed\n", results.size(), failed);
    return failed == 0 ? 0 : 1;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orlicz_lab: Orlicz-space calculus and approximate solutions with measure data"};
  app.require_subcommand(1);
  std::string out = "orlicz_out";
  app.add_option("--out", out, "output directory (ORLICZ_LAB_OUT overrides)");

  NfunCmd nfun;
  auto* c_nfun = app.add_subcommand("nfun", "tables, conjugate, Delta2, indices, domination");
  nfun.nf.attach(c_nfun);
  c_nfun->add_flag("--conjugate", nfun.conj, "tabulate the conjugate");
  c_nfun->add_flag("--delta2", nfun.delta2, "B(2s)/B(s) series");
  c_nfun->add_flag("--indices", nfun.indices, "Simonenko indices");
  c_nfun->add_option("--dominates", nfun.dominates, "P as power:2.5, zygmund:2:1, llogl, ...");
  c_nfun->add_option("--tmin", nfun.tmin);
  c_nfun->add_option("--tmax", nfun.tmax);
  c_nfun->add_option("--points", nfun.points);

  NormCmd norm;
  auto* c_norm = app.add_subcommand("norm", "Luxemburg and Marcinkiewicz norms of a field CSV");
  norm.nf.attach(c_norm);
  c_norm->add_option("field", norm.field, "field CSV")->required();

  EmbedCmd embed;
  auto* c_embed = app.add_subcommand("embed", "growth class, H_N/B_N/phi_N and targets");
  embed.nf.attach(c_embed);
  c_embed->add_option("--N", embed.N, "dimension N >= 2");
  c_embed->add_option("--growth", embed.growth, "override: slow|fast");
  c_embed->add_option("--K", embed.K, "level-set constant K");
  c_embed->add_option("--diam", embed.diam, "domain diameter");

  SolveCmd solve;
  auto* c_solve = app.add_subcommand("solve", "mollify, solve, a priori, convergence, regularity");
  c_solve->add_option("problem", solve.problem_path, "problem JSON")->required();

  VerifyCmd ver;
  auto* c_verify = app.add_subcommand("verify", "run an acceptance suite");
  c_verify->add_option("suite", ver.suite, "calculus|norms|embedding|solver|all");
  c_verify->add_option("--seed", ver.seed);

  CLI11_PARSE(app, argc, argv);
  try {
    const fs::path dir = report::output_dir(out);
    if (*c_nfun) return nfun.run(dir);
    if (*c_norm) return norm.run(dir);
    if (*c_embed) return embed.run(dir);
    if (*c_solve) return solve.run(dir);
    if (*c_verify) return ver.run(dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
