// Command-line front end: reads problem files, dispatches to the library and
// writes provenance-stamped CSV files.
//
// Exit status: 0 success, 2 invalid input or usage, 3 search budget exhausted
// (partial results are still written), 1 anything unexpected.

#include "coopcomp/examples_repro.hpp"
#include "coopcomp/problem_file.hpp"
#include "coopcomp/report.hpp"
#include "coopcomp/scheme_sim.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace coopcomp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitBudget = 3;

struct Common {
  std::uint64_t seed = 0;
  std::string out = ".";
  double tol = 1e-9;
  std::size_t jobs = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "random seed (default 0)");
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--tol", c.tol, "solver convergence tolerance")->capture_default_str();
  sub->add_option("--jobs", c.jobs, "worker threads (0 = all cores)")->capture_default_str();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

SolverConfig solver_config(const Common& c) {
  SolverConfig s;
  s.tol = c.tol;
  s.seed = c.seed;
  s.jobs = c.jobs;
  return s;
}

std::uint64_t solver_hash(const SolverConfig& s) {
  std::ostringstream os;
  os << s.restarts << '|' << s.tol << '|' << s.max_iter << '|' << s.seed << '|' << s.set_cap;
  return fnv1a64(os.str());
}

/// Writes `body` under --out with the provenance line on top and echoes the path.
void emit(const Common& c, const std::string& name, std::uint64_t hash, const std::string& note,
          const std::string& body) {
  const auto path = std::filesystem::path(c.out) / name;
  write_file_atomic(path, csv_comment_header(c.seed, hash, note) + body);
  std::cout << "wrote " << path.string() << "\n";
}

// ------------------------------------------------------------------ graph / gentropy

struct GraphArgs {
  std::string file;
  std::string of = "X";
};

std::pair<AxisGroup, AxisGroup> graph_axes(const std::string& of) {
  if (of == "X") return {{"X"}, {"Y"}};
  if (of == "Y") return {{"Y"}, {"X"}};
  throw ValidationError("--of must be X or Y");
}

int run_graph(const Common& c, const GraphArgs& a) {
  const ProblemFile p = load_problem(a.file);
  const auto [l, k] = graph_axes(a.of);
  const CharGraph g = build_conditional_char_graph(p.pxy(), p.function(), l, k);
  std::string body = "vertex_a,vertex_b\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (g.adjacent(i, j)) body += g.label(i) + "," + g.label(j) + "\n";
  std::cout << g.adjacency_text();
  emit(c, "graph_" + a.of + ".csv", solver_hash(solver_config(c)), "graph=G_" + l[0] + "|" + k[0], body);
  return kExitOk;
}

int run_gentropy(const Common& c, const GraphArgs& a) {
  const ProblemFile p = load_problem(a.file);
  const auto [l, k] = graph_axes(a.of);
  const SolverConfig s = solver_config(c);
  const auto r = conditional_graph_entropy(p.pxy(), p.function(), l, k, s);
  std::cout << "H(G_" << l[0] << "|" << k[0] << ") = " << num(r.value) << " bits\n";
  emit(c, "gentropy_" + a.of + ".csv", solver_hash(s), "",
       "graph,entropy_bits,independent_sets\nG_" + l[0] + "|" + k[0] + "," + num(r.value) + "," +
           std::to_string(r.sets.size()) + "\n");
  return kExitOk;
}

// ------------------------------------------------------------------ region

struct RegionArgs {
  std::string file;
  std::string mode;
  std::size_t points = 33;
  std::size_t candidates = 120;
  std::size_t t_card = 0;
  std::size_t w_card = 0;
};

SearchConfig search_config(const Common& c, const RegionArgs& a) {
  SearchConfig s;
  s.grid_points = a.points;
  s.random_candidates = a.candidates;
  s.seed = c.seed;
  s.jobs = c.jobs;
  s.solver.tol = c.tol;
  s.solver.seed = c.seed;
  s.t_card = a.t_card;
  s.w_card = a.w_card;
  return s;
}

void check_witnesses(const FrontierCurve& curve, const FunctionSpec& f) {
  for (const auto& w : curve.witnesses)
    if (w && !validate_auxiliaries_theorem1(*w, f).ok)
      throw std::logic_error("search returned a witness that fails validation on " + curve.tag);
}

int emit_curve(const Common& c, const FrontierCurve& curve, const std::string& name, std::uint64_t hash) {
  if (!curve.monotone()) throw std::logic_error("frontier " + curve.tag + " is not monotone");
  emit(c, name, hash, "region=\"" + curve.region_label + "\"", curve.to_csv());
  if (curve.budget_exhausted) {
    std::cerr << "search budget exhausted; partial frontier written\n";
    return kExitBudget;
  }
  return kExitOk;
}

std::string rates_row(const std::string& tag, const RateTuple& r) {
  return tag + "," + num(r.r0) + "," + num(r.rx) + "," + num(r.ry) + "," + num(r.sum) + "\n";
}

int run_region(const Common& c, const RegionArgs& a) {
  const ProblemFile p = load_problem(a.file);
  const SearchConfig cfg = search_config(c, a);
  const std::uint64_t h = config_hash(cfg);
  const JointPmf base = p.pxy();
  const std::string name = "region_" + a.mode + ".csv";

  if (a.mode == "rd") {
    const RdConstraint rd = p.rd();
    std::string body = "form,r0_bits,rx_bits,ry_bits,sum_bits,distortion1,distortion2\n";
    auto row = [&](const std::string& tag, const RateTuple& r, double d1, double d2) {
      body += tag + "," + num(r.r0) + "," + num(r.rx) + "," + num(r.ry) + "," + num(r.sum) + "," + num(d1) + "," +
              num(d2) + "\n";
    };
    if (p.has_auxiliaries()) {
      const RdEvaluation e = evaluate_rd_bounds(p.auxiliaries(), rd);
      row("given", e.rates, e.distortion1, e.distortion2);
    } else {
      for (auto [mode, tag] : {std::pair{SumRateMode::kb51, "t_equals_u"}, std::pair{SumRateMode::kb54, "full_cooperation"}}) {
        const SumRateResult r = minimize_sum_rate(base, nullptr, &rd, mode, 0.0, cfg);
        if (!r.feasible) throw ValidationError(std::string("no feasible auxiliary found for ") + tag + ": " + r.note);
        row(tag, r.rates, r.distortion1, r.distortion2);
      }
    }
    emit(c, name, h, "mode=rd", body);
    return kExitOk;
  }

  const FunctionSpec f = p.function();
  if (a.mode == "theorem1") {
    if (p.has_auxiliaries()) {
      const RateTuple r = evaluate_theorem1_bounds(p.auxiliaries(), f);
      emit(c, name, h, "mode=theorem1 auxiliaries=given", "form,r0_bits,rx_bits,ry_bits,sum_bits\n" + rates_row("given", r));
      return kExitOk;
    }
    FrontierCurve curve;
    curve.tag = "theorem1";
    curve.region_label = "achievable (inner bound)";
    for (double b : even_grid(0.0, cond_entropy(base, {"X"}, {"Y"}), cfg.grid_points)) {
      const SumRateResult r = minimize_sum_rate(base, &f, nullptr, SumRateMode::theorem1, b, cfg);
      if (!r.feasible) continue;
      if (!curve.x.empty() && r.value > curve.y.back()) {
        // the frontier is the running minimum: a larger budget may reuse the earlier witness
        curve.x.push_back(b);
        curve.y.push_back(curve.y.back());
        curve.witnesses.push_back(curve.witnesses.back());
        continue;
      }
      curve.x.push_back(b);
      curve.y.push_back(r.value);
      curve.witnesses.push_back(r.witness);
    }
    check_witnesses(curve, f);
    return emit_curve(c, curve, name, h);
  }
  if (a.mode == "partinv") {
    const FrontierCurve curve = region_partially_invertible(base, f, cfg);
    check_witnesses(curve, f);
    return emit_curve(c, curve, name, h);
  }
  if (a.mode == "fullcoop") {
    const double lo = full_cooperation_min_ry(base, f) + 1e-6;
    const FrontierCurve curve =
        region_full_cooperation(base, f, even_grid(lo, std::max(lo, entropy(base, {"Y"})), cfg.grid_points), cfg);
    check_witnesses(curve, f);
    return emit_curve(c, curve, name, h);
  }
  if (a.mode == "oneround") {
    const double rx = rate_one_round(base, f, cfg.solver);
    emit(c, name, h, "mode=oneround", "rx_bits\n" + num(rx) + "\n");
    return kExitOk;
  }
  if (a.mode == "tworound") {
    const FrontierCurve curve = region_two_round(base, f, cfg);
    check_witnesses(curve, f);
    return emit_curve(c, curve, name, h);
  }
  if (a.mode == "cascade") {
    const RateTuple r = region_cascade(base, f, cfg.solver);
    emit(c, name, h, "mode=cascade", "r0_bits,rx_bits,ry_bits\n" + num(r.r0) + "," + num(r.rx) + "," + num(r.ry) + "\n");
    return kExitOk;
  }
  throw ValidationError("unknown mode " + a.mode);
}

// ------------------------------------------------------------------ simulate

struct SimArgs {
  std::string file;
  std::vector<std::size_t> ns{100};
  std::size_t trials = 500;
  double margin = 0.3;
  std::optional<double> r0, rx, ry;
  double eps_cover = 0.05, eps_mid = 0.10, eps_dec = 0.15;
  std::size_t memory_cap_mb = 2048;
};

int run_simulate(const Common& c, const SimArgs& a) {
  const ProblemFile p = load_problem(a.file);
  if (!p.has_auxiliaries()) throw ValidationError("simulate needs auxiliary channel sections [U] [T] [V] [W]");
  const AuxiliarySystem sys = p.auxiliaries();
  const FunctionSpec f = p.function();
  const RateTuple b = theorem1_rates(sys.joint());
  // unspecified rates sit `margin` above their own bound
  const RateTuple rates{a.r0.value_or(b.r0 + a.margin), a.rx.value_or(b.rx + a.margin),
                        a.ry.value_or(b.ry + a.margin), 0.0};
  std::string body = SimulationResult::csv_header() + ",error_rate,margin_bits,validated\n";
  std::ostringstream hash_src;
  hash_src << a.trials << '|' << a.eps_cover << '|' << a.eps_mid << '|' << a.eps_dec << '|' << rates.r0 << '|'
           << rates.rx << '|' << rates.ry << '|' << a.memory_cap_mb;
  for (std::size_t n : a.ns) {
    hash_src << '|' << n;
    SimulationConfig cfg;
    cfg.n = n;
    cfg.trials = a.trials;
    cfg.eps_cover = a.eps_cover;
    cfg.eps_mid = a.eps_mid;
    cfg.eps_dec = a.eps_dec;
    cfg.seed = c.seed;
    cfg.jobs = c.jobs;
    cfg.memory_cap_bytes = a.memory_cap_mb << 20;
    const SimulationResult r = simulate_two_phase_scheme(sys, f, rates, cfg);
    if (!r.validated) std::cerr << "warning: auxiliaries fail validation: " << r.validation_note << "\n";
    std::cout << "n=" << n << " error=" << num(r.error_rate()) << " margin=" << num(r.margin) << "\n";
    body += r.csv_row() + "," + num(r.error_rate()) + "," + num(r.margin) + "," + (r.validated ? "1" : "0") + "\n";
  }
  emit(c, "simulate.csv", fnv1a64(hash_src.str()), "", body);
  return kExitOk;
}

// ------------------------------------------------------------------ repro

struct ReproArgs {
  std::string target;
  std::size_t points = 33;
};

int run_repro(const Common& c, const ReproArgs& a) {
  SearchConfig cfg;
  cfg.grid_points = a.points;
  cfg.seed = c.seed;
  cfg.jobs = c.jobs;
  cfg.solver.tol = c.tol;
  cfg.solver.seed = c.seed;
  const std::uint64_t h = config_hash(cfg);
  int status = kExitOk;

  if (a.target == "example1") {
    // a = 3 and a = 4, both with b = 10
    for (std::size_t alpha : {3, 4}) {
      const Example1Sweep sw = example1_sweep(alpha, 10, cfg);
      const std::string name = "example1_a" + std::to_string(alpha) + "_b10.csv";
      status = std::max(status, emit_curve(c, sw.curve, name, h));
    }
    return status;
  }
  if (a.target == "example2") {
    const Example2Result r = example2_regions(cfg);
    status = std::max(status, emit_curve(c, r.full_cooperation, "example2_full_cooperation.csv", h));
    status = std::max(status, emit_curve(c, r.no_cooperation, "example2_no_cooperation.csv", h));
    std::string body = "ry_bits,no_cooperation_sum_bits,full_cooperation_sum_bits,gap_bits\n";
    for (std::size_t i = 0; i < r.ry_grid.size() && i < r.full_cooperation.y.size() && i < r.no_cooperation.y.size();
         ++i)
      body += num(r.ry_grid[i]) + "," + num(r.no_cooperation.y[i]) + "," + num(r.full_cooperation.y[i]) + "," +
              num(r.no_cooperation.y[i] - r.full_cooperation.y[i]) + "\n";
    emit(c, "example2_gap.csv", h, "H(X|Y)=" + num(r.h_x_given_y), body);
    std::cout << "H(X|Y) = " << num(r.h_x_given_y) << " bits\n";
    return status;
  }
  if (a.target == "appendix") {
    SearchConfig acfg = cfg;
    acfg.rd_restarts = 8;
    const AppendixClaims cl = appendix_example_claims(acfg);
    std::string body = "claim,quantity,value_bits,stated_bits,tolerance,within_tolerance\n";
    auto line = [&](const std::string& claim, const std::string& q, double v, double stated, double tol) {
      const bool ok = std::abs(v - stated) <= tol;
      body += claim + "," + q + "," + num(v) + "," + num(stated) + "," + num(tol) + "," + (ok ? "1" : "0") + "\n";
      std::cout << claim << " " << q << " = " << num(v) << " (stated " << num(stated) << ")" << (ok ? "" : "  MISMATCH")
                << "\n";
    };
    line("1", "min_I(XY;TW)", cl.claim1.value, 1.03, 0.01);
    line("2", "I(XY;W)", cl.claim2.rates.sum, 1.0 - 1.0 / 7, 1e-6);
    line("3", "I(X;U|Y)", cl.claim3.rates.r0, 0.38, 0.01);
    line("3", "I(XY;W)", cl.claim3_ixy_w, 1.0 - 1.0 / 7, 1e-6);
    line("3", "sum_bound", cl.claim3.rates.sum, 1.0 - 1.0 / 7, 1e-6);
    emit(c, "appendix_claims.csv", config_hash(acfg), "H(X|Y)=" + num(cl.h_x_given_y), body);
    return kExitOk;
  }
  throw ValidationError("unknown target " + a.target);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rate regions for cooperative function computation"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common common;
  GraphArgs ga;
  auto* graph = app.add_subcommand("graph", "emit the conditional characteristic graph");
  graph->add_option("file", ga.file, "problem file")->required();
  graph->add_option("--of", ga.of, "vertex variable, X or Y")->capture_default_str();
  add_common(graph, common);

  GraphArgs ea;
  auto* gent = app.add_subcommand("gentropy", "conditional graph entropy H(G_{X|Y})");
  gent->add_option("file", ea.file, "problem file")->required();
  gent->add_option("--of", ea.of, "vertex variable, X or Y")->capture_default_str();
  add_common(gent, common);

  RegionArgs ra;
  auto* region = app.add_subcommand("region", "rate-region frontiers and bound evaluation");
  region->add_option("file", ra.file, "problem file")->required();
  region->add_option("--mode", ra.mode)
      ->required()
      ->check(CLI::IsMember({"theorem1", "partinv", "fullcoop", "oneround", "tworound", "cascade", "rd"}));
  region->add_option("--points", ra.points, "budget grid size")->capture_default_str();
  region->add_option("--candidates", ra.candidates, "random channels per grid search")->capture_default_str();
  region->add_option("--t-card", ra.t_card, "override the T cardinality bound");
  region->add_option("--w-card", ra.w_card, "override the W cardinality bound");
  add_common(region, common);

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo of the two-phase binning scheme");
  sim->add_option("file", sa.file, "problem file with auxiliary sections")->required();
  sim->add_option("--n", sa.ns, "block lengths (repeatable)")->capture_default_str();
  sim->add_option("--trials", sa.trials)->capture_default_str();
  sim->add_option("--margin", sa.margin, "default rate offset above each bound")->capture_default_str();
  sim->add_option("--r0", sa.r0);
  sim->add_option("--rx", sa.rx);
  sim->add_option("--ry", sa.ry);
  sim->add_option("--eps-cover", sa.eps_cover)->capture_default_str();
  sim->add_option("--eps-mid", sa.eps_mid)->capture_default_str();
  sim->add_option("--eps-dec", sa.eps_dec)->capture_default_str();
  sim->add_option("--memory-cap-mb", sa.memory_cap_mb)->capture_default_str();
  add_common(sim, common);

  ReproArgs pa;
  auto* repro = app.add_subcommand("repro", "reproduce the worked examples");
  repro->add_option("--target", pa.target)->required()->check(CLI::IsMember({"example1", "example2", "appendix"}));
  repro->add_option("--points", pa.points, "grid size")->capture_default_str();
  add_common(repro, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (*graph) return run_graph(common, ga);
    if (*gent) return run_gentropy(common, ea);
    if (*region) return run_region(common, ra);
    if (*sim) return run_simulate(common, sa);
    if (*repro) return run_repro(common, pa);
  } catch (const SearchBudgetError& e) {
    std::cerr << "search budget exhausted: " << e.what() << "\n";
    return kExitBudget;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitInvalid;
}
