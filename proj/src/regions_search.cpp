#include "coopcomp/channel_search.hpp"
#include "coopcomp/regions.hpp"
#include "coopcomp/util.hpp"
#include "rd_search.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace coopcomp {
namespace {

constexpr double kBudgetTol = 1e-9;

// Random-stream tags so different searches never share draws.
constexpr std::uint64_t kStreamU = 0x7501;
constexpr std::uint64_t kStreamT = 0x7402;
constexpr std::uint64_t kStreamSolve = 0x5303;

struct Pool {
  std::vector<Channel> channels;
  bool exhausted = false;
};

// Deterministic maps by set partition (when under the cap), then random
// channels with 2..max_card outputs.
Pool channel_pool(const Alphabet& from, const std::string& to_name, std::size_t max_card, const SearchConfig& cfg,
                  std::uint64_t stream) {
  Pool p;
  const std::size_t n = from.size();
  if (partition_count(n, max_card) <= cfg.exhaustive_cap) {
    for (const auto& blocks : set_partitions(n, max_card)) p.channels.push_back(partition_channel(from, blocks, to_name));
  } else {
    p.exhausted = true;
    p.channels.push_back(Channel::constant({from}, to_name));
  }
  if (max_card >= 2) {
    for (std::size_t i = 0; i < cfg.random_candidates; ++i) {
      std::mt19937_64 rng(derive_seed(cfg.seed, stream, i));
      const std::size_t cols = 2 + static_cast<std::size_t>(rng() % (max_card - 1));
      p.channels.push_back(random_channel(rng, {from}, to_name, cols));
    }
  }
  return p;
}

SolverConfig solver_for(const SearchConfig& cfg, std::size_t index) {
  SolverConfig s = cfg.solver;
  s.seed = derive_seed(cfg.seed, kStreamSolve, index);
  s.jobs = 1;
  return s;
}

Channel rows_to_channel(std::vector<Alphabet> from, const std::string& name,
                        const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 1 : rows.front().size();
  std::vector<double> t;
  t.reserve(rows.size() * cols);
  for (const auto& r : rows) t.insert(t.end(), r.begin(), r.end());
  return Channel(std::move(from), Alphabet::range(name, cols), std::move(t));
}

// ---------------------------------------------------------------- T = U shape

enum class WGoal { sum, ry, singletons };

AuxiliarySystem t_equals_u_candidate(const JointPmf& base, const FunctionSpec& f, const Channel& u_ch, WGoal goal,
                                     const SolverConfig& sc, bool* exhausted) {
  const Alphabet& ua = u_ch.to();
  const Alphabet& ya = base.alphabet("Y");
  if (goal == WGoal::singletons) {
    std::vector<std::size_t> map(ua.size() * ya.size());
    std::vector<std::vector<std::size_t>> sets(ya.size());
    for (std::size_t u = 0; u < ua.size(); ++u)
      for (std::size_t y = 0; y < ya.size(); ++y) {
        map[u * ya.size() + y] = y;
        sets[y].push_back(u * ya.size() + y);
      }
    Alphabet wa = ya;
    wa.name = "W";
    return system_t_equals_u(base, u_ch, Channel::deterministic({ua, ya}, wa, map), sets);
  }
  const JointPmf j = extend(base, u_ch);
  const CharGraph g = build_conditional_char_graph(j, f, {"U", "Y"}, {"X", "U"});
  const AxisGroup k = goal == WGoal::sum ? AxisGroup{"U"} : AxisGroup{"X", "U"};
  const SlicedSetSolution sol = solve_sliced_sets(j, g, k, "U", sc);
  if (exhausted && sol.budget_exhausted) *exhausted = true;
  return system_t_equals_u(base, u_ch, rows_to_channel({ua, ya}, "W", sol.rows), sol.sets);
}

// (r0, rx, ry, sum) in the partially invertible form.
RateTuple partinv_rates(const JointPmf& j) {
  RateTuple r;
  r.r0 = cond_mutual_info(j, {"X"}, {"U"}, {"Y"});
  r.rx = cond_entropy(j, {"X"}, {"U", "W"});
  r.ry = cond_mutual_info(j, {"Y"}, {"W"}, {"X", "U"});
  r.sum = entropy(j, {"X"}) + cond_mutual_info(j, {"Y"}, {"W"}, {"U"});
  return r;
}

struct Candidate {
  AuxiliarySystem sys;
  RateTuple rates;
};

RateTuple mix_rates(const RateTuple& a, const RateTuple& b, double lam) {
  return {lam * a.r0 + (1 - lam) * b.r0, lam * a.rx + (1 - lam) * b.rx, lam * a.ry + (1 - lam) * b.ry,
          lam * a.sum + (1 - lam) * b.sum};
}

AuxiliarySystem realize(const std::vector<Candidate>& c, const EnvelopeChoice& ch) {
  if (ch.lambda >= 1.0 || ch.i == ch.j) return c[ch.i].sys;
  return mix_systems(c[ch.i].sys, c[ch.j].sys, ch.lambda);
}

RateTuple realize_rates(const std::vector<Candidate>& c, const EnvelopeChoice& ch) {
  if (ch.lambda >= 1.0 || ch.i == ch.j) return c[ch.i].rates;
  return mix_rates(c[ch.i].rates, c[ch.j].rates, ch.lambda);
}

// r0-constrained frontier points: g = r0, objective = sum
std::vector<EnvelopePoint> r0_points(const std::vector<Candidate>& c, bool use_ry_as_objective = false) {
  std::vector<EnvelopePoint> pts;
  for (const auto& x : c) pts.push_back({x.rates.r0, 0.0, use_ry_as_objective ? x.rates.ry : x.rates.sum});
  return pts;
}

// ry-constrained points: g = ry, objective = max(rx + ry, sum)
std::vector<EnvelopePoint> ry_points(const std::vector<Candidate>& c) {
  std::vector<EnvelopePoint> pts;
  for (const auto& x : c) pts.push_back({x.rates.ry, x.rates.rx + x.rates.ry, x.rates.sum});
  return pts;
}

std::vector<Candidate> partinv_candidates(const JointPmf& base, const FunctionSpec& f, const SearchConfig& cfg,
                                          std::size_t max_u, const std::vector<WGoal>& goals, double r0_cap,
                                          bool* exhausted) {
  const Pool pool = channel_pool(base.alphabet("X"), "U", max_u, cfg, kStreamU);
  if (pool.exhausted) *exhausted = true;
  const std::size_t per = goals.size();
  std::vector<std::optional<Candidate>> slots(pool.channels.size() * per);
  std::vector<char> flags(slots.size(), 0);
  parallel_for(slots.size(), cfg.jobs, [&](std::size_t i) {
    const Channel& u = pool.channels[i / per];
    const JointPmf jxuy = extend(base, u);
    if (cond_mutual_info(jxuy, {"X"}, {"U"}, {"Y"}) > r0_cap + kBudgetTol) return;
    bool ex = false;
    AuxiliarySystem sys = t_equals_u_candidate(base, f, u, goals[i % per], solver_for(cfg, i), &ex);
    flags[i] = ex;
    const RateTuple r = partinv_rates(sys.joint());
    slots[i] = Candidate{std::move(sys), r};
  });
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (flags[i]) *exhausted = true;
    if (slots[i]) out.push_back(std::move(*slots[i]));
  }
  return out;
}

std::size_t bound_or(std::size_t override_card, std::size_t dflt) { return override_card ? override_card : dflt; }

FrontierCurve trace(const std::vector<Candidate>& cands, const std::vector<EnvelopePoint>& pts,
                    const std::vector<double>& grid) {
  FrontierCurve c;
  for (double b : grid) {
    const EnvelopeChoice ch = envelope_min(pts, b, kBudgetTol);
    if (!ch.feasible) continue;
    if (!c.x.empty() && !(b > c.x.back())) continue;
    c.x.push_back(b);
    c.y.push_back(ch.value);
    c.witnesses.push_back(realize(cands, ch));
  }
  return c;
}

std::vector<double> r0_grid(const JointPmf& base, const SearchConfig& cfg) {
  const double hi = cond_entropy(base, {"X"}, {"Y"});
  return hi > 0.0 ? even_grid(0.0, hi, cfg.grid_points) : std::vector<double>{0.0};
}

// ---------------------------------------------------------------- general inner bound

std::vector<Candidate> theorem1_candidates(const JointPmf& base, const FunctionSpec& f, const SearchConfig& cfg,
                                           bool* exhausted) {
  const Alphabet& xa = base.alphabet("X");
  const Alphabet& ya = base.alphabet("Y");
  const Pool pool = channel_pool(xa, "U", bound_or(cfg.u_card, xa.size() + 4), cfg, kStreamU);
  if (pool.exhausted) *exhausted = true;
  // per U: T in {U, const} x V in {singletons, min I(X;V|T)}
  constexpr std::size_t per = 4;
  std::vector<std::optional<Candidate>> slots(pool.channels.size() * per);
  std::vector<char> flags(slots.size(), 0);
  parallel_for(slots.size(), cfg.jobs, [&](std::size_t i) {
    const Channel& u = pool.channels[i / per];
    const bool t_is_u = (i % per) < 2;
    const bool v_single = (i % per) % 2 == 0;
    const Alphabet& ua = u.to();
    const Channel t = t_is_u ? Channel::identity(ua, "T") : Channel::constant({ua}, "T");
    const Alphabet& ta = t.to();
    std::vector<std::size_t> tau(ua.size());
    for (std::size_t k = 0; k < ua.size(); ++k) tau[k] = t_is_u ? k : 0;

    const JointPmf jt = extend(extend(base, u), t);
    const SolverConfig sc = solver_for(cfg, i);
    bool ex = false;
    AuxiliarySystem sys;
    sys.base = base.marginal({"X", "Y"});
    sys.u_ch = u;
    sys.t_ch = t;
    if (v_single) {
      std::vector<std::size_t> vmap(xa.size() * ta.size());
      for (std::size_t x = 0; x < xa.size(); ++x)
        for (std::size_t tt = 0; tt < ta.size(); ++tt) vmap[x * ta.size() + tt] = tt * xa.size() + x;
      sys.v_ch = Channel::deterministic({xa, ta}, Alphabet::range("V", xa.size() * ta.size()), vmap);
      for (std::size_t l = 0; l < xa.size() * ta.size(); ++l) sys.v_sets.push_back({l});
    } else {
      const CharGraph gv = build_conditional_char_graph(jt, f, {"T", "X"}, {"T", "U", "Y"});
      const SlicedSetSolution vs = solve_sliced_sets(jt, gv, {"T"}, "T", sc);
      ex = ex || vs.budget_exhausted;
      std::vector<std::vector<double>> rows(xa.size() * ta.size());
      for (std::size_t x = 0; x < xa.size(); ++x)
        for (std::size_t tt = 0; tt < ta.size(); ++tt) rows[x * ta.size() + tt] = vs.rows[tt * xa.size() + x];
      sys.v_ch = rows_to_channel({xa, ta}, "V", rows);
      sys.v_sets = vs.sets;
    }
    const JointPmf jv = extend(jt, sys.v_ch);
    const CharGraph gw = build_conditional_char_graph(jv, f, {"T", "U", "Y"}, {"T", "V"});
    const SlicedSetSolution ws = solve_sliced_sets(jv, gw, {"T", "V"}, "T", sc);
    ex = ex || ws.budget_exhausted;
    std::vector<std::vector<double>> rows(ua.size() * ya.size());
    for (std::size_t uu = 0; uu < ua.size(); ++uu)
      for (std::size_t y = 0; y < ya.size(); ++y)
        rows[uu * ya.size() + y] = ws.rows[(tau[uu] * ua.size() + uu) * ya.size() + y];
    sys.w_ch = rows_to_channel({ua, ya}, "W", rows);
    sys.w_sets = ws.sets;
    flags[i] = ex;
    const RateTuple r = theorem1_rates(sys.joint());
    slots[i] = Candidate{std::move(sys), r};
  });
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (flags[i]) *exhausted = true;
    if (slots[i]) out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- time sharing

AuxiliarySystem mix_systems(const AuxiliarySystem& a, const AuxiliarySystem& b, double lambda) {
  if (lambda >= 1.0) return a;
  if (lambda <= 0.0) return b;
  if (!(a.base.alphabet("X") == b.base.alphabet("X")) || !(a.base.alphabet("Y") == b.base.alphabet("Y")))
    throw ValidationError("mixed systems must share the source");
  AuxiliarySystem m;
  m.base = a.base;
  const Alphabet& xa = a.base.alphabet("X");
  const Alphabet& ya = a.base.alphabet("Y");
  const std::size_t nx = xa.size(), ny = ya.size();

  auto join = [](const Alphabet& p, const Alphabet& q, const std::string& name) {
    std::vector<std::string> s;
    for (const auto& v : p.symbols) s.push_back("a:" + v);
    for (const auto& v : q.symbols) s.push_back("b:" + v);
    return Alphabet(name, s);
  };
  const Alphabet U = join(a.u_ch.to(), b.u_ch.to(), "U");
  const Alphabet T = join(a.t_ch.to(), b.t_ch.to(), "T");
  const Alphabet V = join(a.v_ch.to(), b.v_ch.to(), "V");
  const Alphabet W = join(a.w_ch.to(), b.w_ch.to(), "W");
  const std::size_t ua = a.u_ch.cols(), ta = a.t_ch.cols(), va = a.v_ch.cols(), wa = a.w_ch.cols();
  const std::size_t ub = b.u_ch.cols(), tb = b.t_ch.cols();
  const std::size_t nu = U.size(), nt = T.size(), nv = V.size(), nw = W.size();

  std::vector<double> ut(nx * nu, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t u = 0; u < ua; ++u) ut[x * nu + u] = lambda * a.u_ch(x, u);
    for (std::size_t u = 0; u < ub; ++u) ut[x * nu + ua + u] = (1 - lambda) * b.u_ch(x, u);
  }
  std::vector<double> tt(nu * nt, 0.0);
  for (std::size_t u = 0; u < ua; ++u)
    for (std::size_t t = 0; t < ta; ++t) tt[u * nt + t] = a.t_ch(u, t);
  for (std::size_t u = 0; u < ub; ++u)
    for (std::size_t t = 0; t < tb; ++t) tt[(ua + u) * nt + ta + t] = b.t_ch(u, t);
  std::vector<double> vt(nx * nt * nv, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t t = 0; t < ta; ++t)
      for (std::size_t v = 0; v < va; ++v) vt[(x * nt + t) * nv + v] = a.v_ch(x * ta + t, v);
    for (std::size_t t = 0; t < tb; ++t)
      for (std::size_t v = 0; v < b.v_ch.cols(); ++v) vt[(x * nt + ta + t) * nv + va + v] = b.v_ch(x * tb + t, v);
  }
  std::vector<double> wt(nu * ny * nw, 0.0);
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t u = 0; u < ua; ++u)
      for (std::size_t w = 0; w < wa; ++w) wt[(u * ny + y) * nw + w] = a.w_ch(u * ny + y, w);
    for (std::size_t u = 0; u < ub; ++u)
      for (std::size_t w = 0; w < b.w_ch.cols(); ++w) wt[((ua + u) * ny + y) * nw + wa + w] = b.w_ch(u * ny + y, w);
  }
  m.u_ch = Channel({xa}, U, std::move(ut));
  m.t_ch = Channel({U}, T, std::move(tt));
  m.v_ch = Channel({xa, T}, V, std::move(vt));
  m.w_ch = Channel({U, ya}, W, std::move(wt));

  // sets: (T,X) index t*nx+x; (T,U,Y) index (t*nu+u)*ny+y
  for (const auto& s : a.v_sets) m.v_sets.push_back(s);
  for (const auto& s : b.v_sets) {
    std::vector<std::size_t> r;
    for (auto l : s) r.push_back((l / nx + ta) * nx + l % nx);
    m.v_sets.push_back(r);
  }
  auto remap_w = [&](const std::vector<std::size_t>& s, std::size_t t_off, std::size_t u_off, std::size_t src_nu) {
    std::vector<std::size_t> r;
    for (auto l : s) {
      const std::size_t y = l % ny, u = (l / ny) % src_nu, t = l / (ny * src_nu);
      r.push_back(((t + t_off) * nu + u + u_off) * ny + y);
    }
    std::sort(r.begin(), r.end());
    return r;
  };
  for (const auto& s : a.w_sets) m.w_sets.push_back(remap_w(s, 0, 0, ua));
  for (const auto& s : b.w_sets) m.w_sets.push_back(remap_w(s, ta, ua, ub));
  return m;
}

RateTuple full_cooperation_rates(const JointPmf& base, const FunctionSpec& f, const Channel& t_from_x) {
  const JointPmf pxy = base.marginal({"X", "Y"});
  const Alphabet& xa = pxy.alphabet("X");
  const Alphabet& ya = pxy.alphabet("Y");
  std::vector<std::size_t> fm(xa.size() * ya.size());
  for (std::size_t x = 0; x < xa.size(); ++x)
    for (std::size_t y = 0; y < ya.size(); ++y) fm[x * ya.size() + y] = f(x, y);
  Alphabet fa = f.codomain;
  fa.name = "F";
  const Channel t({xa}, Alphabet("T", t_from_x.to().symbols),
                  std::vector<double>(t_from_x.table().begin(), t_from_x.table().end()));
  const JointPmf j = extend(extend(pxy, Channel::deterministic({xa, ya}, fa, fm)), t);
  RateTuple r;
  r.r0 = cond_entropy(j, {"X"}, {"Y"});
  r.rx = 0.0;
  r.ry = cond_entropy(j, {"F"}, {"T"});
  r.sum = entropy(j, {"F"}) + cond_mutual_info(j, {"X"}, {"T"}, {"F"});
  return r;
}

// ---------------------------------------------------------------- regions

FrontierCurve region_partially_invertible(const JointPmf& base, const FunctionSpec& f, const SearchConfig& cfg) {
  if (!f.partially_invertible_wrt_x(base)) throw ValidationError("f is not partially invertible with respect to X");
  bool ex = false;
  const auto cands = partinv_candidates(base, f, cfg, bound_or(cfg.u_card, base.alphabet("X").size() + 4),
                                        {WGoal::sum}, std::numeric_limits<double>::infinity(), &ex);
  FrontierCurve c = trace(cands, r0_points(cands), r0_grid(base, cfg));
  c.tag = "partinv";
  c.region_label = "rate region (tight)";
  c.budget_exhausted = ex;
  return c;
}

FrontierCurve region_partially_invertible_ry(const JointPmf& base, const FunctionSpec& f, double r0_budget,
                                             const std::vector<double>& ry_grid, const SearchConfig& cfg) {
  if (!f.partially_invertible_wrt_x(base)) throw ValidationError("f is not partially invertible with respect to X");
  bool ex = false;
  const auto cands =
      partinv_candidates(base, f, cfg, bound_or(cfg.u_card, base.alphabet("X").size() + 4),
                         {WGoal::sum, WGoal::ry, WGoal::singletons}, r0_budget, &ex);
  FrontierCurve c = trace(cands, ry_points(cands), ry_grid);
  c.tag = "partinv_ry";
  c.x_label = "ry_bits";
  c.y_label = "sum_bits";
  c.region_label = "rate region (tight)";
  c.budget_exhausted = ex;
  return c;
}

FrontierCurve region_full_cooperation(const JointPmf& base, const FunctionSpec& f, const std::vector<double>& ry_grid,
                                      const SearchConfig& cfg) {
  const Alphabet& xa = base.alphabet("X");
  const Pool pool = channel_pool(xa, "T", bound_or(cfg.t_card, xa.size() + 1), cfg, kStreamT);
  std::vector<Candidate> cands(pool.channels.size());
  parallel_for(cands.size(), cfg.jobs, [&](std::size_t i) {
    cands[i] = {system_full_cooperation(base, f, pool.channels[i]), full_cooperation_rates(base, f, pool.channels[i])};
  });
  FrontierCurve c = trace(cands, ry_points(cands), ry_grid);
  c.tag = "fullcoop";
  c.x_label = "ry_bits";
  c.y_label = "sum_bits";
  c.region_label = "rate region (tight)";
  c.budget_exhausted = pool.exhausted;
  return c;
}

double full_cooperation_min_ry(const JointPmf& base, const FunctionSpec& f) {
  return full_cooperation_rates(base, f, Channel::identity(base.alphabet("X"), "T")).ry;
}

double rate_one_round(const JointPmf& base, const FunctionSpec& f, const SolverConfig& cfg) {
  return conditional_graph_entropy(base, f, {"X"}, {"Y"}, cfg).value;
}

FrontierCurve region_two_round(const JointPmf& base, const FunctionSpec& f, const SearchConfig& cfg) {
  bool ex = false;
  const auto cands = partinv_candidates(base, f, cfg, bound_or(cfg.u_card, base.alphabet("X").size() + 2),
                                        {WGoal::ry}, std::numeric_limits<double>::infinity(), &ex);
  FrontierCurve c = trace(cands, r0_points(cands, true), r0_grid(base, cfg));
  c.tag = "tworound";
  c.y_label = "min_ry_bits";
  c.region_label = "rate region (tight)";
  c.budget_exhausted = ex;
  return c;
}

RateTuple region_cascade(const JointPmf& base, const FunctionSpec& f, const SolverConfig& cfg) {
  RateTuple r;
  r.r0 = rate_one_round(base, f, cfg);
  r.rx = 0.0;
  std::vector<std::size_t> fm;
  const Alphabet& xa = base.alphabet("X");
  const Alphabet& ya = base.alphabet("Y");
  for (std::size_t x = 0; x < xa.size(); ++x)
    for (std::size_t y = 0; y < ya.size(); ++y) fm.push_back(f(x, y));
  Alphabet fa = f.codomain;
  fa.name = "F";
  r.ry = entropy(extend(base.marginal({"X", "Y"}), Channel::deterministic({xa, ya}, fa, fm)), {"F"});
  r.sum = r.ry;
  return r;
}

SumRateResult minimize_sum_rate(const JointPmf& base, const FunctionSpec* f, const RdConstraint* rd, SumRateMode mode,
                                double r0_budget, const SearchConfig& cfg) {
  if (mode == SumRateMode::kb51 || mode == SumRateMode::kb54) {
    if (!rd) throw ValidationError("rate-distortion mode needs a distortion constraint");
    return detail::minimize_rd_sum_rate(base, *rd, mode == SumRateMode::kb54, cfg);
  }
  if (!f) throw ValidationError("computation mode needs a function");
  SumRateResult out;
  if (r0_budget < 0.0) {
    out.note = "negative cooperation budget";
    return out;
  }
  bool ex = false;
  std::vector<Candidate> cands;
  if (mode == SumRateMode::partinv) {
    if (!f->partially_invertible_wrt_x(base))
      throw ValidationError("f is not partially invertible with respect to X");
    cands = partinv_candidates(base, *f, cfg, bound_or(cfg.u_card, base.alphabet("X").size() + 4), {WGoal::sum},
                               std::numeric_limits<double>::infinity(), &ex);
  } else {
    cands = theorem1_candidates(base, *f, cfg, &ex);
  }
  const EnvelopeChoice ch = envelope_min(r0_points(cands), r0_budget, kBudgetTol);
  if (!ch.feasible) {
    out.note = "no candidate meets the cooperation budget";
    return out;
  }
  out.feasible = true;
  out.value = ch.value;
  out.rates = realize_rates(cands, ch);
  out.witness = realize(cands, ch);
  const auto rep = validate_auxiliaries_theorem1(*out.witness, *f);
  if (!rep.ok) out.note = "witness failed validation: " + rep.diagnostic;
  if (ex) out.note += (out.note.empty() ? "" : "; ") + std::string("search budget exhausted");
  return out;
}

}  // namespace coopcomp
