#include "coopcomp/regions.hpp"

#include "coopcomp/char_graph.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace coopcomp {
namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::size_t sz(const JointPmf& j, const char* axis) { return j.alphabet(axis).size(); }

}  // namespace

// ------------------------------------------------------------ validation

ValidationReport validate_auxiliaries_theorem1(const AuxiliarySystem& sys, const FunctionSpec& f) {
  ValidationReport rep;
  auto fail = [&](std::string why) {
    rep.ok = false;
    rep.diagnostic = std::move(why);
    return rep;
  };
  JointPmf j;
  try {
    j = sys.joint();
  } catch (const ValidationError& e) {
    return fail(std::string("composition failed: ") + e.what());
  }
  if (cond_mutual_info(j, {"U"}, {"Y"}, {"X"}) > kMarkovTol) return fail("Markov chain U - X - Y violated");
  if (cond_mutual_info(j, {"T"}, {"X", "Y"}, {"U"}) > kMarkovTol) return fail("Markov chain T - U - (X,Y) violated");
  if (cond_mutual_info(j, {"V"}, {"U", "Y", "W"}, {"X", "T"}) > kMarkovTol)
    return fail("Markov chain V - (X,T) - (U,Y) violated");
  if (cond_mutual_info(j, {"W"}, {"V", "X", "T"}, {"U", "Y"}) > kMarkovTol)
    return fail("Markov chain (X,T) - (U,Y) - W violated");

  const std::size_t nx = sz(j, "X"), ny = sz(j, "Y"), nt = sz(j, "T"), nu = sz(j, "U");
  if (nt > nx + 4) rep.advisories.push_back("|T| exceeds |X|+4");
  if (sz(j, "V") > (nx + 4) * nx + 1) rep.advisories.push_back("|V| exceeds (|X|+4)|X|+1");
  if (sz(j, "W") > nu * ny + 1) rep.advisories.push_back("|W| exceeds |U||Y|+1");

  try {
    const CharGraph gv = build_conditional_char_graph(j, f, {"T", "X"}, {"T", "U", "Y"});
    const auto mv = verify_membership_condition(j, "V", sys.v_sets, gv);
    if (!mv.ok) return fail("V condition: " + mv.witness);
  } catch (const ValidationError& e) {
    return fail(std::string("graph over (T,X): ") + e.what());
  }
  try {
    const CharGraph gw = build_conditional_char_graph(j, f, {"T", "U", "Y"}, {"T", "V"});
    const auto mw = verify_membership_condition(j, "W", sys.w_sets, gw);
    if (!mw.ok) return fail("W condition: " + mw.witness);
  } catch (const ValidationError& e) {
    return fail(std::string("graph over (T,U,Y): ") + e.what());
  }
  return rep;
}

RateTuple theorem1_rates(const JointPmf& j) {
  RateTuple r;
  r.r0 = cond_mutual_info(j, {"X"}, {"U"}, {"Y"});
  r.rx = cond_mutual_info(j, {"V"}, {"X"}, {"T", "W"});
  r.ry = cond_mutual_info(j, {"U", "Y"}, {"W"}, {"V", "T"});
  r.sum = mutual_info(j, {"X", "Y"}, {"V", "T", "W"}) + cond_mutual_info(j, {"U"}, {"W"}, {"V", "X", "T", "Y"});
  return r;
}

RateTuple evaluate_theorem1_bounds(const AuxiliarySystem& sys, const FunctionSpec& f) {
  const auto rep = validate_auxiliaries_theorem1(sys, f);
  if (!rep.ok) throw ValidationError("auxiliaries rejected: " + rep.diagnostic);
  return theorem1_rates(sys.joint());
}

// ------------------------------------------------------------ rate distortion

Distortion sign_distortion(const Alphabet& values, const Alphabet& recon) {
  auto sgn = [](const std::string& s) {
    const double v = std::stod(s);
    return (v > 0) - (v < 0);
  };
  Distortion d{recon, std::vector<double>(values.size() * recon.size(), 0.0)};
  for (std::size_t a = 0; a < values.size(); ++a)
    for (std::size_t r = 0; r < recon.size(); ++r)
      d.table[a * recon.size() + r] = sgn(values.symbols[a]) * sgn(recon.symbols[r]) == -1 ? 1.0 : 0.0;
  return d;
}

double expected_distortion(const JointPmf& joint, const FunctionSpec& f, const Distortion& d,
                           const std::optional<std::vector<std::size_t>>& g, std::vector<std::size_t>* chosen) {
  const JointPmf m = joint.marginal({"V", "T", "W", "X", "Y"});
  const std::size_t nx = sz(m, "X"), ny = sz(m, "Y"), nr = d.reconstruction.size();
  const std::size_t ncell = m.cell_count() / (nx * ny);
  if (d.table.size() != f.codomain.size() * nr) throw ValidationError("distortion table does not match f");
  if (g && g->size() != ncell) throw ValidationError("reconstruction table has the wrong size");
  std::vector<std::size_t> pick(ncell, 0);
  double total = 0.0;
  std::vector<double> cost(nr);
  for (std::size_t c = 0; c < ncell; ++c) {
    std::fill(cost.begin(), cost.end(), 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) {
        const double p = m[(c * nx + x) * ny + y];
        if (p == 0.0) continue;
        for (std::size_t r = 0; r < nr; ++r) cost[r] += p * d(f(x, y), r);
      }
    if (g) {
      if ((*g)[c] >= nr) throw ValidationError("reconstruction symbol out of range");
      pick[c] = (*g)[c];
    } else {
      for (std::size_t r = 1; r < nr; ++r)
        if (cost[r] < cost[pick[c]]) pick[c] = r;
    }
    total += cost[pick[c]];
  }
  if (chosen) *chosen = std::move(pick);
  return total;
}

RdEvaluation evaluate_rd_bounds(const AuxiliarySystem& sys, const RdConstraint& rd) {
  const JointPmf j = sys.joint();
  if (cond_mutual_info(j, {"T"}, {"X", "Y"}, {"U"}) > kMarkovTol || cond_mutual_info(j, {"U"}, {"Y"}, {"X"}) > kMarkovTol)
    throw ValidationError("Markov chain T - U - X - Y violated");
  if (cond_mutual_info(j, {"V"}, {"U", "Y", "W"}, {"X", "T"}) > kMarkovTol ||
      cond_mutual_info(j, {"W"}, {"V", "X", "T"}, {"U", "Y"}) > kMarkovTol)
    throw ValidationError("Markov chain V - (X,T) - (U,Y) - W violated");
  RdEvaluation ev;
  ev.distortion1 = expected_distortion(j, rd.f1, rd.d1, rd.g1, &ev.g1);
  ev.distortion2 = expected_distortion(j, rd.f2, rd.d2, rd.g2, &ev.g2);
  auto check = [](double got, double budget, const char* name) {
    if (got > budget + 1e-12) {
      std::ostringstream os;
      os.precision(9);
      os << "distortion budget " << name << " violated: achieved " << got << " > " << budget;
      throw ValidationError(os.str());
    }
  };
  check(ev.distortion1, rd.D1, "D1");
  check(ev.distortion2, rd.D2, "D2");
  ev.rates = theorem1_rates(j);
  return ev;
}

RateTuple kb51_formulas(const JointPmf& j) {
  RateTuple r;
  r.r0 = cond_mutual_info(j, {"X"}, {"T"}, {"Y"});
  r.rx = cond_mutual_info(j, {"X"}, {"V"}, {"T", "W"});
  r.ry = cond_mutual_info(j, {"Y"}, {"W"}, {"T", "V"});
  r.sum = mutual_info(j, {"X", "Y"}, {"T", "V", "W"});
  return r;
}

RateTuple kb54_formulas(const JointPmf& j) {
  RateTuple r;
  r.r0 = cond_entropy(j, {"X"}, {"Y"});
  r.rx = 0.0;
  r.ry = cond_mutual_info(j, {"X", "Y"}, {"W"}, {"T"});
  r.sum = mutual_info(j, {"X", "Y"}, {"T", "W"});
  return r;
}

// ------------------------------------------------------------ frontiers

bool FrontierCurve::monotone(double tol) const {
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) return false;
    if (y[i] > y[i - 1] + tol) return false;
  }
  return true;
}

std::string FrontierCurve::to_csv() const {
  std::string out = x_label + "," + y_label + "\n";
  for (std::size_t i = 0; i < x.size(); ++i) out += fmt(x[i]) + "," + fmt(y[i]) + "\n";
  return out;
}

std::uint64_t config_hash(const SearchConfig& c) {
  std::ostringstream os;
  os << c.grid_points << '|' << c.exhaustive_cap << '|' << c.random_candidates << '|' << c.seed << '|'
     << c.solver.restarts << '|' << c.solver.tol << '|' << c.solver.max_iter << '|' << c.solver.seed << '|'
     << c.rd_restarts << '|' << c.rd_iterations << '|' << c.t_card << '|' << c.u_card << '|' << c.w_card;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> even_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g;
  if (n == 0) return g;
  if (n == 1) return {lo};
  for (std::size_t i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  return g;
}

// ------------------------------------------------------------ builders

AuxiliarySystem system_t_equals_u(const JointPmf& base, const Channel& u_ch, const Channel& w_ch,
                                  const std::vector<std::vector<std::size_t>>& w_sets_uy) {
  AuxiliarySystem s;
  s.base = base.marginal({"X", "Y"});
  const Alphabet& xa = s.base.alphabet("X");
  const std::size_t nx = xa.size(), ny = s.base.alphabet("Y").size();
  s.u_ch = u_ch;
  const Alphabet& ua = u_ch.to();
  const std::size_t nu = ua.size();
  s.t_ch = Channel::identity(ua, "T");
  const Alphabet& ta = s.t_ch.to();
  // V = (t, x) itself
  std::vector<std::string> vsym;
  for (std::size_t t = 0; t < nu; ++t)
    for (std::size_t x = 0; x < nx; ++x) vsym.push_back("(" + ta.symbols[t] + "," + xa.symbols[x] + ")");
  std::vector<std::size_t> vmap(nx * nu);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t t = 0; t < nu; ++t) vmap[x * nu + t] = t * nx + x;
  s.v_ch = Channel::deterministic({xa, ta}, Alphabet("V", vsym), vmap);
  for (std::size_t i = 0; i < nu * nx; ++i) s.v_sets.push_back({i});
  s.w_ch = w_ch;
  for (const auto& set : w_sets_uy) {
    std::vector<std::size_t> l;
    for (auto uy : set) l.push_back((uy / ny) * nu * ny + uy);
    s.w_sets.push_back(l);
  }
  return s;
}

AuxiliarySystem system_full_cooperation(const JointPmf& base, const FunctionSpec& f, const Channel& t_from_x) {
  AuxiliarySystem s;
  s.base = base.marginal({"X", "Y"});
  const Alphabet& xa = s.base.alphabet("X");
  const Alphabet& ya = s.base.alphabet("Y");
  s.u_ch = Channel::identity(xa, "U");
  const Alphabet& ua = s.u_ch.to();
  s.t_ch = Channel({ua}, t_from_x.to(), std::vector<double>(t_from_x.table().begin(), t_from_x.table().end()));
  const Alphabet& ta = s.t_ch.to();
  s.v_ch = Channel::constant({xa, ta}, "V");
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < ta.size() * xa.size(); ++i) all.push_back(i);
  s.v_sets = {all};
  Alphabet wa = f.codomain;
  wa.name = "W";
  std::vector<std::size_t> wmap(ua.size() * ya.size());
  for (std::size_t u = 0; u < ua.size(); ++u)
    for (std::size_t y = 0; y < ya.size(); ++y) wmap[u * ya.size() + y] = f(u, y);
  s.w_ch = Channel::deterministic({ua, ya}, wa, wmap);
  s.w_sets.assign(wa.size(), {});
  for (std::size_t t = 0; t < ta.size(); ++t)
    for (std::size_t u = 0; u < ua.size(); ++u)
      for (std::size_t y = 0; y < ya.size(); ++y)
        s.w_sets[f(u, y)].push_back((t * ua.size() + u) * ya.size() + y);
  return s;
}

AuxiliarySystem system_one_round(const JointPmf& base, const Channel& v_from_x,
                                 const std::vector<std::vector<std::size_t>>& v_sets_x) {
  AuxiliarySystem s;
  s.base = base.marginal({"X", "Y"});
  const Alphabet& xa = s.base.alphabet("X");
  const Alphabet& ya = s.base.alphabet("Y");
  s.u_ch = Channel::constant({xa}, "U");
  s.t_ch = Channel::constant({s.u_ch.to()}, "T");
  Alphabet va = v_from_x.to();
  va.name = "V";
  s.v_ch = Channel({xa, s.t_ch.to()}, va, std::vector<double>(v_from_x.table().begin(), v_from_x.table().end()));
  s.v_sets = v_sets_x;  // with |T| = 1 the (T,X) index is x
  std::vector<std::size_t> ident(ya.size());
  for (std::size_t y = 0; y < ya.size(); ++y) ident[y] = y;
  Alphabet wa = ya;
  wa.name = "W";
  s.w_ch = Channel::deterministic({s.u_ch.to(), ya}, wa, ident);
  for (std::size_t y = 0; y < ya.size(); ++y) s.w_sets.push_back({y});
  return s;
}

}  // namespace coopcomp
