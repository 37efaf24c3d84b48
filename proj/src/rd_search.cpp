// Deterministic-annealing search for the rate-distortion specializations.
//
// The objective is the Lagrangian I(X,Y;T,W) + lam * E[d1 + d2] with the
// reconstructions chosen greedily per (T,W) cell. lam grows geometrically so
// that early iterations explore soft assignments and late ones freeze them;
// a final pass zeroes negligible entries so the distortion becomes exact.

#include "rd_search.hpp"

#include "coopcomp/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace coopcomp::detail {
namespace {

constexpr double kTiny = 1e-300;
constexpr double kZeroOut = 1e-6;
constexpr double kLamStart = 0.5;
constexpr double kLamGrowth = 1.01;
constexpr double kLamMax = 200.0;

struct Problem {
  std::size_t nx, ny, nt, nw;
  bool kb54;
  std::vector<double> pxy;  // nx x ny
  std::vector<std::size_t> f1, f2;
  const Distortion* d1;
  const Distortion* d2;
  std::size_t nctx() const { return kb54 ? nx * ny : nt * ny; }
  std::size_t ctx(std::size_t x, std::size_t y, std::size_t t) const { return kb54 ? x * ny + y : t * ny + y; }
};

struct State {
  std::vector<double> pt;  // nx x nt
  std::vector<double> pw;  // nctx x nw
};

void normalize_rows(std::vector<double>& m, std::size_t cols) {
  for (std::size_t r = 0; r < m.size() / cols; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += m[r * cols + c];
    if (s <= 0.0) {
      for (std::size_t c = 0; c < cols; ++c) m[r * cols + c] = 1.0 / static_cast<double>(cols);
    } else {
      for (std::size_t c = 0; c < cols; ++c) m[r * cols + c] /= s;
    }
  }
}

// J(x,y,t,w), flattened x-major
std::vector<double> joint(const Problem& p, const State& s) {
  std::vector<double> j(p.nx * p.ny * p.nt * p.nw, 0.0);
  for (std::size_t x = 0; x < p.nx; ++x)
    for (std::size_t y = 0; y < p.ny; ++y) {
      const double pxy = p.pxy[x * p.ny + y];
      if (pxy == 0.0) continue;
      for (std::size_t t = 0; t < p.nt; ++t) {
        const double a = pxy * s.pt[x * p.nt + t];
        const double* w = s.pw.data() + p.ctx(x, y, t) * p.nw;
        for (std::size_t k = 0; k < p.nw; ++k) j[((x * p.ny + y) * p.nt + t) * p.nw + k] = a * w[k];
      }
    }
  return j;
}

// cost(x,y,t,w) under the greedy reconstructions of the current joint
std::vector<double> cost_table(const Problem& p, const std::vector<double>& j) {
  const std::size_t ntw = p.nt * p.nw;
  auto pick = [&](const std::vector<std::size_t>& f, const Distortion& d) {
    const std::size_t nr = d.reconstruction.size();
    std::vector<std::size_t> g(ntw, 0);
    std::vector<double> c(ntw * nr, 0.0);
    for (std::size_t x = 0; x < p.nx; ++x)
      for (std::size_t y = 0; y < p.ny; ++y)
        for (std::size_t tw = 0; tw < ntw; ++tw) {
          const double m = j[(x * p.ny + y) * ntw + tw];
          if (m == 0.0) continue;
          for (std::size_t r = 0; r < nr; ++r) c[tw * nr + r] += m * d(f[x * p.ny + y], r);
        }
    for (std::size_t tw = 0; tw < ntw; ++tw)
      for (std::size_t r = 1; r < nr; ++r)
        if (c[tw * nr + r] < c[tw * nr + g[tw]]) g[tw] = r;
    return g;
  };
  const auto g1 = pick(p.f1, *p.d1);
  const auto g2 = pick(p.f2, *p.d2);
  std::vector<double> cost(j.size());
  for (std::size_t x = 0; x < p.nx; ++x)
    for (std::size_t y = 0; y < p.ny; ++y)
      for (std::size_t tw = 0; tw < ntw; ++tw)
        cost[(x * p.ny + y) * ntw + tw] =
            (*p.d1)(p.f1[x * p.ny + y], g1[tw]) + (*p.d2)(p.f2[x * p.ny + y], g2[tw]);
  return cost;
}

std::vector<double> p_tw(const Problem& p, const std::vector<double>& j) {
  std::vector<double> out(p.nt * p.nw, 0.0);
  for (std::size_t xy = 0; xy < p.nx * p.ny; ++xy)
    for (std::size_t tw = 0; tw < p.nt * p.nw; ++tw) out[tw] += j[xy * p.nt * p.nw + tw];
  return out;
}

void anneal(const Problem& p, State& s, std::size_t iterations) {
  double lam = kLamStart;
  const std::size_t nw = p.nw, nt = p.nt;
  for (std::size_t it = 0; it < iterations; ++it) {
    lam = std::min(lam * kLamGrowth, kLamMax);
    std::vector<double> j = joint(p, s);
    const std::vector<double> cost = cost_table(p, j);

    // W update against q(w|t)
    std::vector<double> ptw = p_tw(p, j);
    std::vector<double> qwt(nt * nw);
    for (std::size_t t = 0; t < nt; ++t) {
      double pt = 0.0;
      for (std::size_t w = 0; w < nw; ++w) pt += ptw[t * nw + w];
      for (std::size_t w = 0; w < nw; ++w) qwt[t * nw + w] = ptw[t * nw + w] / std::max(pt, kTiny);
    }
    std::vector<double> ctx_cost(p.nctx() * nw, 0.0), ctx_mass(p.nctx(), 0.0);
    for (std::size_t x = 0; x < p.nx; ++x)
      for (std::size_t y = 0; y < p.ny; ++y)
        for (std::size_t t = 0; t < nt; ++t) {
          const double m = p.pxy[x * p.ny + y] * s.pt[x * nt + t];
          if (m == 0.0) continue;
          const std::size_t c = p.ctx(x, y, t);
          ctx_mass[c] += m;
          for (std::size_t w = 0; w < nw; ++w) ctx_cost[c * nw + w] += m * cost[((x * p.ny + y) * nt + t) * nw + w];
        }
    for (std::size_t c = 0; c < p.nctx(); ++c) {
      const std::size_t t = p.kb54 ? 0 : c / p.ny;
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t w = 0; w < nw; ++w) {
        ctx_cost[c * nw + w] /= std::max(ctx_mass[c], kTiny);
        lo = std::min(lo, ctx_cost[c * nw + w]);
      }
      for (std::size_t w = 0; w < nw; ++w)
        s.pw[c * nw + w] = qwt[t * nw + w] * std::exp(-lam * (ctx_cost[c * nw + w] - lo));
    }
    normalize_rows(s.pw, nw);
    if (p.kb54) continue;

    // T update: p(t|x) proportional to exp(-a(x,t)) on the current support
    j = joint(p, s);
    ptw = p_tw(p, j);
    for (std::size_t x = 0; x < p.nx; ++x) {
      double px = 0.0;
      for (std::size_t y = 0; y < p.ny; ++y) px += p.pxy[x * p.ny + y];
      if (px == 0.0) continue;
      std::vector<double> a(nt, 0.0);
      for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t y = 0; y < p.ny; ++y) {
          const double pyx = p.pxy[x * p.ny + y] / px;
          if (pyx == 0.0) continue;
          const double* w = s.pw.data() + p.ctx(x, y, t) * nw;
          for (std::size_t k = 0; k < nw; ++k)
            a[t] += pyx * w[k] *
                    (std::log(std::max(w[k], kTiny)) - std::log(std::max(ptw[t * nw + k], kTiny)) +
                     lam * cost[((x * p.ny + y) * nt + t) * nw + k]);
        }
      const double amin = *std::min_element(a.begin(), a.end());
      for (std::size_t t = 0; t < nt; ++t)
        s.pt[x * nt + t] = s.pt[x * nt + t] > 0.0 ? std::exp(-(a[t] - amin)) : 0.0;
    }
    normalize_rows(s.pt, nt);
  }
  for (auto* m : {&s.pt, &s.pw})
    for (auto& v : *m)
      if (v < kZeroOut) v = 0.0;
  normalize_rows(s.pt, nt);
  normalize_rows(s.pw, nw);
}

AuxiliarySystem to_system(const JointPmf& base, const Problem& p, const State& s) {
  AuxiliarySystem sys;
  sys.base = base;
  const Alphabet& xa = base.alphabet("X");
  const Alphabet& ya = base.alphabet("Y");
  if (p.kb54) {
    sys.u_ch = Channel::identity(xa, "U");
    sys.t_ch = Channel::constant({sys.u_ch.to()}, "T");
  } else {
    sys.u_ch = Channel({xa}, Alphabet::range("U", p.nt), s.pt);
    sys.t_ch = Channel::identity(sys.u_ch.to(), "T");
  }
  sys.v_ch = Channel::constant({xa, sys.t_ch.to()}, "V");
  sys.w_ch = Channel({sys.u_ch.to(), ya}, Alphabet::range("W", p.nw), s.pw);
  return sys;
}

}  // namespace

SumRateResult minimize_rd_sum_rate(const JointPmf& base_in, const RdConstraint& rd, bool kb54,
                                   const SearchConfig& cfg) {
  const JointPmf base = base_in.marginal({"X", "Y"});
  Problem p;
  p.nx = base.alphabet("X").size();
  p.ny = base.alphabet("Y").size();
  p.kb54 = kb54;
  p.nt = kb54 ? 1 : (cfg.t_card ? cfg.t_card : p.nx + 4);
  p.nw = cfg.w_card ? cfg.w_card : (kb54 ? p.nx : p.nt) * p.ny + 1;
  p.pxy.assign(base.table().begin(), base.table().end());
  p.f1 = rd.f1.table;
  p.f2 = rd.f2.table;
  p.d1 = &rd.d1;
  p.d2 = &rd.d2;

  const std::size_t restarts = std::max<std::size_t>(1, cfg.rd_restarts);
  std::vector<std::optional<SumRateResult>> runs(restarts);
  parallel_for(restarts, cfg.jobs, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x7264, r));
    std::gamma_distribution<double> half(0.5, 1.0), one(1.0, 1.0);
    State s;
    s.pt.resize(p.nx * p.nt);
    s.pw.resize(p.nctx() * p.nw);
    for (auto& v : s.pt) v = p.nt == 1 ? 1.0 : half(rng) + 1e-12;
    for (auto& v : s.pw) v = one(rng) + 1e-12;
    normalize_rows(s.pt, p.nt);
    normalize_rows(s.pw, p.nw);
    anneal(p, s, cfg.rd_iterations);
    SumRateResult res;
    res.witness = to_system(base, p, s);
    try {
      const RdEvaluation ev = evaluate_rd_bounds(*res.witness, rd);
      res.feasible = true;
      res.rates = ev.rates;
      res.value = ev.rates.sum;
      res.distortion1 = ev.distortion1;
      res.distortion2 = ev.distortion2;
    } catch (const ValidationError& e) {
      res.note = e.what();
    }
    runs[r] = std::move(res);
  });

  SumRateResult best;
  best.note = "no restart met the distortion budgets";
  bool have = false;
  for (auto& r : runs) {
    if (!r->feasible) continue;
    if (!have || r->value < best.value - 1e-12) {
      best = std::move(*r);
      have = true;
    }
  }
  if (have) best.note = kb54 ? "full-cooperation specialization" : "T=U specialization";
  return best;
}

}  // namespace coopcomp::detail
