#include "coopcomp/examples_repro.hpp"

#include "coopcomp/channel_search.hpp"
#include "coopcomp/util.hpp"

#include <cmath>
#include <random>

namespace coopcomp {

// ---------------------------------------------------------------- example 1

Alphabet example1_x(std::size_t a) {
  std::vector<std::string> s;
  for (std::size_t i = 1; i <= a; ++i) s.push_back(std::to_string(i));
  return Alphabet("X", s);
}

Example1Rates example1_rates(const Example1Instance& inst) {
  const std::size_t a = inst.a, nu = inst.u_channel.cols();
  if (inst.u_channel.rows() != a) throw ValidationError("U channel must have one row per x");
  const double px = 1.0 / static_cast<double>(a);
  std::vector<double> pu(nu, 0.0);
  std::vector<std::size_t> support(nu, 0);
  for (std::size_t x = 0; x < a; ++x)
    for (std::size_t u = 0; u < nu; ++u) {
      pu[u] += px * inst.u_channel(x, u);
      if (positive(inst.u_channel(x, u))) ++support[u];
    }
  Example1Rates r;
  const double log_a = std::log2(static_cast<double>(a));
  double neg_cond = 0.0;  // sum p(x,u) log2 p(x|u) = -H(X|U)
  double avg_support = 0.0;
  for (std::size_t u = 0; u < nu; ++u) {
    avg_support += static_cast<double>(support[u]) * pu[u];
    for (std::size_t x = 0; x < a; ++x) {
      const double pxu = px * inst.u_channel(x, u);
      if (pxu > 0.0) neg_cond += pxu * std::log2(pxu / pu[u]);
    }
  }
  r.r0 = log_a + neg_cond;
  if (std::abs(r.r0) < 1e-13) r.r0 = 0.0;
  r.sum = log_a + static_cast<double>(inst.b) * avg_support;
  return r;
}

namespace {

Channel mix_u(const Channel& p, const Channel& q, double lam) {
  if (lam >= 1.0) return p;
  const std::size_t rows = p.rows(), cp = p.cols(), cq = q.cols();
  std::vector<std::string> sym;
  for (const auto& s : p.to().symbols) sym.push_back("a:" + s);
  for (const auto& s : q.to().symbols) sym.push_back("b:" + s);
  std::vector<double> t(rows * (cp + cq), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cp; ++c) t[r * (cp + cq) + c] = lam * p(r, c);
    for (std::size_t c = 0; c < cq; ++c) t[r * (cp + cq) + cp + c] = (1 - lam) * q(r, c);
  }
  return Channel(p.from(), Alphabet("U", sym), std::move(t));
}

}  // namespace

Example1Sweep example1_sweep(std::size_t a, std::size_t b, const SearchConfig& cfg) {
  if (a < 2 || b < 1) throw ValidationError("example 1 needs a >= 2 and b >= 1");
  const Alphabet xa = example1_x(a);
  const std::size_t max_u = cfg.u_card ? cfg.u_card : a + 4;
  Example1Sweep out;
  std::vector<Channel> pool;
  if (partition_count(a, max_u) <= cfg.exhaustive_cap) {
    for (const auto& blocks : set_partitions(a, max_u)) pool.push_back(partition_channel(xa, blocks, "U"));
  } else {
    out.curve.budget_exhausted = true;
    pool.push_back(Channel::constant({xa}, "U"));
  }
  for (std::size_t i = 0; i < cfg.random_candidates; ++i) {
    std::mt19937_64 rng(derive_seed(cfg.seed, 0x6531, i));
    const std::size_t cols = 2 + static_cast<std::size_t>(rng() % (max_u - 1));
    pool.push_back(random_channel(rng, {xa}, "U", cols));
  }
  std::vector<EnvelopePoint> pts(pool.size());
  parallel_for(pool.size(), cfg.jobs, [&](std::size_t i) {
    const Example1Rates r = example1_rates({a, b, pool[i]});
    pts[i] = {r.r0, 0.0, r.sum};
  });

  out.curve.tag = "example1_a" + std::to_string(a) + "_b" + std::to_string(b);
  out.curve.region_label = "rate region (tight)";
  for (double r0 : even_grid(0.0, std::log2(static_cast<double>(a)), cfg.grid_points)) {
    const EnvelopeChoice ch = envelope_min(pts, r0);
    if (!ch.feasible) continue;
    out.curve.x.push_back(r0);
    out.curve.y.push_back(ch.value);
    out.curve.witnesses.emplace_back();
    out.u_witness.push_back(ch.i == ch.j ? pool[ch.i] : mix_u(pool[ch.i], pool[ch.j], ch.lambda));
  }
  return out;
}

// ---------------------------------------------------------------- example 2

JointPmf example2_pmf() {
  // hundredths as stated in the example
  const std::vector<double> counts = {21, 3, 12, 6, 15, 16, 3, 12, 12};
  std::vector<double> t;
  for (double c : counts) t.push_back(c / 100.0);
  return make_pxy(Alphabet::range("X", 3), Alphabet::range("Y", 3), t);
}

FunctionSpec example2_function() {
  return FunctionSpec::from_labels(Alphabet::range("X", 3), Alphabet::range("Y", 3), "F",
                                   [](std::size_t x, std::size_t y) {
                                     const long v = (y % 2 == 0 ? 1 : -1) * static_cast<long>(x);
                                     return std::to_string(v);
                                   });
}

Example2Result example2_regions(const SearchConfig& cfg) {
  Example2Result r;
  r.base = example2_pmf();
  r.f = example2_function();
  r.h_x_given_y = cond_entropy(r.base, {"X"}, {"Y"});
  r.partially_invertible = r.f.partially_invertible_wrt_x(r.base);
  // lowest RY either region can reach: H(f|X) with full cooperation, and
  // H(G_{Y|X}) without
  const double full_lo = full_cooperation_min_ry(r.base, r.f);
  const double none_lo = conditional_graph_entropy(r.base, r.f, {"Y"}, {"X"}, cfg.solver).value;
  const double lo = std::max(full_lo, none_lo) + 1e-6;
  const double hi = entropy(r.base, {"Y"});
  r.ry_grid = even_grid(lo, hi, cfg.grid_points);
  r.full_cooperation = region_full_cooperation(r.base, r.f, r.ry_grid, cfg);
  r.full_cooperation.tag = "example2_full_cooperation";
  r.no_cooperation = region_partially_invertible_ry(r.base, r.f, 0.0, r.ry_grid, cfg);
  r.no_cooperation.tag = "example2_no_cooperation";
  return r;
}

// ---------------------------------------------------------------- appendix

namespace {

Alphabet sign_alphabet(std::string name) { return Alphabet(std::move(name), {"-1", "0", "+1"}); }

}  // namespace

JointPmf appendix_pmf() {
  // uniform on the seven cells with x*y != -1
  std::vector<double> t;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y) t.push_back(x * y == -1 ? 0.0 : 1.0 / 7.0);
  return make_pxy(sign_alphabet("X"), sign_alphabet("Y"), t);
}

RdConstraint appendix_rd() {
  const Alphabet xa = sign_alphabet("X"), ya = sign_alphabet("Y");
  RdConstraint rd;
  rd.f1 = FunctionSpec::from_labels(xa, ya, "F1", [&](std::size_t x, std::size_t) { return xa.symbols[x]; });
  rd.f2 = FunctionSpec::from_labels(xa, ya, "F2", [&](std::size_t, std::size_t y) { return ya.symbols[y]; });
  const Alphabet recon("R", {"-1", "+1"});
  rd.d1 = sign_distortion(rd.f1.codomain, recon);
  rd.d2 = sign_distortion(rd.f2.codomain, recon);
  rd.D1 = rd.D2 = 0.0;
  return rd;
}

AuxiliarySystem appendix_claim2_system() {
  AuxiliarySystem s;
  s.base = appendix_pmf();
  const Alphabet xa = s.base.alphabet("X"), ya = s.base.alphabet("Y");
  s.u_ch = Channel::identity(xa, "U");
  s.t_ch = Channel::constant({s.u_ch.to()}, "T");
  s.v_ch = Channel::constant({xa, s.t_ch.to()}, "V");
  // w- whenever x or y is -1, a fair coin at (0,0), w+ otherwise
  std::vector<double> w;
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      const double minus = (x == 0 || y == 0) ? 1.0 : (x == 1 && y == 1 ? 0.5 : 0.0);
      w.push_back(minus);
      w.push_back(1.0 - minus);
    }
  s.w_ch = Channel({s.u_ch.to(), ya}, Alphabet("W", {"w-", "w+"}), w);
  return s;
}

AuxiliarySystem appendix_claim3_system() {
  AuxiliarySystem s;
  s.base = appendix_pmf();
  const Alphabet xa = s.base.alphabet("X"), ya = s.base.alphabet("Y");
  const Alphabet ua("U", {"u-", "u+"});
  s.u_ch = Channel({xa}, ua, {1.0, 0.0, 0.5, 0.5, 0.0, 1.0});
  s.t_ch = Channel::constant({ua}, "T");
  s.v_ch = Channel::constant({xa, s.t_ch.to()}, "V");
  // w- on (u-,-1), (u-,0), (u+,-1); w+ on the rest
  std::vector<double> w;
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t y = 0; y < 3; ++y) {
      const bool minus = (u == 0 && y <= 1) || (u == 1 && y == 0);
      w.push_back(minus ? 1.0 : 0.0);
      w.push_back(minus ? 0.0 : 1.0);
    }
  s.w_ch = Channel({ua, ya}, Alphabet("W", {"w-", "w+"}), w);
  return s;
}

AppendixClaims appendix_example_claims(const SearchConfig& cfg_in) {
  AppendixClaims c;
  const JointPmf base = appendix_pmf();
  const RdConstraint rd = appendix_rd();
  c.h_x_given_y = cond_entropy(base, {"X"}, {"Y"});

  SearchConfig cfg = cfg_in;
  if (!cfg.t_card) cfg.t_card = 7;
  if (!cfg.w_card) cfg.w_card = 2;
  c.claim1 = minimize_sum_rate(base, nullptr, &rd, SumRateMode::kb51, 0.0, cfg);

  c.claim2 = evaluate_rd_bounds(appendix_claim2_system(), rd);

  const AuxiliarySystem s3 = appendix_claim3_system();
  c.claim3 = evaluate_rd_bounds(s3, rd);
  c.claim3_ixy_w = mutual_info(s3.joint(), {"X", "Y"}, {"W"});
  return c;
}

}  // namespace coopcomp
