#include "coopcomp/scheme_sim.hpp"

#include "coopcomp/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace coopcomp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;
// Largest codebook exponent (bits) whose size still fits in a double.
constexpr double kMaxExponent = 1000.0;
// Competitors sampled explicitly per bin; more than this forces a decoding failure.
constexpr std::size_t kExplicitCap = 64;

double lse(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Number of successes among N independent trials of probability p. N may be
// astronomically large; beyond the exact range a Poisson or normal limit is
// used, which is accurate there because either p is tiny or the mean is huge.
double sample_count(double N, double p, std::mt19937_64& rng) {
  if (!(N >= 1.0) || !(p > 0.0)) return 0.0;
  if (p >= 1.0) return std::floor(N);
  if (N <= 1e9) {
    std::binomial_distribution<long long> d(static_cast<long long>(std::floor(N)), p);
    return static_cast<double>(d(rng));
  }
  const double mean = N * p;
  if (mean < 1e6) {
    std::poisson_distribution<long long> d(mean);
    return static_cast<double>(d(rng));
  }
  std::normal_distribution<double> d(mean, std::sqrt(mean * (1.0 - p)));
  return std::clamp(std::round(d(rng)), 0.0, std::floor(N));
}

// Flattened empirical type test over the cells of `m`.
bool typical_on(const JointPmf& m, const std::vector<const Sequence*>& seqs, double eps) {
  const std::size_t n = seqs.front()->size();
  std::vector<std::size_t> counts(m.cell_count(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cell = 0;
    for (std::size_t a = 0; a < seqs.size(); ++a) cell += (*seqs[a])[i] * m.stride(a);
    ++counts[cell];
  }
  const double dn = static_cast<double>(n);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double p = positive(m[c]) ? m[c] : 0.0;
    if (std::abs(static_cast<double>(counts[c]) / dn - p) > eps * p + 1e-12) return false;
  }
  return true;
}

// ---------------------------------------------------------------- box DP
//
// For one context symbol occupying r0 positions, the codeword symbols there
// are Multinomial(r0, pi). The joint type is typical iff every category count
// lies in [lo, hi]. g[k][r] is the log probability that categories k.. fall in
// their boxes given r positions remain, using the sequential binomial
// factorization of the multinomial.

struct BoxDp {
  std::vector<double> pk;  // conditional category probabilities
  std::vector<long> lo, hi;
  std::vector<std::vector<double>> g;
};

double log_binom(const std::vector<double>& lf, long r, long c, double p) {
  if (p <= 0.0) return c == 0 ? 0.0 : kNegInf;
  if (p >= 1.0) return c == r ? 0.0 : kNegInf;
  return lf[r] - lf[c] - lf[r - c] + static_cast<double>(c) * std::log(p) + static_cast<double>(r - c) * std::log1p(-p);
}

BoxDp solve_box(const std::vector<double>& lf, long r0, const std::vector<double>& pi, std::vector<long> lo,
                std::vector<long> hi) {
  const std::size_t C = pi.size();
  BoxDp dp;
  dp.lo = std::move(lo);
  dp.hi = std::move(hi);
  dp.pk.resize(C);
  double tail = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (std::size_t k = 0; k < C; ++k) {
    dp.pk[k] = tail > 0.0 ? std::min(1.0, pi[k] / tail) : 0.0;
    tail -= pi[k];
  }
  // the last category with mass takes every remaining position
  for (std::size_t k = C; k-- > 0;)
    if (pi[k] > 0.0) {
      dp.pk[k] = 1.0;
      break;
    }
  dp.g.assign(C + 1, std::vector<double>(static_cast<std::size_t>(r0) + 1, kNegInf));
  dp.g[C][0] = 0.0;
  for (std::size_t k = C; k-- > 0;) {
    for (long r = 0; r <= r0; ++r) {
      double acc = kNegInf;
      const long top = std::min(dp.hi[k], r);
      for (long c = dp.lo[k]; c <= top; ++c) {
        const double rest = dp.g[k + 1][static_cast<std::size_t>(r - c)];
        if (rest == kNegInf) continue;
        const double lb = log_binom(lf, r, c, dp.pk[k]);
        if (lb == kNegInf) continue;
        acc = lse(acc, lb + rest);
      }
      dp.g[k][static_cast<std::size_t>(r)] = acc;
    }
  }
  return dp;
}

std::vector<long> sample_box(const BoxDp& dp, const std::vector<double>& lf, long r0, std::mt19937_64& rng) {
  const std::size_t C = dp.pk.size();
  std::vector<long> counts(C, 0);
  long r = r0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t k = 0; k < C; ++k) {
    const double base = dp.g[k][static_cast<std::size_t>(r)];
    const long top = std::min(dp.hi[k], r);
    double u = unif(rng), acc = 0.0;
    long pick = -1;
    for (long c = dp.lo[k]; c <= top; ++c) {
      const double rest = dp.g[k + 1][static_cast<std::size_t>(r - c)];
      if (rest == kNegInf) continue;
      const double lb = log_binom(lf, r, c, dp.pk[k]);
      if (lb == kNegInf) continue;
      pick = c;
      acc += std::exp(lb + rest - base);
      if (u <= acc) break;
    }
    if (pick < 0) throw std::logic_error("conditional sampling reached an empty box");
    counts[k] = pick;
    r -= pick;
  }
  return counts;
}

// ---------------------------------------------------------------- implicit codebook block
//
// A codeword over the `random` axes is drawn position by position from
// gen[g(sigma)], where sigma is the context symbol at that position and g maps
// it to the generating row (the T symbol, or a single row for unconditional
// draws). Typicality is tested on the joint over context and random axes.

class Block {
 public:
  Block(const JointPmf& j, const AxisGroup& context, const AxisGroup& random, const std::string& gen_axis) {
    AxisGroup all = context;
    all.insert(all.end(), random.begin(), random.end());
    marg_ = j.marginal(all);
    for (const auto& a : context) cdims_.push_back(j.alphabet(a).size());
    for (const auto& a : random) rdims_.push_back(j.alphabet(a).size());
    S_ = 1;
    for (auto d : cdims_) S_ *= d;
    C_ = 1;
    for (auto d : rdims_) C_ *= d;
    cell_.assign(marg_.table().begin(), marg_.table().end());

    std::size_t gpos = context.size();
    for (std::size_t i = 0; i < context.size(); ++i)
      if (context[i] == gen_axis) gpos = i;
    const std::size_t ng = gpos < context.size() ? cdims_[gpos] : 1;
    gen_of_.resize(S_);
    for (std::size_t s = 0; s < S_; ++s) {
      std::size_t rem = s, sym = 0;
      for (std::size_t i = context.size(); i-- > 0;) {
        if (i == gpos) sym = rem % cdims_[i];
        rem /= cdims_[i];
      }
      gen_of_[s] = sym;
    }
    // gen[g][c] = prod_k p(r_k | g)
    gen_.assign(ng * C_, 1.0);
    for (std::size_t k = 0; k < random.size(); ++k) {
      std::vector<double> pr;
      if (gpos < context.size()) {
        pr = j.marginal_table({gen_axis, random[k]});
      } else {
        const auto m = j.marginal_table({random[k]});
        for (std::size_t g = 0; g < ng; ++g) pr.insert(pr.end(), m.begin(), m.end());
      }
      const std::size_t rk = rdims_[k];
      for (std::size_t g = 0; g < ng; ++g) {
        double row = 0.0;
        for (std::size_t a = 0; a < rk; ++a) row += pr[g * rk + a];
        for (std::size_t c = 0; c < C_; ++c) {
          const std::size_t a = symbol_of(c, k);
          gen_[g * C_ + c] *= row > 0.0 ? pr[g * rk + a] / row : 1.0 / static_cast<double>(rk);
        }
      }
    }
  }

  std::size_t random_axes() const { return rdims_.size(); }

  // log2 P(random codeword is jointly typical with the context sequences)
  double log2_prob(const std::vector<const Sequence*>& ctx, double eps, const std::vector<double>& lf) const {
    const auto groups = group(ctx);
    const long n = static_cast<long>(ctx.front()->size());
    double total = 0.0;
    for (std::size_t s = 0; s < S_; ++s) {
      const double lp = group_log_prob(s, static_cast<long>(groups[s].size()), n, eps, lf, nullptr);
      if (lp == kNegInf) return kNegInf;
      total += lp;
    }
    return total / kLn2;
  }

  // Codeword sampled conditionally on typicality; one sequence per random axis.
  std::vector<Sequence> sample_typical(const std::vector<const Sequence*>& ctx, double eps, const std::vector<double>& lf,
                                       std::mt19937_64& rng) const {
    const auto groups = group(ctx);
    const long n = static_cast<long>(ctx.front()->size());
    std::vector<std::size_t> cat(static_cast<std::size_t>(n), 0);
    for (std::size_t s = 0; s < S_; ++s) {
      const long r0 = static_cast<long>(groups[s].size());
      BoxDp dp;
      if (group_log_prob(s, r0, n, eps, lf, &dp) == kNegInf) throw std::logic_error("sampling an atypical context");
      if (r0 == 0) continue;
      const auto counts = sample_box(dp, lf, r0, rng);
      std::vector<std::size_t> pos = groups[s];
      std::shuffle(pos.begin(), pos.end(), rng);
      std::size_t at = 0;
      for (std::size_t c = 0; c < C_; ++c)
        for (long k = 0; k < counts[c]; ++k) cat[pos[at++]] = c;
    }
    return split(cat);
  }

  // Unconditional draw.
  std::vector<Sequence> sample_free(const std::vector<const Sequence*>& ctx, std::mt19937_64& rng) const {
    const std::size_t n = ctx.front()->size();
    std::vector<std::size_t> cat(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = gen_.data() + gen_of_[context_id(ctx, i)] * C_;
      double u = unif(rng), acc = 0.0;
      std::size_t pick = 0;
      for (std::size_t c = 0; c < C_; ++c) {
        if (row[c] <= 0.0) continue;
        pick = c;
        acc += row[c];
        if (u <= acc) break;
      }
      cat[i] = pick;
    }
    return split(cat);
  }

 private:
  std::size_t symbol_of(std::size_t c, std::size_t k) const {
    for (std::size_t i = rdims_.size(); i-- > k + 1;) c /= rdims_[i];
    return c % rdims_[k];
  }

  std::size_t context_id(const std::vector<const Sequence*>& ctx, std::size_t i) const {
    std::size_t s = 0;
    for (std::size_t a = 0; a < ctx.size(); ++a) s = s * cdims_[a] + (*ctx[a])[i];
    return s;
  }

  std::vector<std::vector<std::size_t>> group(const std::vector<const Sequence*>& ctx) const {
    if (ctx.size() != cdims_.size()) throw std::logic_error("context arity mismatch");
    std::vector<std::vector<std::size_t>> g(S_);
    for (std::size_t i = 0; i < ctx.front()->size(); ++i) g[context_id(ctx, i)].push_back(i);
    return g;
  }

  double group_log_prob(std::size_t s, long r0, long n, double eps, const std::vector<double>& lf, BoxDp* keep) const {
    std::vector<long> lo(C_), hi(C_);
    const double dn = static_cast<double>(n);
    for (std::size_t c = 0; c < C_; ++c) {
      const double p = cell_[s * C_ + c];
      if (!positive(p)) {
        lo[c] = hi[c] = 0;
      } else {
        lo[c] = std::max(0L, static_cast<long>(std::ceil((1.0 - eps) * p * dn - 1e-9)));
        hi[c] = static_cast<long>(std::floor((1.0 + eps) * p * dn + 1e-9));
      }
    }
    if (r0 == 0) {
      for (std::size_t c = 0; c < C_; ++c)
        if (lo[c] > 0) return kNegInf;
      if (keep) *keep = BoxDp{};
      return 0.0;
    }
    const double* row = gen_.data() + gen_of_[s] * C_;
    BoxDp dp = solve_box(lf, r0, std::vector<double>(row, row + C_), std::move(lo), std::move(hi));
    const double out = dp.g[0][static_cast<std::size_t>(r0)];
    if (keep) *keep = std::move(dp);
    return out;
  }

  std::vector<Sequence> split(const std::vector<std::size_t>& cat) const {
    std::vector<Sequence> out(rdims_.size(), Sequence(cat.size()));
    for (std::size_t i = 0; i < cat.size(); ++i)
      for (std::size_t k = 0; k < rdims_.size(); ++k) out[k][i] = static_cast<std::uint16_t>(symbol_of(cat[i], k));
    return out;
  }

  JointPmf marg_;
  std::vector<std::size_t> cdims_, rdims_;
  std::size_t S_ = 1, C_ = 1;
  std::vector<double> cell_;
  std::vector<std::size_t> gen_of_;
  std::vector<double> gen_;
};

std::vector<double> log_factorials(std::size_t n) {
  std::vector<double> lf(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) lf[k] = lf[k - 1] + std::log(static_cast<double>(k));
  return lf;
}

Sequence sample_marginal(const std::vector<double>& p, std::size_t n, std::mt19937_64& rng) {
  std::discrete_distribution<std::size_t> d(p.begin(), p.end());
  Sequence s(n);
  for (auto& v : s) v = static_cast<std::uint16_t>(d(rng));
  return s;
}

double codebook_size(double exponent) { return std::max(1.0, std::ceil(std::exp2(exponent) * (1.0 - 1e-12))); }

double clean_info(double v) { return v < 1e-12 ? 0.0 : v; }

}  // namespace

// ---------------------------------------------------------------- typicality

bool is_jointly_typical(const std::vector<Sequence>& seqs, const JointPmf& joint, double eps) {
  if (seqs.size() != joint.rank()) throw ValidationError("one sequence per joint axis is required");
  if (seqs.empty() || seqs.front().empty()) throw ValidationError("sequences must be nonempty");
  std::vector<const Sequence*> ptrs;
  for (std::size_t a = 0; a < seqs.size(); ++a) {
    if (seqs[a].size() != seqs.front().size()) throw ValidationError("sequence length mismatch");
    for (auto v : seqs[a])
      if (v >= joint.dim(a)) throw ValidationError("symbol out of range on axis " + joint.axes()[a].name);
    ptrs.push_back(&seqs[a]);
  }
  return typical_on(joint, ptrs, eps);
}

double log2_cover_probability(const JointPmf& joint2, const Sequence& x, double eps) {
  if (joint2.rank() != 2) throw ValidationError("covering needs a two-axis joint");
  const auto names = joint2.axis_names();
  const Block b(joint2, {names[0]}, {names[1]}, "");
  return b.log2_prob({&x}, eps, log_factorials(x.size()));
}

TypicalityEmpirics typicality_empirics(const JointPmf& joint, const std::vector<std::size_t>& ns, double eps,
                                       std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be at least 1");
  TypicalityEmpirics out;
  const auto names = joint.axis_names();
  out.entropy_bits = entropy(joint, names);
  const bool two = joint.rank() == 2;
  std::vector<double> px;
  if (two) {
    out.mutual_info_bits = mutual_info(joint, {names[0]}, {names[1]});
    out.rate_above = out.mutual_info_bits + 0.2;
    out.rate_below = std::max(out.mutual_info_bits - 0.2, 0.01);
    px = joint.marginal_table({names[0]});
  }
  const std::vector<double> cells(joint.table().begin(), joint.table().end());
  for (const std::size_t n : ns) {
    if (n < 1) throw ValidationError("blocklength must be at least 1");
    TypicalityRow row;
    row.n = n;
    std::size_t typ = 0, in_interval = 0, cov_hi = 0, cov_lo = 0;
    const double dn = static_cast<double>(n);
    std::unique_ptr<Block> cover;
    if (two) cover = std::make_unique<Block>(joint, AxisGroup{names[0]}, AxisGroup{names[1]}, "");
    const auto lf = log_factorials(n);
    for (std::size_t t = 0; t < trials; ++t) {
      std::mt19937_64 rng(derive_seed(seed, 0x7479 + n, t));
      std::discrete_distribution<std::size_t> d(cells.begin(), cells.end());
      std::vector<Sequence> seqs(joint.rank(), Sequence(n));
      std::vector<std::size_t> idx(joint.rank());
      double logp = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = d(rng);
        logp += std::log2(cells[c]);
        joint.unravel(c, idx);
        for (std::size_t a = 0; a < idx.size(); ++a) seqs[a][i] = static_cast<std::uint16_t>(idx[a]);
      }
      if (is_jointly_typical(seqs, joint, eps)) {
        ++typ;
        const double h = out.entropy_bits;
        if (logp <= -dn * h * (1 - eps) + 1e-9 && logp >= -dn * h * (1 + eps) - 1e-9) ++in_interval;
      }
      if (two) {
        const Sequence x = sample_marginal(px, n, rng);
        const double lq = cover->log2_prob({&x}, eps, lf);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (auto [rate, hits] : {std::pair{out.rate_above, &cov_hi}, std::pair{out.rate_below, &cov_lo}}) {
          // P(at least one of M i.i.d. codewords is typical) = 1 - (1 - q)^M
          const double M = codebook_size(dn * rate);
          const double q = std::exp2(lq);
          const double p_hit = lq == kNegInf ? 0.0 : -std::expm1(M * std::log1p(-std::min(q, 1.0 - 1e-16)));
          if (unif(rng) < p_hit) ++*hits;
        }
      }
    }
    const double dt = static_cast<double>(trials);
    row.p_typical = static_cast<double>(typ) / dt;
    row.logprob_in_interval =
        typ ? static_cast<double>(in_interval) / static_cast<double>(typ) : std::numeric_limits<double>::quiet_NaN();
    row.cover_above = two ? static_cast<double>(cov_hi) / dt : std::numeric_limits<double>::quiet_NaN();
    row.cover_below = two ? static_cast<double>(cov_lo) / dt : std::numeric_limits<double>::quiet_NaN();
    out.rows.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------- two-phase scheme

std::string SimulationResult::csv_header() {
  return "n,trials,err_total,err_phase1_cover,err_phase1_bin,err_phase2_cover,err_phase2_bin,err_fundef";
}

std::string SimulationResult::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%zu,%zu,%zu,%zu,%zu", n, trials, err_total, err_phase1_cover,
                err_phase1_bin, err_phase2_cover, err_phase2_bin, err_fundef);
  return buf;
}

namespace {

enum Outcome : unsigned char { kOk, kP1Cover, kP1Bin, kP2Cover, kP2Bin, kFundef };

// f~(v,t,w) as a codomain index, or -1 when undefined or multivalued.
struct FTilde {
  std::size_t nv = 0, nt = 0, nw = 0;
  std::vector<long> value;
  std::vector<char> multivalued;
  long at(std::size_t v, std::size_t t, std::size_t w) const { return value[(v * nt + t) * nw + w]; }
  bool multi(std::size_t v, std::size_t t, std::size_t w) const { return multivalued[(v * nt + t) * nw + w] != 0; }
};

FTilde build_ftilde(const AuxiliarySystem& sys, const JointPmf& j, const FunctionSpec& f) {
  FTilde ft;
  const std::size_t nx = j.alphabet("X").size(), ny = j.alphabet("Y").size(), nu = j.alphabet("U").size();
  ft.nv = j.alphabet("V").size();
  ft.nt = j.alphabet("T").size();
  ft.nw = j.alphabet("W").size();
  ft.value.assign(ft.nv * ft.nt * ft.nw, -1);
  ft.multivalued.assign(ft.value.size(), 0);
  auto put = [&](std::size_t v, std::size_t t, std::size_t w, long val) {
    long& slot = ft.value[(v * ft.nt + t) * ft.nw + w];
    char& multi = ft.multivalued[(v * ft.nt + t) * ft.nw + w];
    if (multi) return;
    if (slot < 0) {
      slot = val;
    } else if (slot != val) {
      slot = -1;
      multi = 1;
    }
  };
  const bool use_sets = sys.v_sets.size() == ft.nv && sys.w_sets.size() == ft.nw && ft.nv > 0 && ft.nw > 0;
  if (use_sets) {
    // the set semantics: every (t,x) in v and (t,u,y) in w with p(x,t,u,y) > 0
    const JointPmf m = j.marginal({"X", "T", "U", "Y"});
    std::vector<std::size_t> idx(4);
    for (std::size_t c = 0; c < m.cell_count(); ++c) {
      if (!positive(m[c])) continue;
      m.unravel(c, idx);
      const std::size_t x = idx[0], t = idx[1], u = idx[2], y = idx[3];
      const std::size_t lv = t * nx + x, lw = (t * nu + u) * ny + y;
      for (std::size_t v = 0; v < ft.nv; ++v) {
        if (!std::binary_search(sys.v_sets[v].begin(), sys.v_sets[v].end(), lv)) continue;
        for (std::size_t w = 0; w < ft.nw; ++w)
          if (std::binary_search(sys.w_sets[w].begin(), sys.w_sets[w].end(), lw))
            put(v, t, w, static_cast<long>(f(x, y)));
      }
    }
  } else {
    std::vector<std::size_t> idx(j.rank());
    const std::size_t av = j.axis("V"), ax = j.axis("X"), at = j.axis("T"), ay = j.axis("Y"), aw = j.axis("W");
    for (std::size_t c = 0; c < j.cell_count(); ++c) {
      if (!positive(j[c])) continue;
      j.unravel(c, idx);
      put(idx[av], idx[at], idx[aw], static_cast<long>(f(idx[ax], idx[ay])));
    }
  }
  return ft;
}

struct Scheme {
  const AuxiliarySystem& sys;
  const FunctionSpec& f;
  SimulationConfig cfg;
  JointPmf j;
  FTilde ft;
  bool validated = false;
  double MT, MU, MV, MW, B0, BX, BY;
  std::vector<double> pt, pxy;
  std::size_t ny;
  JointPmf m_tuy, m_vtw;
  Block u_tx, u_ty, v_xt, w_tuy, vw_t, w_vt, v_tw;
  std::vector<double> lf;

  Scheme(const AuxiliarySystem& s, const FunctionSpec& fn, const SimulationConfig& c, const JointPmf& joint,
         const CodebookExponents& e)
      : sys(s),
        f(fn),
        cfg(c),
        j(joint),
        ft(build_ftilde(s, joint, fn)),
        MT(codebook_size(e.t)),
        MU(codebook_size(e.u)),
        MV(codebook_size(e.v)),
        MW(codebook_size(e.w)),
        B0(codebook_size(e.b0)),
        BX(codebook_size(e.bx)),
        BY(codebook_size(e.by)),
        pt(joint.marginal_table({"T"})),
        pxy(joint.marginal_table({"X", "Y"})),
        ny(joint.alphabet("Y").size()),
        m_tuy(joint.marginal({"T", "U", "Y"})),
        m_vtw(joint.marginal({"V", "T", "W"})),
        u_tx(joint, {"T", "X"}, {"U"}, "T"),
        u_ty(joint, {"T", "Y"}, {"U"}, "T"),
        v_xt(joint, {"X", "T"}, {"V"}, "T"),
        w_tuy(joint, {"T", "U", "Y"}, {"W"}, "T"),
        vw_t(joint, {"T"}, {"V", "W"}, "T"),
        w_vt(joint, {"V", "T"}, {"W"}, "T"),
        v_tw(joint, {"T", "W"}, {"V"}, "T"),
        lf(log_factorials(c.n)) {}

  double prob(const Block& b, const std::vector<const Sequence*>& ctx, double eps) const {
    const double l = b.log2_prob(ctx, eps, lf);
    return l == kNegInf ? 0.0 : std::exp2(l);
  }

  Outcome trial(std::size_t index) const;
};

Outcome Scheme::trial(std::size_t index) const {
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x5349, index));
  const std::size_t n = cfg.n;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto uniform_index = [&](double count) {
    return std::min(count - 1.0, std::floor(unif(rng) * count));
  };

  // sources
  Sequence x(n), y(n);
  {
    std::discrete_distribution<std::size_t> d(pxy.begin(), pxy.end());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = d(rng);
      x[i] = static_cast<std::uint16_t>(c / ny);
      y[i] = static_cast<std::uint16_t>(c % ny);
    }
  }
  const std::size_t mt = static_cast<std::size_t>(MT);
  std::vector<Sequence> tcb(mt);
  for (auto& t : tcb) t = sample_marginal(pt, n, rng);

  // ---- phase 1: transmitter X covers x with some (t, u(t))
  std::vector<double> ku(mt);
  double ktot = 0.0;
  for (std::size_t i = 0; i < mt; ++i) {
    ku[i] = sample_count(MU, prob(u_tx, {&tcb[i], &x}, cfg.eps_cover), rng);
    ktot += ku[i];
  }
  const bool cover1_fail = ktot == 0.0;
  std::size_t ti = 0;
  Sequence u;
  if (cover1_fail) {
    ti = static_cast<std::size_t>(uniform_index(static_cast<double>(mt)));
    u = u_tx.sample_free({&tcb[ti], &x}, rng)[0];
  } else {
    double r = unif(rng) * ktot;
    for (ti = 0; ti + 1 < mt && r >= ku[ti]; ++ti) r -= ku[ti];
    u = u_tx.sample_typical({&tcb[ti], &x}, cfg.eps_cover, lf, rng)[0];
  }

  // ---- phase 1: transmitter Y decodes (t, u) from the bin index and y
  struct Member {
    std::size_t t;
    Sequence u;
    bool chosen;
  };
  std::vector<Member> members{{ti, u, true}};
  bool overflow = false;
  std::vector<double> implicit_in_bin(mt), implicit_cands(mt);
  for (std::size_t i = 0; i < mt; ++i) {
    const double others_typ = ku[i] - (i == ti && !cover1_fail ? 1.0 : 0.0);
    const double m = sample_count(others_typ, 1.0 / B0, rng);
    if (m > static_cast<double>(kExplicitCap)) overflow = true;
    for (std::size_t k = 0; k < std::min<double>(m, kExplicitCap); ++k)
      members.push_back({i, u_tx.sample_typical({&tcb[i], &x}, cfg.eps_cover, lf, rng)[0], false});
    const double rest = MU - ku[i] - (i == ti && cover1_fail ? 1.0 : 0.0);
    implicit_in_bin[i] = sample_count(rest, 1.0 / B0, rng);
    implicit_cands[i] = sample_count(implicit_in_bin[i], prob(u_ty, {&tcb[i], &y}, cfg.eps_mid), rng);
  }
  std::vector<std::size_t> explicit_cands;
  for (std::size_t k = 0; k < members.size(); ++k)
    if (typical_on(m_tuy, {&tcb[members[k].t], &members[k].u, &y}, cfg.eps_mid)) explicit_cands.push_back(k);
  double total1 = static_cast<double>(explicit_cands.size());
  for (double c : implicit_cands) total1 += c;

  std::size_t tc = ti;
  Sequence uc;
  bool y_right = false;
  auto pick_implicit = [&](const std::vector<double>& counts, double r) {
    std::size_t i = 0;
    for (; i + 1 < mt && r >= counts[i]; ++i) r -= counts[i];
    return i;
  };
  if (overflow) {
    // more than kExplicitCap look-alikes share the bin: Y cannot single out
    // the right pair; it takes one of the look-alikes
    tc = members.back().t;
    uc = members.back().u;
  } else if (total1 >= 1.0) {
    const double r = uniform_index(total1);
    if (r < static_cast<double>(explicit_cands.size())) {
      const Member& m = members[explicit_cands[static_cast<std::size_t>(r)]];
      tc = m.t;
      uc = m.u;
      y_right = m.chosen;
    } else {
      tc = pick_implicit(implicit_cands, r - static_cast<double>(explicit_cands.size()));
      uc = u_ty.sample_typical({&tcb[tc], &y}, cfg.eps_mid, lf, rng)[0];
    }
  } else {
    // no candidate: Y still has to send something and picks a bin member
    double in_bin = static_cast<double>(members.size());
    for (double c : implicit_in_bin) in_bin += c;
    const double r = uniform_index(in_bin);
    if (r < static_cast<double>(members.size())) {
      const Member& m = members[static_cast<std::size_t>(r)];
      tc = m.t;
      uc = m.u;
      y_right = m.chosen;
    } else {
      tc = pick_implicit(implicit_in_bin, r - static_cast<double>(members.size()));
      uc = u_ty.sample_free({&tcb[tc], &y}, rng)[0];
    }
  }
  const bool bin1_fail = !y_right;

  // ---- phase 2: both transmitters cover
  const double kv = sample_count(MV, prob(v_xt, {&x, &tcb[ti]}, cfg.eps_mid), rng);
  const Sequence v = kv > 0.0 ? v_xt.sample_typical({&x, &tcb[ti]}, cfg.eps_mid, lf, rng)[0]
                              : v_xt.sample_free({&x, &tcb[ti]}, rng)[0];
  const double kw = sample_count(MW, prob(w_tuy, {&tcb[tc], &uc, &y}, cfg.eps_mid), rng);
  const Sequence w = kw > 0.0 ? w_tuy.sample_typical({&tcb[tc], &uc, &y}, cfg.eps_mid, lf, rng)[0]
                              : w_tuy.sample_free({&tcb[tc], &uc, &y}, rng)[0];
  const bool cover2_fail = kv == 0.0 || kw == 0.0;

  // ---- decoding: unique typical (v, t, w) across the two bins
  struct Cand {
    std::size_t t;
    int kind;  // 0 explicit pair, 1 explicit v + implicit w, 2 implicit v + explicit w, 3 both implicit
    std::size_t ev, ew;
  };
  std::vector<Cand> found;
  double total2 = 0.0;
  bool overflow2 = false;
  std::vector<std::vector<Sequence>> evs(mt), ews(mt);
  std::vector<double> pair_counts;
  std::vector<std::pair<Cand, double>> implicit_groups;
  for (std::size_t i = 0; i < mt; ++i) {
    auto& EV = evs[i];
    auto& EW = ews[i];
    double nv_rest = MV, nw_rest = MW;
    if (i == ti) {
      EV.push_back(v);
      const double m = sample_count(std::max(kv - 1.0, 0.0), 1.0 / BX, rng);
      if (m > static_cast<double>(kExplicitCap)) overflow2 = true;
      for (std::size_t k = 0; k < std::min<double>(m, kExplicitCap); ++k)
        EV.push_back(v_xt.sample_typical({&x, &tcb[i]}, cfg.eps_mid, lf, rng)[0]);
      nv_rest -= std::max(kv, 1.0);
    }
    if (i == tc) {
      EW.push_back(w);
      const double m = sample_count(std::max(kw - 1.0, 0.0), 1.0 / BY, rng);
      if (m > static_cast<double>(kExplicitCap)) overflow2 = true;
      for (std::size_t k = 0; k < std::min<double>(m, kExplicitCap); ++k)
        EW.push_back(w_tuy.sample_typical({&tcb[i], &uc, &y}, cfg.eps_mid, lf, rng)[0]);
      nw_rest -= std::max(kw, 1.0);
    }
    const double NV = sample_count(nv_rest, 1.0 / BX, rng);
    const double NW = sample_count(nw_rest, 1.0 / BY, rng);
    for (std::size_t a = 0; a < EV.size(); ++a)
      for (std::size_t b = 0; b < EW.size(); ++b)
        if (typical_on(m_vtw, {&EV[a], &tcb[i], &EW[b]}, cfg.eps_dec)) {
          found.push_back({i, 0, a, b});
          total2 += 1.0;
        }
    for (std::size_t a = 0; a < EV.size(); ++a) {
      const double c = sample_count(NW, prob(w_vt, {&EV[a], &tcb[i]}, cfg.eps_dec), rng);
      if (c > 0) implicit_groups.push_back({{i, 1, a, 0}, c});
      total2 += c;
    }
    for (std::size_t b = 0; b < EW.size(); ++b) {
      const double c = sample_count(NV, prob(v_tw, {&tcb[i], &EW[b]}, cfg.eps_dec), rng);
      if (c > 0) implicit_groups.push_back({{i, 2, 0, b}, c});
      total2 += c;
    }
    if (NV * NW >= 1.0) {
      const double c = sample_count(NV * NW, prob(vw_t, {&tcb[i]}, cfg.eps_dec), rng);
      if (c > 0) implicit_groups.push_back({{i, 3, 0, 0}, c});
      total2 += c;
    }
  }

  bool decode_ok = false;
  bool correct = false;
  if (!overflow2 && total2 == 1.0) {
    Sequence dv, dw;
    std::size_t dt;
    if (!found.empty()) {
      const Cand& c = found.front();
      dt = c.t;
      dv = evs[dt][c.ev];
      dw = ews[dt][c.ew];
      decode_ok = dt == ti && dt == tc && c.ev == 0 && c.ew == 0;
    } else {
      const Cand& c = implicit_groups.front().first;
      dt = c.t;
      if (c.kind == 1) {
        dv = evs[dt][c.ev];
        dw = w_vt.sample_typical({&dv, &tcb[dt]}, cfg.eps_dec, lf, rng)[0];
      } else if (c.kind == 2) {
        dw = ews[dt][c.ew];
        dv = v_tw.sample_typical({&tcb[dt], &dw}, cfg.eps_dec, lf, rng)[0];
      } else {
        auto vw = vw_t.sample_typical({&tcb[dt]}, cfg.eps_dec, lf, rng);
        dv = std::move(vw[0]);
        dw = std::move(vw[1]);
      }
    }
    correct = true;
    const Sequence& tseq = tcb[dt];
    for (std::size_t i = 0; i < n && correct; ++i) {
      const long val = ft.at(dv[i], tseq[i], dw[i]);
      if (val < 0) {
        if (validated && ft.multi(dv[i], tseq[i], dw[i]))
          throw std::logic_error("f~ is multivalued on a typical triple of a validated system");
        correct = false;
      } else if (static_cast<std::size_t>(val) != f(x[i], y[i])) {
        correct = false;
      }
    }
  }
  if (correct) return kOk;
  if (cover1_fail) return kP1Cover;
  if (bin1_fail) return kP1Bin;
  if (cover2_fail) return kP2Cover;
  if (!decode_ok) return kP2Bin;
  return kFundef;
}

}  // namespace

SimulationResult simulate_two_phase_scheme(const AuxiliarySystem& sys, const FunctionSpec& f, const RateTuple& rates,
                                           const SimulationConfig& cfg) {
  if (cfg.n < 1) throw ValidationError("blocklength must be at least 1");
  if (cfg.trials < 1) throw ValidationError("trials must be at least 1");
  if (!(cfg.eps_cover > 0 && cfg.eps_cover < cfg.eps_mid && cfg.eps_mid < cfg.eps_dec))
    throw ValidationError("typicality tolerances must satisfy 0 < eps'' < eps' < eps");
  if (rates.r0 < 0 || rates.rx < 0 || rates.ry < 0) throw ValidationError("rates must be nonnegative");

  const JointPmf j = sys.joint();
  SimulationResult res;
  res.n = cfg.n;
  res.trials = cfg.trials;
  const ValidationReport rep = validate_auxiliaries_theorem1(sys, f);
  res.validated = rep.ok;
  res.validation_note = rep.diagnostic;
  res.bounds = theorem1_rates(j);
  res.margin = std::min({rates.r0 - res.bounds.r0, rates.rx - res.bounds.rx, rates.ry - res.bounds.ry,
                         rates.rx + rates.ry - res.bounds.sum});

  const double dn = static_cast<double>(cfg.n);
  CodebookExponents& e = res.exponents;
  e.t = dn * clean_info(mutual_info(j, {"X"}, {"T"}));
  e.u = dn * clean_info(cond_mutual_info(j, {"X"}, {"U"}, {"T"}));
  e.v = dn * clean_info(cond_mutual_info(j, {"V"}, {"X"}, {"T"}));
  e.w = dn * clean_info(cond_mutual_info(j, {"U", "Y"}, {"W"}, {"T"}));
  e.b0 = dn * rates.r0;
  e.bx = dn * rates.rx;
  e.by = dn * rates.ry;
  for (auto [name, val] : {std::pair{"u", e.u}, {"v", e.v}, {"w", e.w}, {"b0", e.b0}, {"bx", e.bx}, {"by", e.by}})
    if (val > kMaxExponent) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "refused: codebook exponent %s = %.1f bits exceeds %.0f", name, val, kMaxExponent);
      throw ValidationError(buf);
    }
  // only the T codebook is stored, regenerated per trial
  const double t_bytes = codebook_size(e.t) * dn * sizeof(std::uint16_t);
  if (e.t > kMaxExponent || t_bytes > static_cast<double>(cfg.memory_cap_bytes)) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "refused: T codebook exponent n*I(X;T) = %.1f bits needs %.3g bytes, cap %zu", e.t,
                  t_bytes, cfg.memory_cap_bytes);
    throw ValidationError(buf);
  }

  Scheme scheme(sys, f, cfg, j, e);
  scheme.validated = rep.ok;
  std::vector<Outcome> outcomes(cfg.trials);
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) { outcomes[t] = scheme.trial(t); });
  for (Outcome o : outcomes) {
    if (o == kOk) continue;
    ++res.err_total;
    switch (o) {
      case kP1Cover: ++res.err_phase1_cover; break;
      case kP1Bin: ++res.err_phase1_bin; break;
      case kP2Cover: ++res.err_phase2_cover; break;
      case kP2Bin: ++res.err_phase2_bin; break;
      default: ++res.err_fundef; break;
    }
  }
  return res;
}

}  // namespace coopcomp
