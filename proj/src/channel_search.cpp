#include "coopcomp/channel_search.hpp"

#include "coopcomp/util.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace coopcomp {

std::vector<std::vector<std::size_t>> set_partitions(std::size_t n, std::size_t max_blocks) {
  std::vector<std::vector<std::size_t>> out;
  if (n == 0) return {{}};
  std::vector<std::size_t> a(n, 0);
  // recursive restricted-growth generation; a[i] <= max(a[0..i-1]) + 1
  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (i == n) {
      out.push_back(a);
      return;
    }
    for (std::size_t b = 0; b <= used && b < max_blocks; ++b) {
      a[i] = b;
      self(self, i + 1, std::max(used, b + 1));
    }
  };
  a[0] = 0;
  rec(rec, 1, 1);
  return out;
}

std::uint64_t partition_count(std::size_t n, std::size_t k) {
  // Stirling numbers of the second kind, summed over block counts <= k
  constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max() / 4;
  std::vector<std::vector<std::uint64_t>> s(n + 1, std::vector<std::uint64_t>(n + 1, 0));
  s[0][0] = 1;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= i; ++j) s[i][j] = std::min(kSat, j * s[i - 1][j] + s[i - 1][j - 1]);
  std::uint64_t total = 0;
  for (std::size_t j = 0; j <= std::min(n, k); ++j) total = std::min(kSat, total + s[n][j]);
  return total;
}

Channel partition_channel(const Alphabet& from, const std::vector<std::size_t>& blocks, const std::string& to_name) {
  const std::size_t nb = blocks.empty() ? 1 : *std::max_element(blocks.begin(), blocks.end()) + 1;
  std::vector<std::string> sym;
  for (std::size_t b = 0; b < nb; ++b) {
    std::string s = "{";
    bool first = true;
    for (std::size_t x = 0; x < blocks.size(); ++x)
      if (blocks[x] == b) {
        s += (first ? "" : " ") + from.symbols[x];
        first = false;
      }
    sym.push_back(s + "}");
  }
  return Channel::deterministic({from}, Alphabet(to_name, sym), blocks);
}

Channel random_channel(std::mt19937_64& rng, const std::vector<Alphabet>& from, const std::string& to_name,
                       std::size_t cols, double alpha) {
  std::size_t rows = 1;
  for (const auto& a : from) rows *= a.size();
  std::gamma_distribution<double> gam(alpha, 1.0);
  std::vector<double> t(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += (t[r * cols + c] = gam(rng));
    if (s <= 0.0) {
      t[r * cols] = s = 1.0;
    }
    for (std::size_t c = 0; c < cols; ++c) t[r * cols + c] /= s;
  }
  return Channel(from, Alphabet::range(to_name, cols), std::move(t));
}

EnvelopeChoice envelope_min(const std::vector<EnvelopePoint>& pts, double budget, double tol) {
  EnvelopeChoice best;
  auto consider = [&](double value, std::size_t i, std::size_t j, double lambda) {
    if (!best.feasible || value < best.value - 1e-12) {
      best = {true, value, i, j, lambda};
    }
  };
  auto obj = [](const EnvelopePoint& p) { return std::max(p.a_plus_b, p.c); };
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].g <= budget + tol) consider(obj(pts[i]), i, i, 1.0);

  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const auto& P = pts[i];
      const auto& Q = pts[j];
      // feasible lambda (weight on P): lambda*P.g + (1-lambda)*Q.g <= budget
      double lo = 0.0, hi = 1.0;
      const double d = P.g - Q.g;
      // tolerance only admits single points; mixtures are solved at the exact budget
      const double rhs = budget - Q.g;
      if (d > 0) {
        hi = std::min(hi, rhs / d);
      } else if (d < 0) {
        lo = std::max(lo, rhs / d);
      } else if (rhs < 0) {
        continue;
      }
      if (lo > hi) continue;
      double cand[3] = {lo, hi, -1.0};
      const double den = (P.a_plus_b - Q.a_plus_b) - (P.c - Q.c);
      if (den != 0.0) cand[2] = (Q.c - Q.a_plus_b) / den;
      for (double lam : cand) {
        if (lam < lo || lam > hi || lam <= 0.0 || lam >= 1.0) continue;
        const double v = std::max(lam * P.a_plus_b + (1 - lam) * Q.a_plus_b, lam * P.c + (1 - lam) * Q.c);
        consider(v, i, j, lam);
      }
    }
  return best;
}

SlicedSetSolution solve_sliced_sets(const JointPmf& joint, const CharGraph& graph, const AxisGroup& k_axes,
                                    const std::string& slice_axis, const SolverConfig& cfg) {
  AxisGroup uniq;
  for (const auto* grp : {&graph.l_axes, &k_axes})
    for (const auto& a : *grp)
      if (std::find(uniq.begin(), uniq.end(), a) == uniq.end()) uniq.push_back(a);
  const JointPmf m = joint.marginal(uniq);

  std::size_t nk = 1, nl_full = 1;
  for (const auto& a : k_axes) nk *= m.alphabet(a).size();
  for (const auto& a : graph.l_axes) nl_full *= m.alphabet(a).size();

  // slice value of each l index
  std::size_t slice_stride = 1, slice_dim = 1;
  if (!slice_axis.empty()) {
    const auto it = std::find(graph.l_axes.begin(), graph.l_axes.end(), slice_axis);
    if (it == graph.l_axes.end() || std::find(k_axes.begin(), k_axes.end(), slice_axis) == k_axes.end())
      throw ValidationError("slice axis must be shared by L and K");
    const std::size_t pos = static_cast<std::size_t>(it - graph.l_axes.begin());
    slice_dim = graph.l_dims()[pos];
    for (std::size_t i = pos + 1; i < graph.l_axes.size(); ++i) slice_stride *= graph.l_dims()[i];
  }
  auto slice_of = [&](std::size_t l) { return (l / slice_stride) % slice_dim; };

  std::vector<std::vector<std::size_t>> members(slice_dim);  // graph vertices per slice
  for (std::size_t v = 0; v < graph.size(); ++v) members[slice_of(graph.l_index(v))].push_back(v);

  // p(vertex, k)
  std::vector<double> p_vk(graph.size() * nk, 0.0);
  std::vector<std::size_t> idx(m.rank());
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    if (!positive(m[c])) continue;
    m.unravel(c, idx);
    const auto v = graph.vertex_of(composite_index(m, graph.l_axes, idx));
    if (!v) continue;
    p_vk[*v * nk + composite_index(m, k_axes, idx)] += m[c];
  }

  SlicedSetSolution out;
  struct SliceResult {
    std::vector<std::vector<std::size_t>> sets;  // global vertex indices, used sets only
    std::vector<std::vector<double>> rows;       // local vertex -> used set weights
    double value = 0.0;
    bool exhausted = false;
  };
  std::vector<SliceResult> res(slice_dim);
  SolverConfig inner = cfg;
  inner.jobs = 1;
  parallel_for(slice_dim, cfg.jobs, [&](std::size_t s) {
    const auto& mem = members[s];
    if (mem.empty()) return;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t a = 0; a < mem.size(); ++a)
      for (std::size_t b = a + 1; b < mem.size(); ++b)
        if (graph.adjacent(mem[a], mem[b])) edges.emplace_back(a, b);
    const CharGraph sub = CharGraph::from_edges(mem.size(), edges);
    std::vector<std::vector<std::size_t>> fam;
    try {
      fam = enumerate_maximal_independent_sets(sub, cfg.set_cap).sets;
    } catch (const SearchBudgetError&) {
      res[s].exhausted = true;
      for (std::size_t a = 0; a < mem.size(); ++a) fam.push_back({a});
    }
    SetMiProblem pr;
    pr.nl = mem.size();
    pr.nk = nk;
    pr.nsets = fam.size();
    pr.p_lk.assign(pr.nl * nk, 0.0);
    for (std::size_t a = 0; a < mem.size(); ++a)
      for (std::size_t k = 0; k < nk; ++k) pr.p_lk[a * nk + k] = p_vk[mem[a] * nk + k];
    pr.allowed.assign(pr.nl * pr.nsets, 0);
    for (std::size_t j = 0; j < fam.size(); ++j)
      for (auto a : fam[j]) pr.allowed[a * pr.nsets + j] = 1;
    SolverConfig sc = inner;
    sc.seed = derive_seed(cfg.seed, 0x736c, s);
    const SetMiResult sol = minimize_set_mi(pr, sc);
    res[s].value = sol.value;

    std::vector<double> use(pr.nsets, 0.0);
    for (std::size_t a = 0; a < pr.nl; ++a) {
      double pa = 0.0;
      for (std::size_t k = 0; k < nk; ++k) pa += pr.p_lk[a * nk + k];
      for (std::size_t j = 0; j < pr.nsets; ++j) use[j] += pa * sol.channel[a * pr.nsets + j];
    }
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < pr.nsets; ++j)
      if (use[j] > 0.0) kept.push_back(j);
    for (auto j : kept) {
      std::vector<std::size_t> g;
      for (auto a : fam[j]) g.push_back(mem[a]);
      res[s].sets.push_back(g);
    }
    res[s].rows.assign(pr.nl, std::vector<double>(kept.size(), 0.0));
    for (std::size_t a = 0; a < pr.nl; ++a) {
      double tot = 0.0;
      for (std::size_t q = 0; q < kept.size(); ++q) tot += (res[s].rows[a][q] = sol.channel[a * pr.nsets + kept[q]]);
      if (tot > 0.0) {
        for (auto& x : res[s].rows[a]) x /= tot;
      } else {
        // zero-mass vertex: park it on the first kept set containing it, if any
        for (std::size_t q = 0; q < kept.size(); ++q)
          if (std::find(fam[kept[q]].begin(), fam[kept[q]].end(), a) != fam[kept[q]].end()) {
            res[s].rows[a][q] = 1.0;
            break;
          }
      }
    }
  });

  std::size_t merged = 1;
  for (const auto& r : res) merged = std::max(merged, r.sets.size());
  out.sets.assign(merged, {});
  out.rows.assign(nl_full, std::vector<double>(merged, 0.0));
  std::vector<char> filled(nl_full, 0);
  for (std::size_t s = 0; s < slice_dim; ++s) {
    const auto& r = res[s];
    out.value += r.value;
    out.budget_exhausted = out.budget_exhausted || r.exhausted;
    for (std::size_t q = 0; q < r.sets.size(); ++q)
      for (auto v : r.sets[q]) out.sets[q].push_back(graph.l_index(v));
    for (std::size_t a = 0; a < members[s].size(); ++a) {
      const std::size_t l = graph.l_index(members[s][a]);
      double tot = 0.0;
      for (std::size_t q = 0; q < r.rows[a].size(); ++q) tot += (out.rows[l][q] = r.rows[a][q]);
      filled[l] = tot > 0.0;
    }
  }
  for (std::size_t l = 0; l < nl_full; ++l)
    if (!filled[l]) {
      std::fill(out.rows[l].begin(), out.rows[l].end(), 0.0);
      out.rows[l][0] = 1.0;
    }
  for (auto& s : out.sets) std::sort(s.begin(), s.end());
  return out;
}

}  // namespace coopcomp
