#include "coopcomp/graph_entropy.hpp"

#include "coopcomp/kernels.hpp"
#include "coopcomp/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace coopcomp {
namespace {

// log2 stand-in for log2(0) that stays finite under multiplication by 0.
constexpr double kLogFloor = -1e300;

struct Layout {
  const SetMiProblem* pr;
  std::vector<double> p_l;       // nl
  std::vector<double> p_k;       // nk
  std::vector<double> k_given_l; // nl x nk
  std::vector<double> l_given_k; // nk x nl (transposed for the q update)
};

Layout make_layout(const SetMiProblem& pr) {
  Layout lay{&pr, std::vector<double>(pr.nl, 0.0), std::vector<double>(pr.nk, 0.0),
             std::vector<double>(pr.nl * pr.nk, 0.0), std::vector<double>(pr.nk * pr.nl, 0.0)};
  for (std::size_t l = 0; l < pr.nl; ++l)
    for (std::size_t k = 0; k < pr.nk; ++k) {
      lay.p_l[l] += pr.p_lk[l * pr.nk + k];
      lay.p_k[k] += pr.p_lk[l * pr.nk + k];
    }
  for (std::size_t l = 0; l < pr.nl; ++l)
    for (std::size_t k = 0; k < pr.nk; ++k) {
      const double p = pr.p_lk[l * pr.nk + k];
      if (lay.p_l[l] > 0) lay.k_given_l[l * pr.nk + k] = p / lay.p_l[l];
      if (lay.p_k[k] > 0) lay.l_given_k[k * pr.nl + l] = p / lay.p_k[k];
    }
  return lay;
}

// q(v|k) stored k-major (nk x nsets)
void induced_q(const Layout& lay, const std::vector<double>& ch, std::vector<double>& q) {
  const auto& pr = *lay.pr;
  std::fill(q.begin(), q.end(), 0.0);
  for (std::size_t k = 0; k < pr.nk; ++k) {
    double* qk = q.data() + k * pr.nsets;
    for (std::size_t l = 0; l < pr.nl; ++l) {
      const double w = lay.l_given_k[k * pr.nl + l];
      if (w == 0.0) continue;
      const double* row = ch.data() + l * pr.nsets;
      for (std::size_t v = 0; v < pr.nsets; ++v) qk[v] += w * row[v];
    }
  }
}

double objective(const Layout& lay, const std::vector<double>& ch, const std::vector<double>& q) {
  const auto& pr = *lay.pr;
  // I(V;L|K) = H(V|K) - H(V|L) under V - L - K
  double hvk = 0.0, hvl = 0.0;
  for (std::size_t k = 0; k < pr.nk; ++k)
    if (lay.p_k[k] > 0) hvk += lay.p_k[k] * kernels::entropy_bits({q.data() + k * pr.nsets, pr.nsets});
  for (std::size_t l = 0; l < pr.nl; ++l)
    if (lay.p_l[l] > 0) hvl += lay.p_l[l] * kernels::entropy_bits({ch.data() + l * pr.nsets, pr.nsets});
  const double v = hvk - hvl;
  return v < 0.0 ? 0.0 : v;
}

struct RunResult {
  double value;
  std::vector<double> channel;
  std::size_t iterations;
  double step;
  bool converged;
};

// One alternating-minimization run from `ch` over the support in `mask`.
RunResult run(const Layout& lay, std::vector<double> ch, const std::vector<char>& mask, const SolverConfig& cfg) {
  const auto& pr = *lay.pr;
  std::vector<double> q(pr.nk * pr.nsets), lq(pr.nk * pr.nsets), lq_t(pr.nsets * pr.nk), expo(pr.nsets);
  induced_q(lay, ch, q);
  double prev = objective(lay, ch, q);
  double step = 0.0;
  std::size_t it = 0;
  bool converged = false;
  while (it < cfg.max_iter) {
    ++it;
    kernels::log2_array(q, lq);
    for (std::size_t k = 0; k < pr.nk; ++k)
      for (std::size_t v = 0; v < pr.nsets; ++v) {
        const double x = lq[k * pr.nsets + v];
        lq_t[v * pr.nk + k] = std::isinf(x) ? kLogFloor : x;
      }
    for (std::size_t l = 0; l < pr.nl; ++l) {
      double* row = ch.data() + l * pr.nsets;
      if (lay.p_l[l] == 0.0) continue;
      const std::span<const double> pk{lay.k_given_l.data() + l * pr.nk, pr.nk};
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < pr.nsets; ++v) {
        if (!mask[l * pr.nsets + v]) {
          expo[v] = -std::numeric_limits<double>::infinity();
          continue;
        }
        expo[v] = kernels::dot(pk, {lq_t.data() + v * pr.nk, pr.nk});
        best = std::max(best, expo[v]);
      }
      double s = 0.0;
      for (std::size_t v = 0; v < pr.nsets; ++v) {
        row[v] = mask[l * pr.nsets + v] ? std::exp2(expo[v] - best) : 0.0;
        s += row[v];
      }
      for (std::size_t v = 0; v < pr.nsets; ++v) row[v] /= s;
    }
    induced_q(lay, ch, q);
    const double cur = objective(lay, ch, q);
    step = prev - cur;
    prev = cur;
    if (std::abs(step) < cfg.tol) {
      converged = true;
      break;
    }
  }
  return {prev, std::move(ch), it, step, converged};
}

std::vector<double> start_point(const SetMiProblem& pr, std::size_t restart, const SolverConfig& cfg) {
  std::vector<double> ch(pr.nl * pr.nsets, 0.0);
  std::mt19937_64 rng(derive_seed(cfg.seed, 0x6e74, restart));
  std::gamma_distribution<double> gam(1.0, 1.0);
  for (std::size_t l = 0; l < pr.nl; ++l) {
    double s = 0.0;
    for (std::size_t v = 0; v < pr.nsets; ++v) {
      if (!pr.allowed[l * pr.nsets + v]) continue;
      ch[l * pr.nsets + v] = restart == 0 ? 1.0 : gam(rng) + 1e-3;
      s += ch[l * pr.nsets + v];
    }
    if (s == 0.0) throw ValidationError("symbol " + std::to_string(l) + " belongs to no allowed set");
    for (std::size_t v = 0; v < pr.nsets; ++v) ch[l * pr.nsets + v] /= s;
  }
  return ch;
}

// Zero tiny entries and re-converge on the reduced support; keep if no worse.
RunResult polish(const Layout& lay, RunResult r, const SolverConfig& cfg) {
  const auto& pr = *lay.pr;
  std::vector<char> mask(pr.allowed.size(), 0);
  bool changed = false;
  std::vector<double> ch = r.channel;
  for (std::size_t l = 0; l < pr.nl; ++l) {
    double s = 0.0;
    for (std::size_t v = 0; v < pr.nsets; ++v) {
      double& c = ch[l * pr.nsets + v];
      if (c > cfg.polish_threshold || lay.p_l[l] == 0.0) {
        mask[l * pr.nsets + v] = pr.allowed[l * pr.nsets + v];
      } else if (c != 0.0) {
        c = 0.0;
        changed = true;
      }
      s += c;
    }
    for (std::size_t v = 0; v < pr.nsets; ++v) ch[l * pr.nsets + v] /= s;
  }
  if (!changed) return r;
  RunResult p = run(lay, std::move(ch), mask, cfg);
  p.iterations += r.iterations;
  if (p.value <= r.value + 1e-12) return p;
  return r;
}

bool better(const RunResult& a, const RunResult& b) {
  if (a.value < b.value - 1e-12) return true;
  if (a.value > b.value + 1e-12) return false;
  return a.channel < b.channel;
}

}  // namespace

double set_mi_value(const SetMiProblem& pr, const std::vector<double>& channel) {
  const Layout lay = make_layout(pr);
  std::vector<double> q(pr.nk * pr.nsets);
  induced_q(lay, channel, q);
  return objective(lay, channel, q);
}

SetMiResult minimize_set_mi(const SetMiProblem& pr, const SolverConfig& cfg) {
  if (pr.p_lk.size() != pr.nl * pr.nk || pr.allowed.size() != pr.nl * pr.nsets)
    throw ValidationError("set-MI problem has inconsistent dimensions");
  const Layout lay = make_layout(pr);
  // a symbol with a single allowed set has no freedom; if every symbol is so,
  // one pass suffices
  const std::size_t restarts = std::max<std::size_t>(1, cfg.restarts);
  std::vector<RunResult> runs(restarts);
  parallel_for(restarts, cfg.jobs, [&](std::size_t i) {
    runs[i] = polish(lay, run(lay, start_point(pr, i, cfg), pr.allowed, cfg), cfg);
  });
  SetMiResult out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out.trace.iterations += runs[i].iterations;
    out.trace.converged = out.trace.converged && runs[i].converged;
    if (i > 0 && better(runs[i], runs[best])) best = i;
  }
  out.trace.restarts = restarts;
  out.trace.final_step = runs[best].step;
  out.value = runs[best].value;
  out.channel = std::move(runs[best].channel);
  return out;
}

GraphEntropyResult graph_entropy_over_sets(const JointPmf& joint, const CharGraph& graph,
                                           const std::vector<std::vector<std::size_t>>& vertex_sets,
                                           const SolverConfig& cfg) {
  AxisGroup axes = graph.l_axes;
  axes.insert(axes.end(), graph.k_axes.begin(), graph.k_axes.end());
  // shared L/K axes appear once in the marginal; recover both indices per cell
  AxisGroup uniq;
  for (const auto& a : axes)
    if (std::find(uniq.begin(), uniq.end(), a) == uniq.end()) uniq.push_back(a);
  const JointPmf m = joint.marginal(uniq);

  std::size_t nk_full = 1;
  for (const auto& a : graph.k_axes) nk_full *= m.alphabet(a).size();
  std::vector<double> pk_full(nk_full, 0.0);
  std::vector<std::size_t> idx(m.rank());
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    m.unravel(c, idx);
    pk_full[composite_index(m, graph.k_axes, idx)] += m[c];
  }
  // drop zero-probability K symbols
  std::vector<std::size_t> kmap(nk_full, SIZE_MAX);
  std::size_t nk = 0;
  for (std::size_t k = 0; k < nk_full; ++k)
    if (positive(pk_full[k])) kmap[k] = nk++;

  SetMiProblem pr;
  pr.nl = graph.size();
  pr.nk = nk;
  pr.nsets = vertex_sets.size();
  pr.p_lk.assign(pr.nl * pr.nk, 0.0);
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    if (!positive(m[c])) continue;
    m.unravel(c, idx);
    const auto v = graph.vertex_of(composite_index(m, graph.l_axes, idx));
    const std::size_t k = kmap[composite_index(m, graph.k_axes, idx)];
    if (!v || k == SIZE_MAX) continue;
    pr.p_lk[*v * pr.nk + k] += m[c];
  }
  pr.allowed.assign(pr.nl * pr.nsets, 0);
  for (std::size_t s = 0; s < vertex_sets.size(); ++s)
    for (auto v : vertex_sets[s]) pr.allowed[v * pr.nsets + s] = 1;

  GraphEntropyResult res;
  res.graph = graph;
  const SetMiResult sol = minimize_set_mi(pr, cfg);
  res.value = sol.value;
  res.trace = sol.trace;

  // channel over the full L alphabet; rows of non-vertices go to set 0
  std::vector<Alphabet> from;
  std::size_t nl_full = 1;
  for (const auto& a : graph.l_axes) {
    from.push_back(m.alphabet(a));
    nl_full *= m.alphabet(a).size();
  }
  std::vector<std::string> labels;
  for (const auto& s : vertex_sets) {
    std::string lab = "{";
    std::vector<std::size_t> ls;
    for (std::size_t i = 0; i < s.size(); ++i) {
      lab += (i ? " " : "") + graph.label(s[i]);
      ls.push_back(graph.l_index(s[i]));
    }
    labels.push_back(lab + "}");
    res.sets.push_back(ls);
  }
  std::vector<double> table(nl_full * pr.nsets, 0.0);
  for (std::size_t l = 0; l < nl_full; ++l) {
    if (auto v = graph.vertex_of(l)) {
      for (std::size_t s = 0; s < pr.nsets; ++s) table[l * pr.nsets + s] = sol.channel[*v * pr.nsets + s];
    } else {
      table[l * pr.nsets] = 1.0;
    }
  }
  res.witness = Channel(std::move(from), Alphabet("V", std::move(labels)), std::move(table));
  return res;
}

GraphEntropyResult conditional_graph_entropy(const JointPmf& joint, const FunctionSpec& f, const AxisGroup& l_axes,
                                             const AxisGroup& k_axes, const SolverConfig& cfg,
                                             const AxisGroup& s_axes) {
  const CharGraph g = build_conditional_char_graph(joint, f, l_axes, k_axes, s_axes);
  const auto fam = enumerate_maximal_independent_sets(g, cfg.set_cap);
  return graph_entropy_over_sets(joint, g, fam.sets, cfg);
}

}  // namespace coopcomp
