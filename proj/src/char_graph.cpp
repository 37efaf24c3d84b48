#include "coopcomp/char_graph.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>

namespace coopcomp {
namespace {

AxisGroup union_axes(std::initializer_list<const AxisGroup*> groups) {
  AxisGroup out;
  for (const auto* g : groups) {
    for (const auto& n : *g) {
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
  }
  return out;
}

std::string composite_label(const JointPmf& joint, const AxisGroup& axes, std::size_t flat) {
  std::vector<std::string> parts(axes.size());
  for (std::size_t i = axes.size(); i-- > 0;) {
    const auto& a = joint.alphabet(axes[i]);
    parts[i] = a.symbols[flat % a.size()];
    flat /= a.size();
  }
  if (parts.size() == 1) return parts[0];
  std::string s = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
  return s + ")";
}

// Word-packed vertex set for the enumeration.
struct Bits {
  std::vector<std::uint64_t> w;
  explicit Bits(std::size_t n = 0) : w((n + 63) / 64, 0) {}
  void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { w[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool any() const {
    return std::any_of(w.begin(), w.end(), [](std::uint64_t v) { return v != 0; });
  }
  Bits operator&(const Bits& o) const {
    Bits r = *this;
    for (std::size_t i = 0; i < w.size(); ++i) r.w[i] &= o.w[i];
    return r;
  }
  std::size_t count_and(const Bits& o) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < w.size(); ++i) c += static_cast<std::size_t>(std::popcount(w[i] & o.w[i]));
    return c;
  }
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::uint64_t v = w[i];
      while (v) {
        f(i * 64 + static_cast<std::size_t>(std::countr_zero(v)));
        v &= v - 1;
      }
    }
  }
};

struct Enumerator {
  std::vector<Bits> nonadj;  // complement neighbourhoods
  std::size_t cap;
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> r;

  void run(Bits p, Bits x) {
    if (!p.any() && !x.any()) {
      if (out.size() >= cap) {
        throw SearchBudgetError("too many independent sets: more than " + std::to_string(cap) +
                                " maximal sets (stopped at " + std::to_string(out.size()) + ")");
      }
      auto s = r;
      std::sort(s.begin(), s.end());
      out.push_back(std::move(s));
      return;
    }
    // pivot maximizing |P intersect N(u)| in the complement graph
    std::size_t pivot = 0, best = 0;
    bool have = false;
    auto consider = [&](std::size_t u) {
      const std::size_t c = p.count_and(nonadj[u]);
      if (!have || c > best) {
        pivot = u;
        best = c;
        have = true;
      }
    };
    p.for_each(consider);
    x.for_each(consider);
    Bits cand = p;
    for (std::size_t i = 0; i < cand.w.size(); ++i) cand.w[i] &= ~nonadj[pivot].w[i];
    cand.for_each([&](std::size_t v) {
      r.push_back(v);
      run(p & nonadj[v], x & nonadj[v]);
      r.pop_back();
      p.reset(v);
      x.set(v);
    });
  }
};

}  // namespace

std::optional<std::size_t> CharGraph::vertex_of(std::size_t l) const noexcept {
  auto it = std::lower_bound(l_of_vertex_.begin(), l_of_vertex_.end(), l);
  if (it == l_of_vertex_.end() || *it != l) return std::nullopt;
  return static_cast<std::size_t>(it - l_of_vertex_.begin());
}

std::size_t CharGraph::edge_count() const noexcept {
  std::size_t c = 0;
  for (std::size_t a = 0; a < size(); ++a)
    for (std::size_t b = a + 1; b < size(); ++b) c += adjacent(a, b);
  return c;
}

void CharGraph::connect(std::size_t a, std::size_t b) {
  adj_[a * size() + b] = 1;
  adj_[b * size() + a] = 1;
}

bool CharGraph::independent(const std::vector<std::size_t>& vs) const noexcept {
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j)
      if (adjacent(vs[i], vs[j])) return false;
  return true;
}

std::string CharGraph::adjacency_text() const {
  std::ostringstream os;
  for (std::size_t a = 0; a < size(); ++a) {
    os << labels_[a] << ":";
    for (std::size_t b = 0; b < size(); ++b)
      if (adjacent(a, b)) os << ' ' << labels_[b];
    os << '\n';
  }
  return os.str();
}

CharGraph CharGraph::from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  CharGraph g;
  g.l_axes = {"L"};
  g.l_dims_ = {n};
  g.l_of_vertex_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.l_of_vertex_[i] = i;
    g.labels_.push_back(std::to_string(i));
  }
  g.adj_.assign(n * n, 0);
  for (auto [a, b] : edges) {
    if (a >= n || b >= n || a == b) throw ValidationError("bad edge");
    g.connect(a, b);
  }
  return g;
}

std::size_t composite_index(const JointPmf& joint, const AxisGroup& axes, const std::vector<std::size_t>& idx) {
  std::size_t f = 0;
  for (const auto& n : axes) {
    const std::size_t a = joint.axis(n);
    f = f * joint.dim(a) + idx[a];
  }
  return f;
}

Alphabet composite_alphabet(const JointPmf& joint, const AxisGroup& axes, std::string name) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= joint.alphabet(a).size();
  std::vector<std::string> syms;
  syms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) syms.push_back(composite_label(joint, axes, i));
  return Alphabet(std::move(name), std::move(syms));
}

CharGraph build_conditional_char_graph(const JointPmf& joint, const FunctionSpec& f, const AxisGroup& l_axes,
                                       const AxisGroup& k_axes, const AxisGroup& s_axes) {
  if (l_axes.empty()) throw ValidationError("graph needs at least one L axis");
  if (s_axes.size() != 2) throw ValidationError("f takes exactly two arguments");
  const AxisGroup all = union_axes({&l_axes, &k_axes, &s_axes});
  const JointPmf m = joint.marginal(all);
  if (m.alphabet(s_axes[0]).size() != f.x.size() || m.alphabet(s_axes[1]).size() != f.y.size())
    throw ValidationError("f's domain does not match the S axes");

  CharGraph g;
  g.l_axes = l_axes;
  g.k_axes = k_axes;
  g.s_axes = s_axes;
  g.f_name = f.codomain.name;
  for (const auto& n : l_axes) g.l_dims_.push_back(m.alphabet(n).size());

  const std::size_t sx = m.axis(s_axes[0]), sy = m.axis(s_axes[1]);
  // (k, l) -> (f value, witness cell)
  std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> seen;
  std::set<std::size_t> support;
  std::vector<std::size_t> idx(m.rank());
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    if (!positive(m[c])) continue;
    m.unravel(c, idx);
    const std::size_t l = composite_index(m, l_axes, idx);
    const std::size_t k = composite_index(m, k_axes, idx);
    const std::size_t fv = f(idx[sx], idx[sy]);
    support.insert(l);
    auto [it, fresh] = seen.emplace(std::make_pair(k, l), std::make_pair(fv, c));
    if (!fresh && it->second.first != fv) {
      std::ostringstream os;
      os << "f(" << s_axes[0] << "," << s_axes[1] << ") is not determined by (L,K): l="
         << composite_label(m, l_axes, l) << " k=" << (k_axes.empty() ? "-" : composite_label(m, k_axes, k))
         << " admits f=" << f.codomain.symbols[it->second.first] << " and f=" << f.codomain.symbols[fv];
      throw HypothesisViolation(os.str(), l, k, it->second.second, c);
    }
  }
  g.l_of_vertex_.assign(support.begin(), support.end());
  for (auto l : g.l_of_vertex_) g.labels_.push_back(composite_label(m, l_axes, l));
  g.adj_.assign(g.size() * g.size(), 0);

  // group by k and connect vertices whose f values differ
  auto it = seen.begin();
  while (it != seen.end()) {
    const std::size_t k = it->first.first;
    std::vector<std::pair<std::size_t, std::size_t>> members;  // (vertex, f)
    for (; it != seen.end() && it->first.first == k; ++it)
      members.emplace_back(*g.vertex_of(it->first.second), it->second.first);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j)
        if (members[i].second != members[j].second) g.connect(members[i].first, members[j].first);
  }
  return g;
}

IndependentSetFamily enumerate_maximal_independent_sets(const CharGraph& graph, std::size_t cap) {
  if (cap == 0) throw ValidationError("independent-set cap must be positive");
  const std::size_t n = graph.size();
  IndependentSetFamily fam;
  if (n == 0) {
    fam.sets.push_back({});
    return fam;
  }
  Enumerator e;
  e.cap = cap;
  e.nonadj.assign(n, Bits(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (a != b && !graph.adjacent(a, b)) e.nonadj[a].set(b);
  Bits p(n), x(n);
  for (std::size_t i = 0; i < n; ++i) p.set(i);
  e.run(p, x);
  std::sort(e.out.begin(), e.out.end());
  fam.sets = std::move(e.out);
  return fam;
}

MembershipCheck verify_membership_condition(const JointPmf& joint, const std::string& v_axis,
                                            const std::vector<std::vector<std::size_t>>& v_sets,
                                            const CharGraph& graph) {
  MembershipCheck res;
  AxisGroup axes{v_axis};
  axes.insert(axes.end(), graph.l_axes.begin(), graph.l_axes.end());
  const JointPmf m = joint.marginal(axes);
  const auto& va = m.alphabet(v_axis);
  if (v_sets.size() != va.size()) {
    res.ok = false;
    res.witness = "declared " + std::to_string(v_sets.size()) + " sets for " + std::to_string(va.size()) +
                  " symbols of " + v_axis;
    return res;
  }
  const auto pv = m.marginal_table({v_axis});
  std::size_t lcount = 1;
  for (auto d : graph.l_dims()) lcount *= d;

  for (std::size_t v = 0; v < va.size(); ++v) {
    if (!positive(pv[v])) continue;
    std::vector<std::size_t> verts;
    for (auto l : v_sets[v]) {
      if (auto vx = graph.vertex_of(l)) verts.push_back(*vx);
    }
    for (std::size_t i = 0; i < verts.size() && res.ok; ++i)
      for (std::size_t j = i + 1; j < verts.size(); ++j)
        if (graph.adjacent(verts[i], verts[j])) {
          res.ok = false;
          res.witness = v_axis + "=" + va.symbols[v] + " contains adjacent vertices " + graph.label(verts[i]) +
                        " and " + graph.label(verts[j]);
          return res;
        }
    std::vector<char> member(lcount, 0);
    for (auto l : v_sets[v])
      if (l < lcount) member[l] = 1;
    for (std::size_t l = 0; l < lcount; ++l) {
      if (positive(m[v * lcount + l]) && !member[l]) {
        res.ok = false;
        std::string label = std::to_string(l);
        if (auto vx = graph.vertex_of(l)) label = graph.label(*vx);
        res.witness = "p(" + v_axis + "=" + va.symbols[v] + ", l=" + label + ") > 0 but l is not in the set";
        return res;
      }
    }
  }
  return res;
}

SupportSetVariable support_set_transform(const JointPmf& joint, const std::string& v_axis, const AxisGroup& l_axes,
                                         const std::string& out_name) {
  AxisGroup axes{v_axis};
  axes.insert(axes.end(), l_axes.begin(), l_axes.end());
  const JointPmf m = joint.marginal(axes);
  const auto& va = m.alphabet(v_axis);
  const std::size_t lcount = m.cell_count() / va.size();
  SupportSetVariable out;
  std::vector<std::string> labels;
  for (std::size_t v = 0; v < va.size(); ++v) {
    std::vector<std::size_t> s;
    for (std::size_t l = 0; l < lcount; ++l)
      if (positive(m[v * lcount + l])) s.push_back(l);
    std::string lab = std::to_string(v) + ":{";
    for (std::size_t i = 0; i < s.size(); ++i) lab += (i ? " " : "") + composite_label(m, l_axes, s[i]);
    labels.push_back(lab + "}");
    out.sets.push_back(std::move(s));
  }
  std::vector<std::size_t> ident(va.size());
  for (std::size_t i = 0; i < ident.size(); ++i) ident[i] = i;
  out.relabel = Channel::deterministic({va}, Alphabet(out_name, labels), ident);
  return out;
}

}  // namespace coopcomp
