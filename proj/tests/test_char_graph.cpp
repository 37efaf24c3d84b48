#include <doctest.h>

#include "coopcomp/char_graph.hpp"
#include "support.hpp"

#include <algorithm>
#include <random>
#include <set>

using namespace coopcomp;

namespace {

FunctionSpec table_fn(const Alphabet& x, const Alphabet& y, const std::vector<std::size_t>& t, std::size_t k) {
  return FunctionSpec(x, y, Alphabet::range("F", k), t);
}

// Literal edge rule over full cells: l1 ~ l2 iff two positive cells share k,
// differ in l and disagree on f.
std::set<std::pair<std::size_t, std::size_t>> brute_edges(const JointPmf& j, const FunctionSpec& f,
                                                          const AxisGroup& l, const AxisGroup& k, bool& violated) {
  std::set<std::pair<std::size_t, std::size_t>> e;
  violated = false;
  std::vector<std::size_t> a(j.rank()), b(j.rank());
  const std::size_t sx = j.axis("X"), sy = j.axis("Y");
  for (std::size_t c1 = 0; c1 < j.cell_count(); ++c1) {
    if (!positive(j[c1])) continue;
    j.unravel(c1, a);
    for (std::size_t c2 = 0; c2 < j.cell_count(); ++c2) {
      if (!positive(j[c2])) continue;
      j.unravel(c2, b);
      if (composite_index(j, k, a) != composite_index(j, k, b)) continue;
      if (f(a[sx], a[sy]) == f(b[sx], b[sy])) continue;
      const auto l1 = composite_index(j, l, a), l2 = composite_index(j, l, b);
      if (l1 == l2) violated = true;
      else e.insert({std::min(l1, l2), std::max(l1, l2)});
    }
  }
  return e;
}

std::set<std::pair<std::size_t, std::size_t>> graph_edges(const CharGraph& g) {
  std::set<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t b = a + 1; b < g.size(); ++b)
      if (g.adjacent(a, b)) e.insert({g.l_index(a), g.l_index(b)});
  return e;
}

}  // namespace

TEST_CASE("constant f gives an edgeless graph, identity in x a complete one") {
  std::mt19937_64 rng(1);
  const auto base = make_pxy(Alphabet::range("X", 4), Alphabet::range("Y", 3), testsupport::random_simplex(rng, 12));
  const auto c = table_fn(base.alphabet("X"), base.alphabet("Y"), std::vector<std::size_t>(12, 0), 1);
  const auto g0 = build_conditional_char_graph(base, c, {"X"}, {"Y"});
  CHECK(g0.size() == 4);
  CHECK(g0.edge_count() == 0);
  const auto fam0 = enumerate_maximal_independent_sets(g0);
  REQUIRE(fam0.sets.size() == 1);
  CHECK(fam0.sets[0].size() == 4);

  std::vector<std::size_t> t(12);
  for (std::size_t i = 0; i < 12; ++i) t[i] = i / 3;
  const auto g1 = build_conditional_char_graph(base, table_fn(base.alphabet("X"), base.alphabet("Y"), t, 4), {"X"}, {"Y"});
  CHECK(g1.edge_count() == 6);
  CHECK(enumerate_maximal_independent_sets(g1).sets.size() == 4);
}

TEST_CASE("zero-probability symbols are not vertices") {
  const auto base = make_pxy(Alphabet::range("X", 3), Alphabet::range("Y", 2), {0.5, 0.0, 0.0, 0.0, 0.25, 0.25});
  std::vector<std::size_t> t{0, 1, 2, 3, 4, 5};
  const auto g = build_conditional_char_graph(base, table_fn(base.alphabet("X"), base.alphabet("Y"), t, 6), {"X"}, {"Y"});
  CHECK(g.size() == 2);
  CHECK_FALSE(g.vertex_of(1).has_value());
}

TEST_CASE("hypothesis violation carries a witness") {
  const auto base = make_pxy(Alphabet::range("X", 2), Alphabet::range("Y", 2), {0.25, 0.25, 0.25, 0.25});
  const auto f = table_fn(base.alphabet("X"), base.alphabet("Y"), {0, 1, 0, 1}, 2);  // f = y
  try {
    (void)build_conditional_char_graph(base, f, {"X"}, {});
    FAIL("expected a violation");
  } catch (const HypothesisViolation& e) {
    CHECK(std::string(e.what()).find("not determined") != std::string::npos);
    CHECK(e.s_index1 != e.s_index2);
  }
}

TEST_CASE("5-cycle has five maximal independent sets of size two") {
  const auto g = CharGraph::from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
  const auto fam = enumerate_maximal_independent_sets(g);
  // brute-force oracle over all 2^5 subsets
  std::vector<std::vector<std::size_t>> brute;
  for (unsigned m = 0; m < 32; ++m) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < 5; ++i)
      if (m >> i & 1) s.push_back(i);
    if (!g.independent(s)) continue;
    bool maximal = true;
    for (std::size_t v = 0; v < 5 && maximal; ++v) {
      if (m >> v & 1) continue;
      auto t = s;
      t.push_back(v);
      if (g.independent(t)) maximal = false;
    }
    if (maximal) brute.push_back(s);
  }
  std::sort(brute.begin(), brute.end());
  CHECK(fam.sets == brute);
  CHECK(fam.sets.size() == 5);
  for (const auto& s : fam.sets) CHECK(s.size() == 2);
}

TEST_CASE("enumeration cap is enforced") {
  // disjoint edges: 2^k maximal independent sets
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < 10; ++i) e.emplace_back(2 * i, 2 * i + 1);
  const auto g = CharGraph::from_edges(20, e);
  CHECK(enumerate_maximal_independent_sets(g).sets.size() == 1024);
  CHECK_THROWS_AS(enumerate_maximal_independent_sets(g, 100), SearchBudgetError);
}

TEST_CASE("random graphs: enumeration matches brute force and is lexicographic") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 9;
    std::vector<std::pair<std::size_t, std::size_t>> e;
    std::bernoulli_distribution coin(0.4);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (coin(rng)) e.emplace_back(a, b);
    const auto g = CharGraph::from_edges(n, e);
    std::vector<std::vector<std::size_t>> brute;
    for (unsigned m = 0; m < (1u << n); ++m) {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < n; ++i)
        if (m >> i & 1) s.push_back(i);
      if (!g.independent(s)) continue;
      bool maximal = true;
      for (std::size_t v = 0; v < n && maximal; ++v) {
        if (m >> v & 1) continue;
        auto t = s;
        t.push_back(v);
        std::sort(t.begin(), t.end());
        if (g.independent(t)) maximal = false;
      }
      if (maximal) brute.push_back(s);
    }
    std::sort(brute.begin(), brute.end());
    CHECK(enumerate_maximal_independent_sets(g).sets == brute);
  }
}

TEST_CASE("edge rule equals the literal definition on every 2x2x2 instance") {
  // joint over (X,Y,Z) binary: every support pattern, every binary f on (X,Y),
  // several (L|K) choices, including L sharing an axis with S
  const auto bx = Alphabet::range("X", 2), by = Alphabet::range("Y", 2), bz = Alphabet::range("Z", 2);
  const std::vector<std::pair<AxisGroup, AxisGroup>> roles{
      {{"X"}, {"Y"}}, {{"X"}, {"Y", "Z"}}, {{"X", "Z"}, {"Y"}}, {{"Z"}, {"X"}}, {{"Y", "Z"}, {"X", "Z"}}, {{"X"}, {}}};
  std::size_t checked = 0, violations = 0;
  for (unsigned supp = 1; supp < 256; ++supp) {
    std::vector<double> t(8);
    const double w = 1.0 / std::popcount(supp);
    for (std::size_t c = 0; c < 8; ++c) t[c] = (supp >> c & 1) ? w : 0.0;
    const JointPmf j({bx, by, bz}, t);
    for (unsigned ft = 0; ft < 16; ++ft) {
      const auto f = table_fn(bx, by, {ft & 1, ft >> 1 & 1, ft >> 2 & 1, ft >> 3 & 1}, 2);
      for (const auto& [l, k] : roles) {
        bool violated = false;
        const auto expect = brute_edges(j, f, l, k, violated);
        if (violated) {
          CHECK_THROWS_AS(build_conditional_char_graph(j, f, l, k), HypothesisViolation);
          ++violations;
        } else {
          const auto g = build_conditional_char_graph(j, f, l, k);
          CHECK(graph_edges(g) == expect);
        }
        ++checked;
      }
    }
  }
  CHECK(checked == 255 * 16 * 6);
  CHECK(violations > 0);
}

TEST_CASE("edge monotonicity when the support grows") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    const auto x = Alphabet::range("X", 3), y = Alphabet::range("Y", 3);
    auto t = testsupport::random_simplex(rng, 9, 0.5);
    auto grown = t;
    grown[rng() % 9] += 0.3;
    for (auto& v : grown) v /= 1.3;
    std::vector<std::size_t> ft(9);
    for (auto& v : ft) v = rng() % 3;
    const auto f = table_fn(x, y, ft, 3);
    const auto g1 = build_conditional_char_graph(make_pxy(x, y, t), f, {"X"}, {"Y"});
    const auto g2 = build_conditional_char_graph(make_pxy(x, y, grown), f, {"X"}, {"Y"});
    const auto e1 = graph_edges(g1), e2 = graph_edges(g2);
    CHECK(std::includes(e2.begin(), e2.end(), e1.begin(), e1.end()));
  }
}

TEST_CASE("G_{X|Y} is edgeless iff f depends on y only (full support, up to 4x4)") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nx = 1 + rng() % 4, ny = 1 + rng() % 4;
    const auto x = Alphabet::range("X", nx), y = Alphabet::range("Y", ny);
    std::vector<std::size_t> ft(nx * ny);
    const bool y_only = trial % 2 == 0;
    std::vector<std::size_t> by_y(ny);
    for (auto& v : by_y) v = rng() % 3;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) ft[i * ny + j] = y_only ? by_y[j] : rng() % 3;
    bool depends_on_y_only = true;
    for (std::size_t i = 1; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) depends_on_y_only &= ft[i * ny + j] == ft[j];
    const auto g = build_conditional_char_graph(make_pxy(x, y, testsupport::random_simplex(rng, nx * ny)),
                                                table_fn(x, y, ft, 3), {"X"}, {"Y"});
    CHECK((g.edge_count() == 0) == depends_on_y_only);
  }
}

TEST_CASE("Example 1 graph: same-u vertices adjacent iff they differ on A_u") {
  // a = 2, b = 1: Y = (Y1, Y2) bits, f(x, y) = y_x, U pairs nothing (two symbols)
  const std::size_t a = 2;
  const auto x = Alphabet::range("X", a), y = Alphabet::range("Y", 4);
  std::vector<double> pxy(8, 1.0 / 8);
  const auto base = make_pxy(x, y, pxy);
  std::vector<std::size_t> ft(8);
  for (std::size_t xi = 0; xi < 2; ++xi)
    for (std::size_t yi = 0; yi < 4; ++yi) ft[xi * 4 + yi] = (yi >> xi) & 1;
  const auto f = table_fn(x, y, ft, 2);
  // u0 sees only x = 0, u1 sees x in {0,1}
  const Channel u({base.alphabet("X")}, Alphabet::range("U", 2), {0.5, 0.5, 0.0, 1.0});
  const auto j = extend(base, u);
  const auto g = build_conditional_char_graph(j, f, {"U", "Y"}, {"X", "U"});
  CHECK(g.size() == 8);
  const std::vector<std::vector<std::size_t>> A{{0}, {0, 1}};
  for (std::size_t v1 = 0; v1 < g.size(); ++v1) {
    for (std::size_t v2 = v1 + 1; v2 < g.size(); ++v2) {
      const std::size_t u1 = g.l_index(v1) / 4, y1 = g.l_index(v1) % 4;
      const std::size_t u2 = g.l_index(v2) / 4, y2 = g.l_index(v2) % 4;
      bool expect = false;
      if (u1 == u2)
        for (auto xi : A[u1]) expect |= ((y1 >> xi) & 1) != ((y2 >> xi) & 1);
      CHECK(g.adjacent(v1, v2) == expect);
    }
  }
}

TEST_CASE("membership condition") {
  const auto base = make_pxy(Alphabet::range("X", 2), Alphabet::range("Y", 2), {0.25, 0.25, 0.25, 0.25});
  const auto c = table_fn(base.alphabet("X"), base.alphabet("Y"), {0, 0, 0, 0}, 1);
  const auto g0 = build_conditional_char_graph(base, c, {"X"}, {"Y"});
  const auto all = extend(base, Channel::constant({base.alphabet("X")}, "V"));
  CHECK(verify_membership_condition(all, "V", {{0, 1}}, g0).ok);

  // singletons with leakage: p(v={0}, x=1) > 0
  const Channel leaky({base.alphabet("X")}, Alphabet::range("V", 2), {0.9, 0.1, 0.0, 1.0});
  const auto r = verify_membership_condition(extend(base, leaky), "V", {{0}, {1}}, g0);
  CHECK_FALSE(r.ok);
  CHECK(r.witness.find("not in the set") != std::string::npos);

  const auto fx = table_fn(base.alphabet("X"), base.alphabet("Y"), {0, 0, 1, 1}, 2);
  const auto g1 = build_conditional_char_graph(base, fx, {"X"}, {"Y"});
  const auto r2 = verify_membership_condition(all, "V", {{0, 1}}, g1);
  CHECK_FALSE(r2.ok);
  CHECK(r2.witness.find("adjacent") != std::string::npos);
}

TEST_CASE("singletons always pass the independence half") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t a = 0; a < 6; ++a)
      for (std::size_t b = a + 1; b < 6; ++b)
        if (rng() % 2) e.emplace_back(a, b);
    const auto g = CharGraph::from_edges(6, e);
    for (std::size_t v = 0; v < 6; ++v) CHECK(g.independent({v}));
  }
}

TEST_CASE("appendix W sets are independent and cover their support") {
  const Alphabet s("S", {"-1", "0", "+1"});
  std::vector<double> t(9, 1.0 / 7.0);
  t[2] = t[6] = 0.0;
  const auto base = make_pxy(s, s, t);
  const Channel u({base.alphabet("X")}, Alphabet("U", {"u-", "u+"}), {1, 0, 0.5, 0.5, 0, 1});
  // W from (U,Y): w- on (u-,-1),(u-,0),(u+,-1); w+ on the rest
  const std::vector<std::size_t> wmap{0, 0, 1, 0, 1, 1};
  const auto j1 = extend(base, u);
  const auto w = Channel::deterministic({j1.alphabet("U"), j1.alphabet("Y")}, Alphabet("W", {"w-", "w+"}), wmap);
  const auto j = extend(j1, w);
  // l index over (U,Y) = u*3 + y
  const std::vector<std::vector<std::size_t>> sets{{0, 1, 3}, {5, 4, 2}};
  const auto fx = FunctionSpec::from_labels(s, s, "F", [&](std::size_t xi, std::size_t) { return s.symbols[xi]; });
  const auto g = build_conditional_char_graph(j, fx, {"U", "Y"}, {"X", "U"});
  // literal edge rule, independent of the builder
  bool violated = false;
  const auto expect = brute_edges(j.marginal({"X", "Y", "U"}), fx, {"U", "Y"}, {"X", "U"}, violated);
  CHECK_FALSE(violated);
  CHECK(graph_edges(g) == expect);
  CHECK(verify_membership_condition(j, "W", sets, g).ok);
  const auto sst = support_set_transform(j, "W", {"U", "Y"});
  CHECK(sst.sets[0] == std::vector<std::size_t>{0, 1, 3});
  CHECK(sst.sets[1] == std::vector<std::size_t>{2, 4, 5});
}

TEST_CASE("support set transform") {
  const auto base = make_pxy(Alphabet::range("X", 3), Alphabet::range("Y", 2), std::vector<double>(6, 1.0 / 6));
  // deterministic V = g(X) with g = (0, 0, 1)
  const auto vd = Channel::deterministic({base.alphabet("X")}, Alphabet::range("V", 2), std::vector<std::size_t>{0, 0, 1});
  const auto s1 = support_set_transform(extend(base, vd), "V", {"X"});
  CHECK(s1.sets[0] == std::vector<std::size_t>{0, 1});
  CHECK(s1.sets[1] == std::vector<std::size_t>{2});
  // V independent of X
  const Channel vi({base.alphabet("X")}, Alphabet::range("V", 2), {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  const auto s2 = support_set_transform(extend(base, vi), "V", {"X"});
  CHECK(s2.sets[0] == std::vector<std::size_t>{0, 1, 2});
  CHECK(s2.sets[1] == std::vector<std::size_t>{0, 1, 2});
  // idempotent up to relabeling
  const auto j2 = extend(extend(base, vd), s1.relabel);
  const auto again = support_set_transform(j2, "S", {"X"});
  CHECK(again.sets == s1.sets);
}

TEST_CASE("support sets of a valid converse W are independent in G_{U,Y|X,U}") {
  // X, Y bits, f = AND, U = X; W reveals y only when x = 1
  const auto base = make_pxy(Alphabet::range("X", 2), Alphabet::range("Y", 2), {0.3, 0.2, 0.1, 0.4});
  const auto f = table_fn(base.alphabet("X"), base.alphabet("Y"), {0, 0, 0, 1}, 2);
  const auto j1 = extend(base, Channel::identity(base.alphabet("X"), "U"));
  // rows (u,y): (0,0) (0,1) (1,0) (1,1); W in {a,b,c}
  const Channel w({j1.alphabet("U"), j1.alphabet("Y")}, Alphabet("W", {"a", "b", "c"}),
                  {1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1, 0, 0, 0, 0.5, 0.5});
  const auto j = extend(j1, w);
  CHECK(cond_entropy(extend(j, Channel::deterministic({j.alphabet("X"), j.alphabet("Y")}, Alphabet::range("F", 2),
                                                       std::vector<std::size_t>{0, 0, 0, 1})),
                     {"F"}, {"X", "U", "W"}) < 1e-12);
  const auto g = build_conditional_char_graph(j, f, {"U", "Y"}, {"X", "U"});
  const auto sst = support_set_transform(j, "W", {"U", "Y"});
  CHECK(verify_membership_condition(j, "W", sst.sets, g).ok);
  for (const auto& s : sst.sets) {
    std::vector<std::size_t> verts;
    for (auto l : s) verts.push_back(*g.vertex_of(l));
    CHECK(g.independent(verts));
  }
}

TEST_CASE("adjacency text export") {
  const auto g = CharGraph::from_edges(3, {{0, 2}});
  CHECK(g.adjacency_text() == "0: 2\n1:\n2: 0\n");
}
