#pragma once
// Independent brute-force references used by the unit and acceptance tests.
// Nothing here calls the library's solvers or kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

inline double h(const double* p, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] > 0) s -= p[i] * std::log2(p[i]);
  return s;
}

/// All compositions of `units` into `parts` nonnegative parts, scaled by step.
inline std::vector<std::vector<double>> simplex_grid(std::size_t parts, std::size_t units) {
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> c(parts, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == parts) {
      c[i] = left;
      std::vector<double> p(parts);
      for (std::size_t j = 0; j < parts; ++j) p[j] = static_cast<double>(c[j]) / static_cast<double>(units);
      out.push_back(p);
      return;
    }
    for (std::size_t k = 0; k <= left; ++k) {
      c[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, units);
  return out;
}

inline double binom(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

/// Number of grid points the oracle would visit.
inline double grid_size(std::size_t nl, const std::vector<std::vector<std::size_t>>& sets, std::size_t units) {
  double total = 1.0;
  for (std::size_t l = 0; l < nl; ++l) {
    std::size_t d = 0;
    for (const auto& s : sets)
      for (auto v : s) d += v == l;
    if (d == 0) return 0.0;
    total *= binom(units + d - 1, d - 1);
  }
  return total;
}

/// min I(V;L|K) over p(v|l) on a simplex grid of step 1/units, where symbol l
/// may only use the sets that contain it. p_lk is nl x nk.
inline double grid_min_cond_mi(std::size_t nl, std::size_t nk, const std::vector<double>& p_lk,
                               const std::vector<std::vector<std::size_t>>& sets, std::size_t units) {
  const std::size_t ns = sets.size();
  std::vector<std::vector<std::size_t>> owned(nl);  // set indices per symbol
  for (std::size_t s = 0; s < ns; ++s)
    for (auto l : sets[s]) owned[l].push_back(s);
  std::vector<std::vector<std::vector<double>>> grids(nl);
  std::vector<double> pl(nl, 0.0), pk(nk, 0.0);
  for (std::size_t l = 0; l < nl; ++l) {
    grids[l] = simplex_grid(owned[l].size(), units);
    for (std::size_t k = 0; k < nk; ++k) {
      pl[l] += p_lk[l * nk + k];
      pk[k] += p_lk[l * nk + k];
    }
  }
  // joint q(v,k) accumulated level by level
  std::vector<std::vector<double>> q(nl + 1, std::vector<double>(nk * ns, 0.0));
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> rec = [&](std::size_t l, double hvl) {
    if (l == nl) {
      double hvk = 0.0;
      for (std::size_t k = 0; k < nk; ++k) {
        if (pk[k] <= 0) continue;
        for (std::size_t v = 0; v < ns; ++v) {
          const double c = q[nl][k * ns + v] / pk[k];
          if (c > 0) hvk -= pk[k] * c * std::log2(c);
        }
      }
      best = std::min(best, hvk - hvl);
      return;
    }
    for (const auto& g : grids[l]) {
      q[l + 1] = q[l];
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == 0) continue;
        const std::size_t v = owned[l][i];
        for (std::size_t k = 0; k < nk; ++k) q[l + 1][k * ns + v] += p_lk[l * nk + k] * g[i];
      }
      rec(l + 1, hvl + pl[l] * h(g.data(), g.size()));
    }
  };
  rec(0, 0.0);
  return best;
}

/// All independent vertex subsets (nonempty) of a graph given by adjacency.
inline std::vector<std::vector<std::size_t>> all_independent_sets(std::size_t n,
                                                                   const std::function<bool(std::size_t, std::size_t)>& adj) {
  std::vector<std::vector<std::size_t>> out;
  for (unsigned m = 1; m < (1u << n); ++m) {
    std::vector<std::size_t> s;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(m >> i & 1)) continue;
      for (auto j : s) ok = ok && !adj(i, j);
      s.push_back(i);
    }
    if (ok) out.push_back(s);
  }
  return out;
}

/// H(G_{X|Y}) straight from the definitions, for the acceptance suite.
/// The graph and its maximal independent sets (by subset enumeration) are
/// rebuilt here, as is the objective. I(V;X|Y) = H(V|Y) - H(V|X) is convex in
/// p(v|x), so minimizing one row at a time over a simplex grid, then refining
/// each row by pairwise mass transfers of shrinking size, reaches the global
/// minimum up to the final step size.
inline double graph_entropy_by_rows(std::size_t nx, std::size_t ny, const std::vector<double>& pxy,
                                    const std::vector<std::size_t>& f) {
  std::vector<std::size_t> verts;
  for (std::size_t x = 0; x < nx; ++x) {
    double m = 0.0;
    for (std::size_t y = 0; y < ny; ++y) m += pxy[x * ny + y];
    if (m > 1e-12) verts.push_back(x);
  }
  const std::size_t n = verts.size();
  auto adj = [&](std::size_t a, std::size_t b) {
    for (std::size_t y = 0; y < ny; ++y)
      if (pxy[verts[a] * ny + y] > 1e-12 && pxy[verts[b] * ny + y] > 1e-12 &&
          f[verts[a] * ny + y] != f[verts[b] * ny + y])
        return true;
    return false;
  };
  const auto ind = all_independent_sets(n, adj);
  std::vector<std::vector<std::size_t>> maximal;
  for (const auto& s : ind) {
    bool contained = false;
    for (const auto& t : ind) {
      if (t.size() <= s.size()) continue;
      std::size_t hit = 0;
      for (auto a : s)
        for (auto b : t) hit += a == b;
      contained = contained || hit == s.size();
    }
    if (!contained) maximal.push_back(s);
  }
  const std::size_t ns = maximal.size();
  std::vector<std::vector<std::size_t>> owned(n);
  for (std::size_t s = 0; s < ns; ++s)
    for (auto v : maximal[s]) owned[v].push_back(s);

  std::vector<std::vector<double>> rows(n);
  for (std::size_t v = 0; v < n; ++v) rows[v].assign(owned[v].size(), 1.0 / static_cast<double>(owned[v].size()));
  auto objective = [&]() {
    double hvy = 0.0, hvx = 0.0;
    std::vector<double> q(ns);
    for (std::size_t y = 0; y < ny; ++y) {
      std::fill(q.begin(), q.end(), 0.0);
      double py = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        const double p = pxy[verts[v] * ny + y];
        py += p;
        for (std::size_t i = 0; i < owned[v].size(); ++i) q[owned[v][i]] += p * rows[v][i];
      }
      for (double& c : q) c = py > 0 ? c / py : 0.0;
      hvy += py * h(q.data(), ns);
    }
    for (std::size_t v = 0; v < n; ++v) {
      double px = 0.0;
      for (std::size_t y = 0; y < ny; ++y) px += pxy[verts[v] * ny + y];
      hvx += px * h(rows[v].data(), rows[v].size());
    }
    return hvy - hvx;
  };
  if (n == 0) return 0.0;
  double best = objective();
  for (int sweep = 0; sweep < 60; ++sweep) {
    const double before = best;
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t d = owned[v].size();
      if (d == 1) continue;
      std::vector<double> keep = rows[v];
      for (const auto& g : simplex_grid(d, d <= 3 ? 40 : 20)) {
        rows[v] = g;
        const double o = objective();
        if (o < best) {
          best = o;
          keep = g;
        }
      }
      rows[v] = keep;
      for (double step = 0.02; step > 1e-7; step /= 2) {
        bool moved = true;
        while (moved) {
          moved = false;
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
              if (i == j || rows[v][i] < step) continue;
              rows[v][i] -= step;
              rows[v][j] += step;
              const double o = objective();
              if (o < best - 1e-15) {
                best = o;
                moved = true;
              } else {
                rows[v][i] += step;
                rows[v][j] -= step;
              }
            }
        }
      }
    }
    if (before - best < 1e-12) break;
  }
  return best;
}

}  // namespace oracle
