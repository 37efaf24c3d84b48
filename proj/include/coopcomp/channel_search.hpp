#pragma once
// Building blocks shared by the region searches. Candidate channel pools and
// time-sharing envelopes live here next to the slice-wise independent-set solver.

#include "coopcomp/char_graph.hpp"
#include "coopcomp/graph_entropy.hpp"
#include "coopcomp/prob.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace coopcomp {

/// Restricted growth strings of length n with at most max_blocks blocks, in
/// lexicographic order. Each string is one set partition.
std::vector<std::vector<std::size_t>> set_partitions(std::size_t n, std::size_t max_blocks);

/// Number of set partitions of n elements into at most k blocks, saturating.
std::uint64_t partition_count(std::size_t n, std::size_t k);

/// Deterministic channel mapping each input symbol to its block label.
Channel partition_channel(const Alphabet& from, const std::vector<std::size_t>& blocks, const std::string& to_name);

/// Rows drawn from Dirichlet(alpha) over `cols` outputs.
Channel random_channel(std::mt19937_64& rng, const std::vector<Alphabet>& from, const std::string& to_name,
                       std::size_t cols, double alpha = 0.5);

/// A candidate under time sharing: constraint coordinate g, objective
/// max(a_plus_b, c). Every coordinate mixes linearly.
struct EnvelopePoint {
  double g = 0.0;
  double a_plus_b = 0.0;
  double c = 0.0;
};

struct EnvelopeChoice {
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
  std::size_t i = 0, j = 0;
  double lambda = 1.0;  // weight on i; j is unused when lambda == 1
};

/// min over single points and pairwise mixtures with mixed g <= budget of the
/// mixed objective. Ties resolve toward the lower (i, j, -lambda).
EnvelopeChoice envelope_min(const std::vector<EnvelopePoint>& pts, double budget, double tol = 1e-9);

/// Result of the slice-wise independent-set minimization.
struct SlicedSetSolution {
  double value = 0.0;  // sum over slices of the mass-weighted objective
  /// rows[l] over the merged symbol alphabet, for l over graph.l_axes
  std::vector<std::vector<double>> rows;
  /// merged symbols as l-index sets (union of one set per slice)
  std::vector<std::vector<std::size_t>> sets;
  bool budget_exhausted = false;
};

/// min I(L;S|K) over S ranging over maximal independent sets of `graph`, with
/// p(l,k) read from `joint`. `slice_axis` must be an axis of both the L and K
/// groups; the graph has no edges across its values, so each slice is solved
/// alone and the per-slice symbols are merged by position.
SlicedSetSolution solve_sliced_sets(const JointPmf& joint, const CharGraph& graph, const AxisGroup& k_axes,
                                    const std::string& slice_axis, const SolverConfig& cfg);

}  // namespace coopcomp
