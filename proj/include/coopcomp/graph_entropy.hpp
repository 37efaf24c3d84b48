#pragma once
// Conditional graph entropy: min I(V;L|K) over V - L - K with L in V and V
// ranging over independent sets.
//
// For a fixed family of allowed sets the objective is convex in the channel
// p(v|l), so an alternating scheme in the style of rate-distortion fixed-point
// iteration (update p(v|l) against the induced q(v|k), then recompute q)
// decreases it monotonically. The generic solver below works on any
// "l may only use these sets" mask and is reused by the region searches.

#include "coopcomp/char_graph.hpp"
#include "coopcomp/prob.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace coopcomp {

struct SolverConfig {
  std::size_t restarts = 50;
  double tol = 1e-9;
  std::size_t max_iter = 10'000;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t set_cap = kDefaultSetCap;
  /// Channel entries below this are zeroed in the polishing pass.
  double polish_threshold = 1e-6;
};

/// min over p(v|l) supported on `allowed` of I(V;L|K), with p(l,k) given.
struct SetMiProblem {
  std::size_t nl = 0;
  std::size_t nk = 0;
  std::size_t nsets = 0;
  std::vector<double> p_lk;    // nl x nk
  std::vector<char> allowed;   // nl x nsets
};

struct SolverTrace {
  std::size_t iterations = 0;  // summed over restarts
  std::size_t restarts = 0;
  double final_step = 0.0;     // last change in objective of the winning run
  bool converged = true;       // every restart met tol before max_iter
};

struct SetMiResult {
  double value = 0.0;          // bits
  std::vector<double> channel; // nl x nsets
  SolverTrace trace;
};

SetMiResult minimize_set_mi(const SetMiProblem& problem, const SolverConfig& config);

/// I(V;L|K) in bits for a channel on the problem's layout.
double set_mi_value(const SetMiProblem& problem, const std::vector<double>& channel);

struct GraphEntropyResult {
  double value = 0.0;
  /// L -> V channel whose V symbols are the maximal independent sets.
  Channel witness;
  /// sets[v] as sorted l indices over the graph's L axes.
  std::vector<std::vector<std::size_t>> sets;
  SolverTrace trace;
  CharGraph graph;
};

/// H(G_{L|K}(f)) with V restricted to maximal independent sets.
GraphEntropyResult conditional_graph_entropy(const JointPmf& joint, const FunctionSpec& f, const AxisGroup& l_axes,
                                             const AxisGroup& k_axes, const SolverConfig& config = {},
                                             const AxisGroup& s_axes = {"X", "Y"});

/// Same minimization over an explicit family of vertex sets of `graph`.
GraphEntropyResult graph_entropy_over_sets(const JointPmf& joint, const CharGraph& graph,
                                           const std::vector<std::vector<std::size_t>>& vertex_sets,
                                           const SolverConfig& config = {});

}  // namespace coopcomp
