#pragma once
// Conditional characteristic graphs with their maximal independent sets.
// Also holds the support-set relabeling of an auxiliary variable.
//
// A vertex is a composite symbol over the L axes, identified by its row-major
// flat index over those axes ("l index"). Only l values with positive
// probability become vertices.

#include "coopcomp/prob.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace coopcomp {

/// f(S) is not determined by (L,K): the witness cells disagree on f.
class HypothesisViolation : public ValidationError {
 public:
  HypothesisViolation(std::string msg, std::size_t l, std::size_t k, std::size_t s1, std::size_t s2)
      : ValidationError(std::move(msg)), l_index(l), k_index(k), s_index1(s1), s_index2(s2) {}
  std::size_t l_index, k_index, s_index1, s_index2;
};

class CharGraph {
 public:
  AxisGroup l_axes;
  AxisGroup k_axes;
  AxisGroup s_axes;
  std::string f_name;

  std::size_t size() const noexcept { return l_of_vertex_.size(); }
  std::size_t l_index(std::size_t vertex) const noexcept { return l_of_vertex_[vertex]; }
  std::optional<std::size_t> vertex_of(std::size_t l_index) const noexcept;
  bool adjacent(std::size_t a, std::size_t b) const noexcept { return adj_[a * size() + b] != 0; }
  std::size_t edge_count() const noexcept;
  const std::string& label(std::size_t vertex) const noexcept { return labels_[vertex]; }
  /// Alphabet sizes of the L axes, for decoding l indices.
  const std::vector<std::size_t>& l_dims() const noexcept { return l_dims_; }

  /// Vertex-index set is independent (no internal edges).
  bool independent(const std::vector<std::size_t>& vertices) const noexcept;

  /// `vertex: neighbor neighbor ...`, one line per vertex.
  std::string adjacency_text() const;

  /// Graph on explicit vertices; used by tests and by callers that already
  /// know the edge relation.
  static CharGraph from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

 private:
  friend CharGraph build_conditional_char_graph(const JointPmf&, const FunctionSpec&, const AxisGroup&,
                                                const AxisGroup&, const AxisGroup&);
  void connect(std::size_t a, std::size_t b);

  std::vector<std::size_t> l_of_vertex_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> l_dims_;
  std::vector<char> adj_;
};

/// Builds G_{L|K}(f). `s_axes` name the two arguments of f inside `joint`
/// (default X, Y). L, K and S may share axes; the edge rule is evaluated on the
/// marginal over their union, so shared components always agree within a cell.
/// Throws HypothesisViolation if H(f(S)|L,K) > 0.
CharGraph build_conditional_char_graph(const JointPmf& joint, const FunctionSpec& f, const AxisGroup& l_axes,
                                       const AxisGroup& k_axes, const AxisGroup& s_axes = {"X", "Y"});

struct IndependentSetFamily {
  /// Each set is a sorted list of vertex indices.
  std::vector<std::vector<std::size_t>> sets;
  bool is_multiset_family = false;
};

inline constexpr std::size_t kDefaultSetCap = 1'000'000;

/// Bron-Kerbosch with pivoting on the complement. Output sorted
/// lexicographically. Throws SearchBudgetError once more than `cap` sets exist.
IndependentSetFamily enumerate_maximal_independent_sets(const CharGraph& graph, std::size_t cap = kDefaultSetCap);

struct MembershipCheck {
  bool ok = true;
  std::string witness;
};

/// `v_axis` indexes the declared sets `v_sets` (each a list of l indices over
/// graph.l_axes). Passes iff every positive-probability V symbol is an
/// independent set and p(v,l) > 0 implies l is in v.
MembershipCheck verify_membership_condition(const JointPmf& joint, const std::string& v_axis,
                                            const std::vector<std::vector<std::size_t>>& v_sets,
                                            const CharGraph& graph);

struct SupportSetVariable {
  /// sets[j] = { l : p(v_j, l) > 0 } as sorted l indices.
  std::vector<std::vector<std::size_t>> sets;
  /// Deterministic V -> S_L(V) relabeling (one-to-one).
  Channel relabel;
};

SupportSetVariable support_set_transform(const JointPmf& joint, const std::string& v_axis,
                                         const AxisGroup& l_axes, const std::string& out_name = "S");

/// Row-major flat index over `axes` of a full cell index of `joint`.
std::size_t composite_index(const JointPmf& joint, const AxisGroup& axes, const std::vector<std::size_t>& cell_index);

/// Joint alphabet over several axes, symbols written "(a,b,...)".
Alphabet composite_alphabet(const JointPmf& joint, const AxisGroup& axes, std::string name);

}  // namespace coopcomp
