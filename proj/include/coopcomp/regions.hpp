#pragma once
// Inner-bound evaluation for given auxiliaries plus the tight special-case
// regions. The rate-distortion bound and the cardinality-bounded searches
// are declared here too.
//
// Variable roles follow the factorization
//   p(v,x,t,u,y,w) = p(x,y) p(u|x) p(t|u) p(v|x,t) p(w|u,y).
// V symbols are read as vertex sets over (T,X); W symbols as vertex sets over
// (T,U,Y). Sets are stored as row-major l indices over those axes.

#include "coopcomp/graph_entropy.hpp"
#include "coopcomp/prob.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coopcomp {

struct AuxiliarySystem {
  JointPmf base;  // axes X, Y
  Channel u_ch;   // X -> U
  Channel t_ch;   // U -> T
  Channel v_ch;   // (X,T) -> V
  Channel w_ch;   // (U,Y) -> W
  std::vector<std::vector<std::size_t>> v_sets;  // l indices over (T,X)
  std::vector<std::vector<std::size_t>> w_sets;  // l indices over (T,U,Y)

  JointPmf joint() const { return compose_joint(base, u_ch, t_ch, v_ch, w_ch); }
};

struct ValidationReport {
  bool ok = true;
  std::string diagnostic;                // first violated condition
  std::vector<std::string> advisories;   // cardinality notes (not failures)
};

inline constexpr double kMarkovTol = 1e-9;

/// Markov chains plus both set-membership conditions.
ValidationReport validate_auxiliaries_theorem1(const AuxiliarySystem& sys, const FunctionSpec& f);

/// Right-hand sides of the four inner-bound inequalities (no validation).
RateTuple theorem1_rates(const JointPmf& joint);

/// Validates, then returns theorem1_rates; throws ValidationError on failure.
RateTuple evaluate_theorem1_bounds(const AuxiliarySystem& sys, const FunctionSpec& f);

// ------------------------------------------------------------ rate distortion

struct Distortion {
  Alphabet reconstruction;
  std::vector<double> table;  // |F| x |reconstruction|, nonnegative
  double operator()(std::size_t f, std::size_t r) const { return table[f * reconstruction.size() + r]; }
};

/// d(a, r) = 1 iff a * sign(r) = -1, on numeric symbol labels.
Distortion sign_distortion(const Alphabet& values, const Alphabet& reconstruction);

struct RdConstraint {
  FunctionSpec f1, f2;
  Distortion d1, d2;
  double D1 = 0.0, D2 = 0.0;
  /// Reconstruction tables over (V,T,W) cells; chosen optimally when absent.
  std::optional<std::vector<std::size_t>> g1, g2;
};

struct RdEvaluation {
  RateTuple rates;
  double distortion1 = 0.0;
  double distortion2 = 0.0;
  std::vector<std::size_t> g1, g2;
};

/// Expected distortion of the best (or given) reconstruction g over (V,T,W).
double expected_distortion(const JointPmf& joint, const FunctionSpec& f, const Distortion& d,
                           const std::optional<std::vector<std::size_t>>& g, std::vector<std::size_t>* chosen);

/// Checks the Markov chains and both budgets; throws ValidationError naming the
/// violated budget.
RdEvaluation evaluate_rd_bounds(const AuxiliarySystem& sys, const RdConstraint& rd);

/// The T=U specialization's own formulas on a joint with V,X,T,Y,W axes:
/// (I(X;T|Y), I(X;V|T,W), I(Y;W|T,V), I(X,Y;T,V,W)).
RateTuple kb51_formulas(const JointPmf& joint);
/// The full-cooperation specialization: (H(X|Y), 0, I(X,Y;W|T), I(X,Y;T,W)).
RateTuple kb54_formulas(const JointPmf& joint);

// ------------------------------------------------------------ frontiers

struct FrontierCurve {
  std::string tag;
  std::string x_label = "r0_bits";
  std::string y_label = "min_sum_bits";
  std::string region_label;  // "rate region (tight)" or "achievable (inner bound)"
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::optional<AuxiliarySystem>> witnesses;
  bool budget_exhausted = false;

  /// x strictly increasing and y nonincreasing (within tol).
  bool monotone(double tol = 1e-9) const;
  /// Header line plus one point per line, 6 decimals.
  std::string to_csv() const;
};

struct SearchConfig {
  std::size_t grid_points = 33;
  std::size_t exhaustive_cap = 10'000'000;
  std::size_t random_candidates = 120;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  SolverConfig solver = [] {
    SolverConfig s;
    s.restarts = 4;
    return s;
  }();
  /// Annealed rate-distortion search.
  std::size_t rd_restarts = 20;
  std::size_t rd_iterations = 3000;
  /// Overrides of the default cardinality bounds (0 = theorem default).
  std::size_t t_card = 0;
  std::size_t u_card = 0;
  std::size_t w_card = 0;
};

/// Stable 64-bit digest of a configuration (FNV-1a over its fields).
std::uint64_t config_hash(const SearchConfig& cfg);

/// Budget grid: `n` evenly spaced values in [lo, hi].
std::vector<double> even_grid(double lo, double hi, std::size_t n);

/// Partially invertible f: min H(X)+I(Y;W|U) subject to I(X;U|Y) <= r0 on the
/// default grid from 0 to H(X|Y).
FrontierCurve region_partially_invertible(const JointPmf& base, const FunctionSpec& f, const SearchConfig& cfg);

/// Same region at a fixed cooperation budget, traced over RY:
/// min RX+RY subject to RY <= ry.
FrontierCurve region_partially_invertible_ry(const JointPmf& base, const FunctionSpec& f, double r0_budget,
                                             const std::vector<double>& ry_grid, const SearchConfig& cfg);

/// Full cooperation: min RX+RY subject to RY <= ry over T - X - Y.
FrontierCurve region_full_cooperation(const JointPmf& base, const FunctionSpec& f,
                                      const std::vector<double>& ry_grid, const SearchConfig& cfg);

/// Smallest RY any full-cooperation auxiliary allows, H(f|X).
double full_cooperation_min_ry(const JointPmf& base, const FunctionSpec& f);

/// H(G_{X|Y}).
double rate_one_round(const JointPmf& base, const FunctionSpec& f, const SolverConfig& cfg = {});

/// Two-round region traced as (r0, min RY); rx = H(X) throughout.
FrontierCurve region_two_round(const JointPmf& base, const FunctionSpec& f, const SearchConfig& cfg);

/// (H(G_{X|Y}), 0, H(f), -) ; sum carries ry.
RateTuple region_cascade(const JointPmf& base, const FunctionSpec& f, const SolverConfig& cfg = {});

enum class SumRateMode { theorem1, partinv, kb51, kb54 };

struct SumRateResult {
  bool feasible = false;
  double value = 0.0;
  RateTuple rates;
  std::optional<AuxiliarySystem> witness;
  std::string note;
  double distortion1 = 0.0, distortion2 = 0.0;
};

/// Computation modes take `f`; rate-distortion modes take `rd` (and ignore
/// r0_budget, since those specializations do not constrain it).
SumRateResult minimize_sum_rate(const JointPmf& base, const FunctionSpec* f, const RdConstraint* rd,
                                SumRateMode mode, double r0_budget, const SearchConfig& cfg);

// ------------------------------------------------------------ system builders

/// T = U, V = singletons over (T,X); the witness shape of the partially
/// invertible and two-round regions. `w_ch` maps (U,Y) -> W with `w_sets_uy`
/// given over (U,Y).
AuxiliarySystem system_t_equals_u(const JointPmf& base, const Channel& u_ch, const Channel& w_ch,
                                  const std::vector<std::vector<std::size_t>>& w_sets_uy);

/// U = X, V constant, W = level sets of f; T from X.
AuxiliarySystem system_full_cooperation(const JointPmf& base, const FunctionSpec& f, const Channel& t_from_x);

/// U, T constant; V from a channel X -> sets of x; W = Y singletons.
AuxiliarySystem system_one_round(const JointPmf& base, const Channel& v_from_x,
                                 const std::vector<std::vector<std::size_t>>& v_sets_x);

/// Time sharing: runs `a` with probability lambda and `b` otherwise, on
/// disjoint labels of U, T, V and W. The selector is a function of both U and
/// T and is independent of (X,Y), so every rate expression mixes linearly.
AuxiliarySystem mix_systems(const AuxiliarySystem& a, const AuxiliarySystem& b, double lambda);

/// Full-cooperation bounds for one T: (H(X|Y), 0, H(f|T), H(f)+I(X;T|f)).
RateTuple full_cooperation_rates(const JointPmf& base, const FunctionSpec& f, const Channel& t_from_x);

}  // namespace coopcomp
