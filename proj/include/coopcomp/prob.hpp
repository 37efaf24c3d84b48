#pragma once
// Finite-alphabet probability tables and channels, plus the information
// measures every rate expression is assembled from. Axes are always addressed
// by name.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace coopcomp {

/// Entries at or below this are zeros for every support / graph query.
inline constexpr double kZeroThreshold = 1e-12;
/// Tolerance on row and table sums at ingestion.
inline constexpr double kNormTolerance = 1e-9;

/// Malformed input or a violated precondition.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A search ran out of budget; the caller may still hold partial results.
class SearchBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool positive(double p) noexcept { return p > kZeroThreshold; }

struct Alphabet {
  std::string name;
  std::vector<std::string> symbols;

  Alphabet() = default;
  Alphabet(std::string name, std::vector<std::string> symbols);

  /// Symbols "0", "1", ..., "n-1".
  static Alphabet range(std::string name, std::size_t n);

  std::size_t size() const noexcept { return symbols.size(); }
  std::optional<std::size_t> find(std::string_view symbol) const noexcept;
  std::size_t index_of(std::string_view symbol) const;

  bool operator==(const Alphabet&) const = default;
};

using AxisGroup = std::vector<std::string>;

class JointPmf {
 public:
  JointPmf() = default;
  /// Validates nonnegativity and the unit sum (within kNormTolerance), then
  /// renormalizes exactly once.
  JointPmf(std::vector<Alphabet> axes, std::vector<double> table);

  const std::vector<Alphabet>& axes() const noexcept { return axes_; }
  std::size_t rank() const noexcept { return axes_.size(); }
  std::vector<std::string> axis_names() const;
  bool has_axis(std::string_view name) const noexcept;
  std::size_t axis(std::string_view name) const;
  const Alphabet& alphabet(std::string_view name) const { return axes_[axis(name)]; }
  std::size_t dim(std::size_t axis) const noexcept { return axes_[axis].size(); }

  std::span<const double> table() const noexcept { return table_; }
  std::size_t cell_count() const noexcept { return table_.size(); }
  double operator[](std::size_t cell) const noexcept { return table_[cell]; }
  double at(std::span<const std::size_t> index) const { return table_[flat_index(index)]; }
  double at(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }

  std::size_t flat_index(std::span<const std::size_t> index) const;
  void unravel(std::size_t cell, std::span<std::size_t> index) const noexcept;
  std::size_t stride(std::size_t axis) const noexcept { return strides_[axis]; }

  /// Marginal over the named axes, in the order given.
  std::vector<double> marginal_table(const AxisGroup& names) const;
  JointPmf marginal(const AxisGroup& names) const;

  /// Probability table of a random variable that is zero-threshold clean.
  std::vector<std::size_t> support_cells() const;

 private:
  friend JointPmf make_joint_unchecked(std::vector<Alphabet>, std::vector<double>);
  std::vector<Alphabet> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> table_;
};

/// Build a joint from a table that is already normalized by construction.
JointPmf make_joint_unchecked(std::vector<Alphabet> axes, std::vector<double> table);

/// Conditional probability table p(to | from...), one row per cell of the
/// `from` axes in row-major order.
class Channel {
 public:
  Channel() = default;
  Channel(std::vector<Alphabet> from, Alphabet to, std::vector<double> table);

  /// to = g(from), g given as a row index -> output index map.
  static Channel deterministic(std::vector<Alphabet> from, Alphabet to,
                               std::span<const std::size_t> outputs);
  /// Single-symbol output.
  static Channel constant(std::vector<Alphabet> from, std::string to_name,
                          std::string symbol = "*");
  /// Copy of one input axis under a new name.
  static Channel identity(const Alphabet& from, std::string to_name);

  const std::vector<Alphabet>& from() const noexcept { return from_; }
  const Alphabet& to() const noexcept { return to_; }
  std::size_t rows() const noexcept { return to_.size() == 0 ? 0 : table_.size() / to_.size(); }
  std::size_t cols() const noexcept { return to_.size(); }
  std::span<const double> row(std::size_t r) const noexcept {
    return {table_.data() + r * to_.size(), to_.size()};
  }
  double operator()(std::size_t r, std::size_t c) const noexcept { return table_[r * to_.size() + c]; }
  std::span<const double> table() const noexcept { return table_; }

  /// Row index for one symbol index per `from` axis.
  std::size_t row_index(std::span<const std::size_t> from_index) const;

  bool operator==(const Channel&) const = default;

 private:
  std::vector<Alphabet> from_;
  Alphabet to_;
  std::vector<double> table_;
};

/// Total function f: X x Y -> F stored as codomain indices, x-major.
struct FunctionSpec {
  Alphabet x;
  Alphabet y;
  Alphabet codomain;
  std::vector<std::size_t> table;

  FunctionSpec() = default;
  FunctionSpec(Alphabet x, Alphabet y, Alphabet codomain, std::vector<std::size_t> table);

  /// Builds the codomain from the distinct values g returns, in first-seen order.
  static FunctionSpec from_labels(Alphabet x, Alphabet y, std::string codomain_name,
                                  const std::function<std::string(std::size_t, std::size_t)>& g);

  std::size_t operator()(std::size_t xi, std::size_t yi) const noexcept {
    return table[xi * y.size() + yi];
  }

  /// x is recoverable from f(x,y) on the support of pxy.
  bool partially_invertible_wrt_x(const JointPmf& pxy) const;
  /// f(x,y) depends on y only over the support of pxy.
  bool is_constant_on(const JointPmf& pxy) const;
};

struct RateTuple {
  double r0 = 0.0;
  double rx = 0.0;
  double ry = 0.0;
  double sum = 0.0;
};

enum class MeasureKind { entropy, cond_entropy, mutual_info, cond_mutual_info };

/// Groups: entropy {A}; cond_entropy {A, C}; mutual_info {A, B};
/// cond_mutual_info {A, B, C}. Result in bits.
double information_measure(const JointPmf& joint, MeasureKind kind,
                           const std::vector<AxisGroup>& groups);

double entropy(const JointPmf& joint, const AxisGroup& a);
double cond_entropy(const JointPmf& joint, const AxisGroup& a, const AxisGroup& given);
double mutual_info(const JointPmf& joint, const AxisGroup& a, const AxisGroup& b);
double cond_mutual_info(const JointPmf& joint, const AxisGroup& a, const AxisGroup& b,
                        const AxisGroup& given);

/// Appends the channel's output axis: p(..., z) = p(...) p(z | from).
JointPmf extend(const JointPmf& joint, const Channel& channel);

/// Same table with axes permuted into `order` (must name every axis).
JointPmf reorder(const JointPmf& joint, const AxisGroup& order);

/// p(v,x,t,u,y,w) = p(x,y) p(u|x) p(t|u) p(v|x,t) p(w|u,y); axes V,X,T,U,Y,W.
JointPmf compose_joint(const JointPmf& base, const Channel& u_ch, const Channel& t_ch,
                       const Channel& v_ch, const Channel& w_ch);

/// A - B - C holds iff I(A;C|B) <= tol.
bool check_markov_chain(const JointPmf& joint, const AxisGroup& a, const AxisGroup& b,
                        const AxisGroup& c, double tol);

/// p(x,y) over axes named X and Y from an x-major matrix.
JointPmf make_pxy(const Alphabet& x, const Alphabet& y, std::vector<double> table);

}  // namespace coopcomp
