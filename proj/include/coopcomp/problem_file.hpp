#pragma once
// Line-oriented problem files.
//
//   # comment
//   [alphabets]
//   X 1 2 3
//   Y a b c
//   R -1 +1          (reconstruction alphabet, only for distortion sections)
//   [pmf]            |X| rows of |Y| decimals, summing to 1 within 1e-6
//   [f]              |X| rows of |Y| output labels
//   [f2]             optional second function (rate-distortion mode)
//   [d1] / [d2]      either the single token `sign`, or one line per output
//                    label of f / f2: `<label> d(label, r) for r in R`
//   [budgets]        `D1 D2`
//   [U] [T] [V] [W]  optional auxiliary channels: a `symbols ...` line, then
//                    one row per input cell. Inputs are X for U, U for T,
//                    (X,T) for V and (U,Y) for W, row-major. Absent ones are
//                    constant.
//
// Numbers are decimals only. Raw values are kept as written so that
// serialize + parse reproduces the structure bit for bit; normalization
// happens when the probability objects are built.

#include "coopcomp/regions.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coopcomp {

inline constexpr double kFileSumTolerance = 1e-6;

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_, column_;
};

struct ProblemDistortion {
  bool sign = false;
  std::vector<std::string> labels;        // one per row when !sign
  std::vector<std::vector<double>> rows;  // |R| entries each
  bool operator==(const ProblemDistortion&) const = default;
};

struct ProblemChannel {
  std::vector<std::string> symbols;
  std::vector<std::vector<double>> rows;
  bool operator==(const ProblemChannel&) const = default;
};

struct ProblemFile {
  Alphabet x, y, recon;
  std::vector<std::vector<double>> pmf;
  std::vector<std::vector<std::string>> f, f2;
  std::optional<ProblemDistortion> d1, d2;
  std::optional<std::pair<double, double>> budgets;
  std::map<std::string, ProblemChannel> channels;  // keys among U, T, V, W

  bool operator==(const ProblemFile&) const = default;

  JointPmf pxy() const;
  FunctionSpec function() const;
  /// Needs f2, d1, d2 and budgets; throws ValidationError otherwise.
  RdConstraint rd() const;
  bool has_rd() const noexcept { return !f2.empty() && d1 && d2 && budgets; }
  bool has_auxiliaries() const noexcept { return !channels.empty(); }
  /// V and W sets are the supports of each symbol over (T,X) and (T,U,Y).
  AuxiliarySystem auxiliaries() const;
};

ProblemFile parse_problem(std::string_view text);
std::string serialize_problem(const ProblemFile& p);
ProblemFile load_problem(const std::filesystem::path& path);

}  // namespace coopcomp
