#include "coopcomp/prob.hpp"

#include "coopcomp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace coopcomp {
namespace {

std::vector<std::size_t> make_strides(const std::vector<Alphabet>& axes) {
  std::vector<std::size_t> s(axes.size(), 1);
  for (std::size_t i = axes.size(); i-- > 1;) s[i - 1] = s[i] * axes[i].size();
  return s;
}

std::size_t product_size(const std::vector<Alphabet>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

void check_axes(const std::vector<Alphabet>& axes) {
  std::set<std::string> seen;
  for (const auto& a : axes) {
    if (a.name.empty()) throw ValidationError("axis with empty name");
    if (a.size() == 0) throw ValidationError("axis '" + a.name + "' has an empty alphabet");
    if (!seen.insert(a.name).second) throw ValidationError("duplicate axis '" + a.name + "'");
  }
}

// Joint clean-up shared by the pmf and channel constructors: negative entries
// are errors, tiny entries become exact zeros.
void clean_entries(std::vector<double>& v, const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw ValidationError(what + ": non-finite entry at " + std::to_string(i));
    if (v[i] < -kZeroThreshold) {
      std::ostringstream os;
      os << what << ": negative entry " << v[i] << " at " << i;
      throw ValidationError(os.str());
    }
    if (v[i] <= kZeroThreshold) v[i] = 0.0;
  }
}

double entropy_of(const JointPmf& j, const AxisGroup& names) {
  if (names.empty()) return 0.0;
  const auto m = j.marginal_table(names);
  return kernels::entropy_bits(m);
}

AxisGroup join(const AxisGroup& a, const AxisGroup& b) {
  AxisGroup out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void check_disjoint(const std::vector<AxisGroup>& groups) {
  std::set<std::string> seen;
  for (const auto& g : groups) {
    for (const auto& n : g) {
      if (!seen.insert(n).second) throw ValidationError("axis '" + n + "' appears in two groups");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- Alphabet

Alphabet::Alphabet(std::string n, std::vector<std::string> s) : name(std::move(n)), symbols(std::move(s)) {
  std::set<std::string> seen;
  for (const auto& sym : symbols) {
    if (!seen.insert(sym).second)
      throw ValidationError("alphabet '" + name + "' repeats symbol '" + sym + "'");
  }
}

Alphabet Alphabet::range(std::string name, std::size_t n) {
  std::vector<std::string> s;
  s.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.push_back(std::to_string(i));
  return Alphabet(std::move(name), std::move(s));
}

std::optional<std::size_t> Alphabet::find(std::string_view symbol) const noexcept {
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] == symbol) return i;
  }
  return std::nullopt;
}

std::size_t Alphabet::index_of(std::string_view symbol) const {
  if (auto i = find(symbol)) return *i;
  throw ValidationError("symbol '" + std::string(symbol) + "' not in alphabet '" + name + "'");
}

// ---------------------------------------------------------------- JointPmf

JointPmf::JointPmf(std::vector<Alphabet> axes, std::vector<double> table)
    : axes_(std::move(axes)), table_(std::move(table)) {
  check_axes(axes_);
  if (table_.size() != product_size(axes_)) {
    throw ValidationError("pmf table has " + std::to_string(table_.size()) + " entries, expected " +
                          std::to_string(product_size(axes_)));
  }
  clean_entries(table_, "pmf");
  const double total = std::accumulate(table_.begin(), table_.end(), 0.0);
  if (std::abs(total - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os.precision(12);
    os << "pmf sums to " << total << ", not 1";
    throw ValidationError(os.str());
  }
  for (auto& v : table_) v /= total;
  strides_ = make_strides(axes_);
}

JointPmf make_joint_unchecked(std::vector<Alphabet> axes, std::vector<double> table) {
  JointPmf j;
  j.axes_ = std::move(axes);
  j.table_ = std::move(table);
  j.strides_ = make_strides(j.axes_);
  return j;
}

std::vector<std::string> JointPmf::axis_names() const {
  std::vector<std::string> out;
  out.reserve(axes_.size());
  for (const auto& a : axes_) out.push_back(a.name);
  return out;
}

bool JointPmf::has_axis(std::string_view name) const noexcept {
  return std::any_of(axes_.begin(), axes_.end(), [&](const Alphabet& a) { return a.name == name; });
}

std::size_t JointPmf::axis(std::string_view name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name == name) return i;
  }
  throw ValidationError("no axis named '" + std::string(name) + "'");
}

std::size_t JointPmf::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != axes_.size()) throw ValidationError("index rank mismatch");
  std::size_t c = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= axes_[i].size()) throw ValidationError("index out of range on axis " + axes_[i].name);
    c += index[i] * strides_[i];
  }
  return c;
}

void JointPmf::unravel(std::size_t cell, std::span<std::size_t> index) const noexcept {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    index[i] = cell / strides_[i];
    cell %= strides_[i];
  }
}

std::vector<double> JointPmf::marginal_table(const AxisGroup& names) const {
  // output stride contributed by each source axis (0 if summed out)
  std::vector<std::size_t> ostride(axes_.size(), 0);
  std::size_t out_size = 1;
  {
    std::vector<std::size_t> src(names.size());
    std::set<std::size_t> used;
    for (std::size_t k = 0; k < names.size(); ++k) {
      src[k] = axis(names[k]);
      if (!used.insert(src[k]).second) throw ValidationError("axis '" + names[k] + "' listed twice");
    }
    for (std::size_t k = names.size(); k-- > 0;) {
      ostride[src[k]] = out_size;
      out_size *= axes_[src[k]].size();
    }
  }
  std::vector<double> out(out_size, 0.0);
  if (axes_.empty()) {
    if (!table_.empty()) out[0] = table_[0];
    return out;
  }
  // odometer over the source cells, keeping the output offset incrementally
  std::vector<std::size_t> idx(axes_.size(), 0);
  std::size_t o = 0;
  const std::size_t last = axes_.size() - 1;
  for (std::size_t c = 0; c < table_.size(); ++c) {
    out[o] += table_[c];
    std::size_t a = last;
    while (true) {
      if (++idx[a] < axes_[a].size()) {
        o += ostride[a];
        break;
      }
      o -= (axes_[a].size() - 1) * ostride[a];
      idx[a] = 0;
      if (a == 0) break;
      --a;
    }
  }
  return out;
}

JointPmf JointPmf::marginal(const AxisGroup& names) const {
  std::vector<Alphabet> ax;
  ax.reserve(names.size());
  for (const auto& n : names) ax.push_back(axes_[axis(n)]);
  return make_joint_unchecked(std::move(ax), marginal_table(names));
}

std::vector<std::size_t> JointPmf::support_cells() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < table_.size(); ++c) {
    if (positive(table_[c])) out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------- Channel

Channel::Channel(std::vector<Alphabet> from, Alphabet to, std::vector<double> table)
    : from_(std::move(from)), to_(std::move(to)), table_(std::move(table)) {
  check_axes(from_);
  if (to_.size() == 0) throw ValidationError("channel output alphabet is empty");
  const std::size_t rows = product_size(from_);
  if (table_.size() != rows * to_.size()) {
    throw ValidationError("channel to '" + to_.name + "' has " + std::to_string(table_.size()) +
                          " entries, expected " + std::to_string(rows * to_.size()));
  }
  clean_entries(table_, "channel " + to_.name);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < to_.size(); ++c) s += table_[r * to_.size() + c];
    if (std::abs(s - 1.0) > kNormTolerance) {
      std::ostringstream os;
      os.precision(12);
      os << "channel to '" << to_.name << "': row " << r << " sums to " << s;
      throw ValidationError(os.str());
    }
    for (std::size_t c = 0; c < to_.size(); ++c) table_[r * to_.size() + c] /= s;
  }
}

Channel Channel::deterministic(std::vector<Alphabet> from, Alphabet to,
                               std::span<const std::size_t> outputs) {
  const std::size_t rows = product_size(from);
  if (outputs.size() != rows) throw ValidationError("deterministic channel: wrong number of rows");
  std::vector<double> t(rows * to.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (outputs[r] >= to.size()) throw ValidationError("deterministic channel: output out of range");
    t[r * to.size() + outputs[r]] = 1.0;
  }
  return Channel(std::move(from), std::move(to), std::move(t));
}

Channel Channel::constant(std::vector<Alphabet> from, std::string to_name, std::string symbol) {
  const std::size_t rows = product_size(from);
  return Channel(std::move(from), Alphabet(std::move(to_name), {std::move(symbol)}),
                 std::vector<double>(rows, 1.0));
}

Channel Channel::identity(const Alphabet& from, std::string to_name) {
  std::vector<std::size_t> out(from.size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return deterministic({from}, Alphabet(std::move(to_name), from.symbols), out);
}

std::size_t Channel::row_index(std::span<const std::size_t> from_index) const {
  if (from_index.size() != from_.size()) throw ValidationError("channel row index rank mismatch");
  std::size_t r = 0;
  for (std::size_t i = 0; i < from_.size(); ++i) r = r * from_[i].size() + from_index[i];
  return r;
}

// ---------------------------------------------------------------- FunctionSpec

FunctionSpec::FunctionSpec(Alphabet xa, Alphabet ya, Alphabet cod, std::vector<std::size_t> t)
    : x(std::move(xa)), y(std::move(ya)), codomain(std::move(cod)), table(std::move(t)) {
  if (table.size() != x.size() * y.size()) throw ValidationError("function table has wrong size");
  for (auto v : table) {
    if (v >= codomain.size()) throw ValidationError("function value outside codomain");
  }
}

FunctionSpec FunctionSpec::from_labels(Alphabet xa, Alphabet ya, std::string codomain_name,
                                       const std::function<std::string(std::size_t, std::size_t)>& g) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> pos;
  std::vector<std::size_t> t(xa.size() * ya.size());
  for (std::size_t i = 0; i < xa.size(); ++i) {
    for (std::size_t j = 0; j < ya.size(); ++j) {
      auto s = g(i, j);
      auto [it, fresh] = pos.emplace(s, labels.size());
      if (fresh) labels.push_back(s);
      t[i * ya.size() + j] = it->second;
    }
  }
  return FunctionSpec(std::move(xa), std::move(ya), Alphabet(std::move(codomain_name), labels), std::move(t));
}

bool FunctionSpec::partially_invertible_wrt_x(const JointPmf& pxy) const {
  const auto m = pxy.marginal_table({"X", "Y"});
  std::vector<std::ptrdiff_t> owner(codomain.size(), -1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (!positive(m[i * y.size() + j])) continue;
      auto& o = owner[(*this)(i, j)];
      if (o == -1) o = static_cast<std::ptrdiff_t>(i);
      else if (o != static_cast<std::ptrdiff_t>(i)) return false;
    }
  }
  return true;
}

bool FunctionSpec::is_constant_on(const JointPmf& pxy) const {
  const auto m = pxy.marginal_table({"X", "Y"});
  std::optional<std::size_t> v;
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (!positive(m[c])) continue;
    if (!v) v = table[c];
    else if (*v != table[c]) return false;
  }
  return true;
}

// ---------------------------------------------------------------- measures

double information_measure(const JointPmf& j, MeasureKind kind, const std::vector<AxisGroup>& g) {
  check_disjoint(g);
  auto need = [&](std::size_t n) {
    if (g.size() != n) throw ValidationError("information_measure: wrong number of axis groups");
  };
  double v = 0.0;
  switch (kind) {
    case MeasureKind::entropy:
      need(1);
      v = entropy_of(j, g[0]);
      break;
    case MeasureKind::cond_entropy:
      need(2);
      v = entropy_of(j, join(g[0], g[1])) - entropy_of(j, g[1]);
      break;
    case MeasureKind::mutual_info:
      need(2);
      v = entropy_of(j, g[0]) + entropy_of(j, g[1]) - entropy_of(j, join(g[0], g[1]));
      break;
    case MeasureKind::cond_mutual_info:
      need(3);
      v = entropy_of(j, join(g[0], g[2])) + entropy_of(j, join(g[1], g[2])) -
          entropy_of(j, join(join(g[0], g[1]), g[2])) - entropy_of(j, g[2]);
      break;
  }
  // differences of entropies leave rounding residue around zero
  return std::abs(v) < 1e-13 ? 0.0 : v;
}

double entropy(const JointPmf& j, const AxisGroup& a) {
  return information_measure(j, MeasureKind::entropy, {a});
}
double cond_entropy(const JointPmf& j, const AxisGroup& a, const AxisGroup& given) {
  return information_measure(j, MeasureKind::cond_entropy, {a, given});
}
double mutual_info(const JointPmf& j, const AxisGroup& a, const AxisGroup& b) {
  return information_measure(j, MeasureKind::mutual_info, {a, b});
}
double cond_mutual_info(const JointPmf& j, const AxisGroup& a, const AxisGroup& b, const AxisGroup& given) {
  return information_measure(j, MeasureKind::cond_mutual_info, {a, b, given});
}

// ---------------------------------------------------------------- composition

JointPmf extend(const JointPmf& j, const Channel& ch) {
  if (j.has_axis(ch.to().name)) throw ValidationError("axis '" + ch.to().name + "' already present");
  std::vector<std::size_t> src;
  for (const auto& a : ch.from()) {
    const std::size_t ax = j.axis(a.name);
    if (!(j.axes()[ax] == a))
      throw ValidationError("channel input '" + a.name + "' does not match the joint's alphabet");
    src.push_back(ax);
  }
  const std::size_t k = ch.cols();
  std::vector<double> out(j.cell_count() * k, 0.0);
  std::vector<std::size_t> idx(j.rank());
  for (std::size_t c = 0; c < j.cell_count(); ++c) {
    const double p = j[c];
    if (p == 0.0) continue;
    j.unravel(c, idx);
    std::size_t r = 0;
    for (std::size_t i = 0; i < src.size(); ++i) r = r * ch.from()[i].size() + idx[src[i]];
    const auto row = ch.row(r);
    for (std::size_t z = 0; z < k; ++z) out[c * k + z] = p * row[z];
  }
  auto axes = j.axes();
  axes.push_back(ch.to());
  return make_joint_unchecked(std::move(axes), std::move(out));
}

JointPmf reorder(const JointPmf& j, const AxisGroup& order) {
  if (order.size() != j.rank()) throw ValidationError("reorder must name every axis");
  return j.marginal(order);
}

JointPmf compose_joint(const JointPmf& base, const Channel& u_ch, const Channel& t_ch, const Channel& v_ch,
                       const Channel& w_ch) {
  auto expect = [](const Channel& c, const AxisGroup& from, const char* to) {
    if (c.to().name != to) throw ValidationError(std::string("expected a channel producing ") + to);
    if (c.from().size() != from.size()) throw ValidationError(std::string("wrong inputs for channel ") + to);
    for (std::size_t i = 0; i < from.size(); ++i) {
      if (c.from()[i].name != from[i]) throw ValidationError(std::string("wrong inputs for channel ") + to);
    }
  };
  expect(u_ch, {"X"}, "U");
  expect(t_ch, {"U"}, "T");
  expect(v_ch, {"X", "T"}, "V");
  expect(w_ch, {"U", "Y"}, "W");
  JointPmf j = base.marginal({"X", "Y"});
  j = extend(j, u_ch);
  j = extend(j, t_ch);
  j = extend(j, v_ch);
  j = extend(j, w_ch);
  return reorder(j, {"V", "X", "T", "U", "Y", "W"});
}

bool check_markov_chain(const JointPmf& j, const AxisGroup& a, const AxisGroup& b, const AxisGroup& c,
                        double tol) {
  return cond_mutual_info(j, a, c, b) <= tol;
}

JointPmf make_pxy(const Alphabet& x, const Alphabet& y, std::vector<double> table) {
  Alphabet xa = x, ya = y;
  xa.name = "X";
  ya.name = "Y";
  return JointPmf({xa, ya}, std::move(table));
}

}  // namespace coopcomp
