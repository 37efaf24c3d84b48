#include "coopcomp/problem_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace coopcomp {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : ValidationError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string text;
  std::size_t col = 0;
};

struct Line {
  std::size_t no = 0;
  std::vector<Token> toks;
  std::size_t end_col = 1;  // one past the last character before any comment
};

struct Section {
  std::size_t header_line = 0;
  std::vector<Line> lines;
};

const std::set<std::string> kSections = {"alphabets", "pmf", "f", "f2", "d1", "d2", "budgets", "U", "T", "V", "W"};

[[noreturn]] void fail(const Line& l, std::size_t tok, const std::string& msg) {
  throw ParseError(l.no, tok < l.toks.size() ? l.toks[tok].col : l.end_col, msg);
}

double parse_decimal(const Line& l, std::size_t i) {
  const std::string& s = l.toks[i].text;
  if (s.find('/') != std::string::npos) fail(l, i, "'" + s + "' is a fraction; write decimals only");
  for (char c : s)
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-'))
      fail(l, i, "'" + s + "' is not a decimal number");
  std::string_view v = s;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    fail(l, i, "'" + s + "' is not a decimal number");
  return out;
}

double parse_nonneg(const Line& l, std::size_t i) {
  const double v = parse_decimal(l, i);
  if (v < 0) fail(l, i, "negative value " + l.toks[i].text);
  return v;
}

std::vector<double> decimal_row(const Line& l, std::size_t first, std::size_t expect, const std::string& what) {
  if (l.toks.size() - first != expect)
    fail(l, l.toks.size() > first + expect ? first + expect : l.toks.size(),
         "dimension mismatch: " + what + " needs " + std::to_string(expect) + " entries, found " +
             std::to_string(l.toks.size() - first));
  std::vector<double> row;
  for (std::size_t i = first; i < l.toks.size(); ++i) row.push_back(parse_nonneg(l, i));
  return row;
}

void check_row_count(const Section& s, std::size_t expect, const std::string& name) {
  if (s.lines.size() == expect) return;
  const std::size_t at = s.lines.size() > expect ? s.lines[expect].no : s.header_line;
  throw ParseError(at, 1, "dimension mismatch: [" + name + "] needs " + std::to_string(expect) + " rows, found " +
                              std::to_string(s.lines.size()));
}

Alphabet parse_alphabet_line(const Line& l) {
  if (l.toks.size() < 2) fail(l, l.toks.size(), "alphabet '" + l.toks[0].text + "' has no symbols");
  std::vector<std::string> syms;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < l.toks.size(); ++i) {
    if (!seen.insert(l.toks[i].text).second) fail(l, i, "duplicate symbol '" + l.toks[i].text + "'");
    syms.push_back(l.toks[i].text);
  }
  return Alphabet(l.toks[0].text, std::move(syms));
}

std::vector<std::vector<std::string>> parse_label_table(const Section& s, const std::string& name, std::size_t nx,
                                                        std::size_t ny) {
  check_row_count(s, nx, name);
  std::vector<std::vector<std::string>> t;
  for (const Line& l : s.lines) {
    if (l.toks.size() != ny)
      fail(l, std::min(l.toks.size(), ny),
           "dimension mismatch: [" + name + "] rows need " + std::to_string(ny) + " labels");
    std::vector<std::string> row;
    for (const auto& tk : l.toks) row.push_back(tk.text);
    t.push_back(std::move(row));
  }
  return t;
}

std::set<std::string> labels_of(const std::vector<std::vector<std::string>>& t) {
  std::set<std::string> out;
  for (const auto& r : t) out.insert(r.begin(), r.end());
  return out;
}

ProblemDistortion parse_distortion(const Section& s, const std::string& name,
                                   const std::vector<std::vector<std::string>>& fn, const Alphabet& recon) {
  ProblemDistortion d;
  if (s.lines.size() == 1 && s.lines[0].toks.size() == 1 && s.lines[0].toks[0].text == "sign") {
    const Line& l = s.lines[0];
    for (const auto& r : recon.symbols) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(r.data() + (r.front() == '+'), r.data() + r.size(), v);
      if (ec != std::errc() || p != r.data() + r.size())
        fail(l, 0, "sign distortion needs numeric reconstruction symbols, found '" + r + "'");
    }
    for (const auto& lab : labels_of(fn)) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(lab.data() + (lab.front() == '+'), lab.data() + lab.size(), v);
      if (ec != std::errc() || p != lab.data() + lab.size())
        fail(l, 0, "sign distortion needs numeric function labels, found '" + lab + "'");
    }
    d.sign = true;
    return d;
  }
  const std::set<std::string> known = labels_of(fn);
  std::set<std::string> seen;
  for (const Line& l : s.lines) {
    if (!known.count(l.toks[0].text)) fail(l, 0, "unknown symbol '" + l.toks[0].text + "' in [" + name + "]");
    if (!seen.insert(l.toks[0].text).second) fail(l, 0, "duplicate row for '" + l.toks[0].text + "'");
    d.labels.push_back(l.toks[0].text);
    d.rows.push_back(decimal_row(l, 1, recon.size(), "a distortion row"));
  }
  for (const auto& lab : known)
    if (!seen.count(lab))
      throw ParseError(s.header_line, 1, "[" + name + "] has no row for output label '" + lab + "'");
  return d;
}

ProblemChannel parse_channel(const Section& s, const std::string& name, std::size_t rows) {
  if (s.lines.empty() || s.lines[0].toks[0].text != "symbols")
    throw ParseError(s.lines.empty() ? s.header_line : s.lines[0].no, 1,
                     "[" + name + "] must start with a 'symbols' line");
  ProblemChannel c;
  const Line& head = s.lines[0];
  if (head.toks.size() < 2) fail(head, 1, "[" + name + "] declares no symbols");
  std::set<std::string> seen;
  for (std::size_t i = 1; i < head.toks.size(); ++i) {
    if (!seen.insert(head.toks[i].text).second) fail(head, i, "duplicate symbol '" + head.toks[i].text + "'");
    c.symbols.push_back(head.toks[i].text);
  }
  if (s.lines.size() - 1 != rows) {
    const std::size_t at = s.lines.size() - 1 > rows ? s.lines[rows + 1].no : s.header_line;
    throw ParseError(at, 1, "dimension mismatch: [" + name + "] needs " + std::to_string(rows) + " rows, found " +
                                std::to_string(s.lines.size() - 1));
  }
  for (std::size_t r = 1; r < s.lines.size(); ++r) {
    const Line& l = s.lines[r];
    auto row = decimal_row(l, 0, c.symbols.size(), "a channel row");
    double sum = 0.0;
    for (double v : row) sum += v;
    if (std::abs(sum - 1.0) > kFileSumTolerance)
      fail(l, 0, "channel row sums to " + std::to_string(sum) + ", not 1 within tolerance");
    c.rows.push_back(std::move(row));
  }
  return c;
}

std::string num(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<double> normalized(std::vector<double> flat) {
  double s = 0.0;
  for (double v : flat) s += v;
  for (double& v : flat) v /= s;
  return flat;
}

Channel build_channel(const std::map<std::string, ProblemChannel>& chans, const std::string& name,
                      std::vector<Alphabet> from) {
  const auto it = chans.find(name);
  if (it == chans.end()) return Channel::constant(std::move(from), name);
  std::vector<double> t;
  for (const auto& row : it->second.rows) {
    const auto r = normalized(row);
    t.insert(t.end(), r.begin(), r.end());
  }
  return Channel(std::move(from), Alphabet(name, it->second.symbols), std::move(t));
}

}  // namespace

ProblemFile parse_problem(std::string_view text) {
  std::map<std::string, Section> sections;
  Section* cur = nullptr;
  std::size_t no = 0, last_line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++no;
    if (const auto h = raw.find('#'); h != std::string_view::npos) raw = raw.substr(0, h);
    Line line;
    line.no = no;
    for (std::size_t i = 0; i < raw.size();) {
      if (std::isspace(static_cast<unsigned char>(raw[i]))) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      line.toks.push_back({std::string(raw.substr(i, j - i)), i + 1});
      i = j;
    }
    line.end_col = raw.size() + 1;
    if (line.toks.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    last_line = no;
    const std::string& t0 = line.toks[0].text;
    if (t0.front() == '[') {
      if (line.toks.size() != 1 || t0.back() != ']') fail(line, 0, "malformed section header");
      const std::string name = t0.substr(1, t0.size() - 2);
      if (!kSections.count(name)) fail(line, 0, "unknown section [" + name + "]");
      if (sections.count(name)) fail(line, 0, "duplicate section [" + name + "]");
      cur = &sections[name];
      cur->header_line = no;
    } else {
      if (!cur) fail(line, 0, "content before the first section");
      cur->lines.push_back(std::move(line));
    }
    if (eol == text.size()) break;
  }
  const std::size_t end_line = last_line + 1;
  auto need = [&](const std::string& name) -> const Section& {
    const auto it = sections.find(name);
    if (it == sections.end()) throw ParseError(end_line, 1, "missing section [" + name + "]");
    return it->second;
  };

  ProblemFile p;
  {
    const Section& s = need("alphabets");
    for (const Line& l : s.lines) {
      const std::string& name = l.toks[0].text;
      Alphabet* slot = name == "X" ? &p.x : name == "Y" ? &p.y : name == "R" ? &p.recon : nullptr;
      if (!slot) fail(l, 0, "unknown alphabet '" + name + "' (expected X, Y or R)");
      if (slot->size() != 0) fail(l, 0, "alphabet '" + name + "' declared twice");
      *slot = parse_alphabet_line(l);
    }
    if (p.x.size() == 0 || p.y.size() == 0)
      throw ParseError(s.header_line, 1, "[alphabets] must declare both X and Y");
  }
  const std::size_t nx = p.x.size(), ny = p.y.size();
  {
    const Section& s = need("pmf");
    check_row_count(s, nx, "pmf");
    double total = 0.0;
    for (const Line& l : s.lines) {
      auto row = decimal_row(l, 0, ny, "a pmf row");
      for (double v : row) total += v;
      if (total > 1.0 + kFileSumTolerance)
        fail(l, 0, "pmf entries sum to " + std::to_string(total) + " by this row, beyond 1 + 1e-6");
      p.pmf.push_back(std::move(row));
    }
    if (total < 1.0 - kFileSumTolerance)
      fail(s.lines.back(), 0, "pmf entries sum to " + std::to_string(total) + ", below 1 - 1e-6");
  }
  p.f = parse_label_table(need("f"), "f", nx, ny);
  if (sections.count("f2")) p.f2 = parse_label_table(sections["f2"], "f2", nx, ny);
  for (const char* dn : {"d1", "d2"}) {
    if (!sections.count(dn)) continue;
    const Section& s = sections[dn];
    if (p.recon.size() == 0) throw ParseError(s.header_line, 1, std::string("[") + dn + "] needs alphabet R");
    const auto& fn = std::string(dn) == "d1" ? p.f : p.f2;
    if (fn.empty()) throw ParseError(s.header_line, 1, "[d2] needs [f2]");
    if (s.lines.empty()) throw ParseError(s.header_line, 1, std::string("[") + dn + "] is empty");
    (std::string(dn) == "d1" ? p.d1 : p.d2) = parse_distortion(s, dn, fn, p.recon);
  }
  if (sections.count("budgets")) {
    const Section& s = sections["budgets"];
    if (s.lines.size() != 1) throw ParseError(s.header_line, 1, "[budgets] takes one line 'D1 D2'");
    const auto b = decimal_row(s.lines[0], 0, 2, "[budgets]");
    p.budgets = std::make_pair(b[0], b[1]);
  }
  std::size_t nu = 1, nt = 1;
  if (sections.count("U")) {
    p.channels["U"] = parse_channel(sections["U"], "U", nx);
    nu = p.channels["U"].symbols.size();
  }
  if (sections.count("T")) {
    p.channels["T"] = parse_channel(sections["T"], "T", nu);
    nt = p.channels["T"].symbols.size();
  }
  if (sections.count("V")) p.channels["V"] = parse_channel(sections["V"], "V", nx * nt);
  if (sections.count("W")) p.channels["W"] = parse_channel(sections["W"], "W", nu * ny);
  return p;
}

std::string serialize_problem(const ProblemFile& p) {
  std::ostringstream os;
  os << "[alphabets]\n";
  for (const Alphabet* a : {&p.x, &p.y, &p.recon}) {
    if (a->size() == 0) continue;
    os << a->name;
    for (const auto& s : a->symbols) os << ' ' << s;
    os << '\n';
  }
  os << "[pmf]\n";
  for (const auto& row : p.pmf) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << num(row[i]);
    os << '\n';
  }
  auto table = [&](const char* name, const std::vector<std::vector<std::string>>& t) {
    if (t.empty()) return;
    os << '[' << name << "]\n";
    for (const auto& row : t) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << row[i];
      os << '\n';
    }
  };
  table("f", p.f);
  table("f2", p.f2);
  auto dist = [&](const char* name, const std::optional<ProblemDistortion>& d) {
    if (!d) return;
    os << '[' << name << "]\n";
    if (d->sign) {
      os << "sign\n";
      return;
    }
    for (std::size_t r = 0; r < d->rows.size(); ++r) {
      os << d->labels[r];
      for (double v : d->rows[r]) os << ' ' << num(v);
      os << '\n';
    }
  };
  dist("d1", p.d1);
  dist("d2", p.d2);
  if (p.budgets) os << "[budgets]\n" << num(p.budgets->first) << ' ' << num(p.budgets->second) << '\n';
  for (const char* name : {"U", "T", "V", "W"}) {
    const auto it = p.channels.find(name);
    if (it == p.channels.end()) continue;
    os << '[' << name << "]\nsymbols";
    for (const auto& s : it->second.symbols) os << ' ' << s;
    os << '\n';
    for (const auto& row : it->second.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? " " : "") << num(row[i]);
      os << '\n';
    }
  }
  return os.str();
}

ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open problem file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

JointPmf ProblemFile::pxy() const {
  std::vector<double> flat;
  for (const auto& row : pmf) flat.insert(flat.end(), row.begin(), row.end());
  return make_pxy(x, y, normalized(std::move(flat)));
}

namespace {
FunctionSpec function_from(const ProblemFile& p, const std::vector<std::vector<std::string>>& t,
                           const std::string& name) {
  if (t.empty()) throw ValidationError("problem file has no [" + name + "] table");
  return FunctionSpec::from_labels(p.x, p.y, name == "f" ? "F" : "F2",
                                   [&](std::size_t xi, std::size_t yi) { return t[xi][yi]; });
}

Distortion distortion_from(const ProblemDistortion& d, const FunctionSpec& f, const Alphabet& recon) {
  if (d.sign) return sign_distortion(f.codomain, recon);
  Distortion out{recon, std::vector<double>(f.codomain.size() * recon.size(), 0.0)};
  for (std::size_t r = 0; r < d.labels.size(); ++r) {
    const std::size_t a = f.codomain.index_of(d.labels[r]);
    for (std::size_t c = 0; c < recon.size(); ++c) out.table[a * recon.size() + c] = d.rows[r][c];
  }
  return out;
}
}  // namespace

FunctionSpec ProblemFile::function() const { return function_from(*this, f, "f"); }

RdConstraint ProblemFile::rd() const {
  if (!has_rd()) throw ValidationError("rate-distortion mode needs [f2], [d1], [d2] and [budgets]");
  RdConstraint c;
  c.f1 = function_from(*this, f, "f");
  c.f2 = function_from(*this, f2, "f2");
  c.d1 = distortion_from(*d1, c.f1, recon);
  c.d2 = distortion_from(*d2, c.f2, recon);
  c.D1 = budgets->first;
  c.D2 = budgets->second;
  return c;
}

AuxiliarySystem ProblemFile::auxiliaries() const {
  AuxiliarySystem s;
  s.base = pxy();
  s.u_ch = build_channel(channels, "U", {x});
  s.t_ch = build_channel(channels, "T", {s.u_ch.to()});
  s.v_ch = build_channel(channels, "V", {x, s.t_ch.to()});
  s.w_ch = build_channel(channels, "W", {s.u_ch.to(), y});
  const JointPmf j = s.joint();
  const std::size_t nx = x.size(), ny = y.size(), nt = s.t_ch.to().size(), nu = s.u_ch.to().size();
  const auto vm = j.marginal_table({"V", "T", "X"});
  s.v_sets.assign(s.v_ch.to().size(), {});
  for (std::size_t v = 0; v < s.v_sets.size(); ++v)
    for (std::size_t l = 0; l < nt * nx; ++l)
      if (positive(vm[v * nt * nx + l])) s.v_sets[v].push_back(l);
  const auto wm = j.marginal_table({"W", "T", "U", "Y"});
  const std::size_t nl = nt * nu * ny;
  s.w_sets.assign(s.w_ch.to().size(), {});
  for (std::size_t w = 0; w < s.w_sets.size(); ++w)
    for (std::size_t l = 0; l < nl; ++l)
      if (positive(wm[w * nl + l])) s.w_sets[w].push_back(l);
  return s;
}

}  // namespace coopcomp
