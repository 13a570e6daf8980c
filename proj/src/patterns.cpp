#include "andpe/patterns.hpp"

#include <bit>
#include <cctype>

namespace andpe {

PositionMask full_mask(std::size_t arity) {
  if (arity > kMaxArity) throw std::invalid_argument("arity exceeds " + std::to_string(kMaxArity));
  return arity == kMaxArity ? ~PositionMask{0} : (PositionMask{1} << arity) - 1;
}

GroundnessPattern::GroundnessPattern(std::size_t arity, PositionMask mask) : arity_(arity), mask_(mask) {
  if ((mask & ~full_mask(arity)) != 0) throw std::invalid_argument("groundness position beyond arity");
}

GroundnessPattern GroundnessPattern::of(std::size_t arity, std::initializer_list<std::size_t> positions) {
  PositionMask m = 0;
  for (std::size_t p : positions) {
    if (p == 0 || p > arity) throw std::invalid_argument("groundness position out of range");
    m |= bit(p);
  }
  return {arity, m};
}

namespace {

std::vector<std::size_t> mask_positions(PositionMask m) {
  std::vector<std::size_t> out;
  while (m) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(m)) + 1);
    m &= m - 1;
  }
  return out;
}

void check_arity(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("pattern arity mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

std::vector<std::size_t> GroundnessPattern::positions() const { return mask_positions(mask_); }

std::string mask_to_string(PositionMask m) {
  std::string out = "{";
  bool first = true;
  for (std::size_t p : mask_positions(m)) {
    if (!first) out += ',';
    out += std::to_string(p);
    first = false;
  }
  return out + "}";
}

std::string GroundnessPattern::to_string() const { return mask_to_string(mask_); }

SharingPattern::SharingPattern(std::size_t arity, std::vector<PositionMask> groups) : groups_(std::move(groups)) {
  check_arity(arity, groups_.size());
  PositionMask full = full_mask(arity);
  for (std::size_t i = 1; i <= arity; ++i) {
    if ((groups_[i - 1] & ~full) != 0) throw std::invalid_argument("sharing position beyond arity");
    groups_[i - 1] |= bit(i);
  }
  for (std::size_t i = 1; i <= arity; ++i)
    for (std::size_t j : mask_positions(groups_[i - 1])) groups_[j - 1] |= bit(i);
}

SharingPattern SharingPattern::independent(std::size_t arity) {
  return SharingPattern(arity, std::vector<PositionMask>(arity, 0));
}

SharingPattern SharingPattern::full(std::size_t arity) {
  return SharingPattern(arity, std::vector<PositionMask>(arity, full_mask(arity)));
}

SharingPattern SharingPattern::of(std::initializer_list<std::initializer_list<std::size_t>> groups) {
  std::vector<PositionMask> g;
  for (const auto& grp : groups) {
    PositionMask m = 0;
    for (std::size_t p : grp) {
      if (p == 0 || p > groups.size()) throw std::invalid_argument("sharing position out of range");
      m |= bit(p);
    }
    g.push_back(m);
  }
  return SharingPattern(groups.size(), std::move(g));
}

SharingPattern SharingPattern::from_pairs(std::size_t arity, const std::set<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<PositionMask> g(arity, 0);
  for (auto [i, j] : pairs) {
    if (i == 0 || j == 0 || i > arity || j > arity) throw std::invalid_argument("sharing position out of range");
    g[i - 1] |= bit(j);
  }
  return SharingPattern(arity, std::move(g));
}

bool SharingPattern::is_independent() const {
  for (std::size_t i = 1; i <= arity(); ++i)
    if (groups_[i - 1] != bit(i)) return false;
  return true;
}

bool SharingPattern::subset_of(const SharingPattern& o) const {
  check_arity(arity(), o.arity());
  for (std::size_t i = 0; i < groups_.size(); ++i)
    if ((groups_[i] & ~o.groups_[i]) != 0) return false;
  return true;
}

std::set<std::pair<std::size_t, std::size_t>> SharingPattern::pairs() const {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 1; i <= arity(); ++i)
    for (std::size_t j : mask_positions(groups_[i - 1]))
      if (j > i) out.emplace(i, j);
  return out;
}

std::string SharingPattern::to_string() const {
  std::string out = "<";
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (i) out += ',';
    out += mask_to_string(groups_[i]);
  }
  return out + ">";
}

GroundnessPattern glb_groundness(const GroundnessPattern& a, const GroundnessPattern& b) {
  check_arity(a.arity(), b.arity());
  return {a.arity(), a.mask() | b.mask()};
}

GroundnessPattern meet_exits(const GroundnessPattern& a, const GroundnessPattern& b) {
  check_arity(a.arity(), b.arity());
  return {a.arity(), a.mask() & b.mask()};
}

SharingPattern lub_sharing(const SharingPattern& a, const SharingPattern& b) {
  check_arity(a.arity(), b.arity());
  std::vector<PositionMask> g(a.arity());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = a.groups()[i] | b.groups()[i];
  return SharingPattern(a.arity(), std::move(g));
}

std::vector<Term> ground_args(const GroundnessPattern& p, const Atom& a) {
  check_arity(p.arity(), a.arity());
  std::vector<Term> out;
  for (std::size_t j : p.positions()) out.push_back(a.args[j - 1]);
  return out;
}

std::set<std::string> ground_vars(const GroundnessPattern& p, const Atom& a) {
  std::set<std::string> out;
  for (const Term& t : ground_args(p, a)) collect_vars(t, out);
  return out;
}

VarPair::VarPair(std::string a, std::string b) : first(std::move(a)), second(std::move(b)) {
  if (second < first) std::swap(first, second);
}

std::set<VarPair> shared_pairs(const SharingPattern& m, const Atom& a) {
  check_arity(m.arity(), a.arity());
  std::set<VarPair> out;
  for (auto [i, j] : m.pairs()) {
    std::set<std::string> vi = vars(a.args[i - 1]);
    std::set<std::string> vj = vars(a.args[j - 1]);
    for (const std::string& x : vi)
      for (const std::string& y : vj)
        if (x != y) out.emplace(x, y);
  }
  return out;
}

void PatternTable::set(const PatternKey& key, const SuccessPattern& success) {
  std::size_t n = key.pred.arity;
  check_arity(n, key.gr.arity());
  check_arity(n, key.sh.arity());
  check_arity(n, success.gr.arity());
  check_arity(n, success.sh.arity());
  rows_.insert_or_assign(key, success);
}

const SuccessPattern* PatternTable::find(const PatternKey& key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

void PatternTable::merge_from(const PatternTable& other) {
  for (const auto& [k, v] : other.rows_) rows_.insert_or_assign(k, v);
}

std::string format_row(const PatternKey& key, const SuccessPattern& s) {
  return key.pred.to_string() + " : gr " + key.gr.to_string() + " -> " + s.gr.to_string() + " ; sh " +
         key.sh.to_string() + " -> " + s.sh.to_string();
}

std::string format_entry(const EntryPoint& e) {
  return "entry " + e.pred.to_string() + " gr " + e.gr.to_string() + " sh " + e.sh.to_string();
}

std::string PatternTable::to_text() const {
  std::string out;
  for (const auto& [k, v] : rows_) out += format_row(k, v) + "\n";
  return out;
}

PatternFormatError::PatternFormatError(const std::string& msg, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

namespace {

class Scanner {
 public:
  Scanner(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const { throw PatternFormatError(msg, line_); }

  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool done() {
    ws();
    return i_ >= s_.size();
  }
  bool peek_is(std::string_view lit) {
    ws();
    return s_.substr(i_, lit.size()) == lit;
  }
  bool accept(std::string_view lit) {
    if (!peek_is(lit)) return false;
    i_ += lit.size();
    return true;
  }
  void expect(std::string_view lit) {
    if (!accept(lit)) fail("expected '" + std::string(lit) + "'");
  }
  bool accept_word(std::string_view w) {
    ws();
    if (s_.substr(i_, w.size()) != w) return false;
    std::size_t e = i_ + w.size();
    if (e < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[e])) || s_[e] == '_')) return false;
    i_ = e;
    return true;
  }

  std::size_t number() {
    ws();
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (start == i_) fail("expected a number");
    if (i_ - start > 6) fail("number too large");
    return std::stoul(std::string(s_.substr(start, i_ - start)));
  }

  // Predicate name: identifier, symbol run or quoted atom, up to '/'.
  std::string pred_name() {
    ws();
    if (i_ < s_.size() && s_[i_] == '\'') {
      std::size_t e = s_.find('\'', i_ + 1);
      if (e == std::string_view::npos) fail("unterminated quoted name");
      std::string n(s_.substr(i_ + 1, e - i_ - 1));
      i_ = e + 1;
      if (n.empty()) fail("empty predicate name");
      return n;
    }
    std::size_t slash = s_.rfind('/', s_.find_first_of(" \t:", i_) == std::string_view::npos
                                          ? s_.size()
                                          : s_.find_first_of(" \t:", i_));
    if (slash == std::string_view::npos || slash <= i_) fail("expected pred/arity");
    std::string n(s_.substr(i_, slash - i_));
    i_ = slash;
    return n;
  }

  PredicateId pred() {
    std::string n = pred_name();
    expect("/");
    std::size_t a = number();
    if (a > kMaxArity) fail("arity exceeds " + std::to_string(kMaxArity));
    return {n, a};
  }

  PositionMask set(std::size_t arity) {
    expect("{");
    PositionMask m = 0;
    if (!accept("}")) {
      do {
        std::size_t p = number();
        if (p == 0 || p > arity) fail("position " + std::to_string(p) + " outside 1.." + std::to_string(arity));
        m |= bit(p);
      } while (accept(","));
      expect("}");
    }
    return m;
  }

  GroundnessPattern groundness(std::size_t arity) { return {arity, set(arity)}; }

  SharingPattern sharing(std::size_t arity) {
    expect("<");
    std::vector<PositionMask> g;
    if (!accept(">")) {
      do g.push_back(set(arity));
      while (accept(","));
      expect(">");
    }
    if (g.size() != arity)
      fail("sharing pattern has " + std::to_string(g.size()) + " groups for arity " + std::to_string(arity));
    return SharingPattern(arity, std::move(g));
  }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
  std::size_t line_;
};

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\'') quoted = !quoted;
    if (line[i] == '%' && !quoted) return line.substr(0, i);
  }
  return line;
}

EntryPoint scan_entry_body(Scanner& sc) {
  EntryPoint e;
  e.pred = sc.pred();
  if (!sc.accept_word("gr")) sc.fail("expected 'gr'");
  e.gr = sc.groundness(e.pred.arity);
  e.sh = sc.accept_word("sh") ? sc.sharing(e.pred.arity) : SharingPattern::independent(e.pred.arity);
  if (!sc.done()) sc.fail("trailing text after entry");
  return e;
}

}  // namespace

PatternFile parse_pattern_text(std::string_view text) {
  PatternFile out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    line = strip_comment(line);
    Scanner sc(line, line_no);
    if (sc.done()) continue;
    if (sc.accept_word("entry")) {
      out.entries.push_back(scan_entry_body(sc));
      continue;
    }
    PatternKey key;
    key.pred = sc.pred();
    std::size_t n = key.pred.arity;
    sc.expect(":");
    if (!sc.accept_word("gr")) sc.fail("expected 'gr'");
    key.gr = sc.groundness(n);
    sc.expect("->");
    SuccessPattern s;
    s.gr = sc.groundness(n);
    sc.expect(";");
    if (!sc.accept_word("sh")) sc.fail("expected 'sh'");
    key.sh = sc.sharing(n);
    sc.expect("->");
    s.sh = sc.sharing(n);
    if (!sc.done()) sc.fail("trailing text after row");
    out.table.set(key, s);
  }
  return out;
}

GroundnessPattern parse_groundness(std::string_view text, std::size_t arity) {
  Scanner sc(text, 1);
  GroundnessPattern g = sc.groundness(arity);
  if (!sc.done()) sc.fail("trailing text after groundness pattern");
  return g;
}

SharingPattern parse_sharing(std::string_view text, std::size_t arity) {
  Scanner sc(text, 1);
  SharingPattern s = sc.sharing(arity);
  if (!sc.done()) sc.fail("trailing text after sharing pattern");
  return s;
}

EntryPoint parse_entry_spec(std::string_view text) {
  Scanner sc(text, 1);
  sc.accept_word("entry");
  return scan_entry_body(sc);
}

}  // namespace andpe
