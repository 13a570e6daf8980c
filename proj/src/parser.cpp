#include <cctype>
#include <limits>
#include <map>

#include "andpe/syntax.hpp"

namespace andpe {

ParseError::ParseError(const std::string& msg, std::size_t line, std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Var, Name, Int, Open, Close, LBrack, RBrack, Bar, Comma, End, Eof };

struct Token {
  Tok kind;
  std::string text;
  std::int64_t value = 0;
  std::size_t line = 1, col = 1;
  bool quoted = false;
  /// No layout text between this token and the previous one.
  bool adjacent = false;
};

constexpr std::string_view kSymbolChars = "+-*/\\^<>=~:.?@#&$";

bool is_symbol_char(char c) { return kSymbolChars.find(c) != std::string_view::npos; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      bool layout = skip_layout();
      Token t = next();
      t.adjacent = !layout;
      out.push_back(t);
      if (t.kind == Tok::Eof) return out;
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_, col_); }

  char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }
  bool at_end(std::size_t k = 0) const { return pos_ + k >= src_.size(); }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool skip_layout() {
    bool any = false;
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        any = true;
      } else if (c == '%') {
        while (!at_end() && peek() != '\n') advance();
        any = true;
      } else if (c == '/' && peek(1) == '*') {
        advance();
        advance();
        while (!at_end() && !(peek() == '*' && peek(1) == '/')) advance();
        if (at_end()) fail("unterminated block comment");
        advance();
        advance();
        any = true;
      } else {
        break;
      }
    }
    return any;
  }

  Token make(Tok k, std::string text = {}) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.line = tline_;
    t.col = tcol_;
    return t;
  }

  Token next() {
    tline_ = line_;
    tcol_ = col_;
    if (at_end()) return make(Tok::Eof);
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        digits += peek();
        advance();
      }
      if (is_alnum(peek())) fail("malformed number");
      Token t = make(Tok::Int, digits);
      std::uint64_t v = 0;
      for (char d : digits) {
        if (v > (static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) + 1 - (d - '0')) / 10)
          throw ParseError("integer literal out of range", tline_, tcol_);
        v = v * 10 + static_cast<std::uint64_t>(d - '0');
      }
      // 2^63 is only valid as the operand of a negative literal.
      t.value = static_cast<std::int64_t>(v);
      t.quoted = v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
      return t;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (is_alnum(peek())) {
        s += peek();
        advance();
      }
      return make(Tok::Var, s);
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      std::string s;
      while (is_alnum(peek())) {
        s += peek();
        advance();
      }
      return make(Tok::Name, s);
    }
    if (c == '\'') {
      advance();
      std::string s;
      for (;;) {
        if (at_end()) fail("unterminated quoted atom");
        char d = peek();
        advance();
        if (d == '\'') {
          if (peek() == '\'') {
            s += '\'';
            advance();
            continue;
          }
          break;
        }
        if (d == '\\') {
          if (at_end()) fail("unterminated quoted atom");
          char e = peek();
          advance();
          switch (e) {
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            case '\\': s += '\\'; break;
            case '\'': s += '\''; break;
            default: fail(std::string("unknown escape \\") + e);
          }
          continue;
        }
        s += d;
      }
      if (s.empty()) fail("empty quoted atom");
      Token t = make(Tok::Name, s);
      t.quoted = true;
      return t;
    }
    switch (c) {
      case '(': advance(); return make(Tok::Open, "(");
      case ')': advance(); return make(Tok::Close, ")");
      case '[': advance(); return make(Tok::LBrack, "[");
      case ']': advance(); return make(Tok::RBrack, "]");
      case '|': advance(); return make(Tok::Bar, "|");
      case ',': advance(); return make(Tok::Comma, ",");
      default: break;
    }
    if (c == '.' && (at_end(1) || std::isspace(static_cast<unsigned char>(peek(1))) || peek(1) == '%')) {
      advance();
      return make(Tok::End, ".");
    }
    if (is_symbol_char(c)) {
      std::string s;
      while (!at_end() && is_symbol_char(peek())) {
        // A clause-ending '.' terminates a symbol run.
        if (peek() == '.' && (at_end(1) || std::isspace(static_cast<unsigned char>(peek(1))) || peek(1) == '%'))
          break;
        s += peek();
        advance();
      }
      return make(Tok::Name, s);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
  std::size_t tline_ = 1, tcol_ = 1;
};

struct OpInfo {
  int priority;
  enum Type { XFX, XFY, YFX } type;
};

const std::map<std::string, OpInfo, std::less<>>& infix_ops() {
  static const std::map<std::string, OpInfo, std::less<>> ops = {
      {":-", {1200, OpInfo::XFX}}, {"&", {1050, OpInfo::XFY}}, {",", {1000, OpInfo::XFY}},
      {"=", {700, OpInfo::XFX}},   {"is", {700, OpInfo::XFX}}, {"<", {700, OpInfo::XFX}},
      {">", {700, OpInfo::XFX}},   {"=<", {700, OpInfo::XFX}}, {">=", {700, OpInfo::XFX}},
      {"=:=", {700, OpInfo::XFX}}, {"+", {500, OpInfo::YFX}},  {"-", {500, OpInfo::YFX}},
      {"*", {400, OpInfo::YFX}},   {"//", {400, OpInfo::YFX}},
  };
  return ops;
}

constexpr std::string_view kAnonPrefix = "\x01";

class Parser {
 public:
  Parser(std::vector<Token> toks, ParseOptions opts) : toks_(std::move(toks)), opts_(opts) {}

  bool at_eof() const { return cur().kind == Tok::Eof; }

  Clause clause() {
    anon_ = 0;
    const Token& start = cur();
    Term t = term(1200);
    expect_end();
    Clause c;
    if (t.is_compound() && t.name() == ":-" && t.arity() == 2) {
      c.head = to_head(t.arg(0), start);
      body_into(t.arg(1), c.body, start);
    } else {
      c.head = to_head(t, start);
    }
    return name_anonymous(std::move(c));
  }

  std::vector<Atom> query() {
    anon_ = 0;
    const Token& start = cur();
    Term t = term(1200);
    if (cur().kind == Tok::End) advance();
    if (!at_eof()) error("unexpected trailing input");
    std::vector<BodyGoal> goals;
    body_into(t, goals, start);
    Clause c{Atom{"query", {}}, std::move(goals)};
    c = name_anonymous(std::move(c));
    return c.body_atoms();
  }

  Term lone_term() {
    anon_ = 0;
    Term t = term(1200);
    if (cur().kind == Tok::End) advance();
    if (!at_eof()) error("unexpected trailing input");
    Clause c{Atom{"t", {t}}, {}};
    return name_anonymous(std::move(c)).head.args[0];
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& ahead(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  void advance() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  [[noreturn]] void error(const std::string& msg) const { throw ParseError(msg, cur().line, cur().col); }
  [[noreturn]] static void error_at(const Token& t, const std::string& msg) { throw ParseError(msg, t.line, t.col); }

  void expect(Tok k, const char* what) {
    if (cur().kind != k) error(std::string("expected ") + what);
    advance();
  }

  void expect_end() {
    if (cur().kind != Tok::End) error("expected '.' at end of clause");
    advance();
  }

  // Name of an infix operator at the current token, if any.
  std::optional<std::pair<std::string, OpInfo>> infix_here() const {
    const Token& t = cur();
    std::string name;
    if (t.kind == Tok::Comma) name = ",";
    else if (t.kind == Tok::Name && !t.quoted) name = t.text;
    else return std::nullopt;
    auto it = infix_ops().find(name);
    if (it == infix_ops().end()) return std::nullopt;
    return std::make_pair(name, it->second);
  }

  Term term(int max_prio) {
    auto [left, left_prio] = primary(max_prio);
    for (;;) {
      auto op = infix_here();
      if (!op) break;
      const auto& [name, info] = *op;
      if (info.priority > max_prio) break;
      int left_max = info.type == OpInfo::YFX ? info.priority : info.priority - 1;
      int right_max = info.type == OpInfo::XFY ? info.priority : info.priority - 1;
      if (left_prio > left_max) break;
      advance();
      Term right = term(right_max);
      left = Term::compound(name, {left, right});
      left_prio = info.priority;
    }
    return left;
  }

  std::string fresh_anonymous() { return std::string(kAnonPrefix) + std::to_string(anon_++); }

  std::pair<Term, int> primary(int max_prio) {
    const Token t = cur();
    switch (t.kind) {
      case Tok::Int:
        if (t.quoted) error_at(t, "integer literal out of range");
        advance();
        return {Term::integer(t.value), 0};
      case Tok::Var: {
        advance();
        if (t.text == "_") return {Term::variable(fresh_anonymous()), 0};
        if (is_reserved_variable_name(t.text)) error_at(t, "variable name " + t.text + " is reserved");
        return {Term::variable(t.text), 0};
      }
      case Tok::Open: {
        advance();
        Term inner = term(1200);
        expect(Tok::Close, "')'");
        return {inner, 0};
      }
      case Tok::LBrack: return {list(), 0};
      case Tok::Name: {
        advance();
        if (!t.quoted && t.text == "-" && cur().kind == Tok::Int && cur().adjacent) {
          const Token n = cur();
          advance();
          if (n.quoted) return {Term::integer(std::numeric_limits<std::int64_t>::min()), 0};
          return {Term::integer(-n.value), 0};
        }
        if (cur().kind == Tok::Open && cur().adjacent) {
          advance();
          std::vector<Term> args;
          args.push_back(term(999));
          while (cur().kind == Tok::Comma) {
            advance();
            args.push_back(term(999));
          }
          expect(Tok::Close, "')' or ','");
          return {Term::compound(t.text, std::move(args)), 0};
        }
        // A bare operator name used as an atom.
        int prio = 0;
        if (!t.quoted) {
          auto it = infix_ops().find(t.text);
          if (it != infix_ops().end()) prio = std::min(it->second.priority, max_prio);
        }
        return {Term::constant(t.text), prio};
      }
      case Tok::Comma: error("unexpected ','");
      case Tok::End: error("unexpected end of clause");
      case Tok::Eof: error("unexpected end of input");
      default: error("unexpected '" + t.text + "'");
    }
  }

  Term list() {
    expect(Tok::LBrack, "'['");
    if (cur().kind == Tok::RBrack) {
      advance();
      return Term::nil();
    }
    std::vector<Term> items{term(999)};
    while (cur().kind == Tok::Comma) {
      advance();
      items.push_back(term(999));
    }
    std::optional<Term> tail;
    if (cur().kind == Tok::Bar) {
      advance();
      tail = term(999);
    }
    expect(Tok::RBrack, "']'");
    return Term::list(std::move(items), tail);
  }

  static bool callable(const Term& t) { return t.is_compound(); }

  Atom to_atom(const Term& t, const Token& where) const {
    if (!callable(t)) error_at(where, "goal is not callable");
    if (t.name() == "&" && t.arity() == 2) error_at(where, "'&' is only allowed in residual programs");
    if (t.name() == ":-" && t.arity() == 2) error_at(where, "unexpected ':-'");
    return Atom{t.name(), std::vector<Term>(t.args().begin(), t.args().end())};
  }

  Atom to_head(const Term& t, const Token& where) const {
    if (t.is_compound() && t.name() == "," && t.arity() == 2) error_at(where, "clause head is a conjunction");
    Atom a = to_atom(t, where);
    if (is_builtin(a.id())) error_at(where, "builtin " + a.id().to_string() + " cannot be defined");
    return a;
  }

  static void flatten_conj(const Term& t, std::vector<Term>& out) {
    if (t.is_compound() && t.name() == "," && t.arity() == 2) {
      flatten_conj(t.arg(0), out);
      flatten_conj(t.arg(1), out);
    } else {
      out.push_back(t);
    }
  }

  void body_into(const Term& t, std::vector<BodyGoal>& out, const Token& where) const {
    std::vector<Term> goals;
    flatten_conj(t, goals);
    for (const Term& g : goals) {
      if (g.is_compound() && g.name() == "&" && g.arity() == 2) {
        if (!opts_.allow_parallel) error_at(where, "'&' is only allowed in residual programs");
        ParGroup pg;
        std::vector<Term> l, r;
        flatten_conj(g.arg(0), l);
        flatten_conj(g.arg(1), r);
        for (const Term& x : l) pg.left.push_back(to_atom(x, where));
        for (const Term& x : r) {
          if (x.is_compound() && x.name() == "&" && x.arity() == 2)
            error_at(where, "only two-way parallel groups are supported");
          pg.right.push_back(to_atom(x, where));
        }
        out.emplace_back(std::move(pg));
      } else {
        out.emplace_back(to_atom(g, where));
      }
    }
  }

  // Anonymous variables get `_<k>` names that avoid the clause's own names.
  Clause name_anonymous(Clause c) const {
    if (anon_ == 0) return c;
    std::set<std::string> used = vars(c);
    std::map<std::string, Term> ren;
    std::size_t k = 0;
    for (std::size_t i = 0; i < anon_; ++i) {
      std::string n;
      do n = "_" + std::to_string(k++);
      while (used.contains(n));
      ren.emplace(std::string(kAnonPrefix) + std::to_string(i), Term::variable(n));
      used.insert(n);
    }
    return Substitution::from_bindings(std::move(ren)).apply(c);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t anon_ = 0;
  ParseOptions opts_;
};

}  // namespace

Program parse_program(std::string_view source, ParseOptions opts) {
  Parser p(Lexer(source).run(), opts);
  std::vector<Clause> clauses;
  while (!p.at_eof()) clauses.push_back(p.clause());
  try {
    return Program(std::move(clauses));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0, 0);
  }
}

std::vector<Atom> parse_query(std::string_view source) {
  Parser p(Lexer(source).run(), ParseOptions{});
  if (p.at_eof()) return {};
  return p.query();
}

Atom parse_atom(std::string_view source) {
  auto q = parse_query(source);
  if (q.size() != 1) throw ParseError("expected a single atom", 1, 1);
  return q.front();
}

Term parse_term(std::string_view source) {
  Parser p(Lexer(source).run(), ParseOptions{});
  return p.lone_term();
}

}  // namespace andpe
