#include <cctype>
#include <map>

#include "andpe/syntax.hpp"

namespace andpe {

namespace {

struct Op {
  int priority;
  int left_max;
  int right_max;
  const char* sep;
};

const Op* infix_op(const Term& t) {
  static const std::map<std::string, Op> ops = {
      {"&", {1050, 1049, 1050, " & "}}, {",", {1000, 999, 1000, ","}}, {"=", {700, 699, 699, "="}},
      {"is", {700, 699, 699, " is "}},  {"<", {700, 699, 699, "<"}},   {">", {700, 699, 699, ">"}},
      {"=<", {700, 699, 699, "=<"}},    {">=", {700, 699, 699, ">="}}, {"=:=", {700, 699, 699, "=:="}},
      {"+", {500, 500, 499, "+"}},      {"-", {500, 500, 499, "-"}},   {"*", {400, 400, 399, "*"}},
      {"//", {400, 400, 399, "//"}},    {":-", {1200, 1199, 1199, " :- "}},
  };
  if (!t.is_compound() || t.arity() != 2) return nullptr;
  auto it = ops.find(t.name());
  return it == ops.end() ? nullptr : &it->second;
}

bool is_symbol_char(char c) { return std::string_view("+-*/\\^<>=~:.?@#&$").find(c) != std::string_view::npos; }

bool plain_name(const std::string& s) {
  if (s == "[]") return true;
  if (std::islower(static_cast<unsigned char>(s[0]))) {
    for (char c : s)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
  }
  // Symbol atoms print bare unless they could end a clause.
  for (char c : s)
    if (!is_symbol_char(c)) return false;
  return s != "." && s.back() != '.';
}

std::string quote_name(const std::string& s) {
  if (plain_name(s)) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "\\'";
    else if (c == '\\') out += "\\\\";
    else if (c == '\n') out += "\\n";
    else if (c == '\t') out += "\\t";
    else out += c;
  }
  return out + "'";
}

bool is_cons(const Term& t) { return t.is_compound() && t.arity() == 2 && t.name() == "."; }

void print(const Term& t, int max_prio, std::string& out);

void print_list(const Term& t, std::string& out) {
  out += '[';
  Term cur = t;
  bool first = true;
  while (is_cons(cur)) {
    if (!first) out += ',';
    print(cur.arg(0), 999, out);
    first = false;
    cur = cur.arg(1);
  }
  if (!(cur.is_constant() && cur.name() == "[]")) {
    out += '|';
    print(cur, 999, out);
  }
  out += ']';
}

void print(const Term& t, int max_prio, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::Variable:
      out += t.name();
      return;
    case Term::Kind::Integer:
      out += std::to_string(t.value());
      return;
    case Term::Kind::Compound:
      break;
  }
  if (is_cons(t)) {
    print_list(t, out);
    return;
  }
  if (const Op* op = infix_op(t)) {
    bool paren = op->priority > max_prio;
    if (paren) out += '(';
    print(t.arg(0), op->left_max, out);
    std::string sep = op->sep;
    std::string right;
    print(t.arg(1), op->right_max, right);
    if (sep.back() != ' ' && !right.empty() && is_symbol_char(right.front()) && is_symbol_char(sep.back())) sep += ' ';
    if (sep.front() != ' ' && !out.empty() && is_symbol_char(out.back()) && is_symbol_char(sep.front()))
      sep.insert(sep.begin(), ' ');
    out += sep;
    out += right;
    if (paren) out += ')';
    return;
  }
  std::string name = quote_name(t.name());
  if (t.arity() == 0) {
    // A bare operator atom in operand position needs parentheses.
    bool op_atom = max_prio < 1200 && !name.empty() && is_symbol_char(name.front());
    if (op_atom) out += '(' + name + ')';
    else out += name;
    return;
  }
  out += name;
  out += '(';
  for (std::size_t i = 0; i < t.arity(); ++i) {
    if (i) out += ',';
    print(t.arg(i), 999, out);
  }
  out += ')';
}

void print_atom(const Atom& a, int max_prio, std::string& out) { print(a.as_term(), max_prio, out); }

void print_conj(const std::vector<Atom>& atoms, std::string& out) {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += ", ";
    print_atom(atoms[i], 999, out);
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::string out;
  print(t, 1200, out);
  return out;
}

std::string to_string(const Atom& a) {
  std::string out;
  print_atom(a, 1200, out);
  return out;
}

std::string normalized_variable_name(std::size_t n) {
  std::string s(1, static_cast<char>('A' + n % 26));
  if (n >= 26) s += std::to_string(n / 26);
  return s;
}

Clause normalize_variables(const Clause& c) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  auto visit = [&](const Atom& a) {
    for (const std::string& v : ordered_vars(a))
      if (seen.insert(v).second) order.push_back(v);
  };
  visit(c.head);
  for (const Atom& a : c.body_atoms()) visit(a);
  // Bind through placeholders so that clashes with A, B, ... cannot chain.
  Substitution s = Substitution::from_bindings([&] {
    std::map<std::string, Term> tmp;
    for (std::size_t i = 0; i < order.size(); ++i) tmp.emplace(order[i], Term::variable("\x02" + std::to_string(i)));
    return tmp;
  }());
  Clause mid = s.apply(c);
  std::map<std::string, Term> fin;
  for (std::size_t i = 0; i < order.size(); ++i)
    fin.emplace("\x02" + std::to_string(i), Term::variable(normalized_variable_name(i)));
  return Substitution::from_bindings(std::move(fin)).apply(mid);
}

std::string to_string(const Clause& c0, PrintOptions opts) {
  Clause c = opts.normalize_variables ? normalize_variables(c0) : c0;
  std::string out;
  print_atom(c.head, 1199, out);
  if (!c.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      if (i) out += ", ";
      if (const Atom* a = std::get_if<Atom>(&c.body[i])) {
        print_atom(*a, 999, out);
      } else {
        const auto& pg = std::get<ParGroup>(c.body[i]);
        out += '(';
        print_conj(pg.left, out);
        out += " & ";
        print_conj(pg.right, out);
        out += ')';
      }
    }
  }
  out += '.';
  return out;
}

std::string to_string(const Program& p, PrintOptions opts) {
  std::string out;
  for (const Clause& c : p.clauses()) {
    out += to_string(c, opts);
    out += '\n';
  }
  return out;
}

std::string to_string(std::span<const Atom> query) {
  std::string out;
  print_conj(std::vector<Atom>(query.begin(), query.end()), out);
  return out;
}

}  // namespace andpe
