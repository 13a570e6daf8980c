#include "andpe/term.hpp"

#include <atomic>
#include <stdexcept>

namespace andpe {

namespace {

const std::string kNil = "[]";
const std::string kCons = ".";

}  // namespace

Term Term::variable(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty variable name");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->name = std::move(name);
  n->ground = false;
  return Term(std::move(n));
}

Term Term::integer(std::int64_t value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Integer;
  n->value = value;
  return Term(std::move(n));
}

Term Term::compound(std::string functor, std::vector<Term> args) {
  if (functor.empty()) throw std::invalid_argument("empty functor name");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Compound;
  n->name = std::move(functor);
  for (const Term& a : args) n->ground = n->ground && a.is_ground();
  n->args = std::move(args);
  return Term(std::move(n));
}

Term Term::nil() { return compound(kNil); }

Term Term::cons(Term head, Term tail) { return compound(kCons, {std::move(head), std::move(tail)}); }

Term Term::list(std::vector<Term> items, std::optional<Term> tail) {
  Term out = tail ? *tail : nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) out = cons(*it, out);
  return out;
}

const std::string& Term::name() const {
  if (is_integer()) throw std::logic_error("integer term has no name");
  return node_->name;
}

std::int64_t Term::value() const {
  if (!is_integer()) throw std::logic_error("term is not an integer");
  return node_->value;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::Variable:
      return a.node_->name == b.node_->name;
    case Term::Kind::Integer:
      return a.node_->value == b.node_->value;
    case Term::Kind::Compound:
      return a.node_->name == b.node_->name && a.node_->args == b.node_->args;
  }
  return false;
}

// Standard order: variables < integers < compounds; compounds by arity,
// then name, then arguments left to right.
std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  switch (a.kind()) {
    case Term::Kind::Variable:
      return a.node_->name <=> b.node_->name;
    case Term::Kind::Integer:
      return a.node_->value <=> b.node_->value;
    case Term::Kind::Compound: {
      if (auto c = a.arity() <=> b.arity(); c != 0) return c;
      if (auto c = a.node_->name <=> b.node_->name; c != 0) return c;
      for (std::size_t i = 0; i < a.arity(); ++i)
        if (auto c = a.arg(i) <=> b.arg(i); c != 0) return c;
      return std::strong_ordering::equal;
    }
  }
  return std::strong_ordering::equal;
}

bool Clause::has_parallel() const {
  for (const BodyGoal& g : body)
    if (std::holds_alternative<ParGroup>(g)) return true;
  return false;
}

std::vector<Atom> Clause::body_atoms() const {
  std::vector<Atom> out;
  for (const BodyGoal& g : body) {
    if (const Atom* a = std::get_if<Atom>(&g)) {
      out.push_back(*a);
    } else {
      const auto& pg = std::get<ParGroup>(g);
      out.insert(out.end(), pg.left.begin(), pg.left.end());
      out.insert(out.end(), pg.right.begin(), pg.right.end());
    }
  }
  return out;
}

bool is_comparison(const PredicateId& pred) {
  if (pred.arity != 2) return false;
  const std::string& n = pred.name;
  return n == ">" || n == "<" || n == ">=" || n == "=<" || n == "=:=";
}

bool is_builtin(const PredicateId& pred) {
  if (pred.arity != 2) return false;
  return is_comparison(pred) || pred.name == "is" || pred.name == "=";
}

Program::Program(std::vector<Clause> clauses) : clauses_(std::move(clauses)) {
  for (std::size_t i = 0; i < clauses_.size(); ++i) {
    PredicateId id = clauses_[i].head.id();
    if (is_builtin(id)) throw std::invalid_argument("builtin " + id.to_string() + " cannot be defined");
    user_predicates_.insert(id);
    index_[id].push_back(i);
  }
}

std::span<const std::size_t> Program::clauses_of(const PredicateId& pred) const {
  auto it = index_.find(pred);
  if (it == index_.end()) return {};
  return it->second;
}

// ---------------------------------------------------------------------------
// Substitutions

namespace {

using Bindings = std::map<std::string, Term>;

Term apply_map(const Term& t, const Bindings& b) {
  if (t.is_ground()) return t;
  if (t.is_variable()) {
    auto it = b.find(t.name());
    return it == b.end() ? t : it->second;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(apply_map(a, b));
    changed = changed || !(args.back() == a);
  }
  return changed ? Term::compound(t.name(), std::move(args)) : t;
}

// Fully dereferences `t` through triangular bindings; `stack` detects cycles.
Term resolve(const Term& t, const Bindings& b, std::map<std::string, Term>& done,
             std::set<std::string>& stack) {
  if (t.is_ground()) return t;
  if (t.is_variable()) {
    const std::string& v = t.name();
    if (auto d = done.find(v); d != done.end()) return d->second;
    auto it = b.find(v);
    if (it == b.end()) return t;
    if (!stack.insert(v).second) throw std::invalid_argument("cyclic binding for " + v);
    Term r = resolve(it->second, b, done, stack);
    stack.erase(v);
    done.emplace(v, r);
    return r;
  }
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(resolve(a, b, done, stack));
  return Term::compound(t.name(), std::move(args));
}

}  // namespace

Substitution Substitution::from_bindings(std::map<std::string, Term> bindings) {
  std::erase_if(bindings, [](const auto& b) { return b.second.is_variable() && b.second.name() == b.first; });
  std::map<std::string, Term> done;
  std::set<std::string> stack;
  Substitution s;
  for (const auto& [v, t] : bindings) {
    Term r = resolve(Term::variable(v), bindings, done, stack);
    if (r.is_variable() && r.name() == v) continue;
    s.bindings_.emplace(v, std::move(r));
  }
  // A variable may resolve to a term containing itself only through a cycle,
  // which resolve() already rejected; the result is idempotent.
  return s;
}

const Term* Substitution::lookup(const std::string& var) const {
  auto it = bindings_.find(var);
  return it == bindings_.end() ? nullptr : &it->second;
}

bool Substitution::is_renaming() const {
  std::set<std::string> targets;
  for (const auto& [v, t] : bindings_) {
    if (!t.is_variable()) return false;
    if (!targets.insert(t.name()).second) return false;
  }
  return true;
}

Term Substitution::apply(const Term& t) const { return bindings_.empty() ? t : apply_map(t, bindings_); }

Atom Substitution::apply(const Atom& a) const {
  Atom out{a.predicate, {}};
  out.args.reserve(a.args.size());
  for (const Term& t : a.args) out.args.push_back(apply(t));
  return out;
}

Clause Substitution::apply(const Clause& c) const {
  Clause out{apply(c.head), {}};
  out.body.reserve(c.body.size());
  for (const BodyGoal& g : c.body) {
    if (const Atom* a = std::get_if<Atom>(&g)) {
      out.body.emplace_back(apply(*a));
    } else {
      const auto& pg = std::get<ParGroup>(g);
      ParGroup r;
      for (const Atom& a2 : pg.left) r.left.push_back(apply(a2));
      for (const Atom& a2 : pg.right) r.right.push_back(apply(a2));
      out.body.emplace_back(std::move(r));
    }
  }
  return out;
}

Term apply_subst(const Term& t, const Substitution& s) { return s.apply(t); }
Atom apply_subst(const Atom& a, const Substitution& s) { return s.apply(a); }

// ---------------------------------------------------------------------------
// Unification

namespace {

Term walk(Term t, const Bindings& b) {
  while (t.is_variable()) {
    auto it = b.find(t.name());
    if (it == b.end()) break;
    t = it->second;
  }
  return t;
}

bool occurs(const std::string& v, const Term& t, const Bindings& b) {
  Term w = walk(t, b);
  if (w.is_variable()) return w.name() == v;
  if (w.is_integer() || w.is_ground()) return false;
  for (const Term& a : w.args())
    if (occurs(v, a, b)) return true;
  return false;
}

bool unify(const Term& x, const Term& y, Bindings& b) {
  std::vector<std::pair<Term, Term>> work{{x, y}};
  while (!work.empty()) {
    auto [l, r] = work.back();
    work.pop_back();
    l = walk(l, b);
    r = walk(r, b);
    if (l.is_variable()) {
      if (r.is_variable() && r.name() == l.name()) continue;
      if (occurs(l.name(), r, b)) return false;
      b.emplace(l.name(), r);
    } else if (r.is_variable()) {
      if (occurs(r.name(), l, b)) return false;
      b.emplace(r.name(), l);
    } else if (l.is_integer() || r.is_integer()) {
      if (!(l.is_integer() && r.is_integer() && l.value() == r.value())) return false;
    } else {
      if (l.name() != r.name() || l.arity() != r.arity()) return false;
      for (std::size_t i = l.arity(); i-- > 0;) work.emplace_back(l.arg(i), r.arg(i));
    }
  }
  return true;
}

}  // namespace

std::optional<Substitution> mgu(const Term& a, const Term& b) {
  Bindings bind;
  if (!unify(a, b, bind)) return std::nullopt;
  return Substitution::from_bindings(std::move(bind));
}

std::optional<Substitution> mgu(const Atom& a, const Atom& b) {
  if (a.predicate != b.predicate || a.args.size() != b.args.size()) return std::nullopt;
  Bindings bind;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!unify(a.args[i], b.args[i], bind)) return std::nullopt;
  return Substitution::from_bindings(std::move(bind));
}

namespace {

bool match_term(const Term& g, const Term& s, Bindings& b) {
  if (g.is_variable()) {
    auto [it, fresh] = b.emplace(g.name(), s);
    return fresh || it->second == s;
  }
  if (g.is_integer()) return s.is_integer() && s.value() == g.value();
  if (!s.is_compound() || s.name() != g.name() || s.arity() != g.arity()) return false;
  for (std::size_t i = 0; i < g.arity(); ++i)
    if (!match_term(g.arg(i), s.arg(i), b)) return false;
  return true;
}

}  // namespace

std::optional<Substitution> match(const Atom& general, const Atom& specific) {
  if (general.predicate != specific.predicate || general.args.size() != specific.args.size())
    return std::nullopt;
  Bindings b;
  for (std::size_t i = 0; i < general.args.size(); ++i)
    if (!match_term(general.args[i], specific.args[i], b)) return std::nullopt;
  Substitution s;
  for (auto& [v, t] : b)
    if (!(t.is_variable() && t.name() == v)) s.bindings_.emplace(v, t);
  return s;
}

// ---------------------------------------------------------------------------
// Variables and renaming

namespace {
std::atomic<std::uint64_t> fresh_counter{0};
}

std::string fresh_variable_name() { return "_G" + std::to_string(fresh_counter.fetch_add(1)); }

bool is_reserved_variable_name(std::string_view name) {
  if (name.size() < 3 || name.substr(0, 2) != "_G") return false;
  for (char c : name.substr(2))
    if (c < '0' || c > '9') return false;
  return true;
}

void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.is_ground()) return;
  if (t.is_variable()) {
    out.insert(t.name());
    return;
  }
  for (const Term& a : t.args()) collect_vars(a, out);
}

std::set<std::string> vars(const Term& t) {
  std::set<std::string> out;
  collect_vars(t, out);
  return out;
}

std::set<std::string> vars(const Atom& a) {
  std::set<std::string> out;
  for (const Term& t : a.args) collect_vars(t, out);
  return out;
}

std::set<std::string> vars(std::span<const Atom> query) {
  std::set<std::string> out;
  for (const Atom& a : query)
    for (const Term& t : a.args) collect_vars(t, out);
  return out;
}

std::set<std::string> vars(const Clause& c) {
  std::set<std::string> out = vars(c.head);
  for (const Atom& a : c.body_atoms())
    for (const Term& t : a.args) collect_vars(t, out);
  return out;
}

namespace {

void ordered_vars_into(const Term& t, std::vector<std::string>& out, std::set<std::string>& seen) {
  if (t.is_ground()) return;
  if (t.is_variable()) {
    if (seen.insert(t.name()).second) out.push_back(t.name());
    return;
  }
  for (const Term& a : t.args()) ordered_vars_into(a, out, seen);
}

}  // namespace

std::vector<std::string> ordered_vars(const Atom& a) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const Term& t : a.args) ordered_vars_into(t, out, seen);
  return out;
}

Clause rename_apart(const Clause& c, const std::set<std::string>& avoid) {
  std::map<std::string, Term> ren;
  for (const std::string& v : vars(c)) {
    std::string n;
    do n = fresh_variable_name();
    while (avoid.contains(n));
    ren.emplace(v, Term::variable(std::move(n)));
  }
  return Substitution::from_bindings(std::move(ren)).apply(c);
}

Atom rename_apart(const Atom& a) {
  std::map<std::string, Term> ren;
  for (const std::string& v : vars(a)) ren.emplace(v, Term::variable(fresh_variable_name()));
  return Substitution::from_bindings(std::move(ren)).apply(a);
}

Atom canonical_form(const Atom& a) {
  Bindings ren;
  std::size_t k = 0;
  for (const std::string& v : ordered_vars(a)) ren.emplace(v, Term::variable("_V" + std::to_string(k++)));
  Atom out{a.predicate, {}};
  for (const Term& t : a.args) out.args.push_back(apply_map(t, ren));
  return out;
}

bool is_variant(const Atom& a, const Atom& b) { return canonical_form(a) == canonical_form(b); }

}  // namespace andpe
