#pragma once

// Object language of definite logic programs: terms, atoms, clauses,
// programs, substitutions and the unification machinery over them.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace andpe {

class Term {
 public:
  enum class Kind : std::uint8_t { Variable, Integer, Compound };

  static Term variable(std::string name);
  static Term integer(std::int64_t value);
  static Term compound(std::string functor, std::vector<Term> args = {});
  static Term constant(std::string name) { return compound(std::move(name)); }
  static Term nil();
  static Term cons(Term head, Term tail);
  /// Builds `[t1,...,tn|tail]`; the tail defaults to `[]`.
  static Term list(std::vector<Term> items, std::optional<Term> tail = std::nullopt);

  Kind kind() const noexcept;
  bool is_variable() const noexcept { return kind() == Kind::Variable; }
  bool is_integer() const noexcept { return kind() == Kind::Integer; }
  bool is_compound() const noexcept { return kind() == Kind::Compound; }
  bool is_constant() const noexcept { return is_compound() && arity() == 0; }
  bool is_ground() const;

  /// Variable name for variables, functor name for compounds.
  const std::string& name() const;
  std::int64_t value() const;
  std::span<const Term> args() const;
  std::size_t arity() const noexcept;
  const Term& arg(std::size_t i) const { return args()[i]; }

  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Term::Node {
  Kind kind;
  std::string name;
  std::int64_t value = 0;
  std::vector<Term> args;
  bool ground = true;
};

inline Term::Kind Term::kind() const noexcept { return node_->kind; }
inline std::size_t Term::arity() const noexcept { return node_->args.size(); }
inline std::span<const Term> Term::args() const { return node_->args; }
inline bool Term::is_ground() const { return node_->ground; }

struct PredicateId {
  std::string name;
  std::size_t arity = 0;

  std::string to_string() const { return name + "/" + std::to_string(arity); }
  friend auto operator<=>(const PredicateId&, const PredicateId&) = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  PredicateId id() const { return {predicate, args.size()}; }
  std::size_t arity() const noexcept { return args.size(); }
  Term as_term() const { return Term::compound(predicate, args); }

  friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// Parallel conjunction `(left & right)`; only residual programs carry it.
struct ParGroup {
  std::vector<Atom> left;
  std::vector<Atom> right;

  friend auto operator<=>(const ParGroup&, const ParGroup&) = default;
};

using BodyGoal = std::variant<Atom, ParGroup>;

struct Clause {
  Atom head;
  std::vector<BodyGoal> body;

  bool is_fact() const noexcept { return body.empty(); }
  bool has_parallel() const;
  /// Body atoms in textual order, with parallel groups flattened.
  std::vector<Atom> body_atoms() const;

  friend auto operator<=>(const Clause&, const Clause&) = default;
};

/// The builtins every component agrees on: `is/2`, `=/2` and the
/// arithmetic comparisons.
bool is_builtin(const PredicateId& pred);
bool is_comparison(const PredicateId& pred);

class Program {
 public:
  Program() = default;
  /// Throws std::invalid_argument when a builtin is used as a clause head.
  explicit Program(std::vector<Clause> clauses);

  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  const std::set<PredicateId>& user_predicates() const noexcept { return user_predicates_; }
  bool defines(const PredicateId& pred) const { return user_predicates_.contains(pred); }
  /// Indices (into clauses()) of the clauses for `pred`, in textual order.
  std::span<const std::size_t> clauses_of(const PredicateId& pred) const;
  bool empty() const noexcept { return clauses_.empty(); }

  friend bool operator==(const Program& a, const Program& b) { return a.clauses_ == b.clauses_; }

 private:
  std::vector<Clause> clauses_;
  std::set<PredicateId> user_predicates_;
  std::map<PredicateId, std::vector<std::size_t>> index_;
};

/// Idempotent substitution. Construction from arbitrary bindings resolves
/// chains so that applying once is the same as applying twice.
class Substitution {
 public:
  Substitution() = default;
  /// Throws std::invalid_argument on cyclic bindings.
  static Substitution from_bindings(std::map<std::string, Term> bindings);

  const std::map<std::string, Term>& bindings() const noexcept { return bindings_; }
  const Term* lookup(const std::string& var) const;
  bool empty() const noexcept { return bindings_.empty(); }
  std::size_t size() const noexcept { return bindings_.size(); }
  /// True when every binding maps a variable to a distinct variable.
  bool is_renaming() const;

  Term apply(const Term& t) const;
  Atom apply(const Atom& a) const;
  Clause apply(const Clause& c) const;

  friend bool operator==(const Substitution&, const Substitution&) = default;

 private:
  friend std::optional<Substitution> mgu(const Term&, const Term&);
  friend std::optional<Substitution> mgu(const Atom&, const Atom&);
  friend std::optional<Substitution> match(const Atom&, const Atom&);
  std::map<std::string, Term> bindings_;
};

/// Most general unifier with occurs check. When two variables meet, the one
/// from the left argument is bound.
std::optional<Substitution> mgu(const Term& a, const Term& b);
std::optional<Substitution> mgu(const Atom& a, const Atom& b);

/// One-way matching: a substitution θ over `general`'s variables with
/// general θ == specific. Variables of `specific` are treated as constants.
std::optional<Substitution> match(const Atom& general, const Atom& specific);

Term apply_subst(const Term& t, const Substitution& s);
Atom apply_subst(const Atom& a, const Substitution& s);

/// Fresh variable names live in the reserved `_G<n>` namespace, which the
/// parser refuses, so they never collide with source names.
std::string fresh_variable_name();
bool is_reserved_variable_name(std::string_view name);

Clause rename_apart(const Clause& c, const std::set<std::string>& avoid = {});
Atom rename_apart(const Atom& a);

std::set<std::string> vars(const Term& t);
std::set<std::string> vars(const Atom& a);
std::set<std::string> vars(std::span<const Atom> query);
std::set<std::string> vars(const Clause& c);
/// Variables in order of first occurrence (left to right, depth first).
std::vector<std::string> ordered_vars(const Atom& a);
void collect_vars(const Term& t, std::set<std::string>& out);

/// Variant class key: the atom with variables renamed canonically by first
/// occurrence. Two atoms are variants iff their keys are equal.
Atom canonical_form(const Atom& a);
bool is_variant(const Atom& a, const Atom& b);

}  // namespace andpe
