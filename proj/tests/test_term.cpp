#include <map>

#include "andpe/syntax.hpp"
#include "andpe/term.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace andpe;

namespace {

Term V(const std::string& n) { return Term::variable(n); }
Term C(const std::string& n) { return Term::constant(n); }

// Replaces random subterms of `t` by variables named Y<k>, recording θ.
Term generalize(const Term& t, std::mt19937& rng, std::map<std::string, Term>& theta, int& k) {
  if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
    std::string n = "Y" + std::to_string(k++);
    theta.emplace(n, t);
    return V(n);
  }
  if (!t.is_compound() || t.arity() == 0) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(generalize(a, rng, theta, k));
  return Term::compound(t.name(), args);
}

Atom tuple_of(const std::set<std::string>& vs) {
  Atom a{"tuple", {}};
  for (const auto& v : vs) a.args.push_back(V(v));
  return a;
}

}  // namespace

TEST_CASE("mgu binds the left atom's variables") {
  auto s = mgu(parse_atom("fibonacci(A,B)"), parse_atom("fibonacci(M,N)"));
  REQUIRE(s);
  CHECK(s->size() == 2);
  CHECK(*s->lookup("A") == V("M"));
  CHECK(*s->lookup("B") == V("N"));
}

TEST_CASE("mgu of identical atoms is empty") {
  auto s = mgu(parse_atom("p(X)"), parse_atom("p(X)"));
  REQUIRE(s);
  CHECK(s->empty());
}

TEST_CASE("mgu fails on functor clash") {
  CHECK_FALSE(mgu(parse_atom("append([],Y,Y)"), parse_atom("append([1|T],Z,W)")));
  CHECK_FALSE(mgu(parse_atom("p(a)"), parse_atom("p(b)")));
  CHECK_FALSE(mgu(parse_atom("p(1)"), parse_atom("p(a)")));
  CHECK_FALSE(mgu(parse_atom("p(X)"), parse_atom("q(X)")));
  CHECK_FALSE(mgu(parse_atom("p(X)"), parse_atom("p(X,Y)")));
}

TEST_CASE("mgu performs the occurs check") {
  CHECK_FALSE(mgu(parse_atom("p(X)"), parse_atom("p(f(X))")));
  CHECK_FALSE(mgu(parse_atom("p(X,Y)"), parse_atom("p(Y,g(X))")));
}

TEST_CASE("mgu result is idempotent across chains") {
  auto s = mgu(parse_atom("p(X,Y,Z)"), parse_atom("p(Y,Z,a)"));
  REQUIRE(s);
  Atom a = s->apply(parse_atom("p(X,Y,Z)"));
  CHECK(a == s->apply(a));
  CHECK(a == parse_atom("p(a,a,a)"));
}

TEST_CASE("apply_subst") {
  Substitution s = Substitution::from_bindings({{"A", V("M")}});
  CHECK(s.apply(parse_atom("fibonacci(A,B)")) == parse_atom("fibonacci(M,B)"));
  CHECK(Substitution{}.apply(parse_atom("fibonacci(A,B)")) == parse_atom("fibonacci(A,B)"));

  Substitution t = Substitution::from_bindings({{"X", Term::compound("f", {V("Y")})}, {"Y", C("a")}});
  CHECK(*t.lookup("X") == parse_term("f(a)"));
  CHECK(*t.lookup("Y") == C("a"));
  CHECK(t.apply(parse_atom("p(X,Y)")) == parse_atom("p(f(a),a)"));
}

TEST_CASE("from_bindings drops self bindings and rejects cycles") {
  Substitution s = Substitution::from_bindings({{"X", V("X")}});
  CHECK(s.empty());
  CHECK_THROWS_AS(Substitution::from_bindings({{"X", Term::compound("f", {V("X")})}}), std::invalid_argument);
  CHECK_THROWS_AS(Substitution::from_bindings({{"X", V("Y")}, {"Y", V("X")}}), std::invalid_argument);
}

TEST_CASE("rename_apart yields a variant with fresh variables") {
  Program p = parse_program("append([H|T],Y,[H|TY]) :- append(T,Y,TY).");
  const Clause& c = p.clauses()[0];
  std::set<std::string> avoid{"H", "T"};
  Clause r = rename_apart(c, avoid);
  for (const auto& v : vars(r)) {
    CHECK_FALSE(avoid.contains(v));
    CHECK_FALSE(vars(c).contains(v));
    CHECK(is_reserved_variable_name(v));
  }
  auto s = mgu(r.head, c.head);
  REQUIRE(s);
  CHECK(s->is_renaming());
  CHECK(canonical_form(r.head) == canonical_form(c.head));
  CHECK(r.body_atoms().size() == 1);
  CHECK(s->apply(r.body_atoms()[0]) == c.body_atoms()[0]);
}

TEST_CASE("rename_apart leaves ground clauses unchanged") {
  Program p = parse_program("fibonacci(0,1).");
  CHECK(rename_apart(p.clauses()[0]) == p.clauses()[0]);
  Clause r = rename_apart(parse_program("p(X,Y) :- q(Y).").clauses()[0], {});
  CHECK(is_variant(r.head, parse_atom("p(X,Y)")));
}

TEST_CASE("vars") {
  CHECK(vars(parse_atom("append(T,Y,TY)")) == std::set<std::string>{"T", "Y", "TY"});
  CHECK(vars(parse_atom("fibonacci(0,1)")).empty());
  CHECK(vars(parse_term("[H|T]")) == std::set<std::string>{"H", "T"});
  CHECK(parse_term("[H|T]") == Term::compound(".", {V("H"), V("T")}));
  CHECK(ordered_vars(parse_atom("p(f(B,A),A,C)")) == std::vector<std::string>{"B", "A", "C"});
}

TEST_CASE("variants and matching") {
  CHECK(is_variant(parse_atom("p(X,Y)"), parse_atom("p(U,V)")));
  CHECK_FALSE(is_variant(parse_atom("p(X,X)"), parse_atom("p(X,Y)")));
  CHECK_FALSE(is_variant(parse_atom("p(X,a)"), parse_atom("p(X,Y)")));
  auto m = match(parse_atom("p(X,Y)"), parse_atom("p(f(Z),Z)"));
  REQUIRE(m);
  CHECK(m->apply(parse_atom("p(X,Y)")) == parse_atom("p(f(Z),Z)"));
  CHECK_FALSE(match(parse_atom("p(X,X)"), parse_atom("p(a,b)")));
  CHECK_FALSE(match(parse_atom("p(a)"), parse_atom("p(X)")));
}

TEST_CASE("builtins and programs") {
  CHECK(is_builtin({"is", 2}));
  CHECK(is_builtin({"=", 2}));
  CHECK(is_builtin({"=:=", 2}));
  CHECK_FALSE(is_builtin({"is", 3}));
  CHECK(is_comparison({">", 2}));
  CHECK_FALSE(is_comparison({"is", 2}));
  CHECK_THROWS_AS(Program({Clause{parse_atom("X is 1"), {}}}), std::invalid_argument);
  Program p = parse_program("q(1). r(a). q(2).");
  CHECK(p.clauses_of({"q", 1}).size() == 2);
  CHECK(p.clauses_of({"q", 1})[1] == 2);
  CHECK(p.clauses_of({"s", 1}).empty());
}

TEST_CASE("term order is total and consistent with equality") {
  CHECK(V("X") < Term::integer(0));
  CHECK(Term::integer(-3) < Term::integer(2));
  CHECK(Term::integer(5) < C("a"));
  CHECK(C("b") < parse_term("a(x)"));
  CHECK((parse_term("f(X,a)") <=> parse_term("f(X,a)")) == 0);
}

TEST_CASE("property: mgu is sound and most general on random terms") {
  testing::TermGen gen(12345);
  int unified = 0;
  for (int i = 0; i < 3000; ++i) {
    Atom a = gen.atom(2, 3);
    Atom b = gen.atom(2, 3);
    auto s = mgu(a, b);
    if (!s) continue;
    ++unified;
    CHECK(s->apply(a) == s->apply(b));
    CHECK(s->apply(s->apply(a)) == s->apply(a));
  }
  CHECK(unified > 100);

  // Pairs built as generalisations of a common instance c: θ unifies them,
  // so θ must factor through the mgu.
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    Atom c = gen.atom(3, 3);
    std::map<std::string, Term> theta_a, theta_b;
    int k = 0;
    Atom a{"p", {}}, b{"p", {}};
    for (const Term& t : c.args) a.args.push_back(generalize(t, gen.rng(), theta_a, k));
    for (const Term& t : c.args) b.args.push_back(generalize(t, gen.rng(), theta_b, k));
    // Variables of c stay as they are in θ.
    std::map<std::string, Term> theta = theta_a;
    theta.insert(theta_b.begin(), theta_b.end());
    Substitution th = Substitution::from_bindings(theta);
    REQUIRE(th.apply(a) == c);
    REQUIRE(th.apply(b) == c);
    auto s = mgu(a, b);
    REQUIRE(s);
    std::set<std::string> vs = vars(a);
    for (const auto& v : vars(b)) vs.insert(v);
    Atom tup = tuple_of(vs);
    CHECK(match(s->apply(tup), th.apply(tup)));
    ++checked;
  }
  CHECK(checked == 2000);
}
