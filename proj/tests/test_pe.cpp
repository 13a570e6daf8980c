#include "andpe/analysis.hpp"
#include "andpe/pe.hpp"
#include "andpe/syntax.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace andpe;

namespace {

ExtendedAtom X(const std::string& atom, std::initializer_list<std::size_t> gr) {
  Atom a = parse_atom(atom);
  return ExtendedAtom::make(a, GroundnessPattern::of(a.arity(), gr), SharingPattern::independent(a.arity()));
}

const Clause& fib_c3(const Program& p) { return p.clauses()[2]; }

ExtendedAtom fib_init() { return X("fibonacci(A,B)", {1}); }

}  // namespace

TEST_CASE("entry on the recursive fibonacci clause") {
  Program p = testing::corpus_program("fib");
  ExtendedQuery q = entry(GroundnessPattern::of(2, {1}), SharingPattern::independent(2), fib_c3(p));
  ExtendedQuery expected{X("M>1", {1, 2}),           X("M1 is M-1", {2}), X("fibonacci(M1,N1)", {}),
                         X("M2 is M-2", {2}),        X("fibonacci(M2,N2)", {}), X("N is N1+N2", {})};
  CHECK(q == expected);
  CHECK(to_string(q).starts_with("(M>1, {1,2}, <{1},{2}>), (M1 is M-1, {2}, <{1},{2}>)"));
}

TEST_CASE("entry on a fact is true") {
  Program p = testing::corpus_program("fib");
  ExtendedQuery q = entry(GroundnessPattern::of(2, {1}), SharingPattern::independent(2), p.clauses()[0]);
  CHECK(q.empty());
  CHECK(to_string(q) == "true");
  CHECK_THROWS_AS(entry(GroundnessPattern::of(3, {1}), SharingPattern::independent(3), p.clauses()[0]),
                  std::invalid_argument);
}

TEST_CASE("entry on the recursive append clause") {
  Program p = testing::corpus_program("append");
  const Clause& rec = p.clauses()[1];
  auto indep = SharingPattern::independent(3);
  // Position 3 of the head is [H|TY], so TY is ground as well.
  CHECK(entry(GroundnessPattern::all(3), indep, rec) == ExtendedQuery{X("append(T,Y,TY)", {1, 2, 3})});
  CHECK(entry(GroundnessPattern::of(3, {1, 2}), indep, rec) == ExtendedQuery{X("append(T,Y,TY)", {1, 2})});
  // Head sharing between positions 2 and 3 reaches the body through Y and TY.
  auto sh = SharingPattern::of({{1}, {2, 3}, {2, 3}});
  ExtendedQuery q = entry(GroundnessPattern::none(3), sh, rec);
  REQUIRE(q.size() == 1);
  CHECK(q[0].sh == SharingPattern::of({{1}, {2, 3}, {2, 3}}));
}

TEST_CASE("prop pushes success patterns to the right") {
  Program p = testing::corpus_program("fib");
  Analyzer a(p);
  ExtendedQuery q = entry(GroundnessPattern::of(2, {1}), SharingPattern::independent(2), fib_c3(p));
  ExtendedQuery expected{X("M>1", {1, 2}),    X("M1 is M-1", {2}),       X("fibonacci(M1,N1)", {1}),
                         X("M2 is M-2", {2}), X("fibonacci(M2,N2)", {1}), X("N is N1+N2", {2})};
  CHECK(prop(q, {}, a.lookup()) == expected);
  // With the head state as context the result is the same here.
  BindingState head = BindingState::at_head(fib_c3(p).head, GroundnessPattern::of(2, {1}), SharingPattern::independent(2));
  CHECK(prop(q, {}, a.lookup(), &head) == expected);
}

TEST_CASE("prop base cases") {
  Program p = testing::corpus_program("fib");
  Analyzer a(p);
  ExtendedQuery q2{X("fibonacci(M1,N1)", {})};
  CHECK(prop({}, q2, a.lookup()) == q2);
  ExtendedQuery single{X("fibonacci(M1,N1)", {})};
  CHECK(prop(single, {}, a.lookup()) == single);
}

TEST_CASE("extended SLD steps") {
  Program p = testing::corpus_program("fib");
  auto s3 = extended_sld_step(fib_init(), fib_c3(p));
  REQUIRE(s3);
  CHECK(s3->sigma == Substitution::from_bindings({{"A", parse_term("M")}, {"B", parse_term("N")}}));
  CHECK(s3->body == entry(GroundnessPattern::of(2, {1}), SharingPattern::independent(2), fib_c3(p)));
  auto s1 = extended_sld_step(fib_init(), p.clauses()[0]);
  REQUIRE(s1);
  CHECK(s1->sigma == Substitution::from_bindings({{"A", Term::integer(0)}, {"B", Term::integer(1)}}));
  CHECK(s1->body.empty());
  Program q = parse_program("p(b).");
  CHECK_FALSE(extended_sld_step(X("p(a)", {1}), q.clauses()[0]));
}

TEST_CASE("partition of the fibonacci resolvent") {
  Program p = testing::corpus_program("fib");
  Analyzer a(p);
  auto step = extended_sld_step(fib_init(), fib_c3(p));
  REQUIRE(step);
  auto split = partition(step->head, GroundnessPattern::of(2, {1}), SharingPattern::independent(2), step->body,
                         a.lookup(), p);
  REQUIRE(split);
  CHECK(split->q1 == ExtendedQuery{X("M>1", {1, 2})});
  CHECK(split->q2 == ExtendedQuery{X("M1 is M-1", {2}), X("fibonacci(M1,N1)", {1})});
  CHECK(split->q3 == ExtendedQuery{X("M2 is M-2", {2}), X("fibonacci(M2,N2)", {1})});
  CHECK(split->q4 == ExtendedQuery{X("N is N1+N2", {2})});
}

TEST_CASE("partition rejects small or dependent queries") {
  Program p = parse_program("p(X) :- q(X), r(X). q(a). r(a). s(X,Y) :- q(X), r(Y).");
  Analyzer a(p);
  auto lookup = a.lookup();
  CHECK_FALSE(partition(parse_atom("p(X)"), GroundnessPattern::none(1), SharingPattern::independent(1),
                        {X("q(X)", {})}, lookup, p));
  CHECK_FALSE(partition(parse_atom("p(X)"), GroundnessPattern::none(1), SharingPattern::independent(1),
                        {X("q(X)", {}), X("r(X)", {})}, lookup, p));
  // Distinct variables are independent unless the head says they share.
  ExtendedQuery qr{X("q(X)", {}), X("r(Y)", {})};
  CHECK(partition(parse_atom("s(X,Y)"), GroundnessPattern::none(2), SharingPattern::independent(2), qr, lookup, p));
  CHECK_FALSE(partition(parse_atom("s(X,Y)"), GroundnessPattern::none(2), SharingPattern::full(2), qr, lookup, p));
  // A common variable that is ground is fine.
  CHECK(partition(parse_atom("p(X)"), GroundnessPattern::all(1), SharingPattern::independent(1),
                  {X("q(X)", {1}), X("r(X)", {1})}, lookup, p));
}

TEST_CASE("aliasing created before the split is respected") {
  Program p = parse_program("t(A,B) :- A = B, q(A), r(B). q(_). r(_).");
  Analyzer a(p);
  auto step = extended_sld_step(X("t(A,B)", {}), rename_apart(p.clauses()[0]));
  REQUIRE(step);
  auto split = partition(step->head, GroundnessPattern::none(2), SharingPattern::independent(2), step->body,
                         a.lookup(), p);
  CHECK_FALSE(split);
}

TEST_CASE("variants and embedding") {
  auto mu = SharingPattern::independent(2);
  auto xy1 = ExtendedAtom::make(parse_atom("p(X,Y)"), GroundnessPattern::of(2, {1}), mu);
  CHECK(is_variant(xy1, ExtendedAtom::make(parse_atom("p(U,V)"), GroundnessPattern::of(2, {1}), mu)));
  CHECK_FALSE(is_variant(xy1, ExtendedAtom::make(parse_atom("p(X,Y)"), GroundnessPattern::of(2, {2}), mu)));
  CHECK_FALSE(is_variant(ExtendedAtom::make(parse_atom("p(X,X)"), GroundnessPattern::of(2, {1}), mu), xy1));

  CHECK(embeds(X("p(f(X))", {}), X("p(X)", {})));
  CHECK(embeds(xy1, xy1));
  CHECK_FALSE(embeds(X("p(f(X))", {1}), X("p(X)", {})));
  CHECK_FALSE(embeds(X("p(X)", {}), X("p(f(X))", {})));
  CHECK(embeds(parse_term("g(1,f(Y))"), parse_term("g(7,Z)")));
  CHECK_FALSE(embeds(parse_term("f(a)"), parse_term("Z")));
  CHECK(embeds(parse_term("[X,Y|L]"), parse_term("[Y|L]")));
  CHECK_FALSE(embeds(parse_term("[Y|L]"), parse_term("[X,Y|L]")));
}

TEST_CASE("fibonacci trace") {
  Program p = testing::corpus_program("fib");
  Analyzer a(p);
  Trace t = pe_run(p, fib_init(), a.lookup());
  REQUIRE(t.derivations.size() == 3);
  CHECK(t.labels(0) == "u");
  CHECK(t.labels(1) == "u");
  CHECK(t.labels(2) == "pnnvnvn");
  CHECK(t.to_log() == testing::read_file(testing::golden_path("fib_trace.log")));
  const Transition& par = t.transitions[t.derivations[2][0]];
  REQUIRE(par.split);
  CHECK(par.split->q2.size() == 2);
  CHECK(format_substitution(t.transitions[t.derivations[0][0]].sigma, fib_init().atom) == "{A->0,B->1}");
}

TEST_CASE("failure on an atom matching no clause") {
  Program p = parse_program("q(b).");
  Analyzer a(p);
  Trace t = pe_run(p, X("q(a)", {1}), a.lookup());
  REQUIRE(t.derivations.size() == 1);
  CHECK(t.labels(0) == "f");
}

TEST_CASE("quicksort has one parallel step splitting the recursive calls") {
  Program p = testing::corpus_program("qsort");
  Analyzer a(p);
  Trace t = pe_run(p, X("quicksort(L,S)", {1}), a.lookup());
  int parallel = 0;
  for (const Transition& tr : t.transitions) {
    if (tr.label != Label::Parallel) continue;
    ++parallel;
    REQUIRE(tr.split);
    CHECK(tr.split->q1.size() == 1);
    REQUIRE(tr.split->q2.size() == 1);
    REQUIRE(tr.split->q3.size() == 1);
    CHECK(tr.split->q2[0].atom.predicate == "quicksort");
    CHECK(tr.split->q3[0].atom.predicate == "quicksort");
    CHECK(tr.split->q4.size() == 1);
  }
  CHECK(parallel == 1);
}

TEST_CASE("the embedding whistle stops a growing predicate") {
  Program p = parse_program("p(X) :- p(f(X)).");
  Analyzer a(p);
  Trace t = pe_run(p, X("p(X)", {}), a.lookup());
  REQUIRE(t.derivations.size() == 1);
  CHECK(t.labels(0) == "ue");
  CHECK(t.transitions.back().embedded);
}

TEST_CASE("property: every corpus run terminates and derivations end in the empty queue") {
  struct Case {
    const char* file;
    const char* init;
    std::initializer_list<std::size_t> gr;
  };
  for (const Case& c : {Case{"fib", "fibonacci(A,B)", {1}}, Case{"qsort", "quicksort(L,S)", {1}},
                        Case{"amatrix", "amatrix(A,B,C)", {1, 2}}, Case{"hanoi", "hanoi(N,A,B,C,M)", {1, 2, 3, 4}},
                        Case{"msort", "msort(L,S)", {1}}, Case{"palin", "palin(L)", {1}},
                        Case{"mmatrix", "mmultiply(A,B,C)", {1, 2}}, Case{"flatten", "flatten(T,L)", {1}},
                        Case{"tak", "tak(X,Y,Z,A)", {1, 2, 3}}}) {
    CAPTURE(c.file);
    Program p = testing::corpus_program(c.file);
    Analyzer a(p);
    Trace t = pe_run(p, X(c.init, c.gr), a.lookup(), {.max_transitions = 10000});
    CHECK_FALSE(t.derivations.empty());
    std::set<std::string> memo;
    for (const auto& d : t.derivations) {
      // p/u subjects along a derivation are never variants of each other.
      std::set<std::string> seen;
      for (std::size_t id : d) {
        const Transition& tr = t.transitions[id];
        if (tr.label != Label::Parallel && tr.label != Label::Unfolding) continue;
        std::string key = to_string(canonical_form(tr.subject.atom)) + tr.subject.gr.to_string() + tr.subject.sh.to_string();
        CHECK(seen.insert(key).second);
      }
    }
    int parallel = 0;
    for (const Transition& tr : t.transitions) parallel += tr.label == Label::Parallel;
    CHECK(parallel >= 1);
  }
}
