#include "andpe/analysis.hpp"
#include "andpe/codegen.hpp"
#include "andpe/syntax.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace andpe;

namespace {

ExtendedAtom X(const std::string& atom, std::initializer_list<std::size_t> gr) {
  Atom a = parse_atom(atom);
  return ExtendedAtom::make(a, GroundnessPattern::of(a.arity(), gr), SharingPattern::independent(a.arity()));
}

ResidualProgram residual_of(const Program& p, const ExtendedAtom& init) {
  Analyzer a(p);
  return emit_residual(pe_run(p, init, a.lookup()), p);
}

// Clause texts with variables normalised, for comparison modulo renaming.
std::vector<std::string> normalised(const std::string& text) {
  std::vector<std::string> out;
  Program p = parse_program(text, {.allow_parallel = true});
  for (const Clause& c : p.clauses())
    out.push_back(to_string(c, {.normalize_variables = true}));
  return out;
}

std::vector<std::string> normalised(const std::vector<Clause>& cs) {
  std::vector<std::string> out;
  for (const Clause& c : cs) out.push_back(to_string(c, {.normalize_variables = true}));
  return out;
}

}  // namespace

TEST_CASE("ren") {
  RenamingScheme s;
  auto fib = ExtendedAtom::make(parse_atom("fibonacci(X,Y)"), GroundnessPattern::of(2, {1}), SharingPattern::independent(2));
  CHECK(ren(fib, s) == parse_atom("fibonacci_1_1_2(X,Y)"));
  CHECK(ren(X("M1 is M-1", {2}), s) == parse_atom("M1 is M-1"));
  auto shared = ExtendedAtom::make(parse_atom("fibonacci(X,Y)"), GroundnessPattern::of(2, {1}), SharingPattern::full(2));
  CHECK(ren(shared, s).predicate != ren(fib, s).predicate);
  // Variants share a name; other classes of the same patterns get a suffix.
  CHECK(ren(X("fibonacci(U,V)", {1}), s).predicate == "fibonacci_1_1_2");
  CHECK(ren(X("fibonacci(0,V)", {1}), s).predicate == "fibonacci_1_1_2_2");
  RenamingScheme reserved({"fibonacci_1_1_2"});
  CHECK(ren(fib, reserved).predicate == "fibonacci_1_1_2_2");
}

TEST_CASE("mangled names") {
  CHECK(mangle({"append", 3}, GroundnessPattern::none(3), SharingPattern::of({{1, 3}, {2, 3}, {1, 2, 3}})) ==
        "append_0_13_23_123");
  CHECK(mangle({"p", 0}, GroundnessPattern::none(0), SharingPattern::independent(0)) == "p_0");
  CHECK(mangle({"w", 10}, GroundnessPattern::of(10, {1, 10}), SharingPattern::independent(10)) ==
        "w_1x10_1_2_3_4_5_6_7_8_9_10");
}

TEST_CASE("fibonacci residual program") {
  Program p = testing::corpus_program("fib");
  ResidualProgram r = residual_of(p, X("fibonacci(A,B)", {1}));
  CHECK(normalised(r.clauses) == normalised("fibonacci_1_1_2(0,1).\n"
                                            "fibonacci_1_1_2(1,1).\n"
                                            "fibonacci_1_1_2(M,N) :- M>1, (M1 is M-1, fibonacci_1_1_2(M1,N1)\n"
                                            "    & M2 is M-2, fibonacci_1_1_2(M2,N2)), N is N1+N2."));
  CHECK(r.originals.empty());
  CHECK(r.entry_name == "fibonacci_1_1_2");
  CHECK(r.parallel_sites() == 1);
  CHECK(r.rename_query(parse_atom("fibonacci(6,N)")) == parse_atom("fibonacci_1_1_2(6,N)"));
  CHECK_THROWS_AS(r.rename_query(parse_atom("other(6,N)")), CodegenError);
}

TEST_CASE("variant and failure steps produce no clauses") {
  Program p = parse_program("q(b).");
  ResidualProgram r = residual_of(p, X("q(a)", {1}));
  CHECK(r.clauses.empty());
  CHECK(r.parallel_sites() == 0);
}

TEST_CASE("embedding produces a bridge to the original predicate") {
  Program p = parse_program("p(X) :- p(f(X)). other(1).");
  ResidualProgram r = residual_of(p, X("p(X)", {}));
  CHECK(normalised(r.clauses) == normalised("p_0_1(X) :- p_0_1_2(f(X)). p_0_1_2(f(X)) :- p(f(X))."));
  CHECK(normalised(r.originals) == normalised("p(X) :- p(f(X))."));
  CHECK(closedness_problems(r, p).empty());
}

TEST_CASE("residual text survives print and parse") {
  for (const char* name : {"fib", "qsort", "amatrix", "msort", "palin", "flatten", "tak", "hanoi", "mmatrix"}) {
    CAPTURE(name);
    Program p = testing::corpus_program(name);
    Analyzer a(p);
    const auto& first = p.clauses().front().head;
    std::vector<std::size_t> gr;
    ResidualProgram r;
    // Entry: every argument but the last is ground.
    PositionMask m = full_mask(first.arity()) & ~bit(first.arity());
    if (first.arity() == 1) m = bit(1);
    Atom init{first.predicate, {}};
    for (std::size_t i = 0; i < first.arity(); ++i) init.args.push_back(Term::variable("V" + std::to_string(i)));
    r = emit_residual(pe_run(p, ExtendedAtom::make(init, GroundnessPattern(first.arity(), m),
                                                   SharingPattern::independent(first.arity())),
                             a.lookup()),
                      p);
    std::string text = r.to_text();
    Program back = parse_program(text, {.allow_parallel = true});
    CHECK(back.clauses().size() == r.clauses.size() + r.originals.size());
    CHECK(to_string(back, {.normalize_variables = true}) + "\n" ==
          to_string(parse_program(to_string(back), {.allow_parallel = true}), {.normalize_variables = true}) + "\n");
    CHECK(normalised(text) == normalised(back.clauses()));
    CHECK(closedness_problems(r, p).empty());
    CHECK(r.parallel_sites() >= 1);
  }
}

TEST_CASE("closedness problems are reported") {
  Program p = testing::corpus_program("fib");
  ResidualProgram r = residual_of(p, X("fibonacci(A,B)", {1}));
  r.clauses.erase(r.clauses.begin(), r.clauses.begin() + 2);
  CHECK(closedness_problems(r, p).empty());
  ResidualProgram broken = r;
  broken.clauses.push_back(parse_program("extra(X) :- fibonacci_1_1_2_9(X,X).").clauses()[0]);
  broken.specialized.emplace("fibonacci_1_1_2_9", PredicateId{"fibonacci", 2});
  CHECK(closedness_problems(broken, p).size() == 1);
}

TEST_CASE("guarded amatrix") {
  Program p = testing::corpus_program("amatrix");
  ResidualProgram g = emit_guarded(residual_of(p, X("amatrix(A,B,C)", {1, 2})), p, 4);
  CHECK(normalised(g.clauses) ==
        normalised("amatrix_par([],[],[]).\n"
                   "amatrix_par([L1|O1],[L2|O2],[L3|O3]) :- concurrent_k((am1(L1,L2,L3),amatrix(O1,O2,O3)),\n"
                   "    am1(L1,L2,L3), amatrix_par(O1,O2,O3))."));
  CHECK(normalised(g.originals) == normalised(p.clauses()));
  CHECK(g.entry_name == "amatrix_par");
  CHECK(g.parallel_sites() == 1);
  std::string text = g.to_text();
  CHECK(text.find("amatrix_par([A|B],[C|D],[E|F]) :- concurrent_k((am1(A,C,E),amatrix(B,D,F)),am1(A,C,E),amatrix_par(B,D,F)).") != std::string::npos);
  CHECK(text.find("max_threads(4).") != std::string::npos);
  CHECK(text.find("concurrent_k(A,B,C) :-") != std::string::npos);
}

TEST_CASE("guarded quicksort") {
  Program p = testing::corpus_program("qsort");
  ResidualProgram g = emit_guarded(residual_of(p, X("quicksort(L,S)", {1})), p, 2);
  std::string text = g.to_text();
  CHECK(text.find("quicksort_par([A|B],C) :- partition(B,A,D,E), "
                  "concurrent_k((quicksort(D,F),quicksort(E,G)),quicksort_par(D,F),quicksort_par(E,G)), "
                  "append(F,A,G,C).") != std::string::npos);
  CHECK(normalised(g.originals) == normalised(p.clauses()));
  CHECK(text.find("max_threads(2).") != std::string::npos);
}

TEST_CASE("guarded output without parallel groups is unchanged") {
  Program p = parse_program("len([],0). len([_|T],N) :- len(T,M), N is M+1.");
  ResidualProgram r = residual_of(p, X("len(L,N)", {1}));
  REQUIRE(r.parallel_sites() == 0);
  ResidualProgram g = emit_guarded(r, p, 4);
  CHECK(g.to_text() == r.to_text());
  CHECK(g.to_text().find("concurrent_k") == std::string::npos);
  CHECK_THROWS_AS(emit_guarded(r, p, 0), std::invalid_argument);
}
