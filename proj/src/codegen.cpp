#include "andpe/codegen.hpp"

#include <functional>

#include "andpe/syntax.hpp"

namespace andpe {

namespace {

std::string index_run(PositionMask m, std::size_t arity) {
  if (m == 0) return "0";
  std::string out;
  for (std::size_t j = 1; j <= arity; ++j) {
    if (!(m & bit(j))) continue;
    if (arity >= 10 && !out.empty()) out += 'x';
    out += std::to_string(j);
  }
  return out;
}

}  // namespace

std::string mangle(const PredicateId& pred, const GroundnessPattern& gr, const SharingPattern& sh) {
  std::string out = pred.name + "_" + index_run(gr.mask(), pred.arity);
  for (std::size_t i = 1; i <= sh.arity(); ++i) out += "_" + index_run(sh.group(i), pred.arity);
  return out;
}

RenamingScheme::ClassKey RenamingScheme::key_of(const ExtendedAtom& ea) {
  return {canonical_form(ea.atom), ea.gr, ea.sh};
}

std::string RenamingScheme::name(const ExtendedAtom& ea) {
  if (is_builtin(ea.atom.id())) return ea.atom.predicate;
  ClassKey key = key_of(ea);
  if (auto it = names_.find(key); it != names_.end()) return it->second;
  std::string base = mangle(ea.atom.id(), ea.gr, ea.sh);
  std::string candidate = base;
  for (int k = 2; used_.contains(candidate) || reserved_.contains(candidate); ++k)
    candidate = base + "_" + std::to_string(k);
  used_.insert(candidate);
  names_.emplace(std::move(key), candidate);
  assigned_.emplace_back(candidate, ea.key());
  return candidate;
}

void RenamingScheme::keep_original(const ExtendedAtom& ea) { names_.try_emplace(key_of(ea), ea.atom.predicate); }

std::optional<std::string> RenamingScheme::find(const ExtendedAtom& ea) const {
  auto it = names_.find(key_of(ea));
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

Atom ren(const ExtendedAtom& ea, RenamingScheme& scheme) { return {scheme.name(ea), ea.atom.args}; }

Program ResidualProgram::program() const {
  std::vector<Clause> all = clauses;
  all.insert(all.end(), originals.begin(), originals.end());
  return Program(std::move(all));
}

Atom ResidualProgram::rename_query(const Atom& q) const {
  if (q.id() != source) throw CodegenError("query " + to_string(q) + " is not a call to " + source.to_string());
  return {entry_name, q.args};
}

std::size_t ResidualProgram::parallel_sites() const {
  std::size_t n = 0;
  for (const Clause& c : clauses)
    for (const BodyGoal& g : c.body) {
      if (std::holds_alternative<ParGroup>(g))
        ++n;
      else if (const Atom& a = std::get<Atom>(g); a.predicate == "concurrent_k" && a.arity() == 3)
        ++n;
    }
  return n;
}

std::string ResidualProgram::to_text() const {
  std::string out;
  PrintOptions opts{.normalize_variables = true};
  for (const Clause& c : clauses) out += to_string(c, opts) + "\n";
  if (!originals.empty()) {
    out += "\n% original clauses\n";
    for (const Clause& c : originals) out += to_string(c, opts) + "\n";
  }
  if (max_threads) out += "\n" + guard_support_text(*max_threads);
  return out;
}

namespace {

std::vector<Atom> goal_atoms(const Clause& c) {
  std::vector<Atom> out;
  for (const BodyGoal& g : c.body) {
    if (const auto* a = std::get_if<Atom>(&g)) {
      out.push_back(*a);
    } else {
      const auto& pg = std::get<ParGroup>(g);
      out.insert(out.end(), pg.left.begin(), pg.left.end());
      out.insert(out.end(), pg.right.begin(), pg.right.end());
    }
  }
  return out;
}

// Original clauses of `roots` and of everything they call.
std::vector<Clause> original_closure(const Program& p, std::set<PredicateId> roots) {
  std::vector<PredicateId> work(roots.begin(), roots.end());
  while (!work.empty()) {
    PredicateId id = work.back();
    work.pop_back();
    for (std::size_t idx : p.clauses_of(id))
      for (const Atom& b : p.clauses()[idx].body_atoms())
        if (p.defines(b.id()) && roots.insert(b.id()).second) work.push_back(b.id());
  }
  std::vector<Clause> out;
  for (const Clause& c : p.clauses())
    if (roots.contains(c.head.id())) out.push_back(c);
  return out;
}

std::set<std::string> predicate_names(const Program& p) {
  std::set<std::string> out;
  for (const PredicateId& id : p.user_predicates()) out.insert(id.name);
  return out;
}

std::vector<Atom> ren_all(const ExtendedQuery& q, RenamingScheme& scheme) {
  std::vector<Atom> out;
  out.reserve(q.size());
  for (const ExtendedAtom& ea : q) out.push_back(ren(ea, scheme));
  return out;
}

}  // namespace

ResidualProgram emit_residual(const Trace& t, const Program& p, RenamingScheme& scheme) {
  std::set<PredicateId> fallback;
  for (const Transition& tr : t.transitions) {
    if (tr.label != Label::Failure || is_builtin(tr.subject.atom.id())) continue;
    scheme.keep_original(tr.subject);
    if (p.defines(tr.subject.atom.id())) fallback.insert(tr.subject.atom.id());
  }

  ResidualProgram r;
  r.source = t.init.atom.id();
  std::set<std::string> seen;
  PrintOptions norm{.normalize_variables = true};
  auto add = [&](Clause c) {
    if (seen.insert(to_string(c, norm)).second) r.clauses.push_back(std::move(c));
  };

  for (const Transition& tr : t.transitions) {
    switch (tr.label) {
      case Label::Unfolding:
      case Label::Parallel: {
        Atom head{scheme.name(tr.subject), tr.sigma.apply(tr.subject.atom).args};
        Clause c{std::move(head), {}};
        if (tr.split) {
          for (Atom& a : ren_all(tr.split->q1, scheme)) c.body.emplace_back(std::move(a));
          c.body.emplace_back(ParGroup{ren_all(tr.split->q2, scheme), ren_all(tr.split->q3, scheme)});
          for (Atom& a : ren_all(tr.split->q4, scheme)) c.body.emplace_back(std::move(a));
        } else {
          for (Atom& a : ren_all(tr.body, scheme)) c.body.emplace_back(std::move(a));
        }
        add(std::move(c));
        break;
      }
      case Label::Embedding:
        add(Clause{Atom{scheme.name(tr.subject), tr.subject.atom.args}, {tr.subject.atom}});
        fallback.insert(tr.subject.atom.id());
        break;
      default:
        break;
    }
  }
  r.entry_name = scheme.name(t.init);
  for (const auto& [name, key] : scheme.assigned()) {
    r.specialized.emplace(name, key.pred);
    r.call_patterns.emplace(name, key);
  }
  r.originals = original_closure(p, fallback);
  if (auto problems = closedness_problems(r, p); !problems.empty())
    throw CodegenError("residual program is not closed: " + problems.front());
  return r;
}

ResidualProgram emit_residual(const Trace& t, const Program& p) {
  RenamingScheme scheme(predicate_names(p));
  return emit_residual(t, p, scheme);
}

std::vector<std::string> closedness_problems(const ResidualProgram& r, const Program& original) {
  std::set<PredicateId> defined;
  for (const Clause& c : r.clauses) defined.insert(c.head.id());
  for (const Clause& c : r.originals) defined.insert(c.head.id());
  std::vector<std::string> out;
  for (const Clause& c : r.clauses)
    for (const Atom& a : goal_atoms(c)) {
      PredicateId id = a.id();
      if (is_builtin(id) || defined.contains(id)) continue;
      // Calls to predicates the source program never defined fail the same
      // way in both programs.
      if (!r.specialized.contains(id.name) && !original.defines(id)) continue;
      out.push_back(id.to_string() + " called in " + to_string(c) + " has no definition");
    }
  return out;
}

namespace {

Term conjunction(const std::vector<Atom>& atoms) {
  Term t = atoms.back().as_term();
  for (std::size_t i = atoms.size() - 1; i-- > 0;) t = Term::compound(",", {atoms[i].as_term(), t});
  return t;
}

}  // namespace

ResidualProgram emit_guarded(const ResidualProgram& r, const Program& original, int max_threads) {
  if (max_threads < 1) throw std::invalid_argument("max_threads must be at least 1");
  if (r.parallel_sites() == 0) return r;

  // Specialized predicates that reach a parallel group keep a parallel
  // version; every other call goes back to the original predicate.
  std::map<std::string, std::vector<const Clause*>> defs;
  for (const Clause& c : r.clauses) defs[c.head.predicate].push_back(&c);
  std::set<std::string> parallel;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [name, cs] : defs) {
      if (parallel.contains(name)) continue;
      for (const Clause* c : cs) {
        bool hit = c->has_parallel();
        for (const Atom& a : goal_atoms(*c)) hit = hit || parallel.contains(a.predicate);
        if (hit) {
          parallel.insert(name);
          grew = true;
          break;
        }
      }
    }
  }

  std::set<std::string> taken = predicate_names(original);
  std::map<std::string, std::string> par_name;
  for (const Clause& c : r.clauses) {
    const std::string& n = c.head.predicate;
    if (!parallel.contains(n) || par_name.contains(n)) continue;
    std::string base = r.specialized.at(n).name + "_par";
    std::string candidate = base;
    for (int k = 2; taken.contains(candidate); ++k) candidate = base + "_" + std::to_string(k);
    taken.insert(candidate);
    par_name.emplace(n, candidate);
  }

  std::set<PredicateId> called;
  auto seq = [&](const Atom& a) {
    Atom out = a;
    if (auto it = r.specialized.find(a.predicate); it != r.specialized.end()) out.predicate = it->second.name;
    if (original.defines(out.id())) called.insert(out.id());
    return out;
  };
  auto par = [&](const Atom& a) {
    if (auto it = par_name.find(a.predicate); it != par_name.end()) return Atom{it->second, a.args};
    return seq(a);
  };
  auto map_all = [](const std::vector<Atom>& as, const auto& f) {
    std::vector<Atom> out;
    for (const Atom& a : as) out.push_back(f(a));
    return out;
  };

  ResidualProgram g;
  g.source = r.source;
  g.max_threads = max_threads;
  for (const auto& [from, to] : par_name) {
    g.specialized.emplace(to, r.specialized.at(from));
    g.call_patterns.emplace(to, r.call_patterns.at(from));
  }
  for (const Clause& c : r.clauses) {
    if (!parallel.contains(c.head.predicate)) continue;
    Clause out{par(c.head), {}};
    for (const BodyGoal& goal : c.body) {
      if (const auto* a = std::get_if<Atom>(&goal)) {
        out.body.emplace_back(par(*a));
        continue;
      }
      const auto& pg = std::get<ParGroup>(goal);
      std::vector<Atom> both = map_all(pg.left, seq);
      for (Atom& a : map_all(pg.right, seq)) both.push_back(std::move(a));
      out.body.emplace_back(Atom{"concurrent_k",
                                 {conjunction(both), conjunction(map_all(pg.left, par)),
                                  conjunction(map_all(pg.right, par))}});
    }
    g.clauses.push_back(std::move(out));
  }
  if (auto it = par_name.find(r.entry_name); it != par_name.end()) {
    g.entry_name = it->second;
  } else {
    g.entry_name = r.specialized.contains(r.entry_name) ? r.specialized.at(r.entry_name).name : r.entry_name;
    if (original.defines({g.entry_name, r.source.arity})) called.insert({g.entry_name, r.source.arity});
  }
  g.originals = original_closure(original, called);
  return g;
}

std::string guard_support_text(int max_threads) {
  return "% Runs B and C in parallel while fewer than max_threads threads are busy,\n"
         "% and the sequential conjunction A otherwise.\n"
         ":- dynamic(current_threads/1).\n"
         "max_threads(" + std::to_string(max_threads) + ").\n"
         "current_threads(1).\n"
         "concurrent_k(A,B,C) :-\n"
         "  current_threads(N), max_threads(K),!,\n"
         "  (N < K -> M is N+1,\n"
         "            retractall(current_threads(_)),assert(current_threads(M)),\n"
         "            concurrent(2,[B,C],[]),\n"
         "            current_threads(T), S is T-1,\n"
         "            retractall(current_threads(_)),assert(current_threads(S))\n"
         "         ;  call(A) ).\n";
}

}  // namespace andpe
