#include "andpe/pipeline.hpp"

#include <set>

#include "andpe/syntax.hpp"

namespace andpe {

ExtendedAtom most_general(const EntryPoint& e) {
  Atom a{e.pred.name, {}};
  for (std::size_t i = 0; i < e.pred.arity; ++i) a.args.push_back(Term::variable("A" + std::to_string(i + 1)));
  return ExtendedAtom::make(std::move(a), e.gr, e.sh);
}

const Specialized* Specialization::run_for(const PredicateId& pred) const {
  for (const auto& r : runs)
    if (r.entry.pred == pred) return &r;
  return nullptr;
}

Specialization specialize(const Program& p, const std::vector<EntryPoint>& entries, const PatternTable& overrides,
                          const PeOptions& opts) {
  if (entries.empty()) throw AnalysisError("no entry point given");
  Analyzer an(p, BuiltinModel::standard(), overrides);
  an.add_entries(entries);

  std::set<std::string> reserved;
  for (const auto& id : p.user_predicates()) reserved.insert(id.name);
  RenamingScheme scheme(std::move(reserved));

  Specialization s;
  std::set<std::string> seen_clauses, seen_originals;
  for (const EntryPoint& e : entries) {
    if (!p.defines(e.pred)) throw AnalysisError("entry predicate " + e.pred.to_string() + " is not defined");
    Specialized run{e, most_general(e), {}, {}};
    run.trace = pe_run(p, run.init, an.lookup(), opts);
    run.residual = emit_residual(run.trace, p, scheme);
    for (const auto& w : run.trace.warnings) s.warnings.push_back(w);

    ResidualProgram& m = s.merged;
    if (s.runs.empty()) {
      m.entry_name = run.residual.entry_name;
      m.source = run.residual.source;
    }
    for (const Clause& c : run.residual.clauses)
      if (seen_clauses.insert(to_string(c, {.normalize_variables = true})).second) m.clauses.push_back(c);
    for (const Clause& c : run.residual.originals)
      if (seen_originals.insert(to_string(c)).second) m.originals.push_back(c);
    m.specialized.insert(run.residual.specialized.begin(), run.residual.specialized.end());
    m.call_patterns.insert(run.residual.call_patterns.begin(), run.residual.call_patterns.end());
    s.runs.push_back(std::move(run));
  }
  // Originals in source order, as a single run would print them.
  std::vector<Clause> ordered;
  for (const Clause& c : p.clauses())
    if (seen_originals.contains(to_string(c))) ordered.push_back(c);
  s.merged.originals = std::move(ordered);

  s.table = an.table();
  for (const auto& w : an.warnings()) s.warnings.push_back(w);
  return s;
}

}  // namespace andpe
