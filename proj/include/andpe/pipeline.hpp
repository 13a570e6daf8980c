#pragma once

// End-to-end specialization: analysis seeded with the entries, one PE run
// per entry with a shared renaming scheme, residual extraction.

#include <optional>
#include <string>
#include <vector>

#include "andpe/analysis.hpp"
#include "andpe/codegen.hpp"
#include "andpe/patterns.hpp"
#include "andpe/pe.hpp"
#include "andpe/term.hpp"

namespace andpe {

/// pred(A1,...,An) with the entry's patterns.
ExtendedAtom most_general(const EntryPoint& e);

struct Specialized {
  EntryPoint entry;
  ExtendedAtom init;
  Trace trace;
  /// Closed on its own; names agree with the other runs.
  ResidualProgram residual;
};

struct Specialization {
  PatternTable table;
  std::vector<Specialized> runs;
  /// All runs in one program, duplicate clauses dropped.
  ResidualProgram merged;
  std::vector<std::string> warnings;

  /// The run whose entry predicate is `pred`, if any.
  const Specialized* run_for(const PredicateId& pred) const;
};

/// Throws AnalysisError for an undefined entry, PeError and CodegenError
/// from the later stages.
Specialization specialize(const Program& p, const std::vector<EntryPoint>& entries, const PatternTable& overrides = {},
                          const PeOptions& opts = {});

}  // namespace andpe
