#pragma once

// Residual program extraction: renaming of extended atoms and one residual
// clause per unfolding, parallel or embedding transition.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "andpe/pe.hpp"
#include "andpe/propagation.hpp"
#include "andpe/term.hpp"

namespace andpe {

class CodegenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `<pred>_<π>_<μ>`: π as its index run (`0` when empty), then one index run
/// per position group. Indices are separated by `x` from arity 10 on.
std::string mangle(const PredicateId& pred, const GroundnessPattern& gr, const SharingPattern& sh);

class RenamingScheme {
 public:
  RenamingScheme() = default;
  /// Names never collide with the predicates of `reserved`.
  explicit RenamingScheme(std::set<std::string> reserved) : reserved_(std::move(reserved)) {}

  /// Specialized predicate name for the variant class of `ea`, assigned on
  /// first use. Builtins keep their name.
  std::string name(const ExtendedAtom& ea);
  /// Marks a class as calling the original predicate (no specialization).
  void keep_original(const ExtendedAtom& ea);
  /// The existing name, if any.
  std::optional<std::string> find(const ExtendedAtom& ea) const;

  /// Assigned specialized names with the call they specialize, in order.
  const std::vector<std::pair<std::string, PatternKey>>& assigned() const noexcept { return assigned_; }

 private:
  using ClassKey = std::tuple<Atom, GroundnessPattern, SharingPattern>;
  static ClassKey key_of(const ExtendedAtom& ea);

  std::set<std::string> reserved_;
  std::map<ClassKey, std::string> names_;
  std::set<std::string> used_;
  std::vector<std::pair<std::string, PatternKey>> assigned_;
};

/// ren(A, π, μ): same arguments, specialized predicate name.
Atom ren(const ExtendedAtom& ea, RenamingScheme& scheme);

struct ResidualProgram {
  /// Specialized clauses, possibly with parallel groups.
  std::vector<Clause> clauses;
  /// Original clauses kept for embedding and failure fallbacks.
  std::vector<Clause> originals;
  /// The predicate the initial atom was renamed to, and its source.
  std::string entry_name;
  PredicateId source;
  /// Specialized predicate names and the predicates they specialize.
  std::map<std::string, PredicateId> specialized;
  /// Call patterns every call to a specialized predicate must satisfy.
  std::map<std::string, PatternKey> call_patterns;
  /// Set by emit_guarded: the thread cap of the support code.
  std::optional<int> max_threads;

  /// All clauses as one program (parallel groups intact).
  Program program() const;
  /// The entry atom instance `q` of the source predicate, renamed.
  Atom rename_query(const Atom& q) const;
  std::size_t parallel_sites() const;
  /// Program text with variables renamed A, B, ... per clause.
  std::string to_text() const;
};

/// Residual clauses for every transition of `t`, deduplicated, plus the
/// original clauses reachable from fallback calls. Throws CodegenError when
/// a specialized call has no definition.
ResidualProgram emit_residual(const Trace& t, const Program& p, RenamingScheme& scheme);
ResidualProgram emit_residual(const Trace& t, const Program& p);

/// Rewrites each parallel group (B & C) to concurrent_k((Bseq,Cseq), Bpar,
/// Cpar). Specialized predicates that cannot reach a parallel group fall
/// back to the originals; the rest become `<pred>_par`. A program without
/// parallel groups is returned unchanged.
ResidualProgram emit_guarded(const ResidualProgram& r, const Program& original, int max_threads);

/// The concurrent_k/3 support code and thread bookkeeping facts.
std::string guard_support_text(int max_threads);

/// Body calls with no definition: neither builtin, nor defined in `r`, nor
/// an original predicate.
std::vector<std::string> closedness_problems(const ResidualProgram& r, const Program& original);

}  // namespace andpe
