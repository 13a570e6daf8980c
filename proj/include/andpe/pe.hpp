#pragma once

// Partial evaluation over extended atoms: one-step unfolding, the
// independence split of a resolvent, the variant/embedding whistles and the
// labelled transition system that produces a Trace.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "andpe/propagation.hpp"
#include "andpe/term.hpp"

namespace andpe {

class PeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SldStep {
  Substitution sigma;
  /// The selected atom after σ (equal to the clause head after σ).
  Atom head;
  ExtendedQuery body;
};

/// Resolves `ea` with `c`, which must already be renamed apart from it.
/// Body patterns come from the head instance under (π, μ); σ touches atoms
/// only.
std::optional<SldStep> extended_sld_step(const ExtendedAtom& ea, const Clause& c);

struct Partition {
  ExtendedQuery q1, q2, q3, q4;
  friend bool operator==(const Partition&, const Partition&) = default;
};

/// First admissible split of `q` (|Q1| ascending, then |Q2|+|Q3| descending,
/// then the leftmost Q2/Q3 boundary). `head` is the binding state of the
/// clause head instance; independence is judged after Q1 has succeeded.
/// Each parallel segment needs a user atom and no comparisons, and `is/2`
/// there needs a ground right side.
std::optional<Partition> partition(const ExtendedQuery& q, const BindingState& head, const SuccessLookup& lookup,
                                   const Program& program);
/// Same, with the head state built from a head instance and its call patterns.
std::optional<Partition> partition(const Atom& head, const GroundnessPattern& gr, const SharingPattern& sh,
                                   const ExtendedQuery& q, const SuccessLookup& lookup, const Program& program);

bool is_variant(const ExtendedAtom& a, const ExtendedAtom& b);
/// Pure homeomorphic embedding; any variable embeds any variable and any
/// integer embeds any integer.
bool embeds(const Term& big, const Term& small);
bool embeds(const Atom& big, const Atom& small);
/// Embedding of atoms with equal patterns.
bool embeds(const ExtendedAtom& big, const ExtendedAtom& small);

enum class Label { Variant, Failure, Embedding, NonUser, Parallel, Unfolding };

char label_code(Label l);

struct Transition {
  Label label = Label::Failure;
  ExtendedAtom subject;
  /// Program clause index for parallel/unfolding, npos otherwise.
  std::size_t clause = npos;
  /// The clause as renamed apart for this step.
  std::optional<Clause> renamed;
  Substitution sigma;
  /// Body after propagation; for parallel, Q1..Q4 concatenated.
  ExtendedQuery body;
  std::optional<Partition> split;
  /// For embedding: the memo atom that was embedded.
  std::optional<ExtendedAtom> embedded;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Transition() = default;
  Transition(Label l, ExtendedAtom s) : label(l), subject(std::move(s)) {}
};

struct Trace {
  ExtendedAtom init;
  /// Every transition once, in exploration order.
  std::vector<Transition> transitions;
  /// Each derivation as indices into `transitions`, from the initial state
  /// to the empty queue. Derivations share prefixes.
  std::vector<std::vector<std::size_t>> derivations;
  std::vector<std::string> warnings;

  /// Label codes of one derivation, e.g. "pnnvnvn".
  std::string labels(std::size_t derivation) const;
  /// One `label pred/arity gr sh [σ]` line per transition, each derivation
  /// introduced by a `derivation <k>` line.
  std::string to_log() const;
};

struct PeOptions {
  /// Aborts with PeError beyond this many transitions.
  std::size_t max_transitions = 1'000'000;
};

/// Explores every derivation from ⟨init; {}⟩ with one memo shared across
/// derivations.
Trace pe_run(const Program& p, const ExtendedAtom& init, const SuccessLookup& lookup, const PeOptions& opts = {});

/// σ restricted to the variables of `subject`, with variables renamed
/// A, B, ... by first occurrence (subject first).
std::string format_substitution(const Substitution& sigma, const Atom& subject);

}  // namespace andpe
