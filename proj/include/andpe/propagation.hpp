#pragma once

// Extended atoms and the two pattern propagation functions, `entry` and
// `prop`, over a variable-level binding state.

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "andpe/patterns.hpp"
#include "andpe/term.hpp"

namespace andpe {

struct ExtendedAtom {
  Atom atom;
  GroundnessPattern gr;
  SharingPattern sh;

  /// Throws std::invalid_argument when pattern arities differ from the atom's.
  static ExtendedAtom make(Atom atom, GroundnessPattern gr, SharingPattern sh);
  PatternKey key() const { return {atom.id(), gr, sh}; }
  std::string to_string() const;

  friend auto operator<=>(const ExtendedAtom&, const ExtendedAtom&) = default;
};

using ExtendedQuery = std::vector<ExtendedAtom>;

std::vector<Atom> query_of(const ExtendedQuery& q);
/// Substitution on atoms only; patterns pass through.
ExtendedQuery apply_subst(const ExtendedQuery& q, const Substitution& s);
std::string to_string(const ExtendedQuery& q);

/// Success lookup: nullopt means the call cannot succeed (bottom).
using SuccessLookup = std::function<std::optional<SuccessPattern>(const PatternKey&)>;

/// What is known about the variables of a query prefix after it succeeds:
/// which are ground and which distinct pairs may share.
struct BindingState {
  std::set<std::string> ground;
  std::set<VarPair> sharing;
  bool reachable = true;

  /// State right after unifying with a call satisfying (π, μ) on `head`.
  static BindingState at_head(const Atom& head, const GroundnessPattern& gr, const SharingPattern& sh);

  bool is_ground(const std::string& v) const { return ground.contains(v); }
  bool term_ground(const Term& t) const;
  bool may_share(const std::string& x, const std::string& y) const;
  /// Two terms may share: a common variable or a pair in `sharing`.
  bool terms_share(const Term& a, const Term& b) const;

  /// Patterns this state implies for `atom`.
  std::pair<GroundnessPattern, SharingPattern> patterns_for(const Atom& atom) const;
  /// Strengthens the patterns of `ea` with this state (π ⊓ π_s, μ ⊔ μ_s).
  ExtendedAtom refine(const ExtendedAtom& ea) const;
  /// Accounts for `ea` succeeding with `success`; bottom makes the state
  /// unreachable.
  void advance(const ExtendedAtom& ea, const std::optional<SuccessPattern>& success);
};

/// The entry procedure over `c`'s own head: j ∈ π_i iff Var(t_ij) ⊆
/// Var(π(H)); positions share iff their terms share a variable literally or
/// through μ(H).
ExtendedQuery entry(const GroundnessPattern& gr, const SharingPattern& sh, const Clause& c);

/// Body of `c` after unifying its head with a call satisfying (π, μ):
/// `head_instance` is Hσ and `body` is the body with σ applied.
ExtendedQuery entry_instance(const GroundnessPattern& gr, const SharingPattern& sh, const Atom& head_instance,
                             const std::vector<Atom>& body);

/// prop(Q1, Q2): success patterns of Q1's atoms pushed rightwards in order,
/// then onto every atom of Q2. When `context` is given the first atom is also
/// refined by it and the final state is written back; otherwise the first
/// atom's own call patterns seed the state.
ExtendedQuery prop(const ExtendedQuery& q1, const ExtendedQuery& q2, const SuccessLookup& lookup,
                   BindingState* context = nullptr);

/// Position pairs of `atom` that share under `st` (literal or recorded).
SharingPattern sharing_for(const Atom& atom, const BindingState& st);

/// True when some argument of `a` contains the same variable twice.
bool has_nonlinear_argument(const Atom& a);

}  // namespace andpe
