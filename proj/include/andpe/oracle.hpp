#pragma once

// Reference SLD interpreter with integer arithmetic, and the dynamic checks
// built on it: answer equivalence, strict independence at `&` sites and
// call/success pattern safeness.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "andpe/codegen.hpp"
#include "andpe/patterns.hpp"
#include "andpe/propagation.hpp"
#include "andpe/term.hpp"

namespace andpe {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Environment variable holding the default resolution step cap.
inline constexpr const char* kDepthCapEnv = "ANDPE_DEPTH_CAP";
inline constexpr std::size_t kDefaultDepthCap = 1'000'000;

/// The cap from ANDPE_DEPTH_CAP when set to a positive integer, else 10^6.
std::size_t default_depth_cap();

struct SolveLimits {
  /// Resolution steps (user-predicate calls) before giving up.
  std::size_t max_steps = default_depth_cap();
  std::size_t max_answers = static_cast<std::size_t>(-1);
};

enum class SolveStatus {
  /// The search tree was exhausted.
  Complete,
  /// Stopped at max_answers; the answers found so far are exact.
  AnswerLimit,
  /// Stopped at max_steps; the answer list may be incomplete.
  DepthExhausted,
  InstantiationError,
  ArithmeticError,
  /// An answer was cyclic (no occurs check) or too deep to convert.
  CyclicAnswer,
};

const char* to_string(SolveStatus s);

struct Answer {
  /// Query variables in order of first occurrence, fully dereferenced.
  /// Unbound variables are named _G<n>.
  std::vector<std::pair<std::string, Term>> bindings;

  /// The bindings as `X=t, ...` with unbound variables renamed canonically,
  /// so equal strings mean equal answers up to renaming.
  std::string canonical() const;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Complete;
  std::vector<Answer> answers;
  std::size_t steps = 0;
  /// Detail for the error statuses.
  std::string message;

  /// True for Complete and AnswerLimit.
  bool finished() const noexcept {
    return status == SolveStatus::Complete || status == SolveStatus::AnswerLimit;
  }
  /// Sorted canonical answers.
  std::vector<std::string> answer_multiset() const;
};

/// Depth-first, left-to-right, textual clause order, no occurs check. `&` is
/// read as `,`. Calls to predicates with no clauses fail.
SolveResult solve(const Program& p, const std::vector<Atom>& query, const SolveLimits& limits = {});

/// One plain SLD step of `goal` against a clause already renamed apart:
/// the mgu and the instantiated body (parallel groups flattened).
struct PlainStep {
  Substitution sigma;
  std::vector<Atom> body;
};
std::optional<PlainStep> sld_step(const Atom& goal, const Clause& renamed);

/// Whether `q` is an instance of the entry predicate that grounds every π
/// position and aliases positions only as μ allows. `why` gets the reason.
bool conforms(const Atom& q, const PredicateId& pred, const GroundnessPattern& gr, const SharingPattern& sh,
              std::string* why = nullptr);

struct EquivalenceReport {
  struct Item {
    Atom query;
    SolveResult original;
    SolveResult residual;
    bool equal = false;
  };
  std::vector<Item> items;

  bool ok() const;
  std::string to_text() const;
};

/// Compares answer multisets of each query on `original` and of the renamed
/// query on `residual`. A query counts as equal only when both runs
/// finished. Throws OracleError for a query that does not conform to
/// `entry`.
EquivalenceReport check_equivalence(const Program& original, const ResidualProgram& residual,
                                    const ExtendedAtom& entry, const std::vector<Atom>& queries,
                                    const SolveLimits& limits = {});

struct IndependenceReport {
  struct Site {
    /// 1-based clause index in the residual program and body goal position.
    std::size_t clause = 0;
    std::size_t position = 0;
    std::size_t checked = 0;
    /// Offending goal pairs, `left & right` as instantiated at entry.
    std::vector<std::string> violations;
  };
  std::vector<Site> sites;
  /// Queries whose run did not finish.
  std::vector<std::string> incomplete;

  std::size_t violation_count() const;
  bool ok() const { return violation_count() == 0 && incomplete.empty(); }
  /// One `site <c,p> checked <n> violations <m>` line per site.
  std::string to_text() const;
};

/// Runs `queries` on the residual and, at every parallel group entry,
/// checks that the two sides share no unbound variable.
IndependenceReport check_independence(const Program& residual, const std::vector<std::vector<Atom>>& queries,
                                      const SolveLimits& limits = {});
IndependenceReport check_independence(const ResidualProgram& residual, const std::vector<Atom>& queries,
                                      const SolveLimits& limits = {});

struct SafenessReport {
  std::size_t calls_checked = 0;
  std::size_t exits_checked = 0;
  std::vector<std::string> violations;
  std::vector<std::string> incomplete;

  bool ok() const { return violations.empty() && incomplete.empty(); }
  std::string to_text() const;
};

/// For every run-time call matching a table row's call pattern, checks each
/// exit against the row: π' positions ground, position aliasing within μ'.
SafenessReport check_safeness(const PatternTable& table, const Program& p, const std::vector<Atom>& queries,
                              const SolveLimits& limits = {});

/// Runs `queries` on the residual and checks every call to a specialized
/// predicate against the call patterns it was specialized for.
SafenessReport check_call_patterns(const ResidualProgram& residual, const std::vector<Atom>& queries,
                                   const SolveLimits& limits = {});

/// Ground positions and position aliasing of a concrete call.
struct RuntimePattern {
  PositionMask ground = 0;
  /// Per position (0-based): the positions sharing an unbound variable with
  /// it, itself included unless ground.
  std::vector<PositionMask> aliases;

  static RuntimePattern of(const Atom& a);
  /// π ground here and every alias allowed by μ.
  bool satisfies(const GroundnessPattern& gr, const SharingPattern& sh) const;
};

/// Reads one goal per non-blank line; `%` starts a comment. Throws
/// ParseError with the line of the offending query.
std::vector<std::vector<Atom>> parse_query_lines(std::string_view text);

}  // namespace andpe
