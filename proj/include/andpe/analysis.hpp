#pragma once

// Call/success pattern inference: a least fixpoint over (pred, π, μ) keys,
// seeded from entry points and extended on demand.

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "andpe/patterns.hpp"
#include "andpe/propagation.hpp"
#include "andpe/term.hpp"

namespace andpe {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BuiltinModel {
 public:
  using Rule = std::function<SuccessPattern(const GroundnessPattern&, const SharingPattern&)>;

  /// is/2, =/2 and the arithmetic comparisons.
  static BuiltinModel standard();

  void define(const PredicateId& pred, Rule rule);
  bool supports(const PredicateId& pred) const { return rules_.contains(pred); }
  /// Throws AnalysisError for an unsupported builtin.
  SuccessPattern apply(const PredicateId& pred, const GroundnessPattern& gr, const SharingPattern& sh) const;

 private:
  std::map<PredicateId, Rule> rules_;
};

SuccessPattern builtin_pattern(const BuiltinModel& b, const PredicateId& pred, const GroundnessPattern& gr,
                               const SharingPattern& sh);

class Analyzer {
 public:
  /// `overrides` rows take precedence over inferred ones.
  Analyzer(const Program& program, BuiltinModel builtins = BuiltinModel::standard(), PatternTable overrides = {});

  /// Adds entry points and iterates to a fixpoint. Throws AnalysisError when
  /// an entry names a predicate that is neither defined nor a builtin.
  void add_entries(const std::vector<EntryPoint>& entries);

  /// Success pattern for a call; nullopt when the call cannot succeed.
  /// Unseen user keys are analysed on demand.
  std::optional<SuccessPattern> success(const PatternKey& key);
  SuccessLookup lookup();

  /// Inferred rows merged with overrides. Rows that never succeed are shown
  /// with the bottom value (all positions ground, call sharing).
  PatternTable table() const;
  /// Rows for which the analysis found no successful derivation.
  std::vector<PatternKey> failing_keys() const;

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  std::size_t rounds() const noexcept { return rounds_; }
  const Program& program() const noexcept { return program_; }
  const BuiltinModel& builtins() const noexcept { return builtins_; }

 private:
  std::optional<SuccessPattern> current(const PatternKey& key);
  std::optional<SuccessPattern> evaluate(const PatternKey& key);
  void solve();

  Program program_;
  BuiltinModel builtins_;
  PatternTable overrides_;
  std::map<PatternKey, std::optional<SuccessPattern>> rows_;
  std::vector<std::string> warnings_;
  std::size_t rounds_ = 0;
  bool changed_ = false;
};

/// One-shot analysis: the table for `entries` over `p`.
PatternTable infer_patterns(const Program& p, const std::vector<EntryPoint>& entries,
                            const BuiltinModel& b = BuiltinModel::standard());

/// Reads a pattern file (rows only; entry lines are ignored). Throws
/// PatternFormatError on malformed text and AnalysisError when the file
/// cannot be read.
PatternTable load_pattern_overrides(const std::string& path);

/// The bottom value used when exporting a row that never succeeds.
SuccessPattern bottom_success(const PatternKey& key);

}  // namespace andpe
