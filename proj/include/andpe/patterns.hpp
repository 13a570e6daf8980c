#pragma once

// Groundness (π) and sharing (μ) patterns over argument positions, stored as
// 64-bit position masks (bit i-1 stands for position i).

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "andpe/term.hpp"

namespace andpe {

inline constexpr std::size_t kMaxArity = 64;

using PositionMask = std::uint64_t;

PositionMask full_mask(std::size_t arity);
inline PositionMask bit(std::size_t position) { return PositionMask{1} << (position - 1); }

class GroundnessPattern {
 public:
  GroundnessPattern() = default;
  /// Throws std::invalid_argument when arity exceeds kMaxArity or the mask
  /// mentions positions beyond the arity.
  GroundnessPattern(std::size_t arity, PositionMask mask);
  static GroundnessPattern none(std::size_t arity) { return {arity, 0}; }
  static GroundnessPattern all(std::size_t arity) { return {arity, full_mask(arity)}; }
  static GroundnessPattern of(std::size_t arity, std::initializer_list<std::size_t> positions);

  std::size_t arity() const noexcept { return arity_; }
  PositionMask mask() const noexcept { return mask_; }
  bool contains(std::size_t position) const { return (mask_ & bit(position)) != 0; }
  bool subset_of(const GroundnessPattern& o) const { return (mask_ & ~o.mask_) == 0; }
  std::vector<std::size_t> positions() const;

  /// `{1,2}`
  std::string to_string() const;

  friend auto operator<=>(const GroundnessPattern&, const GroundnessPattern&) = default;

 private:
  std::size_t arity_ = 0;
  PositionMask mask_ = 0;
};

class SharingPattern {
 public:
  SharingPattern() = default;
  /// groups[i] is the sharing set of position i+1. The result is closed
  /// under reflexivity and symmetry.
  SharingPattern(std::size_t arity, std::vector<PositionMask> groups);
  static SharingPattern independent(std::size_t arity);
  static SharingPattern full(std::size_t arity);
  static SharingPattern of(std::initializer_list<std::initializer_list<std::size_t>> groups);
  /// Symmetric closure of the given unordered position pairs.
  static SharingPattern from_pairs(std::size_t arity, const std::set<std::pair<std::size_t, std::size_t>>& pairs);

  std::size_t arity() const noexcept { return groups_.size(); }
  PositionMask group(std::size_t position) const { return groups_.at(position - 1); }
  const std::vector<PositionMask>& groups() const noexcept { return groups_; }
  bool shares(std::size_t i, std::size_t j) const { return (group(i) & bit(j)) != 0; }
  bool is_independent() const;
  bool subset_of(const SharingPattern& o) const;
  /// Position pairs (i<j) that may share.
  std::set<std::pair<std::size_t, std::size_t>> pairs() const;

  /// `<{1,3},{2,3},{1,2,3}>`
  std::string to_string() const;

  friend auto operator<=>(const SharingPattern&, const SharingPattern&) = default;

 private:
  std::vector<PositionMask> groups_;
};

std::string mask_to_string(PositionMask m);

/// π1 ⊓ π2 = π1 ∪ π2. Throws std::invalid_argument on arity mismatch.
GroundnessPattern glb_groundness(const GroundnessPattern& a, const GroundnessPattern& b);
/// Safe meet of guarantees: positions ground in both.
GroundnessPattern meet_exits(const GroundnessPattern& a, const GroundnessPattern& b);
/// μ ⊔ μ' pointwise union. Throws std::invalid_argument on arity mismatch.
SharingPattern lub_sharing(const SharingPattern& a, const SharingPattern& b);

/// π(A): argument terms at π's positions.
std::vector<Term> ground_args(const GroundnessPattern& p, const Atom& a);
/// Variables of π(A).
std::set<std::string> ground_vars(const GroundnessPattern& p, const Atom& a);

/// Unordered variable pair, stored with first < second.
struct VarPair {
  std::string first;
  std::string second;
  VarPair(std::string a, std::string b);
  friend auto operator<=>(const VarPair&, const VarPair&) = default;
};

/// μ(A): pairs of distinct variables drawn from different argument positions
/// that co-occur in some sharing group.
std::set<VarPair> shared_pairs(const SharingPattern& m, const Atom& a);

struct SuccessPattern {
  GroundnessPattern gr;
  SharingPattern sh;
  friend auto operator<=>(const SuccessPattern&, const SuccessPattern&) = default;
};

struct PatternKey {
  PredicateId pred;
  GroundnessPattern gr;
  SharingPattern sh;
  friend auto operator<=>(const PatternKey&, const PatternKey&) = default;
};

struct EntryPoint {
  PredicateId pred;
  GroundnessPattern gr;
  SharingPattern sh;
};

class PatternTable {
 public:
  /// Throws std::invalid_argument when arities disagree.
  void set(const PatternKey& key, const SuccessPattern& success);
  const SuccessPattern* find(const PatternKey& key) const;
  const std::map<PatternKey, SuccessPattern>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  /// Rows of `other` replace rows with the same key.
  void merge_from(const PatternTable& other);

  std::string to_text() const;

  friend bool operator==(const PatternTable&, const PatternTable&) = default;

 private:
  std::map<PatternKey, SuccessPattern> rows_;
};

class PatternFormatError : public std::runtime_error {
 public:
  PatternFormatError(const std::string& msg, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct PatternFile {
  PatternTable table;
  std::vector<EntryPoint> entries;
};

std::string format_row(const PatternKey& key, const SuccessPattern& success);
std::string format_entry(const EntryPoint& e);

/// Parses the line-oriented pattern format; throws PatternFormatError.
PatternFile parse_pattern_text(std::string_view text);
/// `{1,2}` for the given arity.
GroundnessPattern parse_groundness(std::string_view text, std::size_t arity);
/// `<{1},{2}>` for the given arity.
SharingPattern parse_sharing(std::string_view text, std::size_t arity);
/// `pred/arity gr {..} [sh <..>]`; sharing defaults to independent.
EntryPoint parse_entry_spec(std::string_view text);

}  // namespace andpe
