#include "andpe/analysis.hpp"

#include <fstream>
#include <sstream>

#include "andpe/syntax.hpp"

namespace andpe {

void BuiltinModel::define(const PredicateId& pred, Rule rule) { rules_.insert_or_assign(pred, std::move(rule)); }

SuccessPattern BuiltinModel::apply(const PredicateId& pred, const GroundnessPattern& gr,
                                   const SharingPattern& sh) const {
  auto it = rules_.find(pred);
  if (it == rules_.end()) throw AnalysisError("no pattern model for builtin " + pred.to_string());
  if (gr.arity() != pred.arity || sh.arity() != pred.arity)
    throw AnalysisError("pattern arity mismatch for builtin " + pred.to_string());
  return it->second(gr, sh);
}

BuiltinModel BuiltinModel::standard() {
  BuiltinModel m;
  m.define({"is", 2}, [](const GroundnessPattern& gr, const SharingPattern& sh) {
    GroundnessPattern g = gr.contains(2) ? GroundnessPattern(2, gr.mask() | bit(1)) : gr;
    std::vector<PositionMask> groups = sh.groups();
    for (PositionMask& grp : groups) grp &= ~bit(1);
    groups[0] = bit(1);
    return SuccessPattern{g, SharingPattern(2, std::move(groups))};
  });
  for (const char* cmp : {">", "<", ">=", "=<", "=:="})
    m.define({cmp, 2}, [](const GroundnessPattern& gr, const SharingPattern& sh) { return SuccessPattern{gr, sh}; });
  m.define({"=", 2}, [](const GroundnessPattern& gr, const SharingPattern& sh) {
    GroundnessPattern g = (gr.contains(1) || gr.contains(2)) ? GroundnessPattern::all(2) : gr;
    PositionMask merged = sh.group(1) | sh.group(2);
    return SuccessPattern{g, SharingPattern(2, {merged, merged})};
  });
  return m;
}

SuccessPattern builtin_pattern(const BuiltinModel& b, const PredicateId& pred, const GroundnessPattern& gr,
                               const SharingPattern& sh) {
  return b.apply(pred, gr, sh);
}

SuccessPattern bottom_success(const PatternKey& key) { return {GroundnessPattern::all(key.pred.arity), key.sh}; }

namespace {

std::optional<SuccessPattern> join(const std::optional<SuccessPattern>& a, const std::optional<SuccessPattern>& b) {
  if (!a) return b;
  if (!b) return a;
  return SuccessPattern{meet_exits(a->gr, b->gr), lub_sharing(a->sh, b->sh)};
}

}  // namespace

Analyzer::Analyzer(const Program& program, BuiltinModel builtins, PatternTable overrides)
    : program_(program), builtins_(std::move(builtins)), overrides_(std::move(overrides)) {
  for (std::size_t i = 0; i < program_.clauses().size(); ++i) {
    const Clause& c = program_.clauses()[i];
    if (has_nonlinear_argument(c.head))
      warnings_.push_back("clause " + std::to_string(i + 1) + ": head of " + c.head.id().to_string() +
                          " repeats a variable inside one argument; sharing through it is not tracked");
  }
}

void Analyzer::add_entries(const std::vector<EntryPoint>& entries) {
  for (const EntryPoint& e : entries) {
    if (e.gr.arity() != e.pred.arity || e.sh.arity() != e.pred.arity)
      throw AnalysisError("entry pattern arity mismatch for " + e.pred.to_string());
    if (is_builtin(e.pred)) continue;
    if (!program_.defines(e.pred)) throw AnalysisError("entry predicate " + e.pred.to_string() + " is not defined");
    PatternKey key{e.pred, e.gr, e.sh};
    if (!overrides_.find(key)) rows_.try_emplace(key, std::nullopt);
  }
  solve();
}

std::optional<SuccessPattern> Analyzer::current(const PatternKey& key) {
  if (const SuccessPattern* o = overrides_.find(key)) return *o;
  if (is_builtin(key.pred)) return builtins_.apply(key.pred, key.gr, key.sh);
  if (!program_.defines(key.pred)) return std::nullopt;
  auto [it, inserted] = rows_.try_emplace(key, std::nullopt);
  if (inserted) changed_ = true;
  return it->second;
}

std::optional<SuccessPattern> Analyzer::evaluate(const PatternKey& key) {
  std::size_t n = key.pred.arity;
  std::vector<Term> args;
  for (std::size_t i = 0; i < n; ++i) args.push_back(Term::variable(fresh_variable_name()));
  Atom call{key.pred.name, std::move(args)};

  std::optional<SuccessPattern> result;
  for (std::size_t idx : program_.clauses_of(key.pred)) {
    Clause c = rename_apart(program_.clauses()[idx]);
    auto sigma = mgu(call, c.head);
    if (!sigma) continue;
    Atom head = sigma->apply(c.head);
    BindingState st = BindingState::at_head(head, key.gr, key.sh);
    for (const Atom& b : c.body_atoms()) {
      Atom bs = sigma->apply(b);
      auto [g, s] = st.patterns_for(bs);
      ExtendedAtom ea{bs, std::move(g), std::move(s)};
      st.advance(ea, current(ea.key()));
      if (!st.reachable) break;
    }
    if (!st.reachable) continue;
    auto [g, s] = st.patterns_for(head);
    result = join(result, SuccessPattern{std::move(g), std::move(s)});
  }
  return result;
}

void Analyzer::solve() {
  do {
    changed_ = false;
    ++rounds_;
    std::vector<PatternKey> keys;
    keys.reserve(rows_.size());
    for (const auto& [k, v] : rows_) keys.push_back(k);
    for (const PatternKey& k : keys) {
      std::optional<SuccessPattern> next = join(rows_.at(k), evaluate(k));
      auto& slot = rows_.at(k);
      if (next != slot) {
        slot = std::move(next);
        changed_ = true;
      }
    }
  } while (changed_);
}

std::optional<SuccessPattern> Analyzer::success(const PatternKey& key) {
  if (const SuccessPattern* o = overrides_.find(key)) return *o;
  if (is_builtin(key.pred)) return builtins_.apply(key.pred, key.gr, key.sh);
  if (!program_.defines(key.pred)) return std::nullopt;
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;
  rows_.emplace(key, std::nullopt);
  solve();
  return rows_.at(key);
}

SuccessLookup Analyzer::lookup() {
  return [this](const PatternKey& k) { return success(k); };
}

PatternTable Analyzer::table() const {
  PatternTable t;
  for (const auto& [k, v] : rows_) t.set(k, v ? *v : bottom_success(k));
  t.merge_from(overrides_);
  return t;
}

std::vector<PatternKey> Analyzer::failing_keys() const {
  std::vector<PatternKey> out;
  for (const auto& [k, v] : rows_)
    if (!v) out.push_back(k);
  return out;
}

PatternTable infer_patterns(const Program& p, const std::vector<EntryPoint>& entries, const BuiltinModel& b) {
  Analyzer a(p, b);
  a.add_entries(entries);
  return a.table();
}

PatternTable load_pattern_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AnalysisError("cannot read pattern file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pattern_text(ss.str()).table;
}

}  // namespace andpe
