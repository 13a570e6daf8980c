#include "andpe/pe.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "andpe/syntax.hpp"

namespace andpe {

std::optional<SldStep> extended_sld_step(const ExtendedAtom& ea, const Clause& c) {
  auto sigma = mgu(ea.atom, c.head);
  if (!sigma) return std::nullopt;
  Atom head = sigma->apply(c.head);
  std::vector<Atom> body;
  for (const Atom& b : c.body_atoms()) body.push_back(sigma->apply(b));
  ExtendedQuery q = entry_instance(ea.gr, ea.sh, head, body);
  return SldStep{std::move(*sigma), std::move(head), std::move(q)};
}

namespace {

// Adds the effect of `ea` succeeding, under its own call patterns.
void absorb(BindingState& st, const ExtendedAtom& ea, const SuccessLookup& lookup) {
  if (!st.reachable) return;
  for (const std::string& v : ground_vars(ea.gr, ea.atom)) st.ground.insert(v);
  for (const VarPair& pr : shared_pairs(ea.sh, ea.atom)) st.sharing.insert(pr);
  st.advance(ea, lookup(ea.key()));
}

ExtendedQuery slice(const ExtendedQuery& q, std::size_t from, std::size_t to) {
  return ExtendedQuery(q.begin() + static_cast<std::ptrdiff_t>(from), q.begin() + static_cast<std::ptrdiff_t>(to));
}

bool segment_ok(const ExtendedQuery& seg, const Program& program) {
  bool user = false;
  for (const ExtendedAtom& ea : seg) {
    PredicateId id = ea.atom.id();
    if (program.defines(id)) {
      user = true;
      continue;
    }
    if (!is_builtin(id) || is_comparison(id)) return false;
    if (id == PredicateId{"is", 2} && !ea.gr.contains(2)) return false;
  }
  return user;
}

std::set<std::string> query_vars(const ExtendedQuery& q) {
  std::set<std::string> out;
  for (const ExtendedAtom& ea : q)
    for (const Term& t : ea.atom.args) collect_vars(t, out);
  return out;
}

bool independent(const ExtendedQuery& a, const ExtendedQuery& b, const BindingState& st) {
  std::set<std::string> va = query_vars(a), vb = query_vars(b);
  for (const std::string& x : va) {
    if (st.is_ground(x)) continue;
    if (vb.contains(x)) return false;
    for (const std::string& y : vb)
      if (!st.is_ground(y) && st.sharing.contains(VarPair(x, y))) return false;
  }
  return true;
}

}  // namespace

std::optional<Partition> partition(const ExtendedQuery& q, const BindingState& head, const SuccessLookup& lookup,
                                   const Program& program) {
  const std::size_t n = q.size();
  if (n < 2) return std::nullopt;
  for (std::size_t i = 0; i + 2 <= n; ++i) {
    BindingState st1 = head;
    ExtendedQuery q1 = prop(slice(q, 0, i), {}, lookup, &st1);
    if (!st1.reachable) break;
    for (std::size_t total = n - i; total >= 2; --total) {
      for (std::size_t k2 = 1; k2 < total; ++k2) {
        BindingState s2 = st1;
        ExtendedQuery q2 = prop(slice(q, i, i + k2), {}, lookup, &s2);
        if (!segment_ok(q2, program)) continue;
        BindingState s3 = st1;
        ExtendedQuery q3 = prop(slice(q, i + k2, i + total), {}, lookup, &s3);
        if (!segment_ok(q3, program)) continue;
        if (!independent(q2, q3, st1)) continue;
        // Q4 runs once both branches have succeeded.
        BindingState s4 = s2;
        for (const ExtendedAtom& ea : q3) absorb(s4, ea, lookup);
        ExtendedQuery q4 = prop(slice(q, i + total, n), {}, lookup, &s4);
        return Partition{std::move(q1), std::move(q2), std::move(q3), std::move(q4)};
      }
    }
  }
  return std::nullopt;
}

std::optional<Partition> partition(const Atom& head, const GroundnessPattern& gr, const SharingPattern& sh,
                                   const ExtendedQuery& q, const SuccessLookup& lookup, const Program& program) {
  return partition(q, BindingState::at_head(head, gr, sh), lookup, program);
}

bool is_variant(const ExtendedAtom& a, const ExtendedAtom& b) {
  return a.gr == b.gr && a.sh == b.sh && is_variant(a.atom, b.atom);
}

bool embeds(const Term& big, const Term& small) {
  if (big.is_variable()) return small.is_variable();
  if (big.is_integer()) return small.is_integer();
  if (small.is_compound() && small.name() == big.name() && small.arity() == big.arity()) {
    bool all = true;
    for (std::size_t i = 0; i < big.arity() && all; ++i) all = embeds(big.arg(i), small.arg(i));
    if (all) return true;
  }
  for (const Term& a : big.args())
    if (embeds(a, small)) return true;
  return false;
}

bool embeds(const Atom& big, const Atom& small) {
  if (big.id() != small.id()) return false;
  for (std::size_t i = 0; i < big.args.size(); ++i)
    if (!embeds(big.args[i], small.args[i])) return false;
  return true;
}

bool embeds(const ExtendedAtom& big, const ExtendedAtom& small) {
  return big.gr == small.gr && big.sh == small.sh && embeds(big.atom, small.atom);
}

char label_code(Label l) {
  switch (l) {
    case Label::Variant: return 'v';
    case Label::Failure: return 'f';
    case Label::Embedding: return 'e';
    case Label::NonUser: return 'n';
    case Label::Parallel: return 'p';
    case Label::Unfolding: return 'u';
  }
  return '?';
}

std::string Trace::labels(std::size_t derivation) const {
  std::string out;
  for (std::size_t id : derivations.at(derivation)) out += label_code(transitions[id].label);
  return out;
}

namespace {

Term rename_vars(const Term& t, const std::map<std::string, std::string>& names) {
  if (t.is_variable()) {
    auto it = names.find(t.name());
    return it == names.end() ? t : Term::variable(it->second);
  }
  if (t.is_ground() || !t.is_compound()) return t;
  std::vector<Term> args;
  args.reserve(t.arity());
  for (const Term& a : t.args()) args.push_back(rename_vars(a, names));
  return Term::compound(t.name(), std::move(args));
}

void name_vars(const Term& t, std::map<std::string, std::string>& names) {
  if (t.is_variable()) {
    names.try_emplace(t.name(), normalized_variable_name(names.size()));
  } else if (!t.is_ground()) {
    for (const Term& a : t.args()) name_vars(a, names);
  }
}

}  // namespace

std::string format_substitution(const Substitution& sigma, const Atom& subject) {
  std::vector<std::string> order = ordered_vars(subject);
  std::map<std::string, std::string> names;
  for (const std::string& v : order) names.try_emplace(v, normalized_variable_name(names.size()));
  std::string out = "{";
  bool first = true;
  for (const std::string& v : order) {
    const Term* t = sigma.lookup(v);
    if (!t) continue;
    name_vars(*t, names);
    if (!first) out += ",";
    first = false;
    out += names.at(v) + "->" + to_string(rename_vars(*t, names));
  }
  return out + "}";
}

std::string Trace::to_log() const {
  std::string out;
  for (std::size_t d = 0; d < derivations.size(); ++d) {
    out += "derivation " + std::to_string(d + 1) + "\n";
    for (std::size_t id : derivations[d]) {
      const Transition& t = transitions[id];
      out += label_code(t.label);
      out += " " + t.subject.atom.id().to_string() + " " + t.subject.gr.to_string() + " " + t.subject.sh.to_string();
      if (t.label == Label::Parallel || t.label == Label::Unfolding)
        out += " " + format_substitution(t.sigma, t.subject.atom);
      out += "\n";
    }
  }
  return out;
}

namespace {

class Explorer {
 public:
  Explorer(const Program& p, const SuccessLookup& lookup, const PeOptions& opts, Trace& trace)
      : p_(p), lookup_(lookup), opts_(opts), trace_(trace) {}

  void run(const ExtendedAtom& init) {
    stack_.push_back({{init}, {}});
    while (!stack_.empty()) {
      Frame f = std::move(stack_.back());
      stack_.pop_back();
      drain(std::move(f));
    }
  }

 private:
  struct Frame {
    std::deque<ExtendedAtom> queue;
    std::vector<std::size_t> path;
  };

  using ClassKey = std::tuple<Atom, GroundnessPattern, SharingPattern>;

  std::size_t record(Transition t, std::vector<std::size_t>& path) {
    if (trace_.transitions.size() >= opts_.max_transitions)
      throw PeError("partial evaluation exceeded " + std::to_string(opts_.max_transitions) + " transitions");
    trace_.transitions.push_back(std::move(t));
    path.push_back(trace_.transitions.size() - 1);
    return path.back();
  }

  const ExtendedAtom* embedded_memo(const ExtendedAtom& ea) const {
    auto it = by_key_.find(ea.key());
    if (it == by_key_.end()) return nullptr;
    for (const ExtendedAtom& m : it->second)
      if (embeds(ea.atom, m.atom)) return &m;
    return nullptr;
  }

  void drain(Frame f) {
    while (!f.queue.empty()) {
      ExtendedAtom ea = std::move(f.queue.front());
      f.queue.pop_front();
      if (has_nonlinear_argument(ea.atom)) {
        std::string w = "non-linear argument in " + to_string(ea.atom) + "; sharing through it is not tracked";
        if (std::find(trace_.warnings.begin(), trace_.warnings.end(), w) == trace_.warnings.end())
          trace_.warnings.push_back(std::move(w));
      }
      ClassKey cls{canonical_form(ea.atom), ea.gr, ea.sh};
      if (memo_.contains(cls)) {
        record({Label::Variant, ea}, f.path);
        continue;
      }
      if (const ExtendedAtom* m = embedded_memo(ea)) {
        Transition t{Label::Embedding, ea};
        t.embedded = *m;
        record(std::move(t), f.path);
        continue;
      }
      PredicateId id = ea.atom.id();
      if (is_builtin(id)) {
        record({Label::NonUser, ea}, f.path);
        continue;
      }
      std::vector<Transition> branches;
      for (std::size_t idx : p_.clauses_of(id)) {
        Clause c = rename_apart(p_.clauses()[idx], vars(ea.atom));
        auto step = extended_sld_step(ea, c);
        if (!step) continue;
        BindingState head = BindingState::at_head(step->head, ea.gr, ea.sh);
        Transition t{Label::Unfolding, ea};
        t.clause = idx;
        t.renamed = std::move(c);
        t.sigma = std::move(step->sigma);
        if (auto split = partition(step->body, head, lookup_, p_)) {
          t.label = Label::Parallel;
          for (const ExtendedQuery* seg : {&split->q1, &split->q2, &split->q3, &split->q4})
            t.body.insert(t.body.end(), seg->begin(), seg->end());
          t.split = std::move(split);
        } else {
          t.body = prop(step->body, {}, lookup_, &head);
        }
        branches.push_back(std::move(t));
      }
      if (branches.empty()) {
        record({Label::Failure, ea}, f.path);
        continue;
      }
      memo_.insert(cls);
      by_key_[ea.key()].push_back(ea);
      // Transitions are numbered in clause order; the first branch is
      // explored first.
      std::vector<Frame> frames;
      for (Transition& t : branches) {
        Frame next{{t.body.begin(), t.body.end()}, f.path};
        next.queue.insert(next.queue.end(), f.queue.begin(), f.queue.end());
        record(std::move(t), next.path);
        frames.push_back(std::move(next));
      }
      for (std::size_t k = frames.size(); k-- > 0;) stack_.push_back(std::move(frames[k]));
      return;
    }
    trace_.derivations.push_back(std::move(f.path));
  }

  const Program& p_;
  const SuccessLookup& lookup_;
  const PeOptions& opts_;
  Trace& trace_;
  std::set<ClassKey> memo_;
  std::map<PatternKey, std::vector<ExtendedAtom>> by_key_;
  std::vector<Frame> stack_;
};

}  // namespace

Trace pe_run(const Program& p, const ExtendedAtom& init, const SuccessLookup& lookup, const PeOptions& opts) {
  if (!p.defines(init.atom.id()) && !is_builtin(init.atom.id()))
    throw PeError("initial predicate " + init.atom.id().to_string() + " is not defined");
  Trace trace{init, {}, {}, {}};
  Explorer(p, lookup, opts, trace).run(init);
  return trace;
}

}  // namespace andpe
