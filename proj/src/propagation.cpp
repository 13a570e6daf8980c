#include "andpe/propagation.hpp"

#include <map>

#include "andpe/syntax.hpp"

namespace andpe {

ExtendedAtom ExtendedAtom::make(Atom atom, GroundnessPattern gr, SharingPattern sh) {
  if (gr.arity() != atom.arity() || sh.arity() != atom.arity())
    throw std::invalid_argument("pattern arity does not match " + atom.id().to_string());
  return ExtendedAtom{std::move(atom), std::move(gr), std::move(sh)};
}

std::string ExtendedAtom::to_string() const {
  return "(" + andpe::to_string(atom) + ", " + gr.to_string() + ", " + sh.to_string() + ")";
}

std::vector<Atom> query_of(const ExtendedQuery& q) {
  std::vector<Atom> out;
  out.reserve(q.size());
  for (const ExtendedAtom& ea : q) out.push_back(ea.atom);
  return out;
}

ExtendedQuery apply_subst(const ExtendedQuery& q, const Substitution& s) {
  ExtendedQuery out;
  out.reserve(q.size());
  for (const ExtendedAtom& ea : q) out.push_back({s.apply(ea.atom), ea.gr, ea.sh});
  return out;
}

std::string to_string(const ExtendedQuery& q) {
  if (q.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i) out += ", ";
    out += q[i].to_string();
  }
  return out;
}

BindingState BindingState::at_head(const Atom& head, const GroundnessPattern& gr, const SharingPattern& sh) {
  BindingState st;
  st.ground = ground_vars(gr, head);
  st.sharing = shared_pairs(sh, head);
  return st;
}

bool BindingState::term_ground(const Term& t) const {
  if (t.is_ground()) return true;
  if (t.is_variable()) return ground.contains(t.name());
  for (const Term& a : t.args())
    if (!term_ground(a)) return false;
  return true;
}

bool BindingState::may_share(const std::string& x, const std::string& y) const {
  return x == y || sharing.contains(VarPair(x, y));
}

bool BindingState::terms_share(const Term& a, const Term& b) const {
  std::set<std::string> va = vars(a);
  if (va.empty()) return false;
  std::set<std::string> vb = vars(b);
  for (const std::string& x : va)
    for (const std::string& y : vb)
      if (may_share(x, y)) return true;
  return false;
}

std::pair<GroundnessPattern, SharingPattern> BindingState::patterns_for(const Atom& atom) const {
  std::size_t n = atom.arity();
  PositionMask g = 0;
  for (std::size_t j = 1; j <= n; ++j)
    if (term_ground(atom.args[j - 1])) g |= bit(j);
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = i + 1; j <= n; ++j)
      if (terms_share(atom.args[i - 1], atom.args[j - 1])) pairs.emplace(i, j);
  return {GroundnessPattern(n, g), SharingPattern::from_pairs(n, pairs)};
}

ExtendedAtom BindingState::refine(const ExtendedAtom& ea) const {
  if (!reachable) return ea;
  auto [g, s] = patterns_for(ea.atom);
  return {ea.atom, glb_groundness(ea.gr, g), lub_sharing(ea.sh, s)};
}

namespace {

bool is_unification(const Atom& a) { return a.predicate == "=" && a.arity() == 2; }

}  // namespace

void BindingState::advance(const ExtendedAtom& ea, const std::optional<SuccessPattern>& success) {
  if (!reachable) return;
  if (!success) {
    reachable = false;
    return;
  }
  for (const std::string& v : ground_vars(success->gr, ea.atom)) ground.insert(v);

  std::set<VarPair> fresh = shared_pairs(success->sh, ea.atom);
  // Explicit unification may alias variables inside a single argument.
  if (is_unification(ea.atom) && !(success->gr.contains(1) && success->gr.contains(2))) {
    std::set<std::string> all = vars(ea.atom);
    for (auto x = all.begin(); x != all.end(); ++x)
      for (auto y = std::next(x); y != all.end(); ++y) fresh.emplace(*x, *y);
  }
  if (fresh.empty()) return;

  std::map<std::string, std::set<std::string>> nb;
  for (const VarPair& p : sharing) {
    nb[p.first].insert(p.second);
    nb[p.second].insert(p.first);
  }
  auto reach = [&](const std::string& x) {
    std::set<std::string> out{x};
    if (auto it = nb.find(x); it != nb.end()) out.insert(it->second.begin(), it->second.end());
    return out;
  };
  for (const VarPair& p : fresh) {
    std::set<std::string> left = reach(p.first);
    std::set<std::string> right = reach(p.second);
    for (const std::string& w : left)
      for (const std::string& z : right)
        if (w != z) sharing.emplace(w, z);
  }
}

ExtendedQuery entry(const GroundnessPattern& gr, const SharingPattern& sh, const Clause& c) {
  return entry_instance(gr, sh, c.head, c.body_atoms());
}

ExtendedQuery entry_instance(const GroundnessPattern& gr, const SharingPattern& sh, const Atom& head_instance,
                             const std::vector<Atom>& body) {
  if (gr.arity() != head_instance.arity() || sh.arity() != head_instance.arity())
    throw std::invalid_argument("entry: pattern arity does not match " + head_instance.id().to_string());
  BindingState st = BindingState::at_head(head_instance, gr, sh);
  ExtendedQuery out;
  out.reserve(body.size());
  for (const Atom& b : body) {
    auto [g, s] = st.patterns_for(b);
    out.push_back({b, std::move(g), std::move(s)});
  }
  return out;
}

ExtendedQuery prop(const ExtendedQuery& q1, const ExtendedQuery& q2, const SuccessLookup& lookup,
                   BindingState* context) {
  ExtendedQuery out;
  out.reserve(q1.size() + q2.size());
  BindingState local;
  BindingState& st = context ? *context : local;
  for (std::size_t i = 0; i < q1.size(); ++i) {
    ExtendedAtom ea = (i == 0 && !context) ? q1[i] : st.refine(q1[i]);
    if (st.reachable) {
      // The atom's own call patterns are assumed safe, so they hold too.
      for (const std::string& v : ground_vars(ea.gr, ea.atom)) st.ground.insert(v);
      for (const VarPair& p : shared_pairs(ea.sh, ea.atom)) st.sharing.insert(p);
      st.advance(ea, lookup(ea.key()));
    }
    out.push_back(std::move(ea));
  }
  for (const ExtendedAtom& ea : q2) out.push_back(q1.empty() && !context ? ea : st.refine(ea));
  return out;
}

SharingPattern sharing_for(const Atom& atom, const BindingState& st) { return st.patterns_for(atom).second; }

bool has_nonlinear_argument(const Atom& a) {
  for (const Term& t : a.args) {
    std::map<std::string, int> count;
    std::vector<Term> stack{t};
    while (!stack.empty()) {
      Term cur = stack.back();
      stack.pop_back();
      if (cur.is_variable()) {
        if (++count[cur.name()] > 1) return true;
      } else if (cur.is_compound() && !cur.is_ground()) {
        for (const Term& x : cur.args()) stack.push_back(x);
      }
    }
  }
  return false;
}

}  // namespace andpe
