#include "andpe/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <map>
#include <sstream>

#include "andpe/syntax.hpp"

namespace andpe {

std::size_t default_depth_cap() {
  const char* env = std::getenv(kDepthCapEnv);
  if (!env) return kDefaultDepthCap;
  std::string_view s(env);
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v == 0) return kDefaultDepthCap;
  return v;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Complete: return "complete";
    case SolveStatus::AnswerLimit: return "answer limit";
    case SolveStatus::DepthExhausted: return "depth cap exhausted";
    case SolveStatus::InstantiationError: return "instantiation error";
    case SolveStatus::ArithmeticError: return "arithmetic error";
    case SolveStatus::CyclicAnswer: return "cyclic answer";
  }
  return "?";
}

std::string Answer::canonical() const {
  std::map<std::string, Term> rn;
  std::size_t n = 0;
  for (const auto& [name, t] : bindings)
    for (const auto& v : ordered_vars(Atom{"t", {t}}))
      if (!rn.contains(v)) rn.emplace(v, Term::variable("_V" + std::to_string(++n)));
  Substitution s = Substitution::from_bindings(std::move(rn));
  std::string out;
  for (const auto& [name, t] : bindings) {
    if (!out.empty()) out += ", ";
    out += name + "=" + to_string(s.apply(t));
  }
  return out;
}

std::vector<std::string> SolveResult::answer_multiset() const {
  std::vector<std::string> v;
  v.reserve(answers.size());
  for (const auto& a : answers) v.push_back(a.canonical());
  std::sort(v.begin(), v.end());
  return v;
}

namespace {

struct InstantiationFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArithmeticFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CyclicFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deeper answers are taken to be cyclic.
constexpr std::size_t kMaxAnswerDepth = 20000;

// Heap cells. A Ref pointing at itself is an unbound variable; Str points at
// a Fun cell followed by the arguments.
enum class Tag : std::uint8_t { Ref, Int, Con, Str, Fun, Unset };

struct Cell {
  Tag tag = Tag::Unset;
  std::int64_t val = 0;
};

// Clause terms with variables numbered per clause.
struct Tpl {
  enum Kind : std::uint8_t { Var, Int, Con, Str } kind = Var;
  std::int64_t val = 0;
  std::vector<Tpl> args;
};

struct BodyItem {
  Tpl goal;
  // Parallel group: the site number and the two sides.
  std::int64_t site = -1;
  std::vector<Tpl> left, right;
};

struct CompiledClause {
  std::vector<Tpl> head;
  std::vector<BodyItem> body;
  std::size_t nvars = 0;
};

enum class Builtin : std::uint8_t { None, Is, Eq, Lt, Gt, Le, Ge, ArEq };

struct PredInfo {
  PredicateId id;
  Builtin builtin = Builtin::None;
  std::vector<std::size_t> clauses;
};

// Continuation nodes form a persistent list; `next` is -1 at the end.
struct Node {
  enum Kind : std::uint8_t { Goal, Exit, Par } kind = Goal;
  std::int64_t next = -1;
  Cell a, b;
  std::int64_t id = 0;
};

struct ChoicePoint {
  std::int64_t node;
  std::size_t next_clause;
  std::size_t heap, trail, nodes, calls;
};

class Hooks {
 public:
  virtual ~Hooks() = default;
  bool track_calls = false;
  virtual void on_call(std::size_t, const PredInfo&, Cell) {}
  virtual void on_exit(std::size_t, const PredInfo&, Cell) {}
  virtual void on_par(std::size_t, Cell, Cell) {}
};

class Machine {
 public:
  explicit Machine(const Program& p) {
    for (const auto& c : p.clauses()) {
      CompiledClause cc;
      std::map<std::string, std::size_t> vars;
      for (const Term& t : c.head.args) cc.head.push_back(compile(t, vars));
      for (std::size_t pos = 0; pos < c.body.size(); ++pos) {
        BodyItem item;
        if (const auto* a = std::get_if<Atom>(&c.body[pos])) {
          item.goal = compile(a->as_term(), vars);
        } else {
          const auto& g = std::get<ParGroup>(c.body[pos]);
          item.site = static_cast<std::int64_t>(sites_.size());
          sites_.emplace_back(clauses_.size() + 1, pos + 1);
          for (const auto& x : g.left) item.left.push_back(compile(x.as_term(), vars));
          for (const auto& x : g.right) item.right.push_back(compile(x.as_term(), vars));
          // Registered now: the functor table must not grow during a run.
          functor("$goals", g.left.size());
          functor("$goals", g.right.size());
        }
        cc.body.push_back(std::move(item));
      }
      cc.nvars = vars.size();
      preds_[functor(c.head.predicate, c.head.arity())].clauses.push_back(clauses_.size());
      clauses_.push_back(std::move(cc));
    }
  }

  const std::vector<std::pair<std::size_t, std::size_t>>& sites() const { return sites_; }

  SolveResult run(const std::vector<Atom>& query, const SolveLimits& limits, Hooks* hooks = nullptr) {
    heap_.clear();
    trail_.clear();
    nodes_.clear();
    cps_.clear();
    calls_.clear();
    steps_ = 0;
    exhausted_ = false;
    hooks_ = hooks;
    limits_ = limits;

    std::map<std::string, std::size_t> vars;
    std::vector<Tpl> goals;
    std::vector<std::string> qvars;
    for (const auto& a : query) {
      for (const auto& v : ordered_vars(a))
        if (std::find(qvars.begin(), qvars.end(), v) == qvars.end()) qvars.push_back(v);
      goals.push_back(compile(a.as_term(), vars));
    }
    env_.assign(vars.size(), Cell{});
    std::vector<Cell> built;
    for (const auto& g : goals) built.push_back(build(g));
    std::int64_t cur = -1;
    for (auto it = built.rbegin(); it != built.rend(); ++it) cur = push_node(Node::Goal, cur, *it);
    std::vector<std::pair<std::string, Cell>> qcells;
    for (const auto& v : qvars) qcells.emplace_back(v, env_[vars.at(v)]);

    SolveResult res;
    try {
      for (;;) {
        if (exhausted_) {
          res.status = SolveStatus::DepthExhausted;
          break;
        }
        if (cur == -1) {
          if (res.answers.size() >= limits_.max_answers) {
            res.status = SolveStatus::AnswerLimit;
            break;
          }
          Answer ans;
          for (const auto& [name, cell] : qcells) ans.bindings.emplace_back(name, to_term(cell));
          res.answers.push_back(std::move(ans));
          if (res.answers.size() >= limits_.max_answers) {
            res.status = SolveStatus::AnswerLimit;
            break;
          }
          if (!backtrack(cur)) break;
          continue;
        }
        Node n = nodes_[static_cast<std::size_t>(cur)];
        if (n.kind == Node::Exit) {
          const auto& [fid, goal] = calls_[static_cast<std::size_t>(n.id)];
          hooks_->on_exit(static_cast<std::size_t>(n.id), preds_[fid], goal);
          cur = n.next;
          continue;
        }
        if (n.kind == Node::Par) {
          if (hooks_) hooks_->on_par(static_cast<std::size_t>(n.id), n.a, n.b);
          cur = n.next;
          continue;
        }
        Cell g = n.a;
        PredInfo& pi = preds_[goal_functor(g)];
        if (pi.builtin != Builtin::None) {
          if (run_builtin(pi.builtin, g)) {
            cur = n.next;
          } else if (!backtrack(cur)) {
            break;
          }
          continue;
        }
        if (hooks_ && hooks_->track_calls) {
          calls_.emplace_back(goal_functor(g), g);
          hooks_->on_call(calls_.size() - 1, pi, g);
        }
        if (!try_clauses(cur, 0, cur) && !backtrack(cur)) break;
      }
      if (exhausted_) res.status = SolveStatus::DepthExhausted;
    } catch (const InstantiationFault& e) {
      res.status = SolveStatus::InstantiationError;
      res.message = e.what();
    } catch (const ArithmeticFault& e) {
      res.status = SolveStatus::ArithmeticError;
      res.message = e.what();
    } catch (const CyclicFault& e) {
      res.status = SolveStatus::CyclicAnswer;
      res.message = e.what();
    }
    res.steps = steps_;
    return res;
  }

  // Term conversion and runtime patterns for the hooks.
  Term to_term(Cell c, std::size_t depth = 0) const {
    if (depth > kMaxAnswerDepth) throw CyclicFault("answer term is cyclic or deeper than " + std::to_string(kMaxAnswerDepth));
    c = deref(c);
    switch (c.tag) {
      case Tag::Ref: return Term::variable("_G" + std::to_string(c.val));
      case Tag::Int: return Term::integer(c.val);
      case Tag::Con: return Term::constant(fnames_[static_cast<std::size_t>(c.val)].first);
      case Tag::Str: {
        const auto& [name, arity] = fnames_[static_cast<std::size_t>(heap_[static_cast<std::size_t>(c.val)].val)];
        std::vector<Term> args;
        args.reserve(arity);
        for (std::size_t i = 0; i < arity; ++i) args.push_back(to_term(heap_[static_cast<std::size_t>(c.val) + 1 + i], depth + 1));
        return Term::compound(name, std::move(args));
      }
      default: return Term::constant("?");
    }
  }

  // Argument cells of a goal or tuple.
  std::vector<Cell> args_of(Cell g) const {
    g = deref(g);
    std::vector<Cell> out;
    if (g.tag != Tag::Str) return out;
    auto base = static_cast<std::size_t>(g.val);
    std::size_t arity = fnames_[static_cast<std::size_t>(heap_[base].val)].second;
    for (std::size_t i = 0; i < arity; ++i) out.push_back(heap_[base + 1 + i]);
    return out;
  }

  void unbound_vars(Cell c, std::vector<std::int64_t>& out) const {
    std::vector<Cell> stack{c};
    while (!stack.empty()) {
      Cell x = deref(stack.back());
      stack.pop_back();
      if (x.tag == Tag::Ref) {
        out.push_back(x.val);
      } else if (x.tag == Tag::Str) {
        auto base = static_cast<std::size_t>(x.val);
        std::size_t arity = fnames_[static_cast<std::size_t>(heap_[base].val)].second;
        for (std::size_t i = 0; i < arity; ++i) stack.push_back(heap_[base + 1 + i]);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  RuntimePattern pattern_of(Cell g) const {
    std::vector<Cell> args = args_of(g);
    std::vector<std::vector<std::int64_t>> vs(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) unbound_vars(args[i], vs[i]);
    RuntimePattern rp;
    rp.aliases.assign(args.size(), 0);
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (vs[i].empty()) {
        rp.ground |= bit(i + 1);
        continue;
      }
      for (std::size_t j = 0; j < args.size(); ++j) {
        std::vector<std::int64_t> common;
        std::set_intersection(vs[i].begin(), vs[i].end(), vs[j].begin(), vs[j].end(), std::back_inserter(common));
        if (!common.empty()) rp.aliases[i] |= bit(j + 1);
      }
    }
    return rp;
  }

 private:
  std::size_t functor(const std::string& name, std::size_t arity) {
    auto [it, inserted] = fids_.try_emplace({name, arity}, fnames_.size());
    if (inserted) {
      fnames_.emplace_back(name, arity);
      PredInfo pi;
      pi.id = {name, arity};
      if (arity == 2) {
        if (name == "is") pi.builtin = Builtin::Is;
        else if (name == "=") pi.builtin = Builtin::Eq;
        else if (name == "<") pi.builtin = Builtin::Lt;
        else if (name == ">") pi.builtin = Builtin::Gt;
        else if (name == "=<") pi.builtin = Builtin::Le;
        else if (name == ">=") pi.builtin = Builtin::Ge;
        else if (name == "=:=") pi.builtin = Builtin::ArEq;
      }
      preds_.push_back(std::move(pi));
    }
    return it->second;
  }

  Tpl compile(const Term& t, std::map<std::string, std::size_t>& vars) {
    Tpl out;
    switch (t.kind()) {
      case Term::Kind::Variable: {
        auto [it, _] = vars.try_emplace(t.name(), vars.size());
        out.kind = Tpl::Var;
        out.val = static_cast<std::int64_t>(it->second);
        break;
      }
      case Term::Kind::Integer:
        out.kind = Tpl::Int;
        out.val = t.value();
        break;
      case Term::Kind::Compound:
        out.kind = t.arity() == 0 ? Tpl::Con : Tpl::Str;
        out.val = static_cast<std::int64_t>(functor(t.name(), t.arity()));
        for (const Term& a : t.args()) out.args.push_back(compile(a, vars));
        break;
    }
    return out;
  }

  Cell deref(Cell c) const {
    while (c.tag == Tag::Ref) {
      Cell n = heap_[static_cast<std::size_t>(c.val)];
      if (n.tag == Tag::Ref && n.val == c.val) return c;
      c = n;
    }
    return c;
  }

  std::size_t goal_functor(Cell g) const {
    return g.tag == Tag::Con ? static_cast<std::size_t>(g.val)
                             : static_cast<std::size_t>(heap_[static_cast<std::size_t>(g.val)].val);
  }

  Cell new_var() {
    auto a = static_cast<std::int64_t>(heap_.size());
    heap_.push_back({Tag::Ref, a});
    return {Tag::Ref, a};
  }

  // Cell for `t` under env_, creating unset variables.
  Cell build(const Tpl& t) {
    switch (t.kind) {
      case Tpl::Var: {
        Cell& e = env_[static_cast<std::size_t>(t.val)];
        if (e.tag == Tag::Unset) e = new_var();
        return e;
      }
      case Tpl::Int: return {Tag::Int, t.val};
      case Tpl::Con: return {Tag::Con, t.val};
      case Tpl::Str: {
        std::size_t base = heap_.size();
        heap_.push_back({Tag::Fun, t.val});
        heap_.resize(base + 1 + t.args.size());
        for (std::size_t i = 0; i < t.args.size(); ++i) {
          const Tpl& a = t.args[i];
          if (a.kind == Tpl::Var && env_[static_cast<std::size_t>(a.val)].tag == Tag::Unset) {
            // The argument slot itself becomes the variable.
            auto addr = static_cast<std::int64_t>(base + 1 + i);
            heap_[base + 1 + i] = {Tag::Ref, addr};
            env_[static_cast<std::size_t>(a.val)] = {Tag::Ref, addr};
          } else {
            Cell c = build(a);
            heap_[base + 1 + i] = c;
          }
        }
        return {Tag::Str, static_cast<std::int64_t>(base)};
      }
    }
    return {};
  }

  void bind(Cell var, Cell value) {
    heap_[static_cast<std::size_t>(var.val)] = value;
    trail_.push_back(static_cast<std::size_t>(var.val));
  }

  bool unify(Cell a, Cell b) {
    std::vector<std::pair<Cell, Cell>> todo{{a, b}};
    while (!todo.empty()) {
      auto [x, y] = todo.back();
      todo.pop_back();
      x = deref(x);
      y = deref(y);
      if (x.tag == Tag::Ref && y.tag == Tag::Ref) {
        if (x.val == y.val) continue;
        // Bind the younger variable to the older one.
        if (x.val < y.val) std::swap(x, y);
        bind(x, y);
        continue;
      }
      if (x.tag == Tag::Ref) {
        bind(x, y);
        continue;
      }
      if (y.tag == Tag::Ref) {
        bind(y, x);
        continue;
      }
      if (x.tag != y.tag) return false;
      if (x.tag == Tag::Int || x.tag == Tag::Con) {
        if (x.val != y.val) return false;
        continue;
      }
      auto bx = static_cast<std::size_t>(x.val), by = static_cast<std::size_t>(y.val);
      if (bx == by) continue;
      if (heap_[bx].val != heap_[by].val) return false;
      std::size_t arity = fnames_[static_cast<std::size_t>(heap_[bx].val)].second;
      for (std::size_t i = 0; i < arity; ++i) todo.emplace_back(heap_[bx + 1 + i], heap_[by + 1 + i]);
    }
    return true;
  }

  // Unifies a clause term against a heap cell, filling env_ lazily.
  bool unify_head(const Tpl& t, Cell c) {
    switch (t.kind) {
      case Tpl::Var: {
        Cell& e = env_[static_cast<std::size_t>(t.val)];
        if (e.tag == Tag::Unset) {
          e = c;
          return true;
        }
        return unify(e, c);
      }
      case Tpl::Int:
      case Tpl::Con: {
        c = deref(c);
        Tag want = t.kind == Tpl::Int ? Tag::Int : Tag::Con;
        if (c.tag == Tag::Ref) {
          bind(c, {want, t.val});
          return true;
        }
        return c.tag == want && c.val == t.val;
      }
      case Tpl::Str: {
        c = deref(c);
        if (c.tag == Tag::Ref) {
          Cell s = build(t);
          bind(c, s);
          return true;
        }
        if (c.tag != Tag::Str) return false;
        auto base = static_cast<std::size_t>(c.val);
        if (heap_[base].val != t.val) return false;
        for (std::size_t i = 0; i < t.args.size(); ++i)
          if (!unify_head(t.args[i], heap_[base + 1 + i])) return false;
        return true;
      }
    }
    return false;
  }

  // Cheap first-argument clash test.
  bool may_match(const CompiledClause& cc, Cell goal) const {
    if (cc.head.empty()) return true;
    const Tpl& t = cc.head[0];
    if (t.kind == Tpl::Var) return true;
    Cell a = deref(heap_[static_cast<std::size_t>(goal.val) + 1]);
    switch (a.tag) {
      case Tag::Ref: return true;
      case Tag::Int: return t.kind == Tpl::Int && t.val == a.val;
      case Tag::Con: return t.kind == Tpl::Con && t.val == a.val;
      case Tag::Str: return t.kind == Tpl::Str && t.val == heap_[static_cast<std::size_t>(a.val)].val;
      default: return true;
    }
  }

  std::int64_t push_node(Node::Kind k, std::int64_t next, Cell a, Cell b = {}, std::int64_t id = 0) {
    nodes_.push_back({k, next, a, b, id});
    return static_cast<std::int64_t>(nodes_.size() - 1);
  }

  void undo(std::size_t heap, std::size_t trail, std::size_t nodes, std::size_t calls) {
    while (trail_.size() > trail) {
      std::size_t a = trail_.back();
      trail_.pop_back();
      heap_[a] = {Tag::Ref, static_cast<std::int64_t>(a)};
    }
    heap_.resize(heap);
    nodes_.resize(nodes);
    calls_.resize(calls);
  }

  // Resolves the goal at `node` with clauses from `start` on; sets `cur`.
  bool try_clauses(std::int64_t node, std::size_t start, std::int64_t& cur) {
    const Node n = nodes_[static_cast<std::size_t>(node)];
    const Cell g = n.a;
    const std::size_t fid = goal_functor(g);
    const auto& cls = preds_[fid].clauses;
    const bool has_args = g.tag == Tag::Str;
    for (std::size_t k = start; k < cls.size(); ++k) {
      const CompiledClause& cc = clauses_[cls[k]];
      if (has_args && !may_match(cc, g)) continue;
      // The next candidate is chosen before unification binds the goal.
      std::size_t k2 = k + 1;
      while (k2 < cls.size() && has_args && !may_match(clauses_[cls[k2]], g)) ++k2;
      const std::size_t mh = heap_.size(), mt = trail_.size(), mn = nodes_.size(), mc = calls_.size();
      env_.assign(cc.nvars, Cell{});
      bool ok = true;
      for (std::size_t i = 0; ok && i < cc.head.size(); ++i)
        ok = unify_head(cc.head[i], heap_[static_cast<std::size_t>(g.val) + 1 + i]);
      if (!ok) {
        undo(mh, mt, mn, mc);
        continue;
      }
      if (++steps_ > limits_.max_steps) {
        exhausted_ = true;
        return false;
      }
      if (k2 < cls.size()) cps_.push_back({node, k2, mh, mt, mn, mc});

      std::int64_t cont = n.next;
      if (hooks_ && hooks_->track_calls) cont = push_node(Node::Exit, cont, {}, {}, static_cast<std::int64_t>(mc - 1));
      // Build goal terms left to right, then link them back to front.
      struct Spec {
        Node::Kind kind;
        Cell a, b;
        std::int64_t id;
      };
      std::vector<Spec> specs;
      for (const BodyItem& item : cc.body) {
        if (item.site < 0) {
          specs.push_back({Node::Goal, build(item.goal), {}, 0});
          continue;
        }
        std::vector<Cell> l, r;
        for (const Tpl& t : item.left) l.push_back(build(t));
        for (const Tpl& t : item.right) r.push_back(build(t));
        specs.push_back({Node::Par, tuple(l), tuple(r), item.site});
        for (Cell c : l) specs.push_back({Node::Goal, c, {}, 0});
        for (Cell c : r) specs.push_back({Node::Goal, c, {}, 0});
      }
      for (auto it = specs.rbegin(); it != specs.rend(); ++it) cont = push_node(it->kind, cont, it->a, it->b, it->id);
      cur = cont;
      return true;
    }
    return false;
  }

  Cell tuple(const std::vector<Cell>& items) {
    std::size_t base = heap_.size();
    heap_.push_back({Tag::Fun, static_cast<std::int64_t>(tuple_functor(items.size()))});
    for (Cell c : items) heap_.push_back(c);
    return {Tag::Str, static_cast<std::int64_t>(base)};
  }

  std::size_t tuple_functor(std::size_t n) const { return fids_.at({"$goals", n}); }

  bool backtrack(std::int64_t& cur) {
    while (!cps_.empty()) {
      ChoicePoint cp = cps_.back();
      cps_.pop_back();
      undo(cp.heap, cp.trail, cp.nodes, cp.calls);
      if (try_clauses(cp.node, cp.next_clause, cur)) return true;
      if (exhausted_) return false;
    }
    return false;
  }

  std::int64_t eval(Cell c) const {
    c = deref(c);
    if (c.tag == Tag::Int) return c.val;
    if (c.tag == Tag::Ref) throw InstantiationFault("unbound variable in arithmetic expression");
    if (c.tag == Tag::Con)
      throw ArithmeticFault("not an arithmetic expression: " + fnames_[static_cast<std::size_t>(c.val)].first);
    auto base = static_cast<std::size_t>(c.val);
    const auto& [name, arity] = fnames_[static_cast<std::size_t>(heap_[base].val)];
    if (arity == 1 && name == "-") {
      std::int64_t x = eval(heap_[base + 1]);
      if (x == INT64_MIN) throw ArithmeticFault("integer overflow");
      return -x;
    }
    if (arity != 2) throw ArithmeticFault("not an arithmetic expression: " + name + "/" + std::to_string(arity));
    std::int64_t x = eval(heap_[base + 1]);
    std::int64_t y = eval(heap_[base + 2]);
    std::int64_t r = 0;
    bool overflow = false;
    if (name == "+") overflow = __builtin_add_overflow(x, y, &r);
    else if (name == "-") overflow = __builtin_sub_overflow(x, y, &r);
    else if (name == "*") overflow = __builtin_mul_overflow(x, y, &r);
    else if (name == "//") {
      if (y == 0) throw ArithmeticFault("division by zero");
      if (x == INT64_MIN && y == -1) overflow = true;
      else r = x / y;
    } else {
      throw ArithmeticFault("not an arithmetic expression: " + name + "/2");
    }
    if (overflow) throw ArithmeticFault("integer overflow");
    return r;
  }

  bool run_builtin(Builtin b, Cell g) {
    auto base = static_cast<std::size_t>(g.val);
    Cell lhs = heap_[base + 1], rhs = heap_[base + 2];
    switch (b) {
      case Builtin::Is: return unify(lhs, {Tag::Int, eval(rhs)});
      case Builtin::Eq: return unify(lhs, rhs);
      case Builtin::Lt: return eval(lhs) < eval(rhs);
      case Builtin::Gt: return eval(lhs) > eval(rhs);
      case Builtin::Le: return eval(lhs) <= eval(rhs);
      case Builtin::Ge: return eval(lhs) >= eval(rhs);
      case Builtin::ArEq: return eval(lhs) == eval(rhs);
      case Builtin::None: break;
    }
    return false;
  }

  std::vector<CompiledClause> clauses_;
  std::vector<PredInfo> preds_;
  std::map<std::pair<std::string, std::size_t>, std::size_t> fids_;
  std::vector<std::pair<std::string, std::size_t>> fnames_;
  std::vector<std::pair<std::size_t, std::size_t>> sites_;

  std::vector<Cell> heap_;
  std::vector<std::size_t> trail_;
  std::vector<Node> nodes_;
  std::vector<ChoicePoint> cps_;
  std::vector<std::pair<std::size_t, Cell>> calls_;
  std::vector<Cell> env_;
  std::size_t steps_ = 0;
  bool exhausted_ = false;
  Hooks* hooks_ = nullptr;
  SolveLimits limits_;
};

std::string describe(const Atom& a) { return to_string(a); }

std::string describe_run(const std::vector<Atom>& q, const SolveResult& r) {
  std::string s = to_string(std::span<const Atom>(q)) + ": " + to_string(r.status);
  if (!r.message.empty()) s += " (" + r.message + ")";
  return s;
}

bool aliases_within(const RuntimePattern& rp, const SharingPattern& sh) {
  for (std::size_t i = 0; i < rp.aliases.size(); ++i) {
    PositionMask others = rp.aliases[i] & ~bit(i + 1);
    if ((others & ~sh.group(i + 1)) != 0) return false;
  }
  return true;
}

std::string pattern_text(const RuntimePattern& rp) {
  std::size_t n = rp.aliases.size();
  SharingPattern sh(n, rp.aliases);
  return GroundnessPattern(n, rp.ground).to_string() + " " + sh.to_string();
}

}  // namespace

bool RuntimePattern::satisfies(const GroundnessPattern& gr, const SharingPattern& sh) const {
  if (gr.arity() != aliases.size() || sh.arity() != aliases.size()) return false;
  if ((gr.mask() & ~ground) != 0) return false;
  return aliases_within(*this, sh);
}

RuntimePattern RuntimePattern::of(const Atom& a) {
  RuntimePattern rp;
  rp.aliases.assign(a.arity(), 0);
  std::vector<std::set<std::string>> vs;
  for (const Term& t : a.args) vs.push_back(vars(t));
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (vs[i].empty()) {
      rp.ground |= bit(i + 1);
      continue;
    }
    for (std::size_t j = 0; j < a.arity(); ++j)
      if (std::any_of(vs[i].begin(), vs[i].end(), [&](const std::string& v) { return vs[j].contains(v); }))
        rp.aliases[i] |= bit(j + 1);
  }
  return rp;
}

SolveResult solve(const Program& p, const std::vector<Atom>& query, const SolveLimits& limits) {
  Machine m(p);
  return m.run(query, limits);
}

std::optional<PlainStep> sld_step(const Atom& goal, const Clause& renamed) {
  auto s = mgu(goal, renamed.head);
  if (!s) return std::nullopt;
  PlainStep step{*s, {}};
  for (const Atom& b : renamed.body_atoms()) step.body.push_back(s->apply(b));
  return step;
}

bool conforms(const Atom& q, const PredicateId& pred, const GroundnessPattern& gr, const SharingPattern& sh,
              std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  if (q.id() != pred) return fail("expected a call to " + pred.to_string());
  if (gr.arity() != q.arity() || sh.arity() != q.arity()) return fail("pattern arity differs from the call");
  RuntimePattern rp = RuntimePattern::of(q);
  if ((gr.mask() & ~rp.ground) != 0) return fail("positions " + gr.to_string() + " must be ground");
  if (!aliases_within(rp, sh)) return fail("argument aliasing " + pattern_text(rp) + " exceeds " + sh.to_string());
  return true;
}

bool EquivalenceReport::ok() const {
  return std::all_of(items.begin(), items.end(), [](const Item& i) { return i.equal; });
}

std::string EquivalenceReport::to_text() const {
  std::ostringstream out;
  std::size_t equal = 0;
  for (const auto& i : items) {
    if (i.equal) {
      ++equal;
      continue;
    }
    out << "differs " << describe(i.query) << ": original " << i.original.answers.size() << " answers ("
        << to_string(i.original.status) << "), residual " << i.residual.answers.size() << " answers ("
        << to_string(i.residual.status) << ")\n";
  }
  out << "equivalence " << equal << "/" << items.size() << " queries equal\n";
  return out.str();
}

EquivalenceReport check_equivalence(const Program& original, const ResidualProgram& residual,
                                    const ExtendedAtom& entry, const std::vector<Atom>& queries,
                                    const SolveLimits& limits) {
  for (const Atom& q : queries) {
    std::string why;
    if (!conforms(q, entry.atom.id(), entry.gr, entry.sh, &why))
      throw OracleError("query " + to_string(q) + " does not match the entry pattern: " + why);
  }
  Machine orig(original);
  Machine res(residual.program());
  EquivalenceReport rep;
  for (const Atom& q : queries) {
    EquivalenceReport::Item item{q, orig.run({q}, limits), res.run({residual.rename_query(q)}, limits), false};
    item.equal = item.original.status == SolveStatus::Complete && item.residual.status == SolveStatus::Complete &&
                 item.original.answer_multiset() == item.residual.answer_multiset();
    rep.items.push_back(std::move(item));
  }
  return rep;
}

std::size_t IndependenceReport::violation_count() const {
  std::size_t n = 0;
  for (const auto& s : sites) n += s.violations.size();
  return n;
}

std::string IndependenceReport::to_text() const {
  std::ostringstream out;
  for (const auto& s : sites) {
    out << "site <" << s.clause << "," << s.position << "> checked " << s.checked << " violations "
        << s.violations.size() << "\n";
    for (const auto& v : s.violations) out << "  shared: " << v << "\n";
  }
  for (const auto& q : incomplete) out << "incomplete " << q << "\n";
  return out.str();
}

namespace {

class IndependenceHooks : public Hooks {
 public:
  IndependenceHooks(const Machine& m, IndependenceReport& rep) : m_(m), rep_(rep) {}

  void on_par(std::size_t site, Cell l, Cell r) override {
    auto& s = rep_.sites[site];
    ++s.checked;
    std::vector<std::int64_t> lv, rv, common;
    m_.unbound_vars(l, lv);
    m_.unbound_vars(r, rv);
    std::set_intersection(lv.begin(), lv.end(), rv.begin(), rv.end(), std::back_inserter(common));
    if (common.empty() || s.violations.size() >= kMaxRecorded) return;
    s.violations.push_back(side(l) + " & " + side(r));
  }

 private:
  static constexpr std::size_t kMaxRecorded = 1000;

  std::string side(Cell t) const {
    std::string out;
    for (Cell g : m_.args_of(t)) {
      if (!out.empty()) out += ", ";
      out += to_string(m_.to_term(g));
    }
    return out;
  }

  const Machine& m_;
  IndependenceReport& rep_;
};

}  // namespace

IndependenceReport check_independence(const Program& residual, const std::vector<std::vector<Atom>>& queries,
                                      const SolveLimits& limits) {
  Machine m(residual);
  IndependenceReport rep;
  for (const auto& [c, p] : m.sites()) rep.sites.push_back({c, p, 0, {}});
  IndependenceHooks hooks(m, rep);
  for (const auto& q : queries) {
    SolveResult r = m.run(q, limits, &hooks);
    if (!r.finished()) rep.incomplete.push_back(describe_run(q, r));
  }
  return rep;
}

IndependenceReport check_independence(const ResidualProgram& residual, const std::vector<Atom>& queries,
                                      const SolveLimits& limits) {
  std::vector<std::vector<Atom>> qs;
  for (const Atom& q : queries) qs.push_back({residual.rename_query(q)});
  return check_independence(residual.program(), qs, limits);
}

std::string SafenessReport::to_text() const {
  std::ostringstream out;
  out << "safeness calls " << calls_checked << " exits " << exits_checked << " violations " << violations.size()
      << "\n";
  for (const auto& v : violations) out << "  " << v << "\n";
  for (const auto& q : incomplete) out << "incomplete " << q << "\n";
  return out.str();
}

namespace {

constexpr std::size_t kMaxViolations = 1000;

void note(SafenessReport& rep, std::string v) {
  if (rep.violations.size() < kMaxViolations) rep.violations.push_back(std::move(v));
}

class TableHooks : public Hooks {
 public:
  TableHooks(const Machine& m, const PatternTable& table, SafenessReport& rep) : m_(m), rep_(rep) {
    track_calls = true;
    for (const auto& [key, succ] : table.rows()) rows_[key.pred].emplace_back(&key, &succ);
  }

  void on_call(std::size_t id, const PredInfo& pi, Cell goal) override {
    if (active_.size() <= id) active_.resize(id + 1);
    active_[id].clear();
    auto it = rows_.find(pi.id);
    if (it == rows_.end()) return;
    RuntimePattern rp = m_.pattern_of(goal);
    for (const auto& row : it->second)
      if (rp.satisfies(row.first->gr, row.first->sh)) active_[id].push_back(row);
    if (!active_[id].empty()) ++rep_.calls_checked;
  }

  void on_exit(std::size_t id, const PredInfo&, Cell goal) override {
    if (id >= active_.size() || active_[id].empty()) return;
    ++rep_.exits_checked;
    RuntimePattern rp = m_.pattern_of(goal);
    for (const auto& [key, succ] : active_[id]) {
      if ((succ->gr.mask() & ~rp.ground) == 0 && aliases_within(rp, succ->sh)) continue;
      note(rep_, "row " + format_row(*key, *succ) + " violated by exit " + to_string(m_.to_term(goal)) + " " +
                     pattern_text(rp));
    }
  }

 private:
  using Row = std::pair<const PatternKey*, const SuccessPattern*>;
  const Machine& m_;
  SafenessReport& rep_;
  std::map<PredicateId, std::vector<Row>> rows_;
  std::vector<std::vector<Row>> active_;
};

class CallPatternHooks : public Hooks {
 public:
  CallPatternHooks(const Machine& m, const ResidualProgram& r, SafenessReport& rep) : m_(m), r_(r), rep_(rep) {
    track_calls = true;
  }

  void on_call(std::size_t, const PredInfo& pi, Cell goal) override {
    auto it = r_.call_patterns.find(pi.id.name);
    if (it == r_.call_patterns.end() || it->second.pred.arity != pi.id.arity) return;
    ++rep_.calls_checked;
    RuntimePattern rp = m_.pattern_of(goal);
    if (rp.satisfies(it->second.gr, it->second.sh)) return;
    note(rep_, "call " + to_string(m_.to_term(goal)) + " " + pattern_text(rp) + " breaks " +
                   it->second.gr.to_string() + " " + it->second.sh.to_string());
  }

 private:
  const Machine& m_;
  const ResidualProgram& r_;
  SafenessReport& rep_;
};

}  // namespace

SafenessReport check_safeness(const PatternTable& table, const Program& p, const std::vector<Atom>& queries,
                              const SolveLimits& limits) {
  Machine m(p);
  SafenessReport rep;
  TableHooks hooks(m, table, rep);
  for (const Atom& q : queries) {
    SolveResult r = m.run({q}, limits, &hooks);
    if (!r.finished()) rep.incomplete.push_back(describe_run({q}, r));
  }
  return rep;
}

SafenessReport check_call_patterns(const ResidualProgram& residual, const std::vector<Atom>& queries,
                                   const SolveLimits& limits) {
  Machine m(residual.program());
  SafenessReport rep;
  CallPatternHooks hooks(m, residual, rep);
  for (const Atom& q : queries) {
    std::vector<Atom> rq{residual.rename_query(q)};
    SolveResult r = m.run(rq, limits, &hooks);
    if (!r.finished()) rep.incomplete.push_back(describe_run(rq, r));
  }
  return rep;
}

std::vector<std::vector<Atom>> parse_query_lines(std::string_view text) {
  std::vector<std::vector<Atom>> out;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (std::size_t pc = line.find('%'); pc != std::string_view::npos) line = line.substr(0, pc);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(parse_query(line));
    } catch (const ParseError& e) {
      std::string msg = e.what();
      if (std::size_t c = msg.find(": "); c != std::string::npos) msg = msg.substr(c + 2);
      throw ParseError(msg, lineno, e.column());
    }
  }
  return out;
}

}  // namespace andpe
