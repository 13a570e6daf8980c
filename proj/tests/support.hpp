#pragma once

// Shared helpers for the test binaries: random small terms and corpus access.

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "andpe/syntax.hpp"
#include "andpe/term.hpp"

namespace andpe::testing {

inline std::string corpus_path(const std::string& name) { return std::string(ANDPE_CORPUS_DIR) + "/" + name; }

inline std::string golden_path(const std::string& name) { return std::string(ANDPE_GOLDEN_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Program corpus_program(const std::string& name) { return parse_program(read_file(corpus_path(name + ".pl"))); }

class TermGen {
 public:
  explicit TermGen(std::uint32_t seed, int nvars = 4) : rng_(seed), nvars_(nvars) {}

  Term term(int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 2);
    switch (pick(rng_)) {
      case 0:
      case 3: return Term::variable(var_name());
      case 1: return Term::integer(std::uniform_int_distribution<int>(0, 2)(rng_));
      case 2: return Term::constant(std::uniform_int_distribution<int>(0, 1)(rng_) ? "a" : "b");
      case 4: return Term::compound("f", {term(depth - 1)});
      default: return Term::compound("g", {term(depth - 1), term(depth - 1)});
    }
  }

  Atom atom(int arity, int depth) {
    Atom a{"p", {}};
    for (int i = 0; i < arity; ++i) a.args.push_back(term(depth));
    return a;
  }

  std::string var_name() { return "X" + std::to_string(std::uniform_int_distribution<int>(0, nvars_ - 1)(rng_)); }

  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
  int nvars_;
};

}  // namespace andpe::testing
