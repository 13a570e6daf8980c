// Python bindings over program text: the analysis, the specializer and the
// oracle checks, with results as plain strings, lists and dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "andpe/analysis.hpp"
#include "andpe/cli.hpp"
#include "andpe/codegen.hpp"
#include "andpe/oracle.hpp"
#include "andpe/pipeline.hpp"
#include "andpe/syntax.hpp"

namespace py = pybind11;
using namespace andpe;

namespace {

std::vector<EntryPoint> entries_of(const std::vector<std::string>& specs) {
  std::vector<EntryPoint> out;
  for (const auto& s : specs) out.push_back(parse_entry_spec(s));
  return out;
}

std::vector<Atom> single_calls(const std::vector<std::string>& queries) {
  std::vector<Atom> out;
  for (const auto& q : queries) out.push_back(parse_atom(q));
  return out;
}

SolveLimits limits_of(std::optional<std::size_t> max_steps) {
  SolveLimits l;
  if (max_steps) l.max_steps = *max_steps;
  return l;
}

const Specialized& only_run(const Specialization& s) {
  if (s.runs.size() != 1) throw std::invalid_argument("expected exactly one entry");
  return s.runs.front();
}

py::dict specialize_py(const std::string& program, const std::vector<std::string>& entries, const std::string& emit,
                       std::optional<int> max_threads) {
  Program p = parse_program(program);
  Specialization s = specialize(p, entries_of(entries));
  ResidualProgram out = s.merged;
  if (emit == "guarded") {
    if (!max_threads) throw std::invalid_argument("guarded output needs max_threads");
    out = emit_guarded(s.merged, p, *max_threads);
  } else if (emit != "plain") {
    throw std::invalid_argument("emit must be 'plain' or 'guarded'");
  }
  std::string trace;
  py::list labels;
  for (const auto& run : s.runs) {
    trace += run.trace.to_log();
    py::list per_run;
    for (std::size_t d = 0; d < run.trace.derivations.size(); ++d) per_run.append(run.trace.labels(d));
    labels.append(per_run);
  }
  py::dict d;
  d["residual"] = out.to_text();
  d["entry_name"] = out.entry_name;
  d["parallel_sites"] = out.parallel_sites();
  d["trace"] = trace;
  d["labels"] = labels;
  d["table"] = s.table.to_text();
  d["warnings"] = s.warnings;
  return d;
}

py::dict solve_py(const std::string& program, const std::string& query, std::optional<std::size_t> max_steps) {
  Program p = parse_program(program, {.allow_parallel = true});
  SolveResult r = solve(p, parse_query(query), limits_of(max_steps));
  py::list answers;
  for (const auto& a : r.answers) answers.append(a.canonical());
  py::dict d;
  d["status"] = std::string(to_string(r.status));
  d["answers"] = answers;
  d["steps"] = r.steps;
  d["message"] = r.message;
  return d;
}

py::dict equivalence_py(const std::string& program, const std::string& entry, const std::vector<std::string>& queries,
                        std::optional<std::size_t> max_steps) {
  Program p = parse_program(program);
  Specialization s = specialize(p, entries_of({entry}));
  const Specialized& run = only_run(s);
  EquivalenceReport r = check_equivalence(p, run.residual, run.init, single_calls(queries), limits_of(max_steps));
  py::dict d;
  d["ok"] = r.ok();
  d["report"] = r.to_text();
  return d;
}

py::dict independence_py(const std::string& program, const std::string& entry, const std::vector<std::string>& queries,
                         std::optional<std::size_t> max_steps) {
  Program p = parse_program(program);
  Specialization s = specialize(p, entries_of({entry}));
  IndependenceReport r = check_independence(only_run(s).residual, single_calls(queries), limits_of(max_steps));
  py::dict d;
  d["ok"] = r.ok();
  d["violations"] = r.violation_count();
  d["report"] = r.to_text();
  return d;
}

py::dict safeness_py(const std::string& program, const std::vector<std::string>& entries,
                     const std::vector<std::string>& queries, std::optional<std::size_t> max_steps) {
  Program p = parse_program(program);
  PatternTable t = infer_patterns(p, entries_of(entries));
  SafenessReport r = check_safeness(t, p, single_calls(queries), limits_of(max_steps));
  py::dict d;
  d["ok"] = r.ok();
  d["violations"] = r.violations;
  d["report"] = r.to_text();
  return d;
}

py::tuple run_cli_py(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parallelizing partial evaluator for definite logic programs";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<PatternFormatError>(m, "PatternFormatError", PyExc_ValueError);
  py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_RuntimeError);
  py::register_exception<PeError>(m, "PeError", PyExc_RuntimeError);
  py::register_exception<CodegenError>(m, "CodegenError", PyExc_RuntimeError);
  py::register_exception<OracleError>(m, "OracleError", PyExc_RuntimeError);

  m.def(
      "normalize_program", [](const std::string& text) { return to_string(parse_program(text), {.normalize_variables = true}); },
      py::arg("program"), "Parses a program and prints it back with variables renamed A, B, ...");
  m.def(
      "infer_patterns",
      [](const std::string& program, const std::vector<std::string>& entries) {
        return infer_patterns(parse_program(program), entries_of(entries)).to_text();
      },
      py::arg("program"), py::arg("entries"), "Call/success pattern table, one row per line.");
  m.def("specialize", &specialize_py, py::arg("program"), py::arg("entries"), py::arg("emit") = "plain",
        py::arg("max_threads") = py::none(), "Residual program, trace and table for the given entry specs.");
  m.def("solve", &solve_py, py::arg("program"), py::arg("query"), py::arg("max_steps") = py::none(),
        "Runs a query on the reference interpreter.");
  m.def("check_equivalence", &equivalence_py, py::arg("program"), py::arg("entry"), py::arg("queries"),
        py::arg("max_steps") = py::none());
  m.def("check_independence", &independence_py, py::arg("program"), py::arg("entry"), py::arg("queries"),
        py::arg("max_steps") = py::none());
  m.def("check_safeness", &safeness_py, py::arg("program"), py::arg("entries"), py::arg("queries"),
        py::arg("max_steps") = py::none());
  m.def("run_cli", &run_cli_py, py::arg("args"), "Runs the command line in-process: (exit code, stdout, stderr).");
}
