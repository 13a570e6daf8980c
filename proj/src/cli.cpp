#include "andpe/cli.hpp"

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "andpe/analysis.hpp"
#include "andpe/codegen.hpp"
#include "andpe/oracle.hpp"
#include "andpe/pipeline.hpp"
#include "andpe/syntax.hpp"

namespace andpe {

namespace {

struct Failure {
  int code;
  std::string message;
};

std::string read_text(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kExitIo, std::string("cannot read ") + what + " " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) throw Failure{kExitIo, "cannot write " + path};
}

std::string parse_failure(const std::string& path, const ParseError& e) { return path + ":" + e.what(); }

// Queries of the file, each a single call to an entry predicate.
std::vector<Atom> load_queries(const std::string& path) {
  std::string text = read_text(path, "query file");
  std::vector<std::vector<Atom>> qs;
  try {
    qs = parse_query_lines(text);
  } catch (const ParseError& e) {
    throw Failure{kExitParse, parse_failure(path, e)};
  }
  std::vector<Atom> out;
  for (auto& q : qs) {
    if (q.size() != 1)
      throw Failure{kExitParse, path + ": each query must be a single call, got " + to_string(std::span<const Atom>(q))};
    out.push_back(std::move(q[0]));
  }
  return out;
}

}  // namespace

int run(const PipelineConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.emit == EmitMode::Guarded && (!cfg.max_threads || *cfg.max_threads < 1))
      throw Failure{kExitUsage, "--emit guarded needs --max-threads N with N >= 1"};
    const bool verifying = cfg.verify_eq || cfg.verify_indep || cfg.verify_safe;
    if (verifying && !cfg.queries) throw Failure{kExitUsage, "--verify needs --queries FILE"};

    Program program;
    std::string source = read_text(cfg.input, "program");
    try {
      program = parse_program(source);
    } catch (const ParseError& e) {
      throw Failure{kExitParse, parse_failure(cfg.input, e)};
    } catch (const std::invalid_argument& e) {
      throw Failure{kExitParse, cfg.input + ": " + e.what()};
    }

    std::vector<EntryPoint> entries;
    PatternTable overrides;
    try {
      if (cfg.patterns) {
        PatternFile pf = parse_pattern_text(read_text(*cfg.patterns, "pattern file"));
        overrides = pf.table;
        entries = pf.entries;
      }
      for (const auto& e : cfg.entries) entries.push_back(parse_entry_spec(e));
    } catch (const PatternFormatError& e) {
      throw Failure{kExitParse, (cfg.patterns ? *cfg.patterns + ": " : std::string()) + e.what()};
    } catch (const std::invalid_argument& e) {
      throw Failure{kExitParse, std::string("bad entry: ") + e.what()};
    }
    if (entries.empty()) throw Failure{kExitUsage, "no entry point given (use --entry)"};

    // Parse queries before the expensive stages.
    std::vector<Atom> queries;
    if (cfg.queries) queries = load_queries(*cfg.queries);

    Specialization spec;
    try {
      spec = specialize(program, entries, overrides);
    } catch (const AnalysisError& e) {
      throw Failure{kExitAnalysis, std::string("analysis: ") + e.what()};
    } catch (const PeError& e) {
      throw Failure{kExitAnalysis, std::string("partial evaluation: ") + e.what()};
    } catch (const CodegenError& e) {
      throw Failure{kExitAnalysis, std::string("code generation: ") + e.what()};
    }
    for (const auto& w : spec.warnings) err << "warning: " << w << "\n";

    ResidualProgram emitted = spec.merged;
    if (cfg.emit == EmitMode::Guarded) emitted = emit_guarded(spec.merged, program, *cfg.max_threads);
    if (cfg.out) write_text(*cfg.out, emitted.to_text());
    else out << emitted.to_text();

    if (cfg.trace) {
      std::string log;
      for (const auto& run : spec.runs) {
        if (spec.runs.size() > 1) log += "% " + format_entry(run.entry) + "\n";
        log += run.trace.to_log();
      }
      write_text(*cfg.trace, log);
    }
    if (cfg.table) write_text(*cfg.table, spec.table.to_text());
    if (!verifying) return kExitOk;

    SolveLimits limits;
    if (cfg.depth_cap) limits.max_steps = *cfg.depth_cap;
    std::map<PredicateId, std::vector<Atom>> by_entry;
    for (const Atom& q : queries) {
      if (!spec.run_for(q.id())) throw Failure{kExitVerify, "query " + to_string(q) + " calls no entry predicate"};
      by_entry[q.id()].push_back(q);
    }

    bool ok = true;
    std::ostringstream rep;
    try {
      for (const auto& [pred, qs] : by_entry) {
        const Specialized& run = *spec.run_for(pred);
        rep << "% " << format_entry(run.entry) << "\n";
        if (cfg.verify_eq) {
          EquivalenceReport r = check_equivalence(program, run.residual, run.init, qs, limits);
          ok = ok && r.ok();
          rep << r.to_text();
        }
        if (cfg.verify_indep) {
          IndependenceReport r = check_independence(run.residual, qs, limits);
          ok = ok && r.ok();
          rep << r.to_text();
        }
        if (cfg.verify_safe) {
          SafenessReport t = check_safeness(spec.table, program, qs, limits);
          SafenessReport c = check_call_patterns(run.residual, qs, limits);
          ok = ok && t.ok() && c.ok();
          rep << "table " << t.to_text() << "calls " << c.to_text();
        }
      }
    } catch (const OracleError& e) {
      throw Failure{kExitVerify, std::string("verification: ") + e.what()};
    }
    rep << (ok ? "verification passed\n" : "verification FAILED\n");
    if (cfg.report) write_text(*cfg.report, rep.str());
    else err << rep.str();
    return ok ? kExitOk : kExitVerify;
  } catch (const Failure& f) {
    err << "andpe: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    err << "andpe: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallelizing partial evaluator for definite logic programs"};
  app.name("andpe");
  PipelineConfig cfg;
  std::string emit = "plain";
  std::vector<std::string> verify;
  app.add_option("input", cfg.input, "Program file")->required();
  app.add_option("--entry", cfg.entries, "Entry call pattern, e.g. 'fibonacci/2 gr {1} sh <{1},{2}>'");
  app.add_option("--patterns", cfg.patterns, "Pattern file: table rows overriding the analysis, entry lines");
  app.add_option("--emit", emit, "Output form")->check(CLI::IsMember({"plain", "guarded"}));
  app.add_option("--max-threads", cfg.max_threads, "Thread cap for guarded output")->check(CLI::PositiveNumber);
  app.add_option("--verify", verify, "Checks to run: eq, indep, safe")
      ->delimiter(',')
      ->check(CLI::IsMember({"eq", "indep", "safe"}));
  app.add_option("--queries", cfg.queries, "Query file, one goal per line");
  app.add_option("--out", cfg.out, "Residual program file (default stdout)");
  app.add_option("--trace", cfg.trace, "Trace log file");
  app.add_option("--table", cfg.table, "Analysis table file");
  app.add_option("--report", cfg.report, "Verification report file (default stderr)");
  app.add_option("--depth-cap", cfg.depth_cap,
                 std::string("Resolution step cap for verification (default $") + kDepthCapEnv + " or 1000000)")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  cfg.emit = emit == "guarded" ? EmitMode::Guarded : EmitMode::Plain;
  for (const auto& v : verify) {
    cfg.verify_eq = cfg.verify_eq || v == "eq";
    cfg.verify_indep = cfg.verify_indep || v == "indep";
    cfg.verify_safe = cfg.verify_safe || v == "safe";
  }
  return run(cfg, out, err);
}

}  // namespace andpe
