#pragma once

// Command-line orchestration: parse, analyze, specialize, emit, verify.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace andpe {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitParse = 3,
  kExitAnalysis = 4,
  kExitVerify = 5,
  kExitIo = 6,
};

enum class EmitMode { Plain, Guarded };

struct PipelineConfig {
  std::string input;
  /// `pred/arity gr {..} [sh <..>]`; entry lines of the pattern file count too.
  std::vector<std::string> entries;
  std::optional<std::string> patterns;
  EmitMode emit = EmitMode::Plain;
  /// Required in guarded mode, at least 1.
  std::optional<int> max_threads;
  bool verify_eq = false;
  bool verify_indep = false;
  bool verify_safe = false;
  std::optional<std::string> queries;
  /// Residual program; stdout when absent.
  std::optional<std::string> out;
  std::optional<std::string> trace;
  std::optional<std::string> table;
  /// Verification reports; stderr when absent.
  std::optional<std::string> report;
  std::optional<std::size_t> depth_cap;
};

/// Runs the pipeline; diagnostics go to `err`, the residual to `out` unless
/// a file is configured.
int run(const PipelineConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses `args` (without the program name) and runs.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace andpe
