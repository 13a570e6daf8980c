"""Parallelizing partial evaluator for definite logic programs."""

from ._core import (
    AnalysisError,
    CodegenError,
    OracleError,
    ParseError,
    PatternFormatError,
    PeError,
    check_equivalence,
    check_independence,
    check_safeness,
    infer_patterns,
    normalize_program,
    run_cli,
    solve,
    specialize,
)

__all__ = [
    "AnalysisError",
    "CodegenError",
    "OracleError",
    "ParseError",
    "PatternFormatError",
    "PeError",
    "check_equivalence",
    "check_independence",
    "check_safeness",
    "infer_patterns",
    "normalize_program",
    "run_cli",
    "solve",
    "specialize",
]
