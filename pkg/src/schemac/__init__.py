"""Deterministic compiler from JSON tool catalogs to compact text."""
from .equivalence import parse_compiled, verify_superset
from .errors import CompilerError, MetricsError
from .estimator import SchemaCompiler
from .ir import PromptIR, lower_to_ir, score_fragility
from .lexicon import DelimiterTable, FillerLexicon
from .metrics import GapPredictor
from .operators import SadBudget
from .pipeline import CompressionReport, PipelineConfig, check_bound, compile, resolve_profile
from .schema import ToolCatalog, parse_catalog, semantic_atoms
from .tokenizer import BpeTokenizer, HeuristicTokenizer, gpt2, load_tokenizer

__version__ = "0.1.0"

__all__ = [
    "BpeTokenizer", "CompilerError", "CompressionReport", "DelimiterTable", "FillerLexicon",
    "GapPredictor", "HeuristicTokenizer", "MetricsError", "PipelineConfig", "PromptIR",
    "SadBudget", "SchemaCompiler", "ToolCatalog", "check_bound", "compile", "gpt2",
    "load_tokenizer", "lower_to_ir", "parse_catalog", "parse_compiled", "resolve_profile",
    "score_fragility", "semantic_atoms", "verify_superset",
]
