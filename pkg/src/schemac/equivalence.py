"""Round-trip checks: parse compiled text and compare semantic atom sets."""
from __future__ import annotations

from dataclasses import dataclass, field

from .grammar import parse_document
from .lexicon import DelimiterTable, FillerLexicon
from .schema import STRUCTURAL_KINDS, SemanticAtom, ToolCatalog, semantic_atoms


def parse_compiled(text: str) -> ToolCatalog:
    """Recover the catalog structure from compiled text. Descriptions come
    back in their compressed form; ``[ANSWER:...]`` and ``[RECAP]`` lines
    are skipped."""
    return parse_document(text).catalog


@dataclass
class Verdict:
    ok: bool
    missing: list[SemanticAtom] = field(default_factory=list)
    # report-only tier: content words absent from the compiled descriptions
    missing_words: list[SemanticAtom] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _sort_key(a: SemanticAtom):
    return (a.tool, a.kind, a.param, a.value)


def verify_superset(original: ToolCatalog, compiled_text: str,
                    fillers: FillerLexicon | None = None,
                    delimiters: DelimiterTable | None = None) -> Verdict:
    """ok iff every structural atom of ``original`` survives compilation.

    Content words are compared in a second tier that never fails the
    verdict; both sides drop filler-lexicon matches before comparing.
    """
    compiled = parse_compiled(compiled_text)
    want = semantic_atoms(original, fillers, delimiters)
    have = semantic_atoms(compiled, fillers, delimiters)
    missing = sorted((a for a in want - have if a.kind in STRUCTURAL_KINDS), key=_sort_key)
    words = sorted((a for a in want - have if a.kind not in STRUCTURAL_KINDS), key=_sort_key)
    return Verdict(not missing, missing, words)
