"""Filler lexicon, delimiter table and the description segmenter built on both.

Both tables ship as JSON data files under ``schemac/data`` and can be replaced
by user files with the same layout.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple

FILLER_CATEGORIES = ("politeness", "hedging", "redundant-connective", "boilerplate")
_SPACINGS = ("tight", "left", "spaced")


def _phrase_regex(phrase: str) -> str:
    words = phrase.split()
    return r"(?<!\w)" + r"\s+".join(re.escape(w) for w in words) + r"(?!\w)"


def _data_path(name: str):
    return resources.files("schemac") / "data" / name


_MEMO_LIMIT = 1 << 16


@dataclass(frozen=True)
class FillerPattern:
    pattern: str
    category: str
    regex: bool = False

    def source(self) -> str:
        if self.regex:
            return r"(?<!\w)(?:" + self.pattern + r")(?!\w)"
        return _phrase_regex(self.pattern)


@dataclass(frozen=True)
class FillerLexicon:
    """Ordered removable-filler patterns.

    Plain patterns match case-insensitively on word boundaries, so they can
    never fire inside an identifier such as ``please_confirm``. A match also
    absorbs one trailing comma and the whitespace after it.
    """

    patterns: tuple[FillerPattern, ...]

    def __post_init__(self):
        for p in self.patterns:
            if p.category not in FILLER_CATEGORIES:
                raise ValueError(f"unknown filler category {p.category!r}")

    def __len__(self):
        return len(self.patterns)

    @classmethod
    def default(cls) -> "FillerLexicon":
        return _default_fillers()

    @classmethod
    def from_file(cls, path) -> "FillerLexicon":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def from_json(cls, text: str) -> "FillerLexicon":
        raw = json.loads(text)
        items = raw["patterns"] if isinstance(raw, dict) else raw
        return cls(tuple(
            FillerPattern(it["pattern"], it.get("category", "boilerplate"), bool(it.get("regex", False)))
            for it in items
        ))

    @classmethod
    def from_words(cls, words: Iterable[str], category: str = "politeness") -> "FillerLexicon":
        return cls(tuple(FillerPattern(w, category) for w in words))

    def alternatives(self) -> list[tuple[str, str]]:
        """(regex source, category) pairs, longest pattern first."""
        ordered = sorted(self.patterns, key=lambda p: -len(p.pattern))
        return [(p.source() + r"(?:\s*,)?\s*", p.category) for p in ordered]

    @cached_property
    def _full(self):
        alts = "|".join(f"(?:{src})" for src, _ in self.alternatives())
        return re.compile(rf"\s*(?:{alts})+" if alts else r"(?!)", re.IGNORECASE)

    @cached_property
    def _seen(self) -> dict:
        return {}

    def matches(self, text: str) -> bool:
        """True when ``text`` consists solely of lexicon matches."""
        hit = self._seen.get(text)
        if hit is None:
            if len(self._seen) > _MEMO_LIMIT:
                self._seen.clear()
            hit = self._seen[text] = bool(text.strip()) and self._full.fullmatch(text) is not None
        return hit


@dataclass(frozen=True)
class DelimiterEntry:
    verbose: str | None
    compact: str
    variants: tuple[str, ...]
    spacing: str = "spaced"
    regex: bool = False

    def rendered(self) -> str:
        if self.spacing == "tight":
            return self.compact
        if self.spacing == "left":
            return self.compact + " "
        return " " + self.compact + " "

    def verbose_source(self) -> str | None:
        if self.verbose is None:
            return None
        core = (r"(?<!\w)(?:" + self.verbose + r")(?!\w)") if self.regex else _phrase_regex(self.verbose)
        return r"\s*" + core + r"\s*"


@dataclass(frozen=True)
class DelimiterTable:
    """Verbose structural phrases, their compact forms and symbol variant sets."""

    entries: tuple[DelimiterEntry, ...]

    def __post_init__(self):
        for e in self.entries:
            if e.spacing not in _SPACINGS:
                raise ValueError(f"bad spacing {e.spacing!r}")
            if not e.variants:
                raise ValueError(f"entry {e.compact!r} has an empty variant set")

    def __len__(self):
        return len(self.entries)

    @classmethod
    def default(cls, tokenizer=None) -> "DelimiterTable":
        table = _default_delimiters()
        if tokenizer is not None:
            table.check(tokenizer)
        return table

    @classmethod
    def from_file(cls, path, tokenizer=None) -> "DelimiterTable":
        return cls.from_json(Path(path).read_text(encoding="utf-8"), tokenizer)

    @classmethod
    def from_json(cls, text: str, tokenizer=None) -> "DelimiterTable":
        raw = json.loads(text)
        items = raw["entries"] if isinstance(raw, dict) else raw
        table = cls(tuple(
            DelimiterEntry(
                verbose=it.get("verbose"),
                compact=it["compact"],
                variants=tuple(it.get("variants") or [it["compact"]]),
                spacing=it.get("spacing", "spaced"),
                regex=bool(it.get("regex", False)),
            )
            for it in items
        ))
        if tokenizer is not None:
            table.check(tokenizer)
        return table

    def check(self, tokenizer) -> None:
        """Reject entries whose compact form costs more tokens than the phrase."""
        for e in self.entries:
            if e.verbose is None or e.regex:
                continue
            if tokenizer.count_tokens(e.rendered().strip()) > tokenizer.count_tokens(e.verbose):
                raise ValueError(f"compact form {e.compact!r} is longer than {e.verbose!r}")

    def symbol_sets(self) -> list[tuple[str, ...]]:
        """Variant sets eligible for in-text substitution: two or more
        members, none containing a letter or digit."""
        return list(self._symbol_sets)

    @cached_property
    def _symbol_sets(self):
        seen, out = set(), []
        for e in self.entries:
            v = e.variants
            if len(v) < 2 or any(re.search(r"\w", s) for s in v) or v in seen:
                continue
            seen.add(v)
            out.append(v)
        return out

    def variants_for(self, text: str) -> tuple[str, ...] | None:
        for v in self._symbol_sets:
            if text in v:
                return v
        return None

    @cached_property
    def _verbose_compiled(self):
        return [(re.compile(src, re.IGNORECASE), e) for e in self.entries
                if (src := e.verbose_source()) is not None]

    @cached_property
    def _compact_seen(self) -> dict:
        return {}

    def compact_for(self, text: str) -> str | None:
        """Compact replacement when ``text`` is exactly one verbose phrase."""
        if text in self._compact_seen:
            return self._compact_seen[text]
        out = None
        for rx, e in self._verbose_compiled:
            if rx.fullmatch(text):
                out = e.rendered()
                break
        if len(self._compact_seen) > _MEMO_LIMIT:
            self._compact_seen.clear()
        self._compact_seen[text] = out
        return out


class Span(NamedTuple):
    role: str  # "description" | "filler-span" | "delimiter"
    text: str
    category: str = ""


@dataclass(frozen=True)
class Segmenter:
    """Split a description into description / filler / delimiter spans.

    Concatenating the span texts gives back the input exactly.
    """

    fillers: FillerLexicon
    delimiters: DelimiterTable = field(default_factory=DelimiterTable.default)

    def _alternatives(self):
        """(regex source, role, category) in match priority order."""
        out = [(src, "filler-span", cat) for src, cat in self.fillers.alternatives()]
        verbose = sorted((e for e in self.delimiters.entries if e.verbose),
                         key=lambda e: -len(e.verbose))
        out += [(e.verbose_source(), "delimiter", "verbose") for e in verbose]
        return out, verbose

    @cached_property
    def _regex(self):
        """Single alternation over every pattern; reference implementation."""
        alts, groups = [], {}
        phrases, _ = self._alternatives()
        for i, (src, role, cat) in enumerate(phrases):
            alts.append(f"(?P<p{i}>{src})")
            groups[f"p{i}"] = (role, cat)
        for i, sym in enumerate(self._symbols):
            alts.append(f"(?P<s{i}>{re.escape(sym)})")
            groups[f"s{i}"] = ("delimiter", "symbol")
        if not alts:
            return None, groups
        return re.compile("|".join(alts), re.IGNORECASE), groups

    @cached_property
    def _symbols(self):
        return sorted({s for v in self.delimiters.symbol_sets() for s in v}, key=lambda s: (-len(s), s))

    @cached_property
    def _index(self):
        """Patterns bucketed by their literal first word, so a scan only
        tries the handful that can start at a given word."""
        phrases, verbose = self._alternatives()
        n_fill = len(phrases) - len(verbose)
        buckets: dict[str, list] = {}
        wild = []
        for prio, (src, role, cat) in enumerate(phrases):
            if prio < n_fill:
                pat = sorted(self.fillers.patterns, key=lambda p: -len(p.pattern))[prio]
                word = _first_word(pat.pattern, pat.regex)
            else:
                e = verbose[prio - n_fill]
                word = _first_word(e.verbose, e.regex)
            item = (prio, re.compile(src, re.IGNORECASE), role, cat)
            if word is None:
                wild.append(item)
            else:
                buckets.setdefault(word, []).append(item)
        merged = {w: _Bucket(sorted(items + wild, key=lambda t: t[0])) for w, items in buckets.items()}
        sym = re.compile("|".join(re.escape(s) for s in self._symbols)) if self._symbols else None
        # with no wildcard patterns, jump straight to words that open a bucket
        anchor = _ANCHOR
        if not wild and merged:
            words = sorted(merged, key=lambda w: (-len(w), w))
            anchor = re.compile(r"(?<!\w)" + _trie_source(words) + r"(?!\w)", re.IGNORECASE)
        return merged, _Bucket(wild), sym, anchor

    def segment(self, text: str) -> list[Span]:
        merged, wild, sym, anchor = self._index
        out: list[Span] = []
        last = 0  # end of the last emitted span
        pos = 0
        n = len(text)
        s = sym.search(text) if sym is not None else None
        m = anchor.search(text)
        while pos < n:
            if m is not None and m.start() < pos:
                m = anchor.search(text, pos)
            if s is not None and s.start() < pos:
                s = sym.search(text, pos)
            if s is not None and (m is None or s.start() < m.start()):
                if s.start() > last:
                    out.append(Span("description", text[last:s.start()]))
                out.append(Span("delimiter", s.group(), "symbol"))
                last = pos = s.end()
                continue
            if m is None:
                break
            start = m.start()
            bucket = merged.get(m.group().lower(), wild)
            ws = start
            while ws > last and text[ws - 1].isspace():
                ws -= 1
            hit = None
            if ws < start:
                # leading whitespace lets a verbose phrase claim it first
                hit = bucket.match(text, ws, verbose_only=True)
            if hit is None:
                hit = bucket.match(text, start)
            if hit is None:
                pos = m.end()
                continue
            mm, role, cat = hit
            if mm.start() > last:
                out.append(Span("description", text[last:mm.start()]))
            out.append(Span(role, mm.group(), cat))
            last = pos = mm.end()
        if last < n:
            out.append(Span("description", text[last:]))
        return out

    def segment_reference(self, text: str) -> list[Span]:
        """Same result as :meth:`segment` via one big regex; slower."""
        rx, groups = self._regex
        if rx is None:
            return [Span("description", text)] if text else []
        out: list[Span] = []
        pos = 0
        for m in rx.finditer(text):
            if m.start() == m.end():
                continue
            if m.start() > pos:
                out.append(Span("description", text[pos:m.start()]))
            role, cat = groups[m.lastgroup]
            out.append(Span(role, m.group(), cat))
            pos = m.end()
        if pos < len(text):
            out.append(Span("description", text[pos:]))
        return out

    def content_text(self, text: str) -> str:
        """``text`` with filler and verbose-phrase spans blanked out."""
        return " ".join(s.text for s in self.segment(text)
                        if s.role == "description" or s.category == "symbol")


_ANCHOR = re.compile(r"(?<!\w)\w+")


class _Bucket:
    """Candidate patterns for one trigger word, in priority order."""

    __slots__ = ("items", "verbose")

    def __init__(self, items):
        self.items = items
        self.verbose = [it for it in items if it[3] == "verbose"]

    def match(self, text, pos, verbose_only=False):
        """(match, role, category) of the first pattern matching at ``pos``."""
        for _, rx, role, cat in (self.verbose if verbose_only else self.items):
            mm = rx.match(text, pos)
            if mm is not None and mm.end() > mm.start():
                return mm, role, cat
        return None


def _trie_source(words) -> str:
    """Regex matching exactly ``words``, factored by shared prefix so the
    engine does not retry every alternative at each position."""
    trie: dict = {}
    for w in words:
        node = trie
        for ch in w:
            node = node.setdefault(ch, {})
        node[""] = {}

    def walk(node) -> str:
        alts = [re.escape(ch) + walk(sub) for ch, sub in sorted(node.items()) if ch]
        if not alts:
            return ""
        body = alts[0] if len(alts) == 1 else "(?:" + "|".join(alts) + ")"
        return f"(?:{body})?" if "" in node else body

    return walk(trie)
_LEAD_LOOKAROUND = re.compile(r"^(?:\(\?<?[!=](?:[^()\\]|\\.)*\))*")


def _first_word(pattern: str, is_regex: bool) -> str | None:
    """Lower-cased literal first word of a phrase, or None when the pattern
    could start with something else."""
    if not is_regex:
        m = re.match(r"\w+", pattern)
        return m.group().lower() if m and (m.end() == len(pattern) or not pattern[m.end()].isalnum()) else None
    body = pattern[_LEAD_LOOKAROUND.match(pattern).end():]
    m = re.match(r"[A-Za-z0-9_]+", body)
    if m is None or "|" in _top_level(body):
        return None
    nxt = body[m.end():m.end() + 1]
    if nxt in ("", " ") or body.startswith("\\s", m.end()):
        return m.group().lower()
    return None


def _top_level(pattern: str) -> str:
    """Pattern text with parenthesised groups removed."""
    depth, out, i = 0, [], 0
    while i < len(pattern):
        c = pattern[i]
        if c == "\\":
            if depth == 0:
                out.append(pattern[i:i + 2])
            i += 2
            continue
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif depth == 0:
            out.append(c)
        i += 1
    return "".join(out)


@lru_cache(maxsize=None)
def _default_fillers() -> FillerLexicon:
    return FillerLexicon.from_json(_data_path("fillers.json").read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def _default_delimiters() -> DelimiterTable:
    return DelimiterTable.from_json(_data_path("delimiters.json").read_text(encoding="utf-8"))


@lru_cache(maxsize=64)
def segmenter_for(fillers: FillerLexicon, delimiters: DelimiterTable) -> Segmenter:
    return Segmenter(fillers, delimiters)


_WS = re.compile(r"\s+")


@lru_cache(maxsize=65536)
def collapse_ws(text: str) -> str:
    return _WS.sub(" ", text).strip()
