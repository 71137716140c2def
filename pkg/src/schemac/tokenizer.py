"""Byte-level BPE tokenizer (GPT-2 layout) plus a chars/4 estimator.

Every token count the compiler reports goes through one of these. The exact
tokenizer reads the public GPT-2 artifact pair: ``vocab.json`` (token -> id)
and ``merges.txt`` (one ``left right`` pair per line, rank = line order).
"""
from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import regex

from .errors import DuplicateMerge, MergeWithoutVocabEntry, UnencodableByte

GPT2_PATTERN = r"""'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+"""


def split_chunks(text: str) -> list[str]:
    """Cut ``text`` before each newline that follows a non-space character.

    Under the GPT-2 pre-tokenizer such a newline always starts a new
    pre-token, so the chunks tokenize independently. str.isspace accepts
    a superset of the pattern's whitespace, which only means fewer cuts.
    """
    parts = text.split("\n")
    chunks = [parts[0]]
    for p in parts[1:]:
        prev = chunks[-1]
        if prev and not prev[-1].isspace():
            chunks.append("\n" + p)
        else:
            chunks[-1] = prev + "\n" + p
    return chunks


@lru_cache(maxsize=1)
def bytes_to_unicode() -> dict[int, str]:
    """GPT-2's reversible byte -> printable character table."""
    bs = list(range(ord("!"), ord("~") + 1)) + list(range(ord("¡"), ord("¬") + 1)) + list(range(ord("®"), ord("ÿ") + 1))
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, map(chr, cs)))


@lru_cache(maxsize=1)
def unicode_to_bytes() -> dict[str, int]:
    return {c: b for b, c in bytes_to_unicode().items()}


class BpeTokenizer:
    """Immutable ranked-merge BPE over GPT-2 byte symbols."""

    exact = True

    def __init__(self, vocab: dict[str, int], merges: Sequence[tuple[str, str]],
                 byte_fallback: bool = True, pattern: str = GPT2_PATTERN):
        vocab = dict(vocab)
        ranks: dict[tuple[str, str], int] = {}
        for i, (a, b) in enumerate(merges):
            if (a, b) in ranks:
                raise DuplicateMerge(f"merge {a!r} {b!r} appears twice (ranks {ranks[(a, b)]} and {i})")
            if a + b not in vocab:
                raise MergeWithoutVocabEntry(f"merge {a!r} {b!r} (rank {i}) produces {a + b!r}, absent from vocab")
            ranks[(a, b)] = i
        if byte_fallback:
            next_id = max(vocab.values(), default=-1) + 1
            for ch in bytes_to_unicode().values():
                if ch not in vocab:
                    vocab[ch] = next_id
                    next_id += 1
        self.vocab = vocab
        self.merges = tuple(merges)
        self.byte_fallback = byte_fallback
        self.pattern = pattern
        self._ranks = ranks
        self._inverse = {i: t for t, i in vocab.items()}
        self._pre = regex.compile(pattern)
        self._cache: dict[str, tuple[str, ...]] = {}
        self._line_cache: dict[str, int] = {}
        self._chunk_cache: dict[str, int] = {}

    def __repr__(self):
        return f"BpeTokenizer(vocab={len(self.vocab)}, merges={len(self.merges)})"

    # -- core ---------------------------------------------------------------

    def _bpe(self, word: str) -> tuple[str, ...]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        parts = list(word)
        ranks = self._ranks
        while len(parts) > 1:
            best, best_rank = -1, None
            for i in range(len(parts) - 1):
                r = ranks.get((parts[i], parts[i + 1]))
                if r is not None and (best_rank is None or r < best_rank):
                    best, best_rank = i, r
            if best_rank is None:
                break
            pair = (parts[best], parts[best + 1])
            merged, i = [], 0
            # apply this merge to every non-overlapping occurrence, left to right
            while i < len(parts):
                if i < len(parts) - 1 and (parts[i], parts[i + 1]) == pair:
                    merged.append(parts[i] + parts[i + 1])
                    i += 2
                else:
                    merged.append(parts[i])
                    i += 1
            parts = merged
        out = tuple(parts)
        if not self.byte_fallback:
            for p in out:
                if p not in self.vocab:
                    raise UnencodableByte(f"symbol {p!r} is not in the vocabulary")
        if len(self._cache) < 200_000:
            self._cache[word] = out
        return out

    def pretokenize(self, text: str) -> list[str]:
        return self._pre.findall(text)

    def tokenize(self, text: str) -> list[str]:
        table = bytes_to_unicode()
        out: list[str] = []
        for piece in self._pre.findall(text):
            out.extend(self._bpe("".join(table[b] for b in piece.encode("utf-8"))))
        return out

    def encode(self, text: str) -> list[int]:
        return [self.vocab[t] for t in self.tokenize(text)]

    def detokenize(self, tokens: Iterable[str]) -> str:
        table = unicode_to_bytes()
        return bytes(table[c] for t in tokens for c in t).decode("utf-8", errors="replace")

    def decode(self, ids: Iterable[int]) -> str:
        return self.detokenize(self._inverse[i] for i in ids)

    def count_tokens(self, text: str) -> int:
        if len(text) < 256 or self.pattern != GPT2_PATTERN:
            c = self._line_cache.get(text)
            if c is None:
                c = len(self.tokenize(text))
                if len(self._line_cache) < 200_000:
                    self._line_cache[text] = c
            return c
        cache = self._chunk_cache
        total = 0
        for chunk in split_chunks(text):
            c = cache.get(chunk)
            if c is None:
                c = len(self.tokenize(chunk))
                if len(cache) < 200_000:
                    cache[chunk] = c
            total += c
        return total

    def count_lines(self, lines: Sequence[str]) -> int:
        """Token count of ``"\\n".join(lines)``.

        With the GPT-2 pre-tokenizer no pre-token crosses a newline when no
        line starts or ends with whitespace, so counts add up line by line
        and each line count can be memoised.
        """
        if not lines:
            return 0
        if any(not ln or ln[0].isspace() or ln[-1].isspace() or "\n" in ln for ln in lines) \
                or self.pattern != GPT2_PATTERN:
            return self.count_tokens("\n".join(lines))
        cache = self._line_cache
        total = 0
        for ln in lines:
            c = cache.get(ln)
            if c is None:
                c = self.count_tokens(ln)
                if len(cache) < 200_000:
                    cache[ln] = c
            total += c
        return total + (len(lines) - 1) * self._newline_cost

    @property
    def _newline_cost(self) -> int:
        return self.count_tokens("\n")


class HeuristicTokenizer:
    """ceil(chars / 4). For summaries only; operators needing exact counts refuse it."""

    exact = False

    def __repr__(self):
        return "HeuristicTokenizer()"

    def count_tokens(self, text: str) -> int:
        return math.ceil(len(text) / 4)

    def count_lines(self, lines: Sequence[str]) -> int:
        return self.count_tokens("\n".join(lines))


def tokenize(t: BpeTokenizer, s: str) -> list[str]:
    return t.tokenize(s)


def count_tokens(t, s: str) -> int:
    return t.count_tokens(s)


def read_merges(text: str) -> list[tuple[str, str]]:
    merges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line or line.startswith("#version"):
            continue
        parts = line.split(" ")
        if len(parts) != 2 or not all(parts):
            raise ValueError(f"merges line {lineno}: expected two space-separated symbols, got {line!r}")
        merges.append((parts[0], parts[1]))
    return merges


def load_tokenizer(vocab_source, merges_source, byte_fallback: bool = True) -> BpeTokenizer:
    """Build a tokenizer from a vocab mapping/path and a merge list/path."""
    if isinstance(vocab_source, (str, Path)):
        vocab = json.loads(Path(vocab_source).read_text(encoding="utf-8"))
    else:
        vocab = dict(vocab_source)
    if isinstance(merges_source, (str, Path)):
        merges = read_merges(Path(merges_source).read_text(encoding="utf-8"))
    else:
        merges = [tuple(m) for m in merges_source]
    return BpeTokenizer(vocab, merges, byte_fallback=byte_fallback)


@lru_cache(maxsize=1)
def gpt2() -> BpeTokenizer:
    """The shipped GPT-2 vocabulary (50,000 merges)."""
    base = resources.files("schemac") / "data" / "gpt2"
    with resources.as_file(base / "vocab.json") as v, resources.as_file(base / "merges.txt") as m:
        return load_tokenizer(v, m)


def resolve_tokenizer(which) -> BpeTokenizer | HeuristicTokenizer:
    """Accept a tokenizer object, "gpt2", "heuristic", or a merges path with
    a sibling ``vocab.json``."""
    if which is None or which == "gpt2":
        return gpt2()
    if which == "heuristic":
        return HeuristicTokenizer()
    if hasattr(which, "count_tokens"):
        return which
    merges = Path(which)
    if merges.is_dir():
        return load_tokenizer(merges / "vocab.json", merges / "merges.txt")
    return load_tokenizer(merges.with_name("vocab.json"), merges)


def toy_vocab(tokens: Iterable[str] = ()) -> dict[str, int]:
    """All 256 byte symbols plus ``tokens``; handy for small hand-built merge sets."""
    vocab = {ch: i for i, ch in enumerate(bytes_to_unicode().values())}
    for t in tokens:
        vocab.setdefault(t, len(vocab))
    return vocab


def find_nonmonotonic_witness(t, candidates: Iterable[tuple[str, str]]) -> tuple[str, str] | None:
    """First pair that is shorter in characters yet longer in tokens."""
    for s1, s2 in candidates:
        if len(s1) < len(s2) and t.count_tokens(s1) > t.count_tokens(s2):
            return s1, s2
    return None
