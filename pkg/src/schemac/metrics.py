"""Offline scoring and statistics over recorded transcripts.

Nothing here calls a model: inputs are JSONL transcripts of predicted and
gold tool calls, or plain accuracy numbers.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .errors import (DegenerateDesign, DivisionByZeroBaseline, EmptySamples,
                     EmptyTranscript, InvalidLengths, MalformedTranscript,
                     OutOfRangeP, UnknownCondition)

TSA_WEIGHT = 0.6
PF1_WEIGHT = 0.4


# -- transcripts --------------------------------------------------------------

@dataclass(frozen=True)
class ToolCall:
    tool: str
    params: tuple[tuple[str, str], ...] = ()  # (key, normalized value), sorted


@dataclass(frozen=True)
class Record:
    task_id: str
    condition: str
    predicted: tuple[ToolCall, ...]
    gold: tuple[ToolCall, ...]
    seed: int | str | None = None


@dataclass
class Transcript:
    records: list[Record] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for r in self.records:
            key = (r.task_id, r.condition, r.seed)
            if key in seen:
                raise MalformedTranscript(f"duplicate record {key}")
            seen.add(key)

    def __len__(self):
        return len(self.records)

    def conditions(self) -> list[str]:
        return list(dict.fromkeys(r.condition for r in self.records))

    def for_condition(self, condition: str) -> list[Record]:
        return [r for r in self.records if r.condition == condition]


def normalize_value(v) -> str:
    """Strings are trimmed (case kept); numbers use canonical decimal form."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        if isinstance(v, float) and not math.isfinite(v):
            return repr(v)
        d = Decimal(repr(v)).normalize()
        return format(d, "f")
    if isinstance(v, str):
        return v.strip()
    if v is None:
        return "null"
    return json.dumps(v, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _calls(raw, where) -> tuple[ToolCall, ...]:
    if not isinstance(raw, list):
        raise MalformedTranscript(f"{where}: expected a list of tool calls")
    out = []
    for c in raw:
        if not isinstance(c, dict) or not isinstance(c.get("tool"), str):
            raise MalformedTranscript(f"{where}: each call needs a 'tool' string")
        params = c.get("params") or {}
        if not isinstance(params, dict):
            raise MalformedTranscript(f"{where}: 'params' must be an object")
        out.append(ToolCall(c["tool"], tuple(sorted((str(k), normalize_value(v)) for k, v in params.items()))))
    return tuple(out)


def record_from_dict(d: dict, where: str = "record") -> Record:
    if not isinstance(d, dict):
        raise MalformedTranscript(f"{where}: expected an object")
    for key in ("task_id", "condition", "predicted", "gold"):
        if key not in d:
            raise MalformedTranscript(f"{where}: missing field {key!r}")
    return Record(str(d["task_id"]), str(d["condition"]), _calls(d["predicted"], where),
                  _calls(d["gold"], where), d.get("seed"))


def load_transcript(source) -> Transcript:
    """Read JSONL from a path, a string of lines or an iterable of dicts."""
    if isinstance(source, Transcript):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    elif isinstance(source, str):
        lines = source.splitlines()
    else:
        return Transcript([record_from_dict(d, f"record {i}") for i, d in enumerate(source, 1)])
    records = []
    for i, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedTranscript(f"line {i}: {exc}") from exc
        records.append(record_from_dict(d, f"line {i}"))
    return Transcript(records)


# -- scoring -------------------------------------------------------------------

def overall(tsa: float, pf1: float) -> float:
    return TSA_WEIGHT * tsa + PF1_WEIGHT * pf1


def tool_correct(r: Record) -> bool:
    return {c.tool for c in r.predicted} == {c.tool for c in r.gold}


def _pairs(calls: Iterable[ToolCall]) -> Counter:
    return Counter(p for c in calls for p in c.params)


def _f1(tp, fp, fn) -> float:
    if tp == fp == fn == 0:
        return 1.0
    return 2 * tp / (2 * tp + fp + fn)


def param_counts(r: Record) -> tuple[int, int, int]:
    pred, gold = _pairs(r.predicted), _pairs(r.gold)
    tp = sum((pred & gold).values())
    return tp, sum(pred.values()) - tp, sum(gold.values()) - tp


def score_records(records: Sequence[Record], macro: bool = False) -> tuple[float, float, float]:
    if not records:
        raise EmptyTranscript("no records to score")
    tsa = sum(tool_correct(r) for r in records) / len(records)
    counts = [param_counts(r) for r in records]
    if macro:
        pf1 = sum(_f1(*c) for c in counts) / len(counts)
    else:
        pf1 = _f1(*(sum(col) for col in zip(*counts)))
    return tsa, pf1, overall(tsa, pf1)


def score_transcript(t: Transcript, condition: str, macro: bool = False) -> tuple[float, float, float]:
    """(TSA, PF1, overall) for one condition. PF1 pools (key, value) pairs
    over all records unless ``macro`` is set."""
    if not t.records:
        raise EmptyTranscript("transcript has no records")
    records = t.for_condition(condition)
    if not records:
        raise UnknownCondition(f"condition {condition!r} not in transcript (have {t.conditions()})")
    return score_records(records, macro)


def arr(compiled_acc: float, natural_fc_acc: float) -> float:
    """Accuracy-retained ratio."""
    if natural_fc_acc <= 0:
        raise DivisionByZeroBaseline("baseline accuracy must be positive")
    return compiled_acc / natural_fc_acc


def decompose(natural_fc, natural_text, compiled, exact: bool = False):
    """(format effect, compression effect) in decimal arithmetic, so the two
    always sum to ``compiled - natural_fc`` exactly."""
    fc, tx, cp = (Decimal(repr(x)) if isinstance(x, float) else Decimal(x)
                  for x in (natural_fc, natural_text, compiled))
    fmt, comp = tx - fc, cp - tx
    return (fmt, comp) if exact else (float(fmt), float(comp))


def sdm_attention_uplift(n: int, k: int) -> float:
    """Lower bound n / (n - k) on the per-atom attention gain from removing k
    of n tokens."""
    if not (isinstance(n, int) and isinstance(k, int)) or not 0 <= k < n:
        raise InvalidLengths(f"need integers with 0 <= k < n, got n={n!r}, k={k!r}")
    return n / (n - k)


# -- gap predictor ------------------------------------------------------------

class GapPredictor(BaseEstimator, RegressorMixin):
    """OLS line delta = slope * natural + intercept.

    ``fit`` takes a (n, 1) array of natural-baseline accuracies and the
    observed gains.
    """

    def fit(self, X, y):
        x = np.asarray(X, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise ValueError("X and y lengths differ")
        if len(x) < 3:
            raise DegenerateDesign(f"need at least 3 points, got {len(x)}")
        if np.ptp(x) == 0:
            raise DegenerateDesign("all natural accuracies are equal")
        A = np.column_stack([x, np.ones_like(x)])
        (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - (slope * x + intercept)
        ss_res = float(resid @ resid)
        ss_tot = float(((y - y.mean()) ** 2).sum())
        self.alpha_slope = float(slope)
        self.beta_intercept = float(intercept)
        self.r_squared = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
        self.n_points_ = len(x)
        return self

    def predict(self, X):
        x = np.asarray(X, dtype=float).reshape(-1)
        return self.alpha_slope * x + self.beta_intercept


def fit_gap_predictor(points: Iterable[tuple[float, float]]) -> GapPredictor:
    pts = list(points)
    if len(pts) < 3:
        raise DegenerateDesign(f"need at least 3 points, got {len(pts)}")
    x = [[p[0]] for p in pts]
    y = [p[1] for p in pts]
    return GapPredictor().fit(x, y)


# -- statistics ---------------------------------------------------------------

def bootstrap_ci(samples: Sequence[float], resamples: int = 1000, seed: int = 42,
                 level: float = 0.95) -> tuple[float, float]:
    """Percentile interval of resampled means."""
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise EmptySamples("bootstrap needs at least one sample")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if (data == data[0]).all():
        # no spread; resampled means would only add rounding noise
        v = float(data[0])
        return v, v
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, data.size, size=(resamples, data.size))
    means = data[idx].mean(axis=1)
    tail = (1 - level) / 2 * 100
    lo, hi = np.percentile(means, [tail, 100 - tail])
    return float(lo), float(hi)


def mcnemar(b: int, c: int) -> float:
    """Exact two-sided McNemar p-value on the discordant counts."""
    if b < 0 or c < 0:
        raise ValueError("counts must be non-negative")
    n = b + c
    if n == 0:
        return 1.0
    k = min(b, c)
    tail = sum(math.comb(n, i) for i in range(k + 1)) / 2 ** n
    return min(1.0, 2 * tail)


def holm_bonferroni(p_values: Sequence[float], alpha: float = 0.05) -> list[tuple[float, bool]]:
    """Holm step-down adjusted p-values and rejection flags, input order."""
    ps = list(p_values)
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise OutOfRangeP(f"p-value {p!r} outside [0, 1]")
    m = len(ps)
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, i in enumerate(order):
        running = max(running, min(1.0, (m - rank) * ps[i]))
        adjusted[i] = running
    significant = [False] * m
    for rank, i in enumerate(order):
        if ps[i] > alpha / (m - rank):
            break
        significant[i] = True
    return list(zip(adjusted, significant))


def paired_outcomes(t: Transcript, cond_a: str, cond_b: str) -> tuple[int, int, int]:
    """(pairs, b, c) over records matched on (task_id, seed): b counts A
    right / B wrong, c the reverse. Correctness is tool selection."""
    a = {(r.task_id, r.seed): tool_correct(r) for r in t.for_condition(cond_a)}
    bmap = {(r.task_id, r.seed): tool_correct(r) for r in t.for_condition(cond_b)}
    keys = sorted(set(a) & set(bmap), key=str)
    b = sum(1 for k in keys if a[k] and not bmap[k])
    c = sum(1 for k in keys if bmap[k] and not a[k])
    return len(keys), b, c
