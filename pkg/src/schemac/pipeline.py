"""Fixed-order pass pipeline, profiles and the compression report."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

from .errors import BoundPreconditionViolated, HeuristicTokenizerForbidden
from .ir import PromptIR, emit_lines, lower_to_ir, score_fragility
from .lexicon import DelimiterTable, FillerLexicon
from .operators import (EXPANDING, OP_NAMES, TOKEN_REDUCING, SadBudget, cas, ccp,
                        cfl, cfo, changed_ids, dro, sad_f, sdm, tas)
from .schema import ToolCatalog
from .tokenizer import resolve_tokenizer

PROFILES = ("conservative", "balanced", "aggressive", "auto")
BALANCED = frozenset({"SDM", "CAS", "CFO", "DRO", "TAS", "CCP"})
ALL_OPS = frozenset(OP_NAMES)
DEFAULT_SAD_BUDGET = 24


@lru_cache(maxsize=1)
def profile_data() -> dict:
    path = resources.files("schemac") / "data" / "profiles.json"
    return json.loads(path.read_text(encoding="utf-8"))


def normalize_family(model_family: str | None) -> str | None:
    if not model_family:
        return None
    fam = model_family.strip().lower()
    data = profile_data()
    for key in (fam, fam.split("-")[0]):
        if key in data["echo_back_safe"]:
            return key
        if key in data["family_aliases"]:
            return data["family_aliases"][key]
    return fam


def echo_back_safe(model_family: str | None) -> bool:
    return bool(profile_data()["echo_back_safe"].get(normalize_family(model_family), False))


def archetype_ops(model: str) -> frozenset[str] | None:
    """Operator set recorded for a model archetype, matched by substring."""
    m = model.strip().lower()
    for key, entry in profile_data()["archetypes"].items():
        if key in m:
            return frozenset(entry["ops"])
    return None


def resolve_profile(profile: str, tool_count: int, model_family: str | None = None,
                    thresholds: tuple[int, int, int] = (20, 30, 40)) -> frozenset[str]:
    if tool_count < 0:
        raise ValueError("tool_count must be non-negative")
    low, mid, high = thresholds
    if profile == "conservative":
        return frozenset({"SDM"})
    if profile == "balanced":
        return BALANCED - {"CFL", "CFO"} if tool_count >= mid else BALANCED
    if profile == "aggressive":
        return ALL_OPS if echo_back_safe(model_family) else ALL_OPS - {"CFL", "SAD-F"}
    if profile == "auto":
        if tool_count <= low or tool_count > high:
            return frozenset({"SDM"})
        return BALANCED - {"CFL", "CFO"}
    raise ValueError(f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}")


@dataclass(frozen=True)
class PipelineConfig:
    profile: str = "balanced"
    overrides: Mapping[str, bool] = field(default_factory=dict)
    sad_budget: SadBudget = field(default_factory=lambda: SadBudget(DEFAULT_SAD_BUDGET))
    fragility_alpha: float = 0.5
    ccp_k: int = 3
    cas_k: int = 2
    model_family: str | None = None
    tool_count_thresholds: tuple[int, int, int] = (20, 30, 40)
    fillers: FillerLexicon | None = None
    delimiters: DelimiterTable | None = None
    importance: Mapping[str, float] | None = None
    # operator set that replaces the profile outright, e.g. from archetype_ops()
    ops: frozenset[str] | None = None

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")
        if not isinstance(self.sad_budget, SadBudget):
            object.__setattr__(self, "sad_budget", SadBudget(int(self.sad_budget)))
        bad = set(self.overrides) - ALL_OPS
        if self.ops is not None:
            bad |= set(self.ops) - ALL_OPS
        if bad:
            raise ValueError(f"unknown operators {sorted(bad)}")
        if not 0.0 <= self.fragility_alpha <= 1.0:
            raise ValueError("fragility_alpha must lie in [0, 1]")

    def enabled_ops(self, tool_count: int) -> frozenset[str]:
        ops = set(self.ops) if self.ops is not None else set(
            resolve_profile(self.profile, tool_count, self.model_family, self.tool_count_thresholds))
        for op, on in self.overrides.items():
            (ops.add if on else ops.discard)(op)
        return frozenset(ops)

    def with_ops(self, ops: Iterable[str]) -> "PipelineConfig":
        return replace(self, ops=frozenset(ops), overrides={})


@dataclass(frozen=True)
class OpStat:
    op: str
    delta: int  # tokens removed (negative when the pass added tokens)
    touched_tokens: int
    affected_fraction: float  # f_i
    reduction_factor: float  # r_i


@dataclass(frozen=True)
class CompressionReport:
    tokens_before: int
    tokens_after: int
    savings: float
    format_delta: int  # JSON -> grammar translation, before any operator
    per_op: tuple[OpStat, ...]
    bound_rhs: float
    determinism_hash: str
    ops_applied: tuple[str, ...]
    sad_budget: int
    tokenizer: str

    def op(self, name: str) -> OpStat:
        for s in self.per_op:
            if s.op == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_op"] = [asdict(s) for s in self.per_op]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)


def _count(ir: PromptIR, tokenizer) -> int:
    return tokenizer.count_lines(emit_lines(ir))


def _touched_tokens(before: PromptIR, after: PromptIR, tokenizer) -> int:
    ids = changed_ids(before, after)
    return sum(tokenizer.count_tokens(a.text) for a in before.atoms if a.id in ids)


def emit(ir: PromptIR, tokenizer=None) -> str:
    """Pass 10. The tokenizer is accepted for interface symmetry; emission
    itself is a pure function of atom order and text."""
    return "\n".join(emit_lines(ir))


def compile(cat: ToolCatalog, cfg: PipelineConfig | None = None, tokenizer=None,
            constraint: str | None = None) -> tuple[str, CompressionReport]:
    """Run Parse, the eight operators in fixed order, then Emit."""
    cfg = cfg or PipelineConfig()
    tokenizer = resolve_tokenizer(tokenizer)
    enabled = cfg.enabled_ops(len(cat.tools))
    if not getattr(tokenizer, "exact", False) and enabled & {"TAS", "SAD-F"}:
        raise HeuristicTokenizerForbidden("TAS and SAD-F need an exact tokenizer")
    fillers = cfg.fillers if cfg.fillers is not None else FillerLexicon.default()
    table = cfg.delimiters if cfg.delimiters is not None else DelimiterTable.default()
    alpha = cfg.fragility_alpha

    ir = lower_to_ir(cat, constraint, fillers, table, cfg.importance)
    if cat.tools:
        source = cat.source_text if cat.source_text is not None else cat.to_json()
        before = tokenizer.count_tokens(source)
    else:
        before = 0
    current = _count(ir, tokenizer)
    format_delta = before - current

    passes = {
        "SDM": lambda x: sdm(x, fillers),
        "TAS": lambda x: tas(x, table, tokenizer),
        "DRO": lambda x: dro(x, table, tokenizer, rescan=False),  # lowering used the same table
        "CFL": lambda x: cfl(x, tokenizer),
        "CFO": cfo,
        "CAS": lambda x: cas(x, score_fragility(x, alpha) if x.atoms else [], k=cfg.cas_k),
        "SAD-F": lambda x: sad_f(x, score_fragility(x, alpha) if x.atoms else [], cfg.sad_budget, tokenizer),
        "CCP": lambda x: ccp(x, None, cfg.ccp_k, alpha),
    }
    stats, applied = [], []
    for name in OP_NAMES:
        if name not in enabled:
            stats.append(OpStat(name, 0, 0, 0.0, 0.0))
            continue
        applied.append(name)
        nxt = passes[name](ir)
        if nxt is ir:  # no-op pass
            stats.append(OpStat(name, 0, 0, 0.0, 0.0))
            continue
        after = _count(nxt, tokenizer)
        delta = current - after
        touched = _touched_tokens(ir, nxt, tokenizer) if name in TOKEN_REDUCING else 0
        f = touched / before if before and touched else 0.0
        r = delta / touched if touched else 0.0
        stats.append(OpStat(name, delta, touched, f, r))
        ir, current = nxt, after

    text = emit(ir, tokenizer)
    savings = 1.0 - current / before if before else 0.0
    rhs = sum(s.reduction_factor * s.affected_fraction for s in stats if s.op in TOKEN_REDUCING)
    report = CompressionReport(
        tokens_before=before,
        tokens_after=current,
        savings=savings,
        format_delta=format_delta,
        per_op=tuple(stats),
        bound_rhs=rhs,
        determinism_hash=hashlib.sha256(text.encode("utf-8")).hexdigest(),
        ops_applied=tuple(applied),
        sad_budget=cfg.sad_budget.max_tokens if "SAD-F" in enabled else 0,
        tokenizer=type(tokenizer).__name__,
    )
    return text, report


def check_bound(report: CompressionReport, tol: float = 1e-12) -> bool:
    """savings >= sum r_i * f_i over the token-reducing passes.

    Only meaningful when nothing added tokens: SAD-F must have budget 0 and
    CCP must be off.
    """
    if "CCP" in report.ops_applied or ("SAD-F" in report.ops_applied and report.sad_budget > 0):
        raise BoundPreconditionViolated(
            "bound needs CCP disabled and SAD-F budget 0; got ops " + ",".join(report.ops_applied))
    return report.savings + tol >= report.bound_rhs


def bound_config(cfg: PipelineConfig, tool_count: int) -> PipelineConfig:
    """``cfg`` with the expansion passes neutralised."""
    ops = cfg.enabled_ops(tool_count) - set(EXPANDING)
    return replace(cfg.with_ops(ops), sad_budget=SadBudget(0))
