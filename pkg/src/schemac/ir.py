"""PromptIR: the ordered, role-tagged atom sequence every operator transforms."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import groupby
from operator import attrgetter
from typing import Iterable, Mapping, NamedTuple

from .errors import CyclicDependency, EmptyIR
from .grammar import render_answer, render_params, render_recap
from .lexicon import DelimiterTable, FillerLexicon, collapse_ws, segmenter_for
from .schema import ToolCatalog, normalize_text

ROLES = ("constraint", "tool-def", "param-block", "description", "filler-span",
         "delimiter", "closure", "anchor-dup")
TOOL_ROLES = frozenset({"tool-def", "param-block", "description", "filler-span", "delimiter"})
TEXT_ROLES = frozenset({"description", "filler-span", "delimiter"})

DEFAULT_IMPORTANCE = {
    "tool-def": 1.0,
    "param-block": 0.9,
    "constraint": 1.0,
    "description": 0.5,
    "delimiter": 0.1,
    "filler-span": 0.0,
    "closure": 0.0,
    "anchor-dup": 0.0,
}


class _AtomFields(NamedTuple):
    id: int
    role: str
    text: str
    importance: float = 0.0
    owner_tool: str | None = None
    ref: int | None = None  # anchor-dup: id of the duplicated atom
    category: str = ""  # filler category, or "verbose"/"symbol" for delimiters


_ROLE_SET = frozenset(ROLES)


class Atom(_AtomFields):
    """One IR element. A validated named tuple: lowering builds thousands."""

    __slots__ = ()

    def __new__(cls, id, role, text, importance=0.0, owner_tool=None, ref=None, category=""):
        if role not in _ROLE_SET:
            raise ValueError(f"unknown atom role {role!r}")
        if not 0.0 <= importance <= 1.0:
            raise ValueError(f"importance {importance} outside [0, 1]")
        if role == "anchor-dup" and ref is None:
            raise ValueError("anchor-dup atoms must reference an original atom")
        return tuple.__new__(cls, (id, role, text, importance, owner_tool, ref, category))


@dataclass(frozen=True)
class PromptIR:
    atoms: tuple[Atom, ...] = ()
    constraint: int | None = None
    dependency_edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        ids = [a.id for a in self.atoms]
        if len(ids) != len(set(ids)):
            raise ValueError("atom ids must be unique")
        known = set(ids)
        for a, b in self.dependency_edges:
            if a not in known or b not in known:
                raise ValueError(f"dependency edge ({a}, {b}) names an unknown atom")
        if self.constraint is not None and self.constraint not in known:
            raise ValueError("constraint refers to an unknown atom")
        cycle = _cycle_of(tuple(self.dependency_edges))
        if cycle:
            raise CyclicDependency(cycle)

    def __len__(self):
        return len(self.atoms)

    def by_id(self) -> dict[int, Atom]:
        return {a.id: a for a in self.atoms}

    def index_of(self, atom_id: int) -> int:
        for i, a in enumerate(self.atoms):
            if a.id == atom_id:
                return i
        raise KeyError(atom_id)

    def next_id(self) -> int:
        return max((a.id for a in self.atoms), default=-1) + 1

    def tool_defs(self) -> list[Atom]:
        return [a for a in self.atoms if a.role == "tool-def"]

    def replace(self, **kw) -> "PromptIR":
        data = {"atoms": self.atoms, "constraint": self.constraint,
                "dependency_edges": self.dependency_edges}
        data.update(kw)
        return PromptIR(**data)

    def to_json(self) -> str:
        """Debug dump with stable field order."""
        return json.dumps({
            "atoms": [a._asdict() for a in self.atoms],
            "constraint": self.constraint,
            "dependency_edges": [list(e) for e in self.dependency_edges],
        }, ensure_ascii=False, indent=2)


@lru_cache(maxsize=256)
def _cycle_of(edges: tuple) -> tuple | None:
    # a cycle depends on the edges alone
    cycle = find_cycle((), edges)
    return tuple(cycle) if cycle else None


def find_cycle(nodes: Iterable[int], edges: Iterable[tuple[int, int]]) -> list[int] | None:
    succ: dict[int, list[int]] = {n: [] for n in nodes}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
        succ.setdefault(b, [])
    color = dict.fromkeys(succ, 0)
    stack_path: list[int] = []

    def visit(n):
        color[n] = 1
        stack_path.append(n)
        for m in succ[n]:
            if color[m] == 1:
                return stack_path[stack_path.index(m):] + [m]
            if color[m] == 0:
                found = visit(m)
                if found:
                    return found
        stack_path.pop()
        color[n] = 2
        return None

    for n in succ:
        if color[n] == 0:
            found = visit(n)
            if found:
                return found
    return None


# -- lowering ---------------------------------------------------------------

_DEP_RX = re.compile(r"(?<!\w)(?:after|requires?)\s+(?:(?:calling|running|using)\s+)?`?([^\s`]+)",
                     re.IGNORECASE)
_TRAIL = ".,;:!?)'\""


def _dependency_targets(description: str, names, own: str) -> list[str]:
    """Tool names referenced as "after X" / "requires [calling] X".

    ``names`` is a list of tool names or a prebuilt lower-case lookup."""
    lookup = names if isinstance(names, dict) else {n.lower(): n for n in names}
    hits = []
    for m in _DEP_RX.finditer(description):
        word = m.group(1)
        # strip sentence punctuation, longest candidate first
        while word:
            name = lookup.get(word.lower())
            if name is not None:
                break
            if word[-1] not in _TRAIL:
                break
            word = word[:-1]
        if name is not None and name != own and name not in hits:
            hits.append(name)
    return hits


def strip_answer(text: str) -> str:
    """``[ANSWER:json]`` / ``ANSWER:json`` / ``json`` all become ``json``."""
    t = normalize_text(text)
    if t.startswith("[") and t.endswith("]"):
        t = t[1:-1].strip()
    if t.upper().startswith("ANSWER:"):
        t = t[7:].strip()
    return t


def lower_to_ir(cat: ToolCatalog, constraint_text: str | None = None,
                fillers: FillerLexicon | None = None,
                delimiters: DelimiterTable | None = None,
                importance: Mapping[str, float] | None = None) -> PromptIR:
    """Pass 1: segment a catalog into atoms.

    Per tool: a tool-def atom, a param-block atom, then the description split
    into description / filler-span / delimiter atoms. A constraint, when
    given, follows the tool block.
    """
    fillers = fillers if fillers is not None else FillerLexicon.default()
    delimiters = delimiters if delimiters is not None else DelimiterTable.default()
    imp = {**DEFAULT_IMPORTANCE, **(importance or {})}
    seg = segmenter_for(fillers, delimiters)
    atoms: list[Atom] = []
    tool_def_id: dict[str, int] = {}

    def add(role, text, owner=None, category=""):
        atoms.append(Atom(len(atoms), role, text, imp[role], owner, None, category))
        return atoms[-1].id

    for t in cat.tools:
        name = t.name
        tool_def_id[name] = add("tool-def", name, name)
        add("param-block", render_params(t.params), name)
        spans = seg.segment(normalize_text(t.description))
        if not spans:
            add("description", "", name)
        for role, text, category in spans:
            atoms.append(Atom(len(atoms), role, text, imp[role], name, None, category))

    names = {t.name.lower(): t.name for t in cat.tools}
    edges = []
    for t in cat.tools:
        for dep in _dependency_targets(normalize_text(t.description), names, t.name):
            edges.append((tool_def_id[dep], tool_def_id[t.name]))

    constraint = None
    ctext = strip_answer(constraint_text or "")
    if ctext:
        constraint = add("constraint", ctext)
    return PromptIR(tuple(atoms), constraint, tuple(edges))


# -- fragility --------------------------------------------------------------

class FragilityScore(NamedTuple):
    atom_id: int
    importance: float
    accessibility_proxy: float
    fragility: float


def accessibility_proxy(i: int, n: int) -> float:
    """U-shaped positional stand-in for attention from the generation point:
    1 at both ends, 0.5 in the middle. ``n`` is the last index."""
    if n <= 0:
        return 1.0
    return max(1.0 - i / n, i / n)


def score_fragility(ir: PromptIR, alpha: float = 0.5) -> list[FragilityScore]:
    if not ir.atoms:
        raise EmptyIR("cannot score an empty IR")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha {alpha} outside [0, 1]")
    n = len(ir.atoms) - 1
    if n <= 0:
        a = ir.atoms[0]
        return [FragilityScore(a.id, a.importance, 1.0, alpha * a.importance)]
    beta = 1 - alpha
    make = FragilityScore._make
    # inlines accessibility_proxy; keep the two in step
    return [make((a.id, a.importance, p, alpha * a.importance + beta * (1 - p)))
            for i, a in enumerate(ir.atoms) for p in (max(1.0 - i / n, i / n),)]


# -- emission ---------------------------------------------------------------

_OWNER = attrgetter("owner_tool")


class _Group:
    __slots__ = ("tool_def", "param_block", "text")

    def __init__(self):
        self.tool_def = None
        self.param_block = None
        self.text = []


def _groups(ir: PromptIR) -> dict[str, _Group]:
    """owner -> its atoms; cached on the (immutable) IR, treat as read-only."""
    cached = ir.__dict__.get("_groups_cache")
    if cached is not None:
        return cached
    groups: dict[str, _Group] = {}
    # tool atoms sit in contiguous runs per owner, so work run by run
    for owner, run in groupby(ir.atoms, _OWNER):
        if owner is None:
            continue
        g = groups.get(owner)
        if g is None:
            g = groups[owner] = _Group()
        for a in run:
            role = a.role
            if role == "tool-def":
                g.tool_def = a
            elif role == "param-block":
                g.param_block = a
            elif role in TEXT_ROLES:
                g.text.append(a)
    ir.__dict__["_groups_cache"] = groups
    return groups


def description_text(atoms: Iterable[Atom]) -> str:
    return collapse_ws("".join(a.text for a in atoms))


def tool_lines(name: str, params: str, description: str) -> list[str]:
    lines = [name + params]
    if description:
        lines.append("|" + description)
    return lines


def constraint_line(a: Atom) -> str:
    return render_answer(a.text)


def emit_lines(ir: PromptIR) -> list[str]:
    """Render the IR as grammar lines. Tool groups appear in the order of
    their tool-def atoms; anchor and closure lines always come last."""
    cached = ir.__dict__.get("_lines_cache")
    if cached is not None:
        return list(cached)
    groups = _groups(ir)
    body: list[str] = []
    tail: list[str] = []
    for a in ir.atoms:
        role = a.role
        if role == "tool-def":
            g = groups[a.owner_tool]
            body.append(a.text + (g.param_block.text if g.param_block else "()"))
            desc = description_text(g.text)
            if desc:
                body.append("|" + desc)
        elif role == "constraint":
            body.append(constraint_line(a))
        elif role == "closure" or role == "anchor-dup":
            if a.text:
                tail.append(a.text if role == "closure" else render_recap(a.text))
    lines = body + tail
    ir.__dict__["_lines_cache"] = tuple(lines)
    return lines


def emit_text(ir: PromptIR) -> str:
    return "\n".join(emit_lines(ir))


def group_record(ir: PromptIR, owner: str, groups: dict | None = None) -> str:
    """A tool's full record on one line (signature plus ``|description``).
    Pass ``groups`` from an earlier call to avoid regrouping."""
    g = (groups if groups is not None else _groups(ir))[owner]
    sig = (g.tool_def.text if g.tool_def else owner) + (g.param_block.text if g.param_block else "()")
    desc = description_text(g.text)
    return sig + ("|" + desc if desc else "")
