"""The eight IR -> IR transforms.

Token-reducing: sdm, tas, dro, cfl. Reordering: cfo, cas. Expanding: sad_f,
ccp. All are pure; none mutates its input.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .errors import HeuristicTokenizerForbidden
from .grammar import render_answer, render_recap
from .ir import (_groups, Atom, FragilityScore, PromptIR, TEXT_ROLES, TOOL_ROLES, constraint_line,
                 emit_lines, group_record, score_fragility)
from .lexicon import DelimiterTable, FillerLexicon, collapse_ws, segmenter_for

OP_NAMES = ("SDM", "TAS", "DRO", "CFL", "CFO", "CAS", "SAD-F", "CCP")
TOKEN_REDUCING = ("SDM", "TAS", "DRO", "CFL")
REORDERING = ("CFO", "CAS")
EXPANDING = ("SAD-F", "CCP")

CLOSURE_ID_BASE = 1_000_000  # keeps the closure id stable across re-runs


@dataclass(frozen=True)
class SadBudget:
    max_tokens: int = 0

    def __post_init__(self):
        if not isinstance(self.max_tokens, int) or self.max_tokens < 0:
            raise ValueError(f"SAD-F budget must be a non-negative integer, got {self.max_tokens!r}")


def _require_exact(tokenizer, op):
    if not getattr(tokenizer, "exact", False):
        raise HeuristicTokenizerForbidden(f"{op} needs an exact tokenizer, got {tokenizer!r}")


def _with(a: Atom, text: str) -> Atom:
    return Atom(a.id, a.role, text, a.importance, a.owner_tool, a.ref, a.category)


def changed_ids(before: PromptIR, after: PromptIR) -> set[int]:
    """Ids of atoms removed, added or whose text changed."""
    b, a = before.by_id(), after.by_id()
    out = set(b) ^ set(a)
    out |= {i for i in set(b) & set(a) if b[i].text != a[i].text}
    return out


# -- SDM ----------------------------------------------------------------------

def sdm(ir: PromptIR, lexicon: FillerLexicon | None = None) -> PromptIR:
    """Drop filler-span atoms matched by the lexicon."""
    lexicon = lexicon if lexicon is not None else FillerLexicon.default()
    keep = tuple(a for a in ir.atoms if not (a.role == "filler-span" and lexicon.matches(a.text)))
    if len(keep) == len(ir.atoms):
        return ir
    return ir.replace(atoms=keep)


# -- TAS ----------------------------------------------------------------------

def _desc_line_text(raw: str) -> str:
    """The ``|description`` line for raw concatenated atom text."""
    d = collapse_ws(raw)
    return "|" + d if d else ""


def tas(ir: PromptIR, table: DelimiterTable | None = None, tokenizer=None) -> PromptIR:
    """Pick the cheapest variant for each symbolic delimiter.

    Candidates are costed inside the description line they sit in, so a
    choice can never make the line longer; ties keep the earliest variant.
    """
    _require_exact(tokenizer, "TAS")
    table = table if table is not None else DelimiterTable.default()
    atoms = list(ir.atoms)
    changed = False
    for idx in _text_index(atoms).values():
        for i in idx:
            a = atoms[i]
            if a.role != "delimiter":
                continue
            variants = table.variants_for(a.text.strip())
            if not variants:
                continue
            lead = a.text[:len(a.text) - len(a.text.lstrip())]
            trail = a.text[len(a.text.rstrip()):]
            k = idx.index(i)
            pre = "".join(atoms[j].text for j in idx[:k])
            post = "".join(atoms[j].text for j in idx[k + 1:])
            best, best_cost = None, None
            for v in variants:
                cost = tokenizer.count_tokens(_desc_line_text(pre + lead + v + trail + post))
                if best_cost is None or cost < best_cost:
                    best, best_cost = lead + v + trail, cost
            if best != a.text:
                atoms[i] = _with(a, best)
                changed = True
    return ir.replace(atoms=tuple(atoms)) if changed else ir


def _text_index(atoms: Sequence[Atom]) -> dict[str, list[int]]:
    """owner -> positions of its description-line atoms, in order."""
    out: dict[str, list[int]] = {}
    for i, a in enumerate(atoms):
        if a.owner_tool is not None and a.role in TEXT_ROLES:
            out.setdefault(a.owner_tool, []).append(i)
    return out


# -- DRO ----------------------------------------------------------------------

def dro(ir: PromptIR, table: DelimiterTable | None = None, tokenizer=None,
        rescan: bool = True) -> PromptIR:
    """Swap verbose structural phrases for their compact forms.

    Verbose delimiter atoms are replaced whole. With ``rescan`` description
    atoms are searched too, for when the table differs from the one used
    at lowering. With a tokenizer, a rewrite that would lengthen its line
    is skipped.
    """
    table = table if table is not None else DelimiterTable.default()
    seg = segmenter_for(FillerLexicon(()), table)
    atoms = list(ir.atoms)
    by_owner = _text_index(atoms)
    changed = False
    for i, a in enumerate(atoms):
        if a.role == "delimiter" and a.category == "verbose":
            new = table.compact_for(a.text)
        elif rescan and a.role == "description" and a.text:
            parts = seg.segment(a.text)
            if not any(p.category == "verbose" for p in parts):
                continue
            new = "".join((table.compact_for(p.text) or p.text) if p.category == "verbose" else p.text
                          for p in parts)
        else:
            continue
        if new is None or new == a.text:
            continue
        if tokenizer is not None and a.owner_tool is not None:
            idx = by_owner[a.owner_tool]
            k = idx.index(i)
            pre = "".join(atoms[j].text for j in idx[:k])
            post = "".join(atoms[j].text for j in idx[k + 1:])
            if tokenizer.count_tokens(_desc_line_text(pre + new + post)) \
                    > tokenizer.count_tokens(_desc_line_text(pre + a.text + post)):
                continue
        atoms[i] = _with(a, new)
        changed = True
    return ir.replace(atoms=tuple(atoms)) if changed else ir


# -- CFL ----------------------------------------------------------------------

_FORMAT_WORDS = ("json", "yaml", "xml", "csv", "markdown", "html", "sql", "text",
                 "integer", "number", "boolean", "list", "table")
_FORMAT_RX = re.compile(r"(?<![\w-])(" + "|".join(_FORMAT_WORDS) + r")(?![\w-])", re.IGNORECASE)


def answer_type(text: str) -> str:
    """Short type tag for a constraint, e.g. "Respond in JSON format" -> "json"."""
    m = _FORMAT_RX.search(text)
    return m.group(1).lower() if m else text


def cfl(ir: PromptIR, tokenizer=None) -> PromptIR:
    """Move the constraint atom to position 0 and tag it ``[ANSWER:type]``."""
    if ir.constraint is None:
        return ir
    idx = ir.index_of(ir.constraint)
    a = ir.atoms[idx]
    tag = answer_type(a.text)
    if tag != a.text and tokenizer is not None \
            and tokenizer.count_tokens(render_answer(tag)) > tokenizer.count_tokens(render_answer(a.text)):
        tag = a.text
    if idx == 0 and tag == a.text:
        return ir
    moved = _with(a, tag)
    rest = ir.atoms[:idx] + ir.atoms[idx + 1:]
    return ir.replace(atoms=(moved,) + rest)


# -- reordering helpers -------------------------------------------------------

def _regions(ir: PromptIR):
    """(head, [(owner, atoms)], tail): non-tool atoms before the first tool
    atom, tool groups in order, and every other non-tool atom."""
    head: list[Atom] = []
    groups: dict[str, list[Atom]] = {}
    tail: list[Atom] = []
    for a in ir.atoms:
        if a.role in TOOL_ROLES and a.owner_tool is not None:
            groups.setdefault(a.owner_tool, []).append(a)
        elif groups:
            tail.append(a)
        else:
            head.append(a)
    return head, list(groups.items()), tail


def _assemble(ir, head, groups, tail) -> PromptIR:
    atoms = tuple(head) + tuple(a for _, g in groups for a in g) + tuple(tail)
    if atoms == ir.atoms:
        return ir
    return ir.replace(atoms=atoms)


def _group_edges(ir: PromptIR) -> list[tuple[str, str]]:
    owner = {a.id: a.owner_tool for a in ir.atoms}
    return [(owner[a], owner[b]) for a, b in ir.dependency_edges
            if owner.get(a) and owner.get(b) and owner[a] != owner[b]]


def _violations(order: Sequence[str], edges) -> int:
    pos = {o: i for i, o in enumerate(order)}
    return sum(1 for a, b in edges if pos[a] > pos[b])


# -- CFO ----------------------------------------------------------------------

def cfo(ir: PromptIR) -> PromptIR:
    """Stable topological sort of tool groups over the dependency edges."""
    head, groups, tail = _regions(ir)
    edges = _group_edges(ir)
    if not edges:
        return ir
    index = {o: i for i, (o, _) in enumerate(groups)}
    indeg = dict.fromkeys(index, 0)
    succ: dict[str, set[str]] = {o: set() for o in index}
    for a, b in set(edges):
        succ[a].add(b)
        indeg[b] += 1
    ready = sorted((o for o, d in indeg.items() if d == 0), key=index.get)
    order = []
    while ready:
        o = ready.pop(0)
        order.append(o)
        for s in succ[o]:
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
        ready.sort(key=index.get)
    # PromptIR construction already rejects cycles, so every group is placed
    by_owner = dict(groups)
    return _assemble(ir, head, [(o, by_owner[o]) for o in order], tail)


# -- CAS ----------------------------------------------------------------------

def cas(ir: PromptIR, scores: Sequence[FragilityScore] | None = None,
        alpha: float = 0.5, k: int = 2) -> PromptIR:
    """Bookend placement: the most fragile tool group goes to the front of
    the tool region, the second most fragile to the back.

    With ``k > 2`` further groups alternate front/back. A move that would add
    a dependency violation is skipped.
    """
    head, groups, tail = _regions(ir)
    if len(groups) < 2 or k <= 0:
        return ir
    if scores is None:
        scores = score_fragility(ir, alpha)
    frag = {s.atom_id: s.fragility for s in scores}
    per_group = []
    for i, (owner, atoms) in enumerate(groups):
        tdef = next((a for a in atoms if a.role == "tool-def"), atoms[0])
        per_group.append((frag.get(tdef.id, 0.0), i, owner))
    if max(f for f, _, _ in per_group) == min(f for f, _, _ in per_group):
        return ir
    ranked = sorted(per_group, key=lambda t: (-t[0], t[1]))[:k]
    edges = _group_edges(ir)
    order = [o for o, _ in groups]
    front, back = [], []
    for rank, (_, _, owner) in enumerate(ranked):
        trial_front = front + ([owner] if rank % 2 == 0 else [])
        trial_back = ([owner] if rank % 2 == 1 else []) + back
        middle = [o for o in order if o not in trial_front and o not in trial_back]
        before = _violations(front + [o for o in order if o not in front and o not in back] + back, edges)
        if _violations(trial_front + middle + trial_back, edges) > before:
            continue
        front, back = trial_front, trial_back
    middle = [o for o in order if o not in front and o not in back]
    by_owner = dict(groups)
    return _assemble(ir, head, [(o, by_owner[o]) for o in front + middle + back], tail)


# -- SAD-F --------------------------------------------------------------------

_ANCHOR_ROLES = ("constraint", "tool-def", "param-block", "description", "delimiter")


def anchor_cost(tokenizer, text: str) -> int:
    """Tokens one ``[RECAP]`` anchor line adds, its newline included."""
    return tokenizer.count_tokens("\n" + render_recap(text))


def sad_f(ir: PromptIR, scores: Sequence[FragilityScore] | None = None,
          budget: SadBudget | int = 0, tokenizer=None, alpha: float = 0.5) -> PromptIR:
    """Append anchor duplicates greedily by fragility per token within budget.

    No backtracking: an item that does not fit is skipped and the scan goes
    on. An atom that already has an anchor is never duplicated again.
    """
    if not isinstance(budget, SadBudget):
        budget = SadBudget(budget)
    if budget.max_tokens == 0:
        return ir
    _require_exact(tokenizer, "SAD-F")
    if scores is None:
        scores = score_fragility(ir, alpha)
    frag = {s.atom_id: s.fragility for s in scores}
    anchored = {a.ref for a in ir.atoms if a.role == "anchor-dup"}
    cands = []
    for pos, a in enumerate(ir.atoms):
        if a.role not in _ANCHOR_ROLES or not a.text.strip() or a.id in anchored:
            continue
        text = constraint_line(a) if a.role == "constraint" else a.text.strip()
        cost = anchor_cost(tokenizer, text)
        cands.append((frag.get(a.id, 0.0) / cost, pos, a, text, cost))
    cands.sort(key=lambda c: (-c[0], c[1]))
    left = budget.max_tokens
    added: list[Atom] = []
    next_id = ir.next_id()
    if next_id >= CLOSURE_ID_BASE:
        next_id = max((a.id for a in ir.atoms if a.id < CLOSURE_ID_BASE), default=-1) + 1
    for ratio, _, a, text, cost in cands:
        if cost > left:
            continue
        added.append(Atom(next_id, "anchor-dup", text, 0.0, a.owner_tool, a.id))
        next_id += 1
        left -= cost
    if not added:
        return ir
    closure = [a for a in ir.atoms if a.role == "closure"]
    body = [a for a in ir.atoms if a.role != "closure"]
    return ir.replace(atoms=tuple(body + added + closure))


# -- CCP ----------------------------------------------------------------------

_RECAP_ROLES = ("constraint", "tool-def", "param-block", "description")
RECAP_SEP = "; "


def _without_closure(ir: PromptIR) -> PromptIR:
    atoms = tuple(a for a in ir.atoms if a.role != "closure")
    return ir if len(atoms) == len(ir.atoms) else ir.replace(atoms=atoms)


def _same_record(a: Atom, b: Atom | None) -> bool:
    if b is None:
        return False
    if a.role == "constraint" or b.role == "constraint":
        return a.id == b.id
    return a.owner_tool is not None and a.owner_tool == b.owner_tool


def ccp(ir: PromptIR, scores: Sequence[FragilityScore] | None = None, k: int = 3,
        alpha: float = 0.5) -> PromptIR:
    """Append one ``[RECAP]`` closure listing the top-k fragility entries.

    Tool-side atoms expand to their tool's one-line record so the recap is
    self-contained; duplicates collapse. The record that already ends the
    body is left out. Any previous closure is replaced.
    Without explicit scores, ranking ignores the old closure, which makes
    the operator idempotent.
    """
    base = _without_closure(ir)
    if k <= 0 or not base.atoms:
        return base
    if scores is None:
        scores = score_fragility(base, alpha)
    frag = {s.atom_id: s.fragility for s in scores}
    # the record already closing the body sits at position n; skip it
    last = next((a for a in reversed(base.atoms) if a.role != "anchor-dup"), None)
    ranked = sorted(((frag.get(a.id, 0.0), pos, a) for pos, a in enumerate(base.atoms)
                     if a.role in _RECAP_ROLES and not _same_record(a, last)),
                    key=lambda t: (-t[0], t[1]))
    entries: list[str] = []
    groups = _groups(base)
    for _, _, a in ranked:
        if a.role == "constraint":
            entry = constraint_line(a)
        else:
            entry = group_record(base, a.owner_tool, groups)
        if entry and entry not in entries:
            entries.append(entry)
        if len(entries) == k:
            break
    if not entries:
        return base
    closure = Atom(CLOSURE_ID_BASE, "closure", render_recap(RECAP_SEP.join(entries)), 0.0)
    return base.replace(atoms=base.atoms + (closure,))


def tokens(ir: PromptIR, tokenizer) -> int:
    return tokenizer.count_lines(emit_lines(ir))
