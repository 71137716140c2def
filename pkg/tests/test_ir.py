import json

import pytest
from conftest import catalog, ir_of, p

from schemac.errors import CyclicDependency, EmptyIR
from schemac.ir import (Atom, PromptIR, accessibility_proxy, emit_lines, find_cycle, lower_to_ir,
                        score_fragility, strip_answer)
from schemac.schema import ToolCatalog


def test_search_files_lowers_to_three_atoms(search_cat):
    ir = lower_to_ir(search_cat)
    assert [a.role for a in ir.atoms] == ["tool-def", "param-block", "description"]
    assert ir.atoms[1].text == "(query:str path?:str)"


def test_empty_catalog_with_constraint():
    ir = lower_to_ir(ToolCatalog(), "ANSWER:json")
    assert len(ir) == 1
    assert ir.atoms[0].role == "constraint" and ir.atoms[0].text == "json"
    assert ir.constraint == ir.atoms[0].id


def test_filler_split():
    ir = ir_of(("t", "Please search files"))
    spans = [(a.role, a.text.strip()) for a in ir.atoms[2:]]
    assert spans == [("filler-span", "Please"), ("description", "search files")]


def test_empty_description_keeps_a_description_atom():
    ir = ir_of(("t", ""))
    assert [a.role for a in ir.atoms] == ["tool-def", "param-block", "description"]


def test_lowering_is_deterministic():
    cat = catalog(("a", "Please note that this lists things, i.e. items"), ("b", "After a, run b"))
    assert lower_to_ir(cat) == lower_to_ir(cat)
    assert lower_to_ir(cat).to_json() == lower_to_ir(cat).to_json()


def test_dependency_edges_from_text():
    ir = ir_of(("fetch", "Requires calling login first."), ("login", "Sign in."),
               ("report", "Run after fetch."))
    defs = {a.text: a.id for a in ir.tool_defs()}
    assert set(ir.dependency_edges) == {(defs["login"], defs["fetch"]), (defs["fetch"], defs["report"])}


def test_dependency_on_self_or_unknown_ignored():
    ir = ir_of(("a", "Requires a. Requires calling nothing_here."))
    assert ir.dependency_edges == ()


def test_cycle_rejected():
    with pytest.raises(CyclicDependency):
        ir_of(("a", "Requires b"), ("b", "Requires a"))


def test_find_cycle():
    assert find_cycle([1, 2, 3], [(1, 2), (2, 3)]) is None
    cyc = find_cycle([], [(1, 2), (2, 3), (3, 1)])
    assert sorted(set(cyc)) == [1, 2, 3]


def test_atom_validation():
    with pytest.raises(ValueError):
        Atom(0, "nonsense", "x")
    with pytest.raises(ValueError):
        Atom(0, "description", "x", 1.5)
    with pytest.raises(ValueError):
        Atom(0, "anchor-dup", "x")


def test_ir_validation():
    a = Atom(0, "description", "x")
    with pytest.raises(ValueError):
        PromptIR((a, a))
    with pytest.raises(ValueError):
        PromptIR((a,), dependency_edges=((0, 9),))


@pytest.mark.parametrize("raw", ["json", "ANSWER:json", "[ANSWER:json]", "  [ ANSWER: json ] "])
def test_strip_answer(raw):
    assert strip_answer(raw) == "json"


# fragility: oracle is the formula evaluated by hand

def test_single_atom_fragility():
    ir = PromptIR((Atom(0, "tool-def", "t", 1.0, "t"),))
    (s,) = score_fragility(ir, 0.5)
    assert s.accessibility_proxy == 1.0
    assert s.fragility == 0.5


def test_alpha_one_is_importance():
    atoms = tuple(Atom(i, r, "x", imp) for i, (r, imp) in
                  enumerate([("description", 0.5), ("tool-def", 1.0), ("delimiter", 0.1)]))
    scores = score_fragility(PromptIR(atoms), 1.0)
    assert [s.fragility for s in scores] == [0.5, 1.0, 0.1]


def test_uniform_five_atoms():
    atoms = tuple(Atom(i, "description", "x", 0.5) for i in range(5))
    f = [s.fragility for s in score_fragility(PromptIR(atoms), 0.5)]
    assert f == pytest.approx([0.25, 0.375, 0.5, 0.375, 0.25])


def test_proxy_u_shape():
    assert accessibility_proxy(0, 4) == 1.0
    assert accessibility_proxy(4, 4) == 1.0
    assert accessibility_proxy(2, 4) == 0.5
    assert accessibility_proxy(0, 0) == 1.0


def test_fragility_rises_toward_middle():
    atoms = tuple(Atom(i, "description", "x", 0.5) for i in range(9))
    f = [s.fragility for s in score_fragility(PromptIR(atoms), 0.3)]
    assert all(a < b for a, b in zip(f[:4], f[1:5]))
    assert all(a > b for a, b in zip(f[4:], f[5:]))


def test_importance_independent_of_position(search_cat):
    ir = lower_to_ir(search_cat, "json")
    rev = ir.replace(atoms=ir.atoms[::-1])
    imp = sorted(s.importance for s in score_fragility(ir))
    assert imp == sorted(s.importance for s in score_fragility(rev))


def test_empty_ir_and_bad_alpha():
    with pytest.raises(EmptyIR):
        score_fragility(PromptIR())
    with pytest.raises(ValueError):
        score_fragility(ir_of(("t", "x")), 1.5)


def test_emit_lines_shape():
    ir = ir_of(("t", "Does things", [p("a"), p("b", "integer", False)]), constraint="json")
    assert emit_lines(ir) == ["t(a:str b?:int)", "|Does things", "[ANSWER:json]"]


def test_debug_dump_is_json(search_cat):
    d = json.loads(lower_to_ir(search_cat).to_json())
    assert list(d["atoms"][0]) == ["id", "role", "text", "importance", "owner_tool", "ref", "category"]
