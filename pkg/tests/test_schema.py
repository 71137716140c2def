import json

import pytest

from schemac.corpus import fixture_names, load_fixture, synthetic_catalog, to_dialect
from schemac.errors import DuplicateToolName, MalformedJson, UnknownDialect, UnsupportedSchemaFeature
from schemac.lexicon import DelimiterTable, FillerLexicon, segmenter_for
from schemac.schema import (ParamSpec, SemanticAtom, ToolCatalog, ToolSchema, content_words,
                            iter_structural, normalize_dialect, parse_catalog, semantic_atoms)


def openai(name, props, required=(), desc=""):
    return {"type": "function", "function": {
        "name": name, "description": desc,
        "parameters": {"type": "object", "properties": props, "required": list(required)}}}


def test_parse_search_files(search_cat):
    assert [t.name for t in search_cat.tools] == ["search_files"]
    query, path = search_cat.tools[0].params
    assert (query.name, query.json_type, query.required) == ("query", "string", True)
    assert (path.name, path.json_type, path.required) == ("path", "string", False)
    assert search_cat.source_dialect == "openai-fc"
    assert len(search_cat.source_bytes_hash) == 64


def test_empty_tools_list():
    cat = parse_catalog('{"tools": []}', "mcp")
    assert len(cat) == 0


def test_malformed_json():
    with pytest.raises(MalformedJson):
        parse_catalog("{not json", "openai-fc")


def test_unknown_dialect():
    with pytest.raises(UnknownDialect):
        parse_catalog("[]", "gemini")
    assert normalize_dialect("anthropic") == "anthropic-tool-use"


def test_duplicate_tool_name():
    doc = [openai("a", {}), openai("a", {})]
    with pytest.raises(DuplicateToolName):
        parse_catalog(json.dumps(doc), "openai-fc")


@pytest.mark.parametrize("schema,where", [
    ({"oneOf": [{"type": "string"}, {"type": "integer"}]}, "oneOf"),
    ({"$ref": "#/defs/x"}, "$ref"),
    ({"type": ["string", "integer"]}, "type"),
    ({"type": "tuple"}, "type"),
])
def test_unsupported_feature_reports_path(schema, where):
    doc = [openai("t", {"x": schema})]
    with pytest.raises(UnsupportedSchemaFeature) as exc:
        parse_catalog(json.dumps(doc), "openai-fc")
    assert exc.value.path == f"$[0].function.parameters.properties.x.{where}"


def test_reserved_character_in_name():
    with pytest.raises(UnsupportedSchemaFeature):
        parse_catalog(json.dumps([openai("bad name", {})]), "openai-fc")


def test_nullable_union_is_plain_type():
    cat = parse_catalog(json.dumps([openai("t", {"x": {"type": ["integer", "null"]}})]), "openai-fc")
    assert cat.tools[0].params[0].json_type == "integer"


def test_one_level_nesting_flattens():
    props = {"opts": {"type": "object", "properties": {"depth": {"type": "integer"}}, "required": ["depth"]}}
    cat = parse_catalog(json.dumps([openai("t", props, ["opts"])]), "openai-fc")
    (param,) = cat.tools[0].params
    assert param.name == "opts.depth" and param.required


def test_enum_and_bounds():
    props = {"mode": {"type": "string", "enum": ["a", "b"]},
             "n": {"type": "integer", "minimum": 1, "maximum": 100}}
    cat = parse_catalog(json.dumps([openai("t", props)]), "openai-fc")
    mode, n = cat.tools[0].params
    assert mode.json_type == "enum" and mode.enum_values == ("a", "b")
    assert n.numeric_bounds == (1, 100)


def test_paramspec_invariants():
    with pytest.raises(ValueError):
        ParamSpec("x", "enum")
    with pytest.raises(ValueError):
        ParamSpec("x", "string", enum_values=("a",))
    with pytest.raises(ValueError):
        ToolSchema("t", "", (ParamSpec("x", "string"), ParamSpec("x", "integer")))
    with pytest.raises(DuplicateToolName):
        ToolCatalog((ToolSchema("t"), ToolSchema("t")))


@pytest.mark.parametrize("domain", ["calendar", "database", "email", "repo"])
def test_three_dialects_same_atoms(domain):
    cats = [load_fixture(f"tri_{domain}_{d}") for d in ("openai", "anthropic", "mcp")]
    assert len({c.tools for c in cats}) == 1
    assert len({semantic_atoms(c) for c in cats}) == 1


@pytest.mark.parametrize("dialect", ["openai-fc", "anthropic-tool-use", "mcp"])
def test_round_trip_through_dialect(dialect):
    cat = synthetic_catalog(8, seed=3)
    again = parse_catalog(cat.to_json(dialect), dialect)
    assert again.tools == cat.tools


def test_adding_a_tool_gives_atom_superset():
    small = synthetic_catalog(5, seed=1)
    big = ToolCatalog(small.tools + (ToolSchema("extra_tool", "Extra things"),))
    assert semantic_atoms(small) < semantic_atoms(big)


def test_content_words_drop_filler():
    seg = segmenter_for(FillerLexicon.default(), DelimiterTable.default())
    assert content_words("Please kindly search files", seg) == {"search", "files"}


def test_semantic_atom_kinds(search_cat):
    atoms = semantic_atoms(search_cat)
    assert SemanticAtom("tool-name", "search_files") in atoms
    assert SemanticAtom("required-flag", "search_files", "path", "optional") in atoms
    assert SemanticAtom("description-content-word", "search_files", "", "pattern") in atoms
    structural = iter_structural(atoms)
    assert all(a.kind != "description-content-word" for a in structural)


def test_every_fixture_parses():
    names = fixture_names()
    assert len(names) >= 20
    for n in names:
        assert len(load_fixture(n)) > 0


def test_to_dialect_shapes():
    tools = [{"name": "a", "description": "", "schema": {"type": "object", "properties": {}}}]
    assert "tools" in to_dialect(tools, "mcp")
    assert to_dialect(tools, "openai-fc")[0]["type"] == "function"
