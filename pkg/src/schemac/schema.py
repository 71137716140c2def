"""Provider-neutral tool catalog and semantic atom extraction.

Three dialects are accepted:

* ``openai-fc``: ``{"type": "function", "function": {...}}`` wrappers or bare
  ``{"name", "description", "parameters"}`` objects.
* ``anthropic-tool-use``: ``{"name", "description", "input_schema"}``.
* ``mcp``: ``tools/list`` results, ``{"name", "description", "inputSchema"}``.

Each may arrive as a single tool object, a list, ``{"tools": [...]}`` or (mcp)
a JSON-RPC envelope ``{"result": {"tools": [...]}}``.
"""
from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .errors import (DuplicateToolName, MalformedJson, UnknownDialect,
                     UnsupportedSchemaFeature)
from .lexicon import (DelimiterTable, FillerLexicon, Segmenter, collapse_ws,
                      segmenter_for)

DIALECTS = ("openai-fc", "anthropic-tool-use", "mcp")
DIALECT_ALIASES = {
    "openai-fc": "openai-fc", "openai": "openai-fc", "openai_fc": "openai-fc",
    "anthropic-tool-use": "anthropic-tool-use", "anthropic": "anthropic-tool-use",
    "mcp": "mcp",
}
_SCHEMA_KEY = {"openai-fc": "parameters", "anthropic-tool-use": "input_schema", "mcp": "inputSchema"}

JSON_TYPES = ("string", "integer", "number", "boolean", "array", "object", "enum")
# characters the emit grammar reserves inside a signature
RESERVED = set(" \t\r\n:?()[]|\\")

_PARAM_KNOWN = {"type", "description", "enum", "minimum", "maximum", "properties", "required", "items"}
_TOOL_KNOWN = {"name", "description"}
_OBJECT_KNOWN = {"type", "properties", "required"}
_COMBINATORS = ("oneOf", "anyOf", "allOf", "not", "$ref")


def normalize_dialect(dialect: str) -> str:
    try:
        return DIALECT_ALIASES[dialect.strip().lower()]
    except (KeyError, AttributeError):
        raise UnknownDialect(f"unknown dialect {dialect!r}; expected one of {', '.join(DIALECTS)}") from None


def normalize_text(text: str) -> str:
    return collapse_ws(unicodedata.normalize("NFC", text or ""))


@dataclass(frozen=True)
class ParamSpec:
    name: str
    json_type: str
    required: bool = True
    enum_values: tuple[str, ...] | None = None
    description: str = ""
    numeric_bounds: tuple[float | int | None, float | int | None] | None = None

    def __post_init__(self):
        if self.json_type not in JSON_TYPES:
            raise ValueError(f"unknown json_type {self.json_type!r}")
        if (self.json_type == "enum") != bool(self.enum_values):
            raise ValueError(f"param {self.name!r}: enum_values must be non-empty iff json_type is enum")


@dataclass(frozen=True)
class ToolSchema:
    name: str
    description: str = ""
    params: tuple[ParamSpec, ...] = ()

    def __post_init__(self):
        if not self.name or any(c.isspace() for c in self.name):
            raise ValueError(f"invalid tool name {self.name!r}")
        names = [p.name for p in self.params]
        if len(names) != len(set(names)):
            raise ValueError(f"tool {self.name!r} has duplicate parameter names")


@dataclass(frozen=True)
class ToolCatalog:
    tools: tuple[ToolSchema, ...] = ()
    source_dialect: str = "openai-fc"
    source_bytes_hash: str = ""
    # raw source text, kept for the "before" token count; not part of equality
    source_text: str | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        seen = set()
        for t in self.tools:
            if t.name in seen:
                raise DuplicateToolName(f"duplicate tool name {t.name!r}")
            seen.add(t.name)

    def __len__(self):
        return len(self.tools)

    def __iter__(self):
        return iter(self.tools)

    def tool(self, name: str) -> ToolSchema:
        for t in self.tools:
            if t.name == name:
                return t
        raise KeyError(name)

    def to_json(self, dialect: str | None = None) -> str:
        """Serialize back into a dialect (compact JSON, list form)."""
        dialect = normalize_dialect(dialect or self.source_dialect)
        return json.dumps([_tool_to_dialect(t, dialect) for t in self.tools],
                          ensure_ascii=False, separators=(",", ":"))


# -- parsing ----------------------------------------------------------------

def format_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


def _enum_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return format_number(v)
    return json.dumps(v, ensure_ascii=False, sort_keys=True)


def _opaque(key, value) -> str:
    if isinstance(value, str):
        return f"[{key}={value}]"
    return f"[{key}={json.dumps(value, ensure_ascii=False, sort_keys=True, separators=(',', ':'))}]"


def _with_suffix(description: str, extras: list[str]) -> str:
    return normalize_text(" ".join([description or "", *extras]))


def _check_name(name, what, path):
    if not isinstance(name, str) or not name:
        raise UnsupportedSchemaFeature(f"{what} name must be a non-empty string", path)
    bad = sorted(set(name) & RESERVED)
    if bad or name[0] in "[|":
        raise UnsupportedSchemaFeature(f"{what} name {name!r} contains reserved characters {bad}", path)


def _resolve_type(schema: dict, path: str) -> str:
    for key in _COMBINATORS:
        if key in schema:
            raise UnsupportedSchemaFeature(f"'{key}' is not supported", f"{path}.{key}")
    if "enum" in schema:
        if not isinstance(schema["enum"], list) or not schema["enum"]:
            raise UnsupportedSchemaFeature("enum must be a non-empty list", f"{path}.enum")
        return "enum"
    ty = schema.get("type", "string")
    if isinstance(ty, list):
        non_null = [t for t in ty if t != "null"]
        if len(non_null) != 1:
            raise UnsupportedSchemaFeature(f"union type {ty} is not supported", f"{path}.type")
        ty = non_null[0]
    if ty not in JSON_TYPES or ty == "enum":
        raise UnsupportedSchemaFeature(f"unknown type {ty!r}", f"{path}.type")
    return ty


def _param(name, schema, required, path) -> ParamSpec:
    if not isinstance(schema, dict):
        raise UnsupportedSchemaFeature("parameter schema must be an object", path)
    ty = _resolve_type(schema, path)
    extras = [_opaque(k, v) for k, v in schema.items() if k not in _PARAM_KNOWN]
    if ty == "object" and "properties" in schema:
        # nested beyond the flattening depth: keep the shape as opaque text
        extras.append(_opaque("properties", schema["properties"]))
        if "required" in schema:
            extras.append(_opaque("required", schema["required"]))
    if "items" in schema:
        extras.append(_opaque("items", schema["items"]))
    bounds = None
    lo, hi = schema.get("minimum"), schema.get("maximum")
    numeric = all(v is None or (isinstance(v, (int, float)) and not isinstance(v, bool)
                                and v == v and abs(v) != float("inf")) for v in (lo, hi))
    if ty in ("integer", "number") and numeric and (lo is not None or hi is not None):
        bounds = (lo, hi)
    elif lo is not None or hi is not None:
        extras += [_opaque(k, schema[k]) for k in ("minimum", "maximum") if k in schema]
    return ParamSpec(
        name=name,
        json_type=ty,
        required=required,
        enum_values=tuple(_enum_value(v) for v in schema["enum"]) if ty == "enum" else None,
        description=_with_suffix(schema.get("description", ""), extras),
        numeric_bounds=bounds,
    )


def _is_required(name, required_list, schema) -> bool:
    if required_list is not None:
        return name in required_list
    desc = normalize_text(schema.get("description", "") if isinstance(schema, dict) else "")
    return not re.match(r"optional\b", desc, re.IGNORECASE)


def _params_from_object(obj, path, tool_extras) -> list[ParamSpec]:
    if obj is None:
        return []
    if not isinstance(obj, dict):
        raise UnsupportedSchemaFeature("input schema must be an object", path)
    for key in _COMBINATORS:
        if key in obj:
            raise UnsupportedSchemaFeature(f"'{key}' is not supported at the top level", f"{path}.{key}")
    if obj.get("type", "object") != "object":
        raise UnsupportedSchemaFeature("input schema type must be 'object'", f"{path}.type")
    tool_extras += [_opaque(k, v) for k, v in obj.items() if k not in _OBJECT_KNOWN]
    props = obj.get("properties") or {}
    if not isinstance(props, dict):
        raise UnsupportedSchemaFeature("properties must be an object", f"{path}.properties")
    required = obj.get("required")
    out: list[ParamSpec] = []
    for name, schema in props.items():
        ppath = f"{path}.properties.{name}"
        _check_name(name, "parameter", ppath)
        req = _is_required(name, required, schema)
        if isinstance(schema, dict) and _resolve_type(schema, ppath) == "object" and "properties" in schema:
            out.extend(_flatten(name, schema, req, ppath))
        else:
            out.append(_param(name, schema, req, ppath))
    return out


def _flatten(prefix, schema, parent_required, path) -> list[ParamSpec]:
    """Flatten one level of object nesting into dotted parameter names."""
    props = schema.get("properties") or {}
    required = schema.get("required")
    extras = [_opaque(k, v) for k, v in schema.items() if k not in _PARAM_KNOWN]
    out = []
    for name, sub in props.items():
        spath = f"{path}.properties.{name}"
        _check_name(name, "parameter", spath)
        req = parent_required and _is_required(name, required, sub)
        out.append(_param(f"{prefix}.{name}", sub, req, spath))
    if not out:
        desc = _with_suffix(schema.get("description", ""), extras)
        return [ParamSpec(prefix, "object", parent_required, description=desc)]
    if extras or schema.get("description"):
        first = out[0]
        out[0] = ParamSpec(first.name, first.json_type, first.required, first.enum_values,
                           _with_suffix(first.description, [schema.get("description", ""), *extras]),
                           first.numeric_bounds)
    return out


def _unwrap_tools(doc, dialect):
    if dialect == "mcp" and isinstance(doc, dict) and isinstance(doc.get("result"), dict):
        doc = doc["result"]
    if isinstance(doc, dict) and "tools" in doc and isinstance(doc["tools"], list):
        return doc["tools"], "$.tools"
    if isinstance(doc, list):
        return doc, "$"
    if isinstance(doc, dict):
        return [doc], None
    raise UnsupportedSchemaFeature("expected a tool object, a list of tools or {'tools': [...]}", "$")


def _tool(raw, dialect, path) -> ToolSchema:
    if not isinstance(raw, dict):
        raise UnsupportedSchemaFeature("tool entry must be an object", path)
    extras: list[str] = []
    if dialect == "openai-fc" and raw.get("type") == "function" and isinstance(raw.get("function"), dict):
        extras += [_opaque(k, v) for k, v in raw.items() if k not in ("type", "function")]
        raw, path = raw["function"], f"{path}.function"
    schema_key = _SCHEMA_KEY[dialect]
    name = raw.get("name")
    _check_name(name, "tool", f"{path}.name")
    extras += [_opaque(k, v) for k, v in raw.items() if k not in _TOOL_KNOWN | {schema_key}]
    params = _params_from_object(raw.get(schema_key), f"{path}.{schema_key}", extras)
    return ToolSchema(name, _with_suffix(raw.get("description", ""), extras), tuple(params))


def parse_catalog(data: bytes | str, dialect: str) -> ToolCatalog:
    """Parse raw JSON in one of the supported dialects into a ToolCatalog."""
    dialect = normalize_dialect(dialect)
    raw = data.encode("utf-8") if isinstance(data, str) else bytes(data)
    try:
        text = raw.decode("utf-8-sig")
        doc = json.loads(text)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedJson(str(exc)) from exc
    entries, base = _unwrap_tools(doc, dialect)
    tools = []
    for i, entry in enumerate(entries):
        tools.append(_tool(entry, dialect, f"{base}[{i}]" if base else "$"))
    names = [t.name for t in tools]
    dup = next((n for n in names if names.count(n) > 1), None)
    if dup is not None:
        raise DuplicateToolName(f"duplicate tool name {dup!r}")
    return ToolCatalog(tuple(tools), dialect, hashlib.sha256(raw).hexdigest(), text)


def _tool_to_dialect(t: ToolSchema, dialect: str) -> dict:
    props, required = {}, []
    for p in t.params:
        s: dict = {}
        if p.json_type == "enum":
            s["enum"] = list(p.enum_values)
        else:
            s["type"] = p.json_type
        if p.numeric_bounds:
            lo, hi = p.numeric_bounds
            if lo is not None:
                s["minimum"] = lo
            if hi is not None:
                s["maximum"] = hi
        if p.description:
            s["description"] = p.description
        props[p.name] = s
        if p.required:
            required.append(p.name)
    schema = {"type": "object", "properties": props, "required": required}
    body = {"name": t.name, "description": t.description, _SCHEMA_KEY[dialect]: schema}
    if dialect == "openai-fc":
        return {"type": "function", "function": body}
    return body


# -- semantic atoms ---------------------------------------------------------

ATOM_KINDS = ("tool-name", "param-name", "param-type", "required-flag",
              "enum-value", "numeric-bound", "description-content-word")
STRUCTURAL_KINDS = frozenset(ATOM_KINDS[:-1])


class SemanticAtom(NamedTuple):
    kind: str
    tool: str
    param: str = ""
    value: str = ""


_WORD = re.compile(r"\w+")


def content_words(text: str, segmenter: Segmenter) -> set[str]:
    return {w.lower() for w in _WORD.findall(segmenter.content_text(normalize_text(text)))}


def semantic_atoms(cat: ToolCatalog, fillers: FillerLexicon | None = None,
                   delimiters: DelimiterTable | None = None) -> frozenset[SemanticAtom]:
    """The semantic atom set of a catalog.

    Content words come from tool descriptions only, after removing filler
    lexicon matches and verbose delimiter phrases.
    """
    seg = segmenter_for(fillers if fillers is not None else FillerLexicon.default(),
                        delimiters if delimiters is not None else DelimiterTable.default())
    atoms: set[SemanticAtom] = set()
    for t in cat.tools:
        atoms.add(SemanticAtom("tool-name", t.name))
        for p in t.params:
            atoms.add(SemanticAtom("param-name", t.name, p.name))
            atoms.add(SemanticAtom("param-type", t.name, p.name, p.json_type))
            atoms.add(SemanticAtom("required-flag", t.name, p.name, "required" if p.required else "optional"))
            for v in p.enum_values or ():
                atoms.add(SemanticAtom("enum-value", t.name, p.name, v))
            if p.numeric_bounds:
                lo, hi = p.numeric_bounds
                if lo is not None:
                    atoms.add(SemanticAtom("numeric-bound", t.name, p.name, "min=" + format_number(lo)))
                if hi is not None:
                    atoms.add(SemanticAtom("numeric-bound", t.name, p.name, "max=" + format_number(hi)))
        for w in content_words(t.description, seg):
            atoms.add(SemanticAtom("description-content-word", t.name, "", w))
    return frozenset(atoms)


def iter_structural(atoms: Iterable[SemanticAtom]) -> set[SemanticAtom]:
    return {a for a in atoms if a.kind in STRUCTURAL_KINDS}
