"""Shipped fixture corpus and a seeded synthetic catalog generator."""
from __future__ import annotations

import json
import random
import string
from importlib import resources

from .schema import ToolCatalog, normalize_dialect, parse_catalog

_NOUNS = ["file", "user", "ticket", "event", "message", "invoice", "order", "repo", "branch",
          "issue", "contact", "report", "dataset", "job", "alert", "note", "playlist", "device",
          "shipment", "payment", "document", "calendar", "channel", "backup", "metric", "secret",
          "image", "comment", "task", "project", "booking", "product", "review", "coupon", "queue",
          "webhook", "schedule", "library", "record", "session"]
_VERBS = ["get", "list", "create", "update", "delete", "search", "archive", "export", "sync",
          "validate", "approve", "assign", "merge", "restore", "share"]
_OPENERS = ["This tool allows you to", "Use this tool to", "This function is used to",
            "Please note that this endpoint will", "You can use this to", "This tool lets you",
            "Basically, this function will", "This endpoint allows you to"]
_CLOSERS = ["Please note that results are paginated, for example 50 items per page.",
            "It is important to note that the caller must have write access.",
            "Results are sorted by date, i.e. newest first, and so on.",
            "The id corresponds to the internal identifier of the record.",
            "Returns the following fields: id, name and status.",
            "Essentially, this is very useful for audits as well as cleanup.",
            "Thank you for using this tool in a responsible way.",
            "Status codes map as 200 -> ok and 404 -> missing.",
            "The limit must be greater than or equal to 1.",
            "Generally speaking, calls take approximately 2 seconds."]
_PARAM_DESCS = ["The unique identifier of the {noun} that you want to work with.",
                "Optional free-text filter that is applied to the {noun} name.",
                "The maximum number of results to return in a single page.",
                "Whether or not to include archived {noun} entries in the output.",
                "A list of tags that will be attached to the {noun}."]


def _name(rng, used):
    while True:
        n = f"{rng.choice(_VERBS)}_{rng.choice(_NOUNS)}"
        if n not in used:
            used.add(n)
            return n
        n = f"{n}_{rng.randint(2, 99)}"
        if n not in used:
            used.add(n)
            return n


def _param(rng, noun, i):
    kind = rng.choice(["string", "string", "integer", "number", "boolean", "array", "enum", "nested"])
    desc = rng.choice(_PARAM_DESCS).format(noun=noun)
    name = ["id", "query", "limit", "include_archived", "tags", "mode", "options", "threshold"][i % 8]
    if kind == "enum":
        return name, {"type": "string", "enum": rng.sample(["asc", "desc", "fast", "safe", "full", "none"], 3),
                      "description": desc}
    if kind == "integer":
        return name, {"type": "integer", "minimum": rng.choice([0, 1]), "maximum": rng.choice([50, 100, 500]),
                      "description": desc}
    if kind == "number":
        return name, {"type": "number", "minimum": 0, "maximum": 1.5, "description": desc}
    if kind == "array":
        return name, {"type": "array", "items": {"type": "string"}, "description": desc}
    if kind == "nested":
        return name, {"type": "object", "description": desc,
                      "properties": {"depth": {"type": "integer", "minimum": 1, "maximum": 10},
                                     "follow_links": {"type": "boolean"}},
                      "required": ["depth"]}
    return name, {"type": kind, "description": desc}


def synthetic_tools(n: int, seed: int = 0) -> list[dict]:
    """``n`` provider-neutral tool dicts (name, description, schema).

    Descriptions carry filler, verbose structural phrases, symbolic
    delimiters and a few "requires calling X" references. References only
    point from lower to higher rank in a hidden random order, so the graph
    is always acyclic.
    """
    rng = random.Random(seed)
    used: set[str] = set()
    tools = []
    for _ in range(n):
        name = _name(rng, used)
        noun = name.split("_")[1]
        props, required = {}, []
        for i in range(rng.randint(1, 5)):
            pname, schema = _param(rng, noun, i)
            props[pname] = schema
            if i == 0 or rng.random() < 0.3:
                required.append(pname)
        desc = f"{rng.choice(_OPENERS)} {name.split('_')[0]} a {noun}. " + " ".join(rng.sample(_CLOSERS, 2))
        tools.append({"name": name, "description": desc,
                      "schema": {"type": "object", "properties": props, "required": required}})
    rank = list(range(n))
    rng.shuffle(rank)
    for i, t in enumerate(tools):
        if rng.random() < 0.2:
            later = [j for j in range(n) if rank[j] < rank[i]]
            if later:
                dep = tools[rng.choice(later)]["name"]
                t["description"] += f" Requires calling {dep} first."
    return tools


def to_dialect(tools: list[dict], dialect: str):
    dialect = normalize_dialect(dialect)
    key = {"openai-fc": "parameters", "anthropic-tool-use": "input_schema", "mcp": "inputSchema"}[dialect]
    out = [{"name": t["name"], "description": t["description"], key: t["schema"]} for t in tools]
    if dialect == "openai-fc":
        return [{"type": "function", "function": body} for body in out]
    if dialect == "mcp":
        return {"tools": out}
    return out


def synthetic_catalog(n: int, seed: int = 0, dialect: str = "openai-fc") -> ToolCatalog:
    doc = to_dialect(synthetic_tools(n, seed), dialect)
    return parse_catalog(json.dumps(doc, indent=2), dialect)


# -- random catalogs for fuzzing ------------------------------------------------

_NAME_CHARS = string.ascii_letters + string.digits + "_-.é"
_VALUE_CHARS = string.ascii_letters + string.digits + " _-|[]()\\\t.,:;?!é→ "


def random_tools(rng: random.Random, max_tools: int = 6) -> list[dict]:
    """Arbitrary but grammar-legal catalogs, including awkward enum values."""
    tools, used = [], set()
    for _ in range(rng.randint(0, max_tools)):
        name = "".join(rng.choice(_NAME_CHARS) for _ in range(rng.randint(1, 12)))
        if name in used:
            continue
        used.add(name)
        props, required = {}, []
        for _ in range(rng.randint(0, 4)):
            pname = "".join(rng.choice(_NAME_CHARS) for _ in range(rng.randint(1, 8)))
            ty = rng.choice(["string", "integer", "number", "boolean", "array", "object", "enum"])
            if ty == "enum":
                vals = list(dict.fromkeys("".join(rng.choice(_VALUE_CHARS) for _ in range(rng.randint(0, 6)))
                                          for _ in range(rng.randint(1, 4))))
                schema = {"enum": vals}
            else:
                schema = {"type": ty}
                if ty in ("integer", "number") and rng.random() < 0.5:
                    schema["minimum"] = rng.choice([0, -3, 1.25, 10])
                    if rng.random() < 0.5:
                        schema["maximum"] = rng.choice([100, 2.5, 1e-05, 7])
            if rng.random() < 0.5:
                schema["description"] = "".join(rng.choice(_VALUE_CHARS) for _ in range(rng.randint(0, 20)))
            props[pname] = schema
            if rng.random() < 0.5:
                required.append(pname)
        words = rng.choices(["please", "search", "the", "files", "->", "→", "corresponds to", "e.g.",
                             "note that", "x|y", "[a]", "(b)", "kindly", "value", "\n", "  "], k=rng.randint(0, 10))
        tools.append({"name": name, "description": " ".join(words),
                      "schema": {"type": "object", "properties": props, "required": required}})
    return tools


# -- shipped fixtures -----------------------------------------------------------

def _corpus_dir():
    return resources.files("schemac") / "data" / "corpus"


def fixture_names() -> list[str]:
    return sorted(p.name[:-5] for p in _corpus_dir().iterdir() if p.name.endswith(".json"))


def fixture_dialect(name: str) -> str:
    return (_corpus_dir() / f"{name}.dialect").read_text(encoding="utf-8").strip()


def fixture_bytes(name: str) -> bytes:
    return (_corpus_dir() / f"{name}.json").read_bytes()


def load_fixture(name: str) -> ToolCatalog:
    return parse_catalog(fixture_bytes(name), fixture_dialect(name))
