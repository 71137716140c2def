"""The compiled text grammar, rendering side and parsing side.

One record per line::

    [ANSWER:json]                              output constraint
    search_files(query:str path?:str)          tool signature
    |Search files by content or pattern        description of the tool above
    [RECAP] ...                                closure / anchor lines

A description may also follow the signature on the same line
(``name(...)|text``); both forms parse to the same catalog, the split form is
what the emitter produces. Parameter types are ``str int num bool arr obj``,
``enum[a|b]`` and, for numbers with bounds, ``int[1..100]`` / ``num[..0.5]``.
Inside brackets ``\\`` escapes the next character and ``\\u{hex}`` encodes
whitespace other than a plain space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GrammarError
from .schema import RESERVED, ParamSpec, ToolCatalog, ToolSchema, format_number

TYPE_ABBREV = {"string": "str", "integer": "int", "number": "num", "boolean": "bool",
               "array": "arr", "object": "obj", "enum": "enum"}
ABBREV_TYPE = {v: k for k, v in TYPE_ABBREV.items()}

ANSWER_PREFIX = "[ANSWER:"
RECAP_PREFIX = "[RECAP]"
_ESCAPED = set("\\|[]()")


def escape_value(v: str) -> str:
    out = []
    for c in v:
        if c in _ESCAPED:
            out.append("\\" + c)
        elif c.isspace() and c != " ":
            out.append("\\u{%x}" % ord(c))
        else:
            out.append(c)
    return "".join(out)


def render_type(p: ParamSpec) -> str:
    if p.json_type == "enum":
        return "enum[" + "|".join(escape_value(v) for v in p.enum_values) + "]"
    ty = TYPE_ABBREV[p.json_type]
    if p.numeric_bounds:
        lo, hi = p.numeric_bounds
        lo_s = "" if lo is None else format_number(lo)
        hi_s = "" if hi is None else format_number(hi)
        return f"{ty}[{lo_s}..{hi_s}]"
    return ty


def render_param(p: ParamSpec) -> str:
    return f"{p.name}{'' if p.required else '?'}:{render_type(p)}"


def render_params(params) -> str:
    return "(" + " ".join(render_param(p) for p in params) + ")"


def render_answer(text: str) -> str:
    return f"{ANSWER_PREFIX}{text}]"


def render_recap(text: str) -> str:
    return f"{RECAP_PREFIX} {text}" if text else RECAP_PREFIX


# -- parsing ----------------------------------------------------------------

@dataclass
class CompiledDocument:
    catalog: ToolCatalog
    answers: list[str] = field(default_factory=list)
    recaps: list[str] = field(default_factory=list)


class _Cursor:
    def __init__(self, line: str, lineno: int):
        self.s = line
        self.i = 0
        self.lineno = lineno

    def error(self, msg, at=None):
        return GrammarError(msg, self.lineno, (self.i if at is None else at) + 1)

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else ""


def _split_enum(raw_cur: _Cursor) -> list[str]:
    # re-scan to split on unescaped '|'
    s, values, buf = raw_cur.s, [], []
    while True:
        if raw_cur.i >= len(s):
            raise raw_cur.error("unterminated enum")
        c = s[raw_cur.i]
        if c == "\\":
            start = raw_cur.i
            if s.startswith("u{", start + 1):
                end = s.find("}", start + 3)
                if end < 0:
                    raise raw_cur.error("bad \\u{} escape")
                try:
                    buf.append(chr(int(s[start + 3:end], 16)))
                except ValueError:
                    raise raw_cur.error("bad \\u{} escape") from None
                raw_cur.i = end + 1
                continue
            if start + 1 >= len(s):
                raise raw_cur.error("dangling escape")
            buf.append(s[start + 1])
            raw_cur.i += 2
        elif c == "|":
            values.append("".join(buf))
            buf = []
            raw_cur.i += 1
        elif c == "]":
            values.append("".join(buf))
            raw_cur.i += 1
            return values
        elif c in "[()":
            raise raw_cur.error(f"unescaped {c!r} inside enum")
        else:
            buf.append(c)
            raw_cur.i += 1


def _number(text: str, cur: _Cursor, at: int):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise cur.error(f"bad numeric bound {text!r}", at) from None


def _param(cur: _Cursor) -> ParamSpec:
    s = cur.s
    start = cur.i
    while cur.i < len(s) and s[cur.i] not in RESERVED:
        cur.i += 1
    name = s[start:cur.i]
    if not name:
        raise cur.error("expected parameter name")
    required = True
    if cur.peek() == "?":
        required = False
        cur.i += 1
    if cur.peek() != ":":
        raise cur.error(f"expected ':' after parameter {name!r}")
    cur.i += 1
    tstart = cur.i
    while cur.i < len(s) and (s[cur.i].isalpha()):
        cur.i += 1
    ty = s[tstart:cur.i]
    if ty not in ABBREV_TYPE:
        bad = ty
        while cur.i < len(s) and s[cur.i] not in " )[":
            cur.i += 1
        bad = s[tstart:cur.i] or bad
        raise cur.error(f"unknown type {bad!r}", tstart)
    json_type = ABBREV_TYPE[ty]
    enum_values = None
    bounds = None
    if json_type == "enum":
        if cur.peek() != "[":
            raise cur.error("enum needs a '[...]' value list")
        cur.i += 1
        enum_values = tuple(_split_enum(cur))
    elif cur.peek() == "[":
        if json_type not in ("integer", "number"):
            raise cur.error(f"type {ty!r} takes no bounds")
        bstart = cur.i + 1
        end = s.find("]", bstart)
        if end < 0:
            raise cur.error("unterminated bounds")
        body = s[bstart:end]
        cur.i = end + 1
        if ".." not in body:
            raise cur.error("bounds must look like [lo..hi]", bstart)
        lo_s, hi_s = body.split("..", 1)
        bounds = (_number(lo_s, cur, bstart), _number(hi_s, cur, bstart))
        if bounds == (None, None):
            bounds = None
    return ParamSpec(name, json_type, required, enum_values, "", bounds)


def _signature(cur: _Cursor) -> tuple[str, list[ParamSpec]]:
    s = cur.s
    open_at = s.find("(")
    if open_at <= 0:
        raise cur.error("expected 'name(' at start of tool line")
    name = s[:open_at]
    bad = set(name) & RESERVED
    if bad:
        raise cur.error(f"tool name {name!r} contains reserved characters")
    cur.i = open_at + 1
    params: list[ParamSpec] = []
    while True:
        c = cur.peek()
        if c == ")":
            cur.i += 1
            return name, params
        if c == "":
            raise cur.error("unterminated parameter list")
        if params:
            if c != " ":
                raise cur.error("expected ' ' between parameters")
            cur.i += 1
        params.append(_param(cur))


def parse_document(text: str) -> CompiledDocument:
    tools: list[ToolSchema] = []
    answers, recaps = [], []
    pending: tuple[str, list[ParamSpec], list[str]] | None = None

    def flush():
        nonlocal pending
        if pending is not None:
            name, params, desc = pending
            names = [p.name for p in params]
            if len(set(names)) != len(names):
                raise GrammarError(f"tool {name!r} repeats a parameter name", lineno)
            if any(t.name == name for t in tools):
                raise GrammarError(f"duplicate tool {name!r}", lineno)
            tools.append(ToolSchema(name, " ".join(desc).strip(), tuple(params)))
        pending = None

    lineno = 0
    for lineno, line in enumerate(text.split("\n") if text else [], 1):
        if not line.strip():
            continue
        if line.startswith(ANSWER_PREFIX):
            flush()
            if not line.endswith("]"):
                raise GrammarError("unterminated [ANSWER:...]", lineno, len(line))
            answers.append(line[len(ANSWER_PREFIX):-1])
        elif line.startswith(RECAP_PREFIX):
            flush()
            recaps.append(line[len(RECAP_PREFIX):].strip())
        elif line.startswith("|"):
            if pending is None:
                raise GrammarError("description line without a preceding tool", lineno, 1)
            pending[2].append(line[1:])
        else:
            flush()
            cur = _Cursor(line, lineno)
            name, params = _signature(cur)
            rest = line[cur.i:]
            desc: list[str] = []
            if rest.startswith("|"):
                desc.append(rest[1:])
            elif rest:
                raise cur.error("unexpected text after parameter list")
            pending = (name, params, desc)
    flush()
    return CompiledDocument(ToolCatalog(tuple(tools), "compiled"), answers, recaps)
