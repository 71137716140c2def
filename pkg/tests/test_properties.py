"""Property tests with hypothesis."""
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from schemac.equivalence import parse_compiled
from schemac.ir import Atom, PromptIR, score_fragility
from schemac.metrics import holm_bonferroni, mcnemar, sdm_attention_uplift
from schemac.pipeline import PipelineConfig, compile
from schemac.schema import ParamSpec, ToolCatalog, ToolSchema
from schemac.tokenizer import gpt2

NAME = st.text(st.sampled_from("abcxyz_019.-"), min_size=1, max_size=8)
VALUE = st.text(st.sampled_from("ab |[]()\\\t.é→"), max_size=6)


@st.composite
def params(draw):
    name = draw(NAME)
    ty = draw(st.sampled_from(["string", "integer", "number", "boolean", "array", "object", "enum"]))
    enum = tuple(dict.fromkeys(draw(st.lists(VALUE, min_size=1, max_size=4)))) if ty == "enum" else None
    bounds = None
    if ty in ("integer", "number") and draw(st.booleans()):
        lo = draw(st.one_of(st.none(), st.integers(-50, 50)))
        hi = draw(st.one_of(st.none(), st.integers(51, 500)))
        bounds = (lo, hi) if (lo, hi) != (None, None) else None
    return ParamSpec(name, ty, draw(st.booleans()), enum, "", bounds)


@st.composite
def catalogs(draw):
    names = draw(st.lists(NAME, max_size=4, unique=True))
    tools = []
    for n in names:
        ps = draw(st.lists(params(), max_size=4, unique_by=lambda q: q.name))
        desc = draw(st.text(st.sampled_from("abc XYZ,.->|"), max_size=30))
        tools.append(ToolSchema(n, desc, tuple(ps)))
    return ToolCatalog(tuple(tools))


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=60))
def test_bpe_lossless(s):
    t = gpt2()
    assert t.decode(t.encode(s)) == s


@settings(max_examples=200, deadline=None)
@given(st.lists(st.text(max_size=20), max_size=6))
def test_count_lines_additive(lines):
    t = gpt2()
    assert t.count_lines(lines) == t.count_tokens("\n".join(lines))


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(catalogs())
def test_structure_round_trips(cat):
    text, _ = compile(cat, PipelineConfig().with_ops(()))
    back = parse_compiled(text)
    assert [(t.name, t.params) for t in back.tools] == [(t.name, t.params) for t in cat.tools]


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(catalogs(), st.sampled_from(["conservative", "balanced", "aggressive", "auto"]))
def test_compile_deterministic_and_parseable(cat, profile):
    cfg = PipelineConfig(profile=profile, model_family="claude")
    a, ra = compile(cat, cfg)
    b, rb = compile(cat, cfg)
    assert a == b and ra == rb
    parse_compiled(a)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(0, 1))
def test_fragility_in_range(imps, alpha):
    ir = PromptIR(tuple(Atom(i, "description", "x", v) for i, v in enumerate(imps)))
    for s in score_fragility(ir, alpha):
        assert 0.0 <= s.accessibility_proxy <= 1.0
        assert 0.5 <= s.accessibility_proxy
        assert -1e-12 <= s.fragility <= 1.0 + 1e-12


@given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
def test_holm_adjusted_dominates_raw(ps):
    out = holm_bonferroni(ps)
    for p, (adj, _) in zip(ps, out):
        assert p <= adj + 1e-15 and adj <= 1.0
    # rejections form a prefix of the sorted order
    order = sorted(range(len(ps)), key=lambda i: ps[i])
    flags = [out[i][1] for i in order]
    assert flags == sorted(flags, reverse=True)


@given(st.integers(0, 60), st.integers(0, 60))
def test_mcnemar_symmetric(b, c):
    assert mcnemar(b, c) == mcnemar(c, b)
    assert 0.0 <= mcnemar(b, c) <= 1.0


@given(st.integers(1, 10_000), st.data())
def test_uplift_at_least_one(n, data):
    k = data.draw(st.integers(0, n - 1))
    assert sdm_attention_uplift(n, k) >= 1.0
