import pytest

from schemac.corpus import load_fixture
from schemac.ir import lower_to_ir
from schemac.schema import ParamSpec, ToolCatalog, ToolSchema
from schemac.tokenizer import gpt2


@pytest.fixture(scope="session")
def tok():
    return gpt2()


@pytest.fixture
def search_cat():
    return load_fixture("search_files")


def catalog(*tools):
    """Build a catalog from (name, description) or (name, description, params)."""
    out = []
    for t in tools:
        name, desc, *rest = t
        out.append(ToolSchema(name, desc, tuple(rest[0]) if rest else ()))
    return ToolCatalog(tuple(out))


def ir_of(*tools, constraint=None):
    return lower_to_ir(catalog(*tools), constraint)


def p(name, ty="string", required=True, **kw):
    return ParamSpec(name, ty, required, **kw)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
