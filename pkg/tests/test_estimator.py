import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import FunctionTransformer

from schemac.corpus import fixture_bytes, load_fixture
from schemac.estimator import SchemaCompiler
from schemac.metrics import GapPredictor


def test_transform_catalog_and_raw(search_cat):
    sc = SchemaCompiler().fit()
    out = sc.transform([search_cat, fixture_bytes("search_files")])
    assert out[0] == out[1]
    assert out[0].startswith("search_files(query:str path?:str)")
    assert len(sc.reports_) == 2 and sc.reports_[0].savings >= 0.55


def test_fit_transform_and_params():
    sc = SchemaCompiler(profile="conservative")
    out = sc.fit_transform([load_fixture("synthetic_16")])
    assert sc.reports_[0].ops_applied == ("SDM",)
    assert isinstance(out[0], str)
    assert clone(sc).get_params()["profile"] == "conservative"


def test_bad_profile_fails_at_fit():
    with pytest.raises(ValueError):
        SchemaCompiler(profile="nope").fit()


def test_in_sklearn_pipeline(search_cat):
    pipe = Pipeline([("compile", SchemaCompiler()), ("lines", FunctionTransformer(lambda xs: [len(x.splitlines()) for x in xs]))])
    assert pipe.fit_transform([search_cat]) == [len(SchemaCompiler().fit().transform([search_cat])[0].splitlines())]


def test_gap_predictor_is_regressor():
    g = GapPredictor().fit([[0.5], [0.6], [0.7]], [0.3, 0.2, 0.1])
    assert g.predict([[0.8]])[0] == pytest.approx(0.0)
    assert g.score([[0.5], [0.6], [0.7]], [0.3, 0.2, 0.1]) == pytest.approx(1.0)
