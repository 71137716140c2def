"""scikit-learn style wrapper so catalogs can flow through a Pipeline."""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .operators import SadBudget
from .pipeline import DEFAULT_SAD_BUDGET, PipelineConfig, compile
from .schema import ToolCatalog, parse_catalog
from .tokenizer import resolve_tokenizer


class SchemaCompiler(BaseEstimator, TransformerMixin):
    """Compile tool catalogs to compact text.

    ``transform`` accepts ToolCatalog objects or raw JSON (str/bytes in
    ``dialect``) and returns one compiled string per input. Reports for
    the last call are kept in ``reports_``. ``fit`` only resolves the
    tokenizer; there is nothing to learn.
    """

    def __init__(self, profile="balanced", dialect="openai-fc", tokenizer="gpt2",
                 model_family=None, sad_budget=DEFAULT_SAD_BUDGET, ccp_k=3, alpha=0.5,
                 constraint=None):
        self.profile = profile
        self.dialect = dialect
        self.tokenizer = tokenizer
        self.model_family = model_family
        self.sad_budget = sad_budget
        self.ccp_k = ccp_k
        self.alpha = alpha
        self.constraint = constraint

    def _config(self) -> PipelineConfig:
        return PipelineConfig(profile=self.profile, sad_budget=SadBudget(int(self.sad_budget)),
                              fragility_alpha=self.alpha, ccp_k=self.ccp_k,
                              model_family=self.model_family)

    def fit(self, X=None, y=None):
        self._config()  # validate params early
        self.tokenizer_ = resolve_tokenizer(self.tokenizer)
        return self

    def _catalog(self, item) -> ToolCatalog:
        if isinstance(item, ToolCatalog):
            return item
        return parse_catalog(item, self.dialect)

    def transform(self, X):
        tok = getattr(self, "tokenizer_", None) or resolve_tokenizer(self.tokenizer)
        cfg = self._config()
        out, reports = [], []
        for item in X:
            text, report = compile(self._catalog(item), cfg, tok, self.constraint)
            out.append(text)
            reports.append(report)
        self.reports_ = reports
        return out
