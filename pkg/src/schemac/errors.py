"""Exception hierarchy.

Every error the compiler raises derives from :class:`CompilerError`; the
metric helpers raise subclasses of :class:`MetricsError` (itself a
``ValueError``) so callers doing numeric work can catch them the usual way.
"""


class CompilerError(Exception):
    """Base class for all compiler-side failures."""


# -- schema model -----------------------------------------------------------

class SchemaError(CompilerError):
    """Input catalog could not be turned into a ToolCatalog."""


class MalformedJson(SchemaError):
    pass


class UnknownDialect(SchemaError):
    pass


class DuplicateToolName(SchemaError):
    pass


class UnsupportedSchemaFeature(SchemaError):
    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


# -- tokenizer --------------------------------------------------------------

class TokenizerError(CompilerError):
    pass


class MergeWithoutVocabEntry(TokenizerError):
    pass


class DuplicateMerge(TokenizerError):
    pass


class UnencodableByte(TokenizerError):
    pass


class HeuristicTokenizerForbidden(TokenizerError):
    """An operator that needs exact counts was handed the chars/4 estimator."""


# -- IR / operators / pipeline ----------------------------------------------

class EmptyIR(CompilerError):
    pass


class CyclicDependency(CompilerError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("dependency cycle: " + " -> ".join(map(str, self.cycle)))


class BoundPreconditionViolated(CompilerError):
    pass


class GrammarError(CompilerError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# -- metrics ----------------------------------------------------------------

class MetricsError(ValueError):
    pass


class UnknownCondition(MetricsError):
    pass


class EmptyTranscript(MetricsError):
    pass


class MalformedTranscript(MetricsError):
    pass


class DivisionByZeroBaseline(MetricsError):
    pass


class DegenerateDesign(MetricsError):
    pass


class InvalidLengths(MetricsError):
    pass


class EmptySamples(MetricsError):
    pass


class OutOfRangeP(MetricsError):
    pass
