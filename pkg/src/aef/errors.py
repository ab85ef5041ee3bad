"""Exception hierarchy shared by every layer of the package."""


class AefError(Exception):
    """Base class; `code` is a stable machine-readable name used in reports."""

    code = "AefError"

    def __init__(self, message: str = "", **context):
        super().__init__(message)
        self.context = context

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self), **{k: str(v) for k, v in self.context.items()}}


class ParseError(AefError):
    code = "ParseError"

    def __init__(self, message: str, position: int | None = None, text: str | None = None, **context):
        if position is not None and text is not None:
            message = f"{message} at position {position}: {text[:position]}<<HERE>>{text[position:]}"
        super().__init__(message, **context)
        self.position = position


class DivisionNearZero(AefError):
    code = "DivisionNearZero"


class SamplingExhausted(AefError):
    code = "SamplingExhausted"


class SingularMetric(AefError):
    code = "SingularMetric"


class NotClosed(AefError):
    code = "NotClosed"


class NonConstantCoefficients(AefError):
    code = "NonConstantCoefficients"


class DegenerateBlock(AefError):
    code = "DegenerateBlock"


class InconsistentDependentOperator(AefError):
    code = "InconsistentDependentOperator"


class RankInstability(AefError):
    code = "RankInstability"


class NonTermination(AefError):
    code = "NonTermination"


class CertificationFailed(AefError):
    code = "CertificationFailed"


class UnknownCase(AefError):
    code = "UnknownCase"


class SchemaError(AefError):
    code = "SchemaError"


class BlowUp(AefError):
    code = "BlowUp"


class MetricDegeneration(AefError):
    code = "MetricDegeneration"


class NoPotential(AefError):
    """A trajectory was requested for a case without a potential to test."""

    code = "NoPotential"
