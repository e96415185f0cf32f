"""Exception hierarchy.

Every error carries a stable ``code`` string (used in diagnostics output and
by the negative corpus) and, where one is known, the source span of the
offending node.
"""

from __future__ import annotations


class OMTensorError(Exception):
    code = "Error"

    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.message = message
        self.span = span


# parsing -------------------------------------------------------------------

class ParseError(OMTensorError):
    code = "ParseError"


class XmlSyntax(ParseError):
    code = "XmlSyntax"


class UnsupportedElement(ParseError):
    code = "UnsupportedElement"


class BadName(ParseError):
    code = "BadName"


class CompactSyntax(ParseError):
    code = "CompactSyntax"


class AmbiguousName(ParseError):
    code = "AmbiguousName"


# numerics ------------------------------------------------------------------

class DomainError(OMTensorError, ArithmeticError):
    """Raised when a scalar expression leaves its real domain.

    ``expr`` is the offending sub-expression.
    """

    code = "DomainError"

    def __init__(self, message: str, expr=None, span=None):
        super().__init__(message, span)
        self.expr = expr


class TensorError(OMTensorError):
    code = "TensorError"


class BadDimension(TensorError):
    code = "BadDimension"


class SizeLimit(TensorError):
    code = "SizeLimit"


class SingularChart(TensorError):
    code = "SingularChart"

    def __init__(self, message: str, point=None, span=None):
        super().__init__(message, span)
        self.point = point


class DimMismatch(TensorError):
    code = "DimMismatch"


class FrameMismatch(TensorError):
    code = "FrameMismatch"


class VarianceMismatch(TensorError):
    code = "VarianceMismatch"


class BadSlot(TensorError):
    code = "BadSlot"


class UnspecifiedFrame(TensorError):
    code = "UnspecifiedFrame"


class PointMismatch(TensorError):
    code = "PointMismatch"


# evaluation ----------------------------------------------------------------

class EvaluationError(OMTensorError):
    code = "EvaluationError"


class UnboundVariable(EvaluationError):
    code = "UnboundVariable"


class IndexOutOfRange(EvaluationError):
    code = "IndexOutOfRange"

    def __init__(self, message: str, index=None, dim=None, span=None):
        super().__init__(message, span)
        self.index = index
        self.dim = dim


class FrameRequired(EvaluationError):
    code = "FrameRequired"


class IndexCountMismatch(EvaluationError):
    code = "IndexCountMismatch"


class TypeMismatch(EvaluationError):
    code = "TypeMismatch"


class UnsupportedSymbol(EvaluationError):
    code = "UnsupportedSymbol"


class ArityMismatch(EvaluationError):
    code = "ArityMismatch"


class EnvSchemaError(OMTensorError):
    code = "EnvSchema"
