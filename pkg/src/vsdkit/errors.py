"""Exception types raised across vsdkit."""

from __future__ import annotations


class VsdError(Exception):
    """Base class for every error vsdkit raises on purpose."""


class UnknownLabelError(VsdError, ValueError):
    def __init__(self, surface: str, line_no: int | None = None):
        self.surface = surface
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}unknown relation label {surface!r}")


class ParseError(VsdError):
    def __init__(self, line_no: int, detail: str):
        self.line_no = line_no
        self.detail = detail
        super().__init__(f"line {line_no}: malformed JSON: {detail}")


class SchemaError(VsdError):
    def __init__(self, line_no: int, field: str, detail: str = ""):
        self.line_no = line_no
        self.field = field
        msg = f"line {line_no}: bad field {field!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class EmptyInputError(VsdError, ValueError):
    pass


class EmptyCorpusError(VsdError, ValueError):
    pass


class LengthMismatchError(VsdError, ValueError):
    pass


class EmptyGoldError(VsdError, ValueError):
    pass


class EmptyReferencesError(VsdError, ValueError):
    pass


class NonFiniteError(VsdError, ValueError):
    pass


class EmptyFieldError(VsdError, ValueError):
    pass


class MalformedRecordError(VsdError, ValueError):
    pass


class TransportError(VsdError):
    """A chat request failed at the network, HTTP or auth level."""

    def __init__(self, message: str, retryable: bool = True):
        self.retryable = retryable
        super().__init__(message)


class MissingPredictionError(VsdError):
    def __init__(self, item_id: str):
        self.item_id = item_id
        super().__init__(f"no prediction for id {item_id!r}")


class TaskMismatchError(VsdError):
    pass


class MalformedTripleError(VsdError):
    pass


class MissingMetricError(VsdError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__("missing metric value(s): " + ", ".join(self.names))


class DegenerateSubjectWarning(UserWarning):
    """Subject box has zero area, so the containment rule is skipped."""
