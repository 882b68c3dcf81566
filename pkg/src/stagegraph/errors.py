"""Exception types shared across the package."""


class StagegraphError(Exception):
    """Base class for all package-specific errors."""


class InvalidTermError(StagegraphError):
    """A term violates its structural constraints (bad IRI, literal with both datatype and language, ...)."""


class InvalidQuadError(StagegraphError):
    """A quad violates positional constraints (literal subject, non-IRI predicate or graph)."""


class UnboundVariableError(StagegraphError):
    """A construct template references a variable missing from the binding."""


class NanopubError(StagegraphError):
    """Nanopublication lifecycle violation (unknown id, conflicting live content, empty assertion)."""


class TurtleParseError(StagegraphError):
    """Syntax error in the supported Turtle subset, with position information."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class MapFileError(StagegraphError):
    """Malformed guideline map file, with the offending line when known."""

    def __init__(self, message: str, line: int | None = None):
        suffix = f" (line {line})" if line is not None else ""
        super().__init__(message + suffix)
        self.line = line


class IncompleteProfileError(StagegraphError):
    """A tumor profile lacks the raw field required to classify one axis."""

    def __init__(self, axis: str, detail: str = ""):
        message = f"incomplete profile: axis {axis} cannot be classified"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.axis = axis


class CodebookError(StagegraphError):
    """An enumerated cell value has no codebook mapping (strict mode)."""

    def __init__(self, column: str, value: str, row_id: str = ""):
        where = f" in row {row_id}" if row_id else ""
        super().__init__(f"no codebook entry for column {column!r} value {value!r}{where}")
        self.column = column
        self.value = value


class SddError(StagegraphError):
    """Malformed semantic data dictionary (duplicate column, dangling reference)."""


class AmbiguousStageError(StagegraphError):
    """Multiple incomparable stages were inferred for one tumor under one edition."""

    def __init__(self, tumor: str, edition: str, stages: list[str]):
        super().__init__(
            f"ambiguous stage for {tumor} under {edition}: {', '.join(sorted(stages))}"
        )
        self.tumor = tumor
        self.edition = edition
        self.stages = sorted(stages)


class IterationLimitError(StagegraphError):
    """The fixpoint loop exceeded its iteration cap."""

    def __init__(self, cap: int, last_fired: list[str]):
        super().__init__(
            f"fixpoint did not converge within {cap} iterations; "
            f"last rules fired: {', '.join(last_fired) or '(none)'}"
        )
        self.cap = cap
        self.last_fired = last_fired


class UnknownResourceError(StagegraphError):
    """Lookup of an IRI, patient, or graph that is not present."""
