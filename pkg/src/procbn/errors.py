"""Exception hierarchy.

Two families map onto CLI exit codes: :class:`DataError` (2) for anything
wrong with input files, and :class:`ModelError` (3) for structural or
inference failures.
"""


class ProcBNError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 3


class DataError(ProcBNError):
    exit_code = 2


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"missing column {column!r}")


class EmptyLogError(DataError):
    pass


class SplitError(DataError):
    pass


class EncodingError(DataError):
    def __init__(self, task):
        self.task = task
        super().__init__(f"task {task!r} is not among the encoding variables")


class FormatError(DataError):
    """Malformed persisted artifact (network, training or chain file)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VersionError(FormatError):
    pass


class NormalizationError(FormatError):
    pass


class CyclicParentsError(FormatError):
    pass


class ModelError(ProcBNError):
    exit_code = 3


class AssignmentError(ModelError):
    pass


class UnknownVariableError(AssignmentError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown variable {name!r}")


class QueryError(ModelError):
    pass


class ZeroEvidenceError(ModelError):
    """The evidence has probability zero, so the normalizer is undefined."""


class StructureError(ModelError):
    pass


class LearningError(ModelError):
    pass


class StateError(ModelError):
    pass


class ShapeError(ModelError):
    pass


class TrainingError(ModelError):
    pass


class GeneratorSpecError(ModelError):
    pass


class EmptyConditioningError(ModelError):
    pass
