""" Exceptions defined by cpdilate. """

from typing import List, Optional


class ErrorCode(object):
    """ The error codes attached to every :py:class:`DilationError`. """

    NON_HERMITIAN = "NON_HERMITIAN"
    NON_SQUARE = "NON_SQUARE"
    NOT_PSD = "NOT_PSD"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    ALGEBRA_MISMATCH = "ALGEBRA_MISMATCH"
    LEVEL_OUT_OF_RANGE = "LEVEL_OUT_OF_RANGE"
    MODULE_MISMATCH = "MODULE_MISMATCH"
    NOT_FLAG_COMPATIBLE = "NOT_FLAG_COMPATIBLE"
    INDEX_OUT_OF_RANGE = "INDEX_OUT_OF_RANGE"
    BAD_MULTIPLICITY = "BAD_MULTIPLICITY"
    NOT_CP = "NOT_CP"
    GRAM_NOT_PSD = "GRAM_NOT_PSD"
    COMPAT_FAIL = "COMPAT_FAIL"
    NOT_MINIMAL = "NOT_MINIMAL"
    NOT_EQUIVALENT = "NOT_EQUIVALENT"
    SHAPE_MISMATCH = "SHAPE_MISMATCH"
    NOT_IN_COMMUTANT = "NOT_IN_COMMUTANT"
    NOT_DOMINATED = "NOT_DOMINATED"
    NOT_WELL_DEFINED = "NOT_WELL_DEFINED"
    NOT_NONDEGENERATE = "NOT_NONDEGENERATE"
    SCHEMA_ERROR = "SCHEMA_ERROR"
    VERSION_UNSUPPORTED = "VERSION_UNSUPPORTED"
    INVALID_TOLERANCE = "INVALID_TOLERANCE"


class DilationError(ValueError):
    """ Base class of every error raised by cpdilate. The `code` attribute
    holds one of the :py:class:`ErrorCode` constants. """

    def __init__(self, code: str, message: str):
        Exception.__init__(self)
        self.code = code
        self.message = message

    def __repr__(self) -> str:
        return f'{type(self).__name__}({self.code}, "{self.message}")'

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class InvalidInputError(DilationError):
    """ Indicates that the objects passed in do not fit together: wrong
    shapes, indices out of range, objects over different algebras, and so
    on. Nothing was computed. """


class VerdictError(DilationError):
    """ Indicates that the input was well formed but fails a mathematical
    requirement, e.g. a map that is not completely positive, two dilations
    that are not unitarily equivalent, or a map that is not dominated. The
    `details` dictionary holds the residuals that triggered the verdict. """

    def __init__(self, code: str, message: str, details: Optional[dict] = None):
        DilationError.__init__(self, code, message)
        self.details = details or {}


class SchemaError(InvalidInputError):
    """ Indicates that an instance or certificate file does not match the
    expected layout. The path of the offending field is provided, and if
    more than one problem was found all of them are listed in `errors`. """

    def __init__(self, message: str, path: str = None, errors: List['SchemaError'] = None,
                 code: str = ErrorCode.SCHEMA_ERROR):
        InvalidInputError.__init__(self, code, message)
        self.path = path
        self.errors = errors or []

    def __repr__(self) -> str:
        if self.path is not None:
            return f'SchemaError("{self.message}") at {self.path}'
        else:
            return f'SchemaError("{self.message}")'

    def __str__(self) -> str:
        if self.errors:
            return "\n".join(f"{err.path}: {err.message}" if err.path else err.message for err in self.errors)
        if self.path is not None:
            return f"{self.message} Error detected at {self.path}."
        else:
            return self.message
