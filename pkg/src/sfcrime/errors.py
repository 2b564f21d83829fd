"""Exception hierarchy. Each class maps onto one CLI exit code."""


class SfCrimeError(Exception):
    exit_code = 1


class ParameterError(SfCrimeError, ValueError):
    """Invalid hyperparameter or option value."""

    exit_code = 1


class DataError(SfCrimeError, ValueError):
    """Input data does not satisfy the expected schema or content."""

    exit_code = 2


class SchemaError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.row = row
        self.column = column


class EncodingError(DataError):
    """A categorical value was not seen when the encodings were fit."""


class NumericError(SfCrimeError, ArithmeticError):
    exit_code = 3
