"""Exception types shared across the package."""


class ContractError(ValueError):
    """Caller violated a documented precondition (shape/value mismatch)."""


class ConfigError(ValueError):
    """Invalid experiment configuration; maps to CLI exit code 2."""


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss; maps to CLI exit code 3."""


class UndefinedMetricError(ValueError):
    """Metric is undefined for the given inputs (e.g. single-class AUROC)."""


class CsvFormatError(ValueError):
    """Malformed CSV input; carries row/column position where known."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column
