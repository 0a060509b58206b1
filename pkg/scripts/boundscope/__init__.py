"""Upper bounds for polynomial minimization over a box: Lasserre vs Boltzmann."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

__version__ = "1.0.0"

BASE_DIR = Path(__file__).parent.parent.parent
DATA_DIR = BASE_DIR / "data"
REFERENCE_DIR = DATA_DIR / "reference"
RESULTS_DIR = BASE_DIR / "results"

CSV_DIGITS = 10


class BoundscopeError(Exception):
    """Base class for errors raised by the bound computations."""


class InputError(BoundscopeError):
    """Raised on malformed input: dimension mismatch, bad box, bad config."""


class ParseError(InputError):
    """Raised when a polynomial expression cannot be parsed."""

    def __init__(self, message: str, position: int = 0, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at position {position}")


class UnsupportedDimensionError(InputError):
    """Raised when an operation only supports a fixed dimension."""

    def __init__(self, message: str, dimension: int = 0):
        self.dimension = dimension
        super().__init__(message)


class AccuracyError(BoundscopeError):
    """Raised when adaptive quadrature does not reach its tolerance."""

    def __init__(self, message: str, previous: Any = None, last: Any = None, nodes: int = 0):
        self.previous = previous
        self.last = last
        self.nodes = nodes
        super().__init__(message)


class ConditioningError(BoundscopeError):
    """Raised when B is numerically indefinite and Cholesky fails."""

    def __init__(self, message: str, basis_kind: str = ""):
        self.basis_kind = basis_kind
        if basis_kind == "monomial":
            message = f"{message} (try the orthonormal basis)"
        super().__init__(message)


class RangeError(BoundscopeError):
    """Raised when a Taylor density would overflow double precision."""


def format_number(value: float | None) -> str:
    """CSV rendering: 10 significant digits, empty for missing values."""
    if value is None:
        return ""
    return f"{value:.{CSV_DIGITS}g}"


@dataclass
class BoundReport:
    """One computed bound; the unit of CSV output."""
    method: str              # "lasserre" | "sa" | "taylor"
    function: str
    r: int
    value: float
    t: float | None = None   # absent for lasserre
    diagnostics: dict[str, Any] = field(default_factory=dict)

    CSV_HEADER = ("method", "function", "r", "t", "value", "basis_size", "condition")

    def csv_row(self) -> list[str]:
        """Deterministic CSV fields; runtime is kept out so reruns diff clean."""
        return [
            self.method,
            self.function,
            str(self.r),
            format_number(self.t),
            format_number(self.value),
            str(self.diagnostics.get("basis_size", "")),
            format_number(self.diagnostics.get("condition")),
        ]
