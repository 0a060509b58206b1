"""Sparse multivariate polynomials over the reals."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from types import MappingProxyType

import numpy as np

from scripts.boundscope import InputError

logger = logging.getLogger(__name__)

ExponentVector = tuple[int, ...]

# Only true zeros are dropped; Taylor-density coefficients span many magnitudes.
PRUNE_BELOW = 1e-300


def grlex_key(alpha: ExponentVector) -> tuple:
    """Graded-lex order: total degree first, then x1 before x2 before ..."""
    return (sum(alpha), tuple(-a for a in alpha))


class Polynomial:
    """Immutable sparse polynomial: exponent vector -> nonzero coefficient."""

    __slots__ = ("_dimension", "_terms", "_hash")

    def __init__(self, dimension: int, terms: Mapping[Sequence[int], float] | None = None):
        if dimension < 1:
            raise InputError(f"Polynomial dimension must be positive, got {dimension}")
        cleaned: dict[ExponentVector, float] = {}
        for alpha, coef in (terms or {}).items():
            if any(a != int(a) for a in alpha):
                raise InputError(f"Non-integer exponent in {tuple(alpha)}")
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dimension:
                raise InputError(
                    f"Exponent vector {alpha} has length {len(alpha)}, expected {dimension}"
                )
            if any(a < 0 for a in alpha):
                raise InputError(f"Negative exponent in {alpha}")
            coef = float(coef)
            if abs(coef) < PRUNE_BELOW:
                continue
            cleaned[alpha] = cleaned.get(alpha, 0.0) + coef
        ordered = sorted(cleaned.items(), key=lambda item: grlex_key(item[0]))
        self._dimension = dimension
        self._terms = {alpha: c for alpha, c in ordered if abs(c) >= PRUNE_BELOW}
        self._hash: int | None = None

    # ── Constructors ───────────────────────────────────────

    @classmethod
    def constant(cls, dimension: int, value: float) -> Polynomial:
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension: int, index: int) -> Polynomial:
        """The coordinate x_{index+1} (zero-based index)."""
        if not 0 <= index < dimension:
            raise InputError(f"Variable index {index + 1} outside 1..{dimension}")
        alpha = [0] * dimension
        alpha[index] = 1
        return cls(dimension, {tuple(alpha): 1.0})

    @classmethod
    def monomial(cls, alpha: Sequence[int], coef: float = 1.0) -> Polynomial:
        return cls(len(alpha), {tuple(alpha): coef})

    # ── Properties ─────────────────────────────────────────

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def terms(self) -> Mapping[ExponentVector, float]:
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(alpha) for alpha in self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(sum(alpha) == 0 for alpha in self._terms)

    @property
    def constant_value(self) -> float:
        return self._terms.get((0,) * self._dimension, 0.0)

    @property
    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def coefficient(self, alpha: Sequence[int]) -> float:
        return self._terms.get(tuple(alpha), 0.0)

    # ── Evaluation ─────────────────────────────────────────

    def __call__(self, points) -> float | np.ndarray:
        """Evaluate at one point (shape (n,)) or many (shape (..., n))."""
        x = np.asarray(points, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self._dimension:
            raise InputError(
                f"Point has length {x.shape[-1] if x.ndim else 0}, "
                f"polynomial dimension is {self._dimension}"
            )
        result = np.zeros(x.shape[:-1])
        for alpha, coef in self._terms.items():
            term = np.full(x.shape[:-1], coef)
            for i, a in enumerate(alpha):
                if a:
                    term = term * x[..., i] ** a
            result = result + term
        if result.ndim == 0:
            return float(result)
        return result

    # ── Arithmetic ─────────────────────────────────────────

    def _check_dimension(self, other: Polynomial) -> None:
        if other.dimension != self._dimension:
            raise InputError(
                f"Dimension mismatch: {self._dimension} vs {other.dimension}"
            )

    def _coerce(self, other) -> Polynomial | None:
        if isinstance(other, Polynomial):
            self._check_dimension(other)
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self._dimension, float(other))
        return None

    def __add__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for alpha, coef in other._terms.items():
            terms[alpha] = terms.get(alpha, 0.0) + coef
        return Polynomial(self._dimension, terms)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self._dimension, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> Polynomial:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> Polynomial:
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial(self._dimension, {a: c * float(other) for a, c in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        return multiply(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Polynomial:
        if not isinstance(other, (int, float, np.floating, np.integer)):
            return NotImplemented
        return self * (1.0 / float(other))

    def __pow__(self, k: int) -> Polynomial:
        return power(self, k)

    def derivative(self, index: int) -> Polynomial:
        """Partial derivative with respect to x_{index+1} (zero-based index)."""
        if not 0 <= index < self._dimension:
            raise InputError(f"Variable index {index + 1} outside 1..{self._dimension}")
        terms = {}
        for alpha, coef in self._terms.items():
            if alpha[index] == 0:
                continue
            lowered = list(alpha)
            lowered[index] -= 1
            terms[tuple(lowered)] = coef * alpha[index]
        return Polynomial(self._dimension, terms)

    # ── Identity ───────────────────────────────────────────

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._dimension == other._dimension and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._dimension, tuple(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial(n={self._dimension}, degree={self.degree}, terms={len(self._terms)})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for alpha, coef in self._terms.items():
            factors = [
                f"x{i + 1}" if a == 1 else f"x{i + 1}^{a}"
                for i, a in enumerate(alpha) if a
            ]
            parts.append("*".join([repr(coef)] + factors))
        return " + ".join(parts)


def evaluate(p: Polynomial, point: Sequence[float]) -> float:
    """Value of p at a single point."""
    if len(point) != p.dimension:
        raise InputError(f"Point has length {len(point)}, polynomial dimension is {p.dimension}")
    return float(p(np.asarray(point, dtype=float)))


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    """Coefficient-exact product (up to double rounding)."""
    if p.dimension != q.dimension:
        raise InputError(f"Dimension mismatch: {p.dimension} vs {q.dimension}")
    terms: dict[ExponentVector, float] = {}
    for alpha, a in p.terms.items():
        for beta, b in q.terms.items():
            gamma = tuple(x + y for x, y in zip(alpha, beta))
            terms[gamma] = terms.get(gamma, 0.0) + a * b
    return Polynomial(p.dimension, terms)


def power(p: Polynomial, k: int) -> Polynomial:
    """p**k by repeated squaring; p**0 is the constant 1."""
    if k < 0:
        raise InputError(f"Exponent must be nonnegative, got {k}")
    result = Polynomial.constant(p.dimension, 1.0)
    base = p
    while k:
        if k & 1:
            result = multiply(result, base)
        k >>= 1
        if k:
            base = multiply(base, base)
    return result


def compose_univariate(coefficients: Iterable[float], p: Polynomial) -> Polynomial:
    """sum_k c_k p**k, accumulated Horner-style from the top coefficient down."""
    coefs = [float(c) for c in coefficients]
    result = Polynomial(p.dimension)
    for c in reversed(coefs):
        result = multiply(result, p) + c
    return result


def total_degree_count(n: int, r: int) -> int:
    """|N(n, r)| = C(n + r, r)."""
    return math.comb(n + r, r)
