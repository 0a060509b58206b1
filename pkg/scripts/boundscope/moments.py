"""Lebesgue moments over boxes, monomial bases and tensor Gauss-Legendre quadrature."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np
from scipy.special import roots_legendre

from scripts.boundscope import AccuracyError, InputError
from scripts.boundscope.poly import ExponentVector, Polynomial, grlex_key

logger = logging.getLogger(__name__)

DEFAULT_REL_TOL = 1e-9
START_NODES = 16
MAX_NODES = 2 ** 11
MAX_POINTS = 2 ** 24


@dataclass(frozen=True)
class Box:
    """Axis-aligned box K = prod [lo_i, hi_i] with lo_i < hi_i."""
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        intervals = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        if not intervals:
            raise InputError("Box needs at least one interval")
        for i, (lo, hi) in enumerate(intervals):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise InputError(f"Box axis {i + 1} has a non-finite bound")
            if not lo < hi:
                raise InputError(f"Box axis {i + 1} is degenerate: [{lo}, {hi}]")
        object.__setattr__(self, "intervals", intervals)

    @classmethod
    def cube(cls, n: int, lo: float = -1.0, hi: float = 1.0) -> Box:
        return cls(((lo, hi),) * n)

    @classmethod
    def parse(cls, text: str) -> Box:
        """Parse "lo:hi,lo:hi,..." into a Box."""
        intervals = []
        for part in text.split(","):
            bounds = part.strip().split(":")
            if len(bounds) != 2:
                raise InputError(f"Box interval {part.strip()!r} is not of the form lo:hi")
            try:
                intervals.append((float(bounds[0]), float(bounds[1])))
            except ValueError:
                raise InputError(f"Box interval {part.strip()!r} has a non-numeric bound") from None
        return cls(tuple(intervals))

    @property
    def dimension(self) -> int:
        return len(self.intervals)

    @property
    def lows(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.intervals])

    @property
    def highs(self) -> np.ndarray:
        return np.array([hi for _, hi in self.intervals])

    @property
    def volume(self) -> float:
        return math.prod(hi - lo for lo, hi in self.intervals)

    @property
    def diameter(self) -> float:
        return math.sqrt(sum((hi - lo) ** 2 for lo, hi in self.intervals))

    def vertices(self) -> np.ndarray:
        return np.array(list(itertools.product(*self.intervals)))

    def grid(self, points_per_axis: int) -> np.ndarray:
        """Uniform lattice including the faces, shape (m**n, n)."""
        axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in self.intervals]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def __str__(self) -> str:
        return ",".join(f"{lo:g}:{hi:g}" for lo, hi in self.intervals)


@dataclass(frozen=True)
class MonomialBasis:
    """Graded-lex enumeration of N(n, r)."""
    n: int
    r: int
    members: tuple[ExponentVector, ...]
    _index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._index.update({alpha: i for i, alpha in enumerate(self.members)})

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def index(self, alpha: ExponentVector) -> int:
        return self._index[tuple(alpha)]

    def exponent_array(self) -> np.ndarray:
        return np.array(self.members, dtype=int).reshape(len(self.members), self.n)


@dataclass(frozen=True)
class QuadratureRule:
    """m-point Gauss-Legendre rule on [lo, hi]; exact up to degree 2m - 1."""
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def integrate(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, g(self.nodes)))


@lru_cache(maxsize=None)
def enumerate_basis(n: int, r: int) -> MonomialBasis:
    """All alpha with |alpha| <= r in graded-lex order."""
    if n < 1 or r < 0:
        raise InputError(f"Basis needs n >= 1 and r >= 0, got n={n}, r={r}")
    members = [
        alpha for alpha in itertools.product(range(r + 1), repeat=n)
        if sum(alpha) <= r
    ]
    members.sort(key=grlex_key)
    return MonomialBasis(n, r, tuple(members))


def axis_moments(lo: float, hi: float, max_power: int) -> np.ndarray:
    """[int_lo^hi x^k dx for k = 0..max_power]."""
    k = np.arange(max_power + 1)
    return (hi ** (k + 1.0) - lo ** (k + 1.0)) / (k + 1.0)


def box_moment(K: Box, alpha: Sequence[int]) -> float:
    """m_alpha(K) = prod_i (hi_i^(a_i+1) - lo_i^(a_i+1)) / (a_i + 1)."""
    if len(alpha) != K.dimension:
        raise InputError(f"Exponent length {len(alpha)} does not match box dimension {K.dimension}")
    return math.prod(
        (hi ** (a + 1) - lo ** (a + 1)) / (a + 1)
        for a, (lo, hi) in zip(alpha, K.intervals)
    )


def integrate_polynomial(K: Box, p: Polynomial) -> float:
    """Exact integral of p over K from closed-form moments."""
    if p.dimension != K.dimension:
        raise InputError(f"Polynomial dimension {p.dimension} does not match box dimension {K.dimension}")
    if p.is_zero:
        return 0.0
    top = max(max(alpha) for alpha in p.terms)
    tables = [axis_moments(lo, hi, top) for lo, hi in K.intervals]
    contributions = [
        coef * math.prod(tables[i][a] for i, a in enumerate(alpha))
        for alpha, coef in p.terms.items()
    ]
    return math.fsum(contributions)


@lru_cache(maxsize=64)
def _reference_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(m)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre_rule(m: int, interval: tuple[float, float] = (-1.0, 1.0)) -> QuadratureRule:
    """m-point Gauss-Legendre rule mapped affinely onto interval."""
    if m < 1:
        raise InputError(f"Quadrature needs at least one node, got {m}")
    lo, hi = float(interval[0]), float(interval[1])
    nodes, weights = _reference_rule(m)
    half = 0.5 * (hi - lo)
    return QuadratureRule(nodes=half * nodes + 0.5 * (hi + lo), weights=half * weights, interval=(lo, hi))


def tensor_rule(K: Box, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Points (m**n, n) and weights (m**n,) of the tensor Gauss-Legendre rule."""
    rules = [gauss_legendre_rule(m, interval) for interval in K.intervals]
    mesh = np.meshgrid(*(rule.nodes for rule in rules), indexing="ij")
    points = np.stack([axis.ravel() for axis in mesh], axis=-1)
    weights = reduce(np.multiply.outer, (rule.weights for rule in rules)).ravel()
    return points, weights


def integrate_tensor(K: Box, g: Callable[[np.ndarray], np.ndarray], m: int):
    """Tensor-rule estimate of int_K g; g maps (N, n) points to (N,) or (N, k)."""
    points, weights = tensor_rule(K, m)
    values = np.asarray(g(points), dtype=float)
    if values.ndim == 1:
        return float(np.dot(weights, values))
    return weights @ values


def _agrees(previous, current, rel_tol: float) -> bool:
    previous, current = np.asarray(previous), np.asarray(current)
    scale = np.maximum(np.abs(previous), np.abs(current))
    return bool(np.all(np.abs(current - previous) <= rel_tol * scale))


def integrate_smooth(
    K: Box,
    g: Callable[[np.ndarray], np.ndarray],
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    start_nodes: int = START_NODES,
    max_nodes: int = MAX_NODES,
    max_points: int = MAX_POINTS,
    history: list | None = None,
):
    """Integrate a smooth g over K, doubling nodes per axis until two estimates agree.

    g receives an (N, n) array of points and returns (N,) or (N, k) values;
    vector-valued integrands converge only when every component does.
    """
    if rel_tol <= 0:
        raise InputError(f"rel_tol must be positive, got {rel_tol}")
    m = start_nodes
    if m ** K.dimension > max_points:
        raise AccuracyError(
            f"Quadrature needs {m}^{K.dimension} points, above the budget of {max_points}",
            nodes=m,
        )
    estimates = [integrate_tensor(K, g, m)]
    if history is not None:
        history.append((m, estimates[-1]))
    while True:
        m *= 2
        if m > max_nodes or m ** K.dimension > max_points:
            raise AccuracyError(
                f"Quadrature did not reach rel_tol={rel_tol:g} within {m // 2} nodes per axis",
                previous=estimates[-2] if len(estimates) > 1 else None,
                last=estimates[-1],
                nodes=m // 2,
            )
        current = integrate_tensor(K, g, m)
        if history is not None:
            history.append((m, current))
        logger.debug("Quadrature with %d nodes/axis: %s", m, current)
        if _agrees(estimates[-1], current, rel_tol):
            return current
        estimates.append(current)
