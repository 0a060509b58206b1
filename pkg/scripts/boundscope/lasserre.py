"""Lasserre's measure-based upper bounds as smallest generalized eigenvalues.

For h = q^2 with q in span{b_alpha : alpha in N(n, r)}, the bound

    min  int_K f h   s.t.  int_K h = 1,  h sum of squares of degree <= 2r

equals the smallest lambda with A v = lambda B v, where
A_ab = int_K f b_a b_b and B_ab = int_K b_a b_b.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial import Legendre
from numpy.polynomial import Polynomial as PowerSeries
from numpy.polynomial.legendre import legvander
from scipy.linalg import LinAlgError, cholesky, eigh, solve_triangular

from scripts.boundscope import BoundReport, ConditioningError, InputError
from scripts.boundscope.annealing import default_grid_size, fhat_max, grid_minimum
from scripts.boundscope.moments import (
    Box,
    MonomialBasis,
    axis_moments,
    enumerate_basis,
    integrate_polynomial,
    tensor_rule,
)
from scripts.boundscope.poly import Polynomial

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
GAP_TOL = 1e-10


class BasisKind(str, Enum):
    MONOMIAL = "monomial"
    ORTHONORMAL = "orthonormal"


@dataclass
class MatrixPair:
    """Symmetric A and positive-definite B in a chosen basis of R[x]_r."""
    A: np.ndarray
    B: np.ndarray
    basis: MonomialBasis
    basis_kind: BasisKind

    @property
    def order(self) -> int:
        return len(self.basis)


def _check_inputs(f: Polynomial, K: Box, r: int) -> None:
    if r < 0:
        raise InputError(f"Hierarchy index r must be >= 0, got {r}")
    if f.dimension != K.dimension:
        raise InputError(f"Polynomial dimension {f.dimension} does not match box dimension {K.dimension}")


def quadrature_nodes(r: int, degree: int) -> int:
    """Nodes per axis that integrate degree 2r + deg f exactly."""
    return math.ceil((2 * r + degree + 2) / 2)


def _legendre_table(lo: float, hi: float, r: int, nodes: np.ndarray) -> np.ndarray:
    """Orthonormal Legendre values on [lo, hi]: shape (len(nodes), r + 1)."""
    s = (2.0 * nodes - (lo + hi)) / (hi - lo)
    norms = np.sqrt((2.0 * np.arange(r + 1) + 1.0) / (hi - lo))
    return legvander(s, r) * norms


def _assemble_monomial(f: Polynomial, K: Box, basis: MonomialBasis) -> tuple[np.ndarray, np.ndarray]:
    exps = basis.exponent_array()
    pair_sums = exps[:, None, :] + exps[None, :, :]
    top = 2 * basis.r + max(f.degree, 0)
    tables = [axis_moments(lo, hi, top) for lo, hi in K.intervals]

    def moment_matrix(shift) -> np.ndarray:
        out = np.ones(pair_sums.shape[:2])
        for i, table in enumerate(tables):
            out = out * table[pair_sums[..., i] + shift[i]]
        return out

    B = moment_matrix((0,) * K.dimension)
    A = np.zeros_like(B)
    for delta, coef in f.terms.items():
        A += coef * moment_matrix(delta)
    return A, B


def _assemble_orthonormal(f: Polynomial, K: Box, basis: MonomialBasis) -> tuple[np.ndarray, np.ndarray]:
    m = quadrature_nodes(basis.r, f.degree)
    points, weights = tensor_rule(K, m)
    exps = basis.exponent_array()
    phi = np.ones((len(points), len(basis)))
    for i, (lo, hi) in enumerate(K.intervals):
        table = _legendre_table(lo, hi, basis.r, points[:, i])
        phi = phi * table[:, exps[:, i]]
    weighted = phi * weights[:, None]
    B = weighted.T @ phi
    A = (weighted * f(points)[:, None]).T @ phi
    return 0.5 * (A + A.T), 0.5 * (B + B.T)


def assemble_pair(
    f: Polynomial,
    K: Box,
    r: int,
    basis_kind: BasisKind | str = BasisKind.ORTHONORMAL,
) -> MatrixPair:
    """Build (A, B) for degree-2r SOS densities in the requested basis."""
    _check_inputs(f, K, r)
    basis_kind = BasisKind(basis_kind)
    basis = enumerate_basis(K.dimension, r)
    if basis_kind is BasisKind.MONOMIAL:
        A, B = _assemble_monomial(f, K, basis)
    else:
        A, B = _assemble_orthonormal(f, K, basis)
    return MatrixPair(A=A, B=B, basis=basis, basis_kind=basis_kind)


def _reduce_and_solve(pair: MatrixPair) -> tuple[np.ndarray, np.ndarray, float]:
    """Full spectrum of L^-1 A L^-T; returns (eigenvalues, v_min, residual)."""
    try:
        L = cholesky(pair.B, lower=True)
    except LinAlgError as e:
        raise ConditioningError(
            f"B is not numerically positive definite at order {pair.order}: {e}",
            basis_kind=pair.basis_kind.value,
        ) from e
    half = solve_triangular(L, pair.A, lower=True)
    C = solve_triangular(L, half.T, lower=True)
    C = 0.5 * (C + C.T)
    # dsyev: Householder tridiagonalization plus implicit-shift QR
    eigenvalues, vectors = eigh(C, driver="ev")
    v = solve_triangular(L.T, vectors[:, 0], lower=False)
    residual = float(np.linalg.norm(pair.A @ v - eigenvalues[0] * (pair.B @ v)))
    return eigenvalues, v, residual


def solve_smallest_gev(pair: MatrixPair) -> tuple[float, np.ndarray]:
    """Smallest lambda of A v = lambda B v and its B-normalized eigenvector."""
    eigenvalues, v, residual = _reduce_and_solve(pair)
    norm_a = float(np.linalg.norm(pair.A, 2))
    if residual > RESIDUAL_TOL * max(norm_a, 1.0):
        logger.warning("Eigen-residual %.3e exceeds %.0e * ||A|| (order %d)", residual, RESIDUAL_TOL, pair.order)
    return float(eigenvalues[0]), v


def lasserre_upper_bound(
    f: Polynomial,
    K: Box,
    r: int,
    basis_kind: BasisKind | str = BasisKind.ORTHONORMAL,
    *,
    function_name: str = "",
    f_min: float | None = None,
) -> BoundReport:
    """f-bar^(r)_K with diagnostics (basis size, condition of B, runtime, gap)."""
    start = time.perf_counter()
    pair = assemble_pair(f, K, r, basis_kind)
    eigenvalues, _, residual = _reduce_and_solve(pair)
    value = float(eigenvalues[0])
    norm_a = float(np.linalg.norm(pair.A, 2))
    gap = float(eigenvalues[1] - eigenvalues[0]) if len(eigenvalues) > 1 else math.inf
    diagnostics = {
        "basis_size": pair.order,
        "basis_kind": pair.basis_kind.value,
        "condition": float(np.linalg.cond(pair.B)),
        "residual": residual,
        "gap": gap,
        "runtime_seconds": round(time.perf_counter() - start, 6),
    }
    if gap < GAP_TOL * max(norm_a, 1.0):
        diagnostics["multiple_minimum"] = True
        logger.info("Near-multiple smallest eigenvalue for %s at r=%d (gap %.3e)", function_name or "f", r, gap)
    if residual > RESIDUAL_TOL * max(norm_a, 1.0):
        logger.warning("Eigen-residual %.3e for %s at r=%d", residual, function_name or "f", r)
    if f_min is not None and value < f_min - 1e-9 * max(1.0, abs(f_min)):
        logger.warning("Bound %.10g for %s at r=%d is below f_min=%.10g", value, function_name or "f", r, f_min)
    logger.info("lasserre %s r=%d -> %.10g (order %d)", function_name or "f", r, value, pair.order)
    return BoundReport(method="lasserre", function=function_name, r=r, value=value, diagnostics=diagnostics)


def _axis_polynomial(coefs: np.ndarray, axis: int, n: int) -> Polynomial:
    terms = {}
    for k, c in enumerate(coefs):
        alpha = [0] * n
        alpha[axis] = k
        terms[tuple(alpha)] = c
    return Polynomial(n, terms)


def basis_polynomials(K: Box, r: int, basis_kind: BasisKind | str) -> list[Polynomial]:
    """The basis b_alpha, alpha in N(n, r), as polynomials in x."""
    basis_kind = BasisKind(basis_kind)
    basis = enumerate_basis(K.dimension, r)
    n = K.dimension
    if basis_kind is BasisKind.MONOMIAL:
        return [Polynomial.monomial(alpha) for alpha in basis]
    factors = []
    for axis, (lo, hi) in enumerate(K.intervals):
        per_degree = []
        for k in range(r + 1):
            series = Legendre.basis(k, domain=[lo, hi]).convert(kind=PowerSeries)
            per_degree.append(_axis_polynomial(series.coef * math.sqrt((2 * k + 1) / (hi - lo)), axis, n))
        factors.append(per_degree)
    polys = []
    for alpha in basis:
        b = Polynomial.constant(n, 1.0)
        for axis, k in enumerate(alpha):
            b = b * factors[axis][k]
        polys.append(b)
    return polys


def optimal_density(
    f: Polynomial,
    K: Box,
    r: int,
    basis_kind: BasisKind | str = BasisKind.ORTHONORMAL,
) -> Polynomial:
    """The SOS density h = q^2 attaining f-bar^(r)_K, scaled so int_K h = 1."""
    pair = assemble_pair(f, K, r, basis_kind)
    _, v = solve_smallest_gev(pair)
    q = Polynomial(K.dimension)
    for coef, b in zip(v, basis_polynomials(K, r, pair.basis_kind)):
        q = q + b * float(coef)
    h = q * q
    return h / integrate_polynomial(K, h)


# ── Convergence-rate constants ──────────────────────────────


def gradient_hessian_norms(f: Polynomial, K: Box, points_per_axis: int | None = None) -> tuple[float, float]:
    """Grid maxima of ||grad f||_2 and ||Hess f||_2 over K."""
    points = K.grid(points_per_axis or default_grid_size(K.dimension))
    n = K.dimension
    grads = [f.derivative(i) for i in range(n)]
    grad_values = np.stack([g(points) for g in grads], axis=-1)
    hessian = np.empty((len(points), n, n))
    for i in range(n):
        for j in range(i, n):
            values = grads[i].derivative(j)(points)
            hessian[:, i, j] = values
            hessian[:, j, i] = values
    c1 = float(np.max(np.linalg.norm(grad_values, axis=-1)))
    c2 = float(np.max(np.linalg.norm(hessian, ord=2, axis=(1, 2))))
    return c1, c2


def rate_constant(f: Polynomial, K: Box, f_min: float | None = None) -> float:
    """c with f-bar^(2r) - f_min <= c / r for every polynomial f on a convex body.

    c = (n e + 1) (f_min + C1 diam(K) + C2 diam(K)^2).
    """
    if f_min is None:
        f_min = grid_minimum(f, K)
    c1, c2 = gradient_hessian_norms(f, K)
    diam = K.diameter
    return (K.dimension * math.e + 1.0) * (f_min + c1 * diam + c2 * diam ** 2)


def convex_rate_constant(f: Polynomial, K: Box, fhat: float | None = None) -> float:
    """c = (n e + 1) fhat_max with f-bar^(rd) - f_min <= c / r for convex f."""
    if fhat is None:
        fhat = fhat_max(f, K)
    return (K.dimension * math.e + 1.0) * fhat
