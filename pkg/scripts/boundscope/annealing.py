"""Boltzmann-distribution bounds and the simulated-annealing temperature schedule."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from scripts.boundscope import BoundReport, InputError
from scripts.boundscope.moments import DEFAULT_REL_TOL, Box, integrate_smooth
from scripts.boundscope.poly import Polynomial

logger = logging.getLogger(__name__)

REFINE_SWEEPS = 3
GRID_POINT_BUDGET = 2 ** 22


@dataclass(frozen=True)
class TemperatureSchedule:
    """t(r) = e * d * fhat_max / r."""
    d: int
    fhat_max: float

    def temperature(self, r: int) -> float:
        if r < 1:
            raise InputError(f"Schedule index r must be >= 1, got {r}")
        return math.e * self.d * self.fhat_max / r


class LiftedIdentity(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def default_grid_size(n: int) -> int:
    """Points per axis, shrunk until the full lattice fits GRID_POINT_BUDGET."""
    if n <= 2:
        m = 401
    elif n <= 4:
        m = 41
    else:
        m = 11
    while m > 2 and m ** n > GRID_POINT_BUDGET:
        m -= 1
    return m


def _refine(g, K: Box, start: np.ndarray, step: np.ndarray) -> tuple[np.ndarray, float]:
    """Coordinate-wise bounded 1-D minimization of g around start."""
    x = start.astype(float).copy()
    best = float(g(x))
    for _ in range(REFINE_SWEEPS):
        improved = False
        for i, (lo, hi) in enumerate(K.intervals):
            a, b = max(lo, x[i] - step[i]), min(hi, x[i] + step[i])

            def along(s, i=i):
                y = x.copy()
                y[i] = s
                return float(g(y))

            result = minimize_scalar(along, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
            if result.fun < best:
                best = float(result.fun)
                x[i] = float(result.x)
                improved = True
        if not improved:
            break
    return x, best


def _grid_argmin(values_fn, f: Polynomial, K: Box, points_per_axis: int | None):
    m = points_per_axis or default_grid_size(K.dimension)
    if m ** K.dimension > GRID_POINT_BUDGET:
        raise InputError(
            f"Grid search needs {m}^{K.dimension} points, above the budget of {GRID_POINT_BUDGET}"
        )
    points = np.vstack([K.vertices(), K.grid(m)])
    values = values_fn(f(points))
    i = int(np.argmin(values))
    step = (K.highs - K.lows) / (m - 1)
    return points[i], float(values[i]), step


@lru_cache(maxsize=256)
def grid_minimum(f: Polynomial, K: Box, points_per_axis: int | None = None) -> float:
    """min f over K: dense grid plus coordinate refinement (an upper estimate of f_min)."""
    if f.dimension != K.dimension:
        raise InputError(f"Polynomial dimension {f.dimension} does not match box dimension {K.dimension}")
    if f.is_constant:
        return f.constant_value
    x0, value, step = _grid_argmin(lambda v: v, f, K, points_per_axis)
    _, refined = _refine(f, K, x0, step)
    return min(value, refined)


@lru_cache(maxsize=256)
def fhat_max(f: Polynomial, K: Box, points_per_axis: int | None = None) -> float:
    """max |f| over the vertices and a dense grid of K, refined locally."""
    if f.dimension != K.dimension:
        raise InputError(f"Polynomial dimension {f.dimension} does not match box dimension {K.dimension}")
    if f.is_constant:
        return abs(f.constant_value)
    x0, value, step = _grid_argmin(lambda v: -np.abs(v), f, K, points_per_axis)
    _, refined = _refine(lambda x: -abs(f(x)), K, x0, step)
    result = -min(value, refined)
    logger.debug("fhat_max: %.10g", result)
    return result


def shifted_boltzmann_integrals(
    f: Polynomial, K: Box, t: float, rel_tol: float = DEFAULT_REL_TOL
) -> tuple[float, float, float]:
    """(f_ref, D', N') with D' = int e^-(f-f_ref)/t and N' = int (f-f_ref) e^-(f-f_ref)/t."""
    f_ref = grid_minimum(f, K)

    def integrand(points: np.ndarray) -> np.ndarray:
        shifted = f(points) - f_ref
        weight = np.exp(-shifted / t)
        return np.stack([weight, shifted * weight], axis=-1)

    denominator, numerator = integrate_smooth(K, integrand, rel_tol)
    return f_ref, float(denominator), float(numerator)


def boltzmann_expectation(f: Polynomial, K: Box, t: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """E_{X ~ P_f/t}[f(X)] = int f e^-f/t / int e^-f/t over K."""
    if not t > 0:
        raise InputError(f"Temperature must be positive, got {t}")
    if f.dimension != K.dimension:
        raise InputError(f"Polynomial dimension {f.dimension} does not match box dimension {K.dimension}")
    if f.is_constant:
        return f.constant_value
    f_ref, denominator, numerator = shifted_boltzmann_integrals(f, K, t, rel_tol)
    return f_ref + numerator / denominator


def sa_bound(
    f: Polynomial,
    K: Box,
    r: int,
    fhat_override: float | None = None,
    *,
    function_name: str = "",
    t: float | None = None,
) -> BoundReport:
    """SA^(r): the Boltzmann expectation at t = e * d * fhat_max / r.

    fhat_override replaces the computed fhat_max (reproduction mode);
    t, when given, replaces the schedule altogether.
    """
    start = time.perf_counter()
    if r < 1:
        raise InputError(f"SA bound needs r >= 1, got {r}")
    fhat = fhat_override if fhat_override is not None else fhat_max(f, K)
    schedule = TemperatureSchedule(d=f.degree, fhat_max=fhat)
    if t is None:
        t = schedule.temperature(r)
    if f.is_constant:
        value = f.constant_value
    else:
        value = boltzmann_expectation(f, K, t)
    logger.info("sa %s r=%d t=%.6g -> %.10g", function_name or "f", r, t, value)
    return BoundReport(
        method="sa",
        function=function_name,
        r=r,
        value=value,
        t=t,
        diagnostics={
            "degree": f.degree,
            "fhat_max": fhat,
            "runtime_seconds": round(time.perf_counter() - start, 6),
        },
    )


def lifted_identity_check(f: Polynomial, K: Box, t: float, rel_tol: float = DEFAULT_REL_TOL) -> LiftedIdentity:
    """E over the lifted body computed from closed forms, against E_K + t.

    With M = E_K and c = e^-M/t vol(K):
        D_hat = t D_K - t c,   N_hat = -t M c + t N_K + t D_hat.
    Every integral is carried relative to e^-f_ref/t.
    """
    if not t > 0:
        raise InputError(f"Temperature must be positive, got {t}")
    if f.is_constant:
        value = f.constant_value + t
        return LiftedIdentity(lhs=value, rhs=value, gap=0.0)
    f_ref, d_shift, n_shift = shifted_boltzmann_integrals(f, K, t, rel_tol)
    expectation = f_ref + n_shift / d_shift
    cut = math.exp(-(expectation - f_ref) / t) * K.volume
    n_full = n_shift + f_ref * d_shift
    d_hat = t * d_shift - t * cut
    n_hat = -t * expectation * cut + t * n_full + t * d_hat
    lhs = n_hat / d_hat
    rhs = expectation + t
    gap = abs(lhs - rhs)
    logger.debug("lifted identity t=%g: lhs=%.12g rhs=%.12g gap=%.3e", t, lhs, rhs, gap)
    return LiftedIdentity(lhs=lhs, rhs=rhs, gap=gap)
