"""Plot-ready density grids for n = 2: Boltzmann, optimal SOS and Taylor densities."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.integrate import trapezoid
from scipy.ndimage import maximum_filter

from scripts.boundscope import InputError, UnsupportedDimensionError, format_number
from scripts.boundscope.annealing import shifted_boltzmann_integrals
from scripts.boundscope.lasserre import BasisKind, optimal_density
from scripts.boundscope.moments import Box, integrate_polynomial
from scripts.boundscope.poly import Polynomial
from scripts.boundscope.taylor import taylor_density

logger = logging.getLogger(__name__)

DENSITY_KINDS = ("boltzmann", "sos", "taylor")
GRID_HEADER = ("x1", "x2", "density")
MODE_FLOOR = 0.5


@dataclass
class GridSummary:
    path: Path
    rows: int
    mass: float
    peak: tuple[float, float, float]
    modes: list[tuple[float, float]] = field(default_factory=list)


def _require(params: dict[str, Any], key: str, kind: str):
    if params.get(key) is None:
        raise InputError(f"Density kind '{kind}' needs parameter '{key}'")
    return params[key]


def density_function(f: Polynomial, K: Box, kind: str, params: dict[str, Any]):
    """A callable mapping (N, n) points to normalized density values."""
    if kind == "boltzmann":
        t = float(_require(params, "t", kind))
        if not t > 0:
            raise InputError(f"Temperature must be positive, got {t}")
        if f.is_constant:
            return lambda points: np.full(len(points), 1.0 / K.volume)
        f_ref, mass, _ = shifted_boltzmann_integrals(f, K, t)
        return lambda points: np.exp(-(f(points) - f_ref) / t) / mass
    if kind == "sos":
        r = int(_require(params, "r", kind))
        h = optimal_density(f, K, r, params.get("basis") or BasisKind.ORTHONORMAL)
        return h
    if kind == "taylor":
        r, t = int(_require(params, "r", kind)), float(_require(params, "t", kind))
        phi = taylor_density(f, r, t)
        mass = integrate_polynomial(K, phi)
        return lambda points: phi(points) / mass
    raise InputError(f"Unknown density kind '{kind}', expected one of {DENSITY_KINDS}")


def grid_mass(values: np.ndarray, x1: np.ndarray, x2: np.ndarray) -> float:
    """Trapezoidal integral of an (m, m) grid indexed [i1, i2]."""
    return float(trapezoid(trapezoid(values, x2, axis=1), x1))


def emit_density_grid(
    f: Polynomial,
    K: Box,
    kind: str,
    params: dict[str, Any],
    grid_m: int,
    out: Path,
) -> GridSummary:
    """Write grid_m x grid_m rows of (x1, x2, density) over K, box edges included."""
    if K.dimension != 2 or f.dimension != 2:
        raise UnsupportedDimensionError(
            f"Density grids need n = 2, got n = {K.dimension}", dimension=K.dimension,
        )
    if grid_m < 2:
        raise InputError(f"grid_m must be >= 2, got {grid_m}")
    density = density_function(f, K, kind, params)
    (lo1, hi1), (lo2, hi2) = K.intervals
    x1 = np.linspace(lo1, hi1, grid_m)
    x2 = np.linspace(lo2, hi2, grid_m)
    points = K.grid(grid_m)
    values = np.asarray(density(points), dtype=float).reshape(grid_m, grid_m)

    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRID_HEADER)
        for (a, b), value in zip(points, values.ravel()):
            writer.writerow([format_number(a), format_number(b), format_number(value)])

    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    peak = (float(x1[i]), float(x2[j]), float(values[i, j]))
    modes = []
    if values.max() > values.min():
        local = (values == maximum_filter(values, size=3, mode="nearest")) & (values >= MODE_FLOOR * values.max())
        modes = [(float(x1[a]), float(x2[b])) for a, b in zip(*np.nonzero(local))]
    mass = grid_mass(values, x1, x2)
    logger.info("Wrote %s density grid (%d rows, mass %.6f) to %s", kind, grid_m ** 2, mass, out)
    return GridSummary(path=out, rows=grid_m ** 2, mass=mass, peak=peak, modes=modes)
