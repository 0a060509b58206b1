"""Truncated-exponential SOS densities and the inequality chain linking both bound families.

phi_2r(lambda) = sum_{k=0}^{2r} (-lambda)^k / k! is a sum of squares with

    0 <= phi_2r(lambda) - e^-lambda <= lambda^(2r+1) / (2r+1)!   for lambda >= 0,

so phi_2r(f / t) is a polynomial density of degree 2rd close to the
Boltzmann density e^-f/t, and

    f-bar^(rd) <= int f phi / int phi <= E_t + T <= ... <= E_t + fhat_max / 2^r

whenever r >= e * fhat_max / t.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from scripts.boundscope import InputError, RangeError, format_number
from scripts.boundscope.annealing import fhat_max, grid_minimum, shifted_boltzmann_integrals
from scripts.boundscope.lasserre import BasisKind, lasserre_upper_bound
from scripts.boundscope.moments import Box, integrate_polynomial
from scripts.boundscope.poly import Polynomial, compose_univariate, multiply, power

logger = logging.getLogger(__name__)

MAX_DENSITY_DEGREE = 200
MAX_COEFFICIENT = 1e280
SCHEDULE_SLACK = 1e-12
TAIL_TERMS = 400


@dataclass(frozen=True)
class TruncatedExp:
    r: int
    coefficients: tuple[float, ...]

    @property
    def order(self) -> int:
        return 2 * self.r

    def __call__(self, lam):
        value = P.polyval(np.asarray(lam, dtype=float), self.coefficients)
        return float(value) if np.ndim(value) == 0 else value

    def excess(self, lam):
        """phi_2r(lambda) - e^-lambda for lambda >= 0, free of cancellation.

        Uses the alternating tail sum_{k>2r} (-1)^(k+1) lambda^k / k! while its
        terms decrease (lambda <= 2r + 1) and the direct difference beyond.
        """
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < 0):
            raise InputError("excess is defined for lambda >= 0")
        first = 2 * self.r + 1
        near = np.where(lam <= first, lam, 0.0)
        with np.errstate(divide="ignore"):
            term = np.exp(first * np.log(near) - math.lgamma(first + 1))
        tail = np.zeros_like(lam)
        sign = 1.0
        for k in range(first, first + TAIL_TERMS):
            tail = tail + sign * term
            term = term * near / (k + 1)
            sign = -sign
            if not np.any(term > 1e-17 * np.abs(tail)):
                break
        direct = P.polyval(lam, self.coefficients) - np.exp(-lam)
        result = np.where(lam <= first, tail, direct)
        return float(result) if result.ndim == 0 else result

    def log_excess_bound(self, lam):
        """log(lambda^(2r+1) / (2r+1)!); -inf at lambda = 0."""
        lam = np.asarray(lam, dtype=float)
        first = 2 * self.r + 1
        with np.errstate(divide="ignore"):
            result = first * np.log(lam) - math.lgamma(first + 1)
        return float(result) if result.ndim == 0 else result


def truncated_exp(r: int) -> TruncatedExp:
    """Degree-2r Taylor prefix of e^-lambda: coefficients (-1)^k / k!."""
    if r < 0:
        raise InputError(f"Truncation index r must be >= 0, got {r}")
    coefs = tuple((-1.0) ** k / math.factorial(k) for k in range(2 * r + 1))
    return TruncatedExp(r=r, coefficients=coefs)


def taylor_density(f: Polynomial, r: int, t: float) -> Polynomial:
    """The polynomial phi_2r(f / t), unnormalized."""
    if not t > 0:
        raise InputError(f"Temperature must be positive, got {t}")
    degree = f.degree * 2 * r
    if degree > MAX_DENSITY_DEGREE:
        raise RangeError(f"Taylor density degree {degree} exceeds {MAX_DENSITY_DEGREE}")
    with np.errstate(over="ignore", invalid="ignore"):
        phi = compose_univariate(truncated_exp(r).coefficients, f / t)
    largest = phi.max_abs_coefficient
    if not math.isfinite(largest) or largest > MAX_COEFFICIENT:
        raise RangeError(f"Taylor density coefficients exceed {MAX_COEFFICIENT:g} (r={r}, t={t:g})")
    return phi


def taylor_density_bound(f: Polynomial, K: Box, r: int, t: float) -> float:
    """int_K f phi_2r(f/t) / int_K phi_2r(f/t), evaluated exactly from moments."""
    if r < 0:
        raise InputError(f"Truncation index r must be >= 0, got {r}")
    if f.dimension != K.dimension:
        raise InputError(f"Polynomial dimension {f.dimension} does not match box dimension {K.dimension}")
    if f.is_constant:
        if not t > 0:
            raise InputError(f"Temperature must be positive, got {t}")
        return f.constant_value
    phi = taylor_density(f, r, t)
    value = integrate_polynomial(K, multiply(f, phi)) / integrate_polynomial(K, phi)
    logger.debug("taylor r=%d t=%g -> %.10g", r, t, value)
    return value


@dataclass
class ChainReport:
    """One evaluation of f-bar^(rd) <= int f phi <= E + T and f-bar^(rd) <= E + fhat/2^r."""
    r: int
    t: float
    lasserre_value: float
    taylor_value: float
    boltzmann_value: float
    error_term: float
    chain_bound: float
    schedule_ok: bool
    tolerance: float
    function: str = ""

    CSV_HEADER = (
        "function", "r", "t", "lasserre", "taylor", "boltzmann",
        "error_term", "chain_bound", "schedule_ok", "holds",
    )

    @property
    def lasserre_below_taylor(self) -> bool:
        return self.lasserre_value <= self.taylor_value + self.tolerance

    @property
    def taylor_below_boltzmann(self) -> bool:
        return self.taylor_value <= self.boltzmann_value + self.error_term + self.tolerance

    @property
    def chain_bound_holds(self) -> bool:
        return not self.schedule_ok or self.lasserre_value <= self.chain_bound + self.tolerance

    @property
    def holds(self) -> bool:
        return self.lasserre_below_taylor and self.taylor_below_boltzmann and self.chain_bound_holds

    def csv_row(self) -> list[str]:
        return [
            self.function,
            str(self.r),
            format_number(self.t),
            format_number(self.lasserre_value),
            format_number(self.taylor_value),
            format_number(self.boltzmann_value),
            format_number(self.error_term),
            format_number(self.chain_bound),
            str(self.schedule_ok).lower(),
            str(self.holds).lower(),
        ]


def error_term(f: Polynomial, K: Box, r: int, t: float, f_min: float, log_denominator: float) -> float:
    """T = int (f - f_min) f^(2r+1) / (t^(2r+1) (2r+1)! int e^-f/t), combined in log-space."""
    numerator = integrate_polynomial(K, multiply(f - f_min, power(f, 2 * r + 1)))
    if numerator == 0.0:
        return 0.0
    k = 2 * r + 1
    log_t = math.log(abs(numerator)) - k * math.log(t) - math.lgamma(k + 1) - log_denominator
    return math.copysign(math.exp(log_t), numerator)


def verify_chain(
    f: Polynomial,
    K: Box,
    r: int,
    t: float,
    *,
    fhat: float | None = None,
    f_min: float | None = None,
    basis_kind: BasisKind | str = BasisKind.ORTHONORMAL,
    function_name: str = "",
) -> ChainReport:
    """Evaluate every member of the Taylor/Boltzmann inequality chain at (r, t)."""
    if not t > 0:
        raise InputError(f"Temperature must be positive, got {t}")
    if r < 1:
        raise InputError(f"Chain needs r >= 1, got {r}")
    if fhat is None:
        fhat = fhat_max(f, K)
    if f_min is None:
        f_min = grid_minimum(f, K)
    d = f.degree
    lasserre_value = lasserre_upper_bound(f, K, r * d, basis_kind, function_name=function_name).value
    taylor_value = taylor_density_bound(f, K, r, t)
    if f.is_constant:
        boltzmann_value, T = f.constant_value, 0.0
    else:
        f_ref, d_shift, n_shift = shifted_boltzmann_integrals(f, K, t)
        boltzmann_value = f_ref + n_shift / d_shift
        T = error_term(f, K, r, t, f_min, math.log(d_shift) - f_ref / t)
    report = ChainReport(
        r=r,
        t=t,
        lasserre_value=lasserre_value,
        taylor_value=taylor_value,
        boltzmann_value=boltzmann_value,
        error_term=T,
        chain_bound=boltzmann_value + fhat / 2 ** r,
        schedule_ok=r >= math.e * fhat / t * (1.0 - SCHEDULE_SLACK),
        tolerance=1e-6 * (1.0 + fhat),
        function=function_name,
    )
    if not report.holds:
        logger.warning(
            "Chain violated for %s at r=%d t=%g: %.10g / %.10g / %.10g + %.3g",
            function_name or "f", r, t, lasserre_value, taylor_value, boltzmann_value, T,
        )
    return report
