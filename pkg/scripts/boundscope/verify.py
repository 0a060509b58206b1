"""Property checks for the bound computations, reported as severity records."""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np

from scripts.boundscope import BoundscopeError
from scripts.boundscope.annealing import boltzmann_expectation, lifted_identity_check
from scripts.boundscope.corpus import builtin, builtin_functions
from scripts.boundscope.lasserre import (
    BasisKind,
    convex_rate_constant,
    lasserre_upper_bound,
    rate_constant,
)
from scripts.boundscope.moments import Box, integrate_polynomial, integrate_tensor
from scripts.boundscope.parser import parse_polynomial
from scripts.boundscope.poly import Polynomial
from scripts.boundscope.taylor import truncated_exp, verify_chain

logger = logging.getLogger(__name__)

UNIT = Box(((0.0, 1.0),))
LINEAR_ORACLE = (3.0 - math.sqrt(3.0)) / 6.0
CONVEX_TEMPERATURES = (0.05, 0.5, 5.0, 50.0)
MONOTONE_TEMPERATURES = tuple(np.geomspace(0.1, 1000.0, 9))
RATE_R = range(1, 11)


def _result(check: str, ok: bool, message: str) -> dict:
    return {"check": check, "severity": "OK" if ok else "ERROR", "message": message}


def _linear() -> Polynomial:
    return parse_polynomial("x1", 1)


def linear_expectation(t: float) -> float:
    """E[x] under e^-x/t on [0, 1]: t - e^-1/t / (1 - e^-1/t)."""
    q = math.exp(-1.0 / t)
    return t - q / (1.0 - q)


def check_quadrature() -> list[dict]:
    """Tensor Gauss-Legendre vs closed-form moments on every corpus polynomial."""
    results = []
    for key, entry in builtin_functions().items():
        f, K = entry.polynomial, entry.box
        exact = integrate_polynomial(K, f)
        m = f.degree // 2 + 1
        approx = integrate_tensor(K, f, m)
        ok = abs(approx - exact) <= 1e-12 * max(1.0, abs(exact))
        results.append(_result("quadrature", ok, f"{key}: {m}-node rule {approx:.15g} vs moments {exact:.15g}"))
    return results


def check_oracle() -> list[dict]:
    """f = x on [0, 1] at r = 1: the root of 6 lambda^2 - 6 lambda + 1."""
    results = []
    for kind in BasisKind:
        value = lasserre_upper_bound(_linear(), UNIT, 1, kind).value
        ok = abs(value - LINEAR_ORACLE) <= 1e-10
        results.append(_result("oracle", ok, f"{kind.value}: {value:.12g} vs {LINEAR_ORACLE:.12g}"))
    return results


def check_linear_boltzmann() -> list[dict]:
    results = []
    for t in (1.0, 0.1, 0.01):
        value = boltzmann_expectation(_linear(), UNIT, t)
        expected = linear_expectation(t)
        ok = abs(value - expected) <= 1e-9
        results.append(_result("linear_boltzmann", ok, f"t={t:g}: {value:.12g} vs {expected:.12g}"))
    return results


def check_exp_sandwich() -> list[dict]:
    """0 <= phi_2r - e^-lambda <= lambda^(2r+1)/(2r+1)! on [0, 50]; phi_2r > 0 on [-50, 50]."""
    results = []
    lam = np.concatenate([[0.0], np.geomspace(1e-3, 50.0, 199)])
    wide = np.linspace(-50.0, 50.0, 201)
    for r in range(1, 11):
        phi = truncated_exp(r)
        excess = phi.excess(lam)
        with np.errstate(divide="ignore"):
            log_excess = np.log(excess)
        bound = phi.log_excess_bound(lam)
        lower = bool(np.all(excess >= 0.0))
        upper = bool(np.all((excess == 0.0) | (log_excess <= bound + 1e-9)))
        positive = bool(np.all(phi(wide) > 0.0))
        results.append(_result(
            "exp_sandwich", lower and upper and positive,
            f"r={r}: lower={lower} upper={upper} positive={positive}",
        ))
    return results


def check_convex_boltzmann() -> list[dict]:
    """E - f_min <= n t for convex f."""
    results = []
    cases = [(builtin(key).polynomial, builtin(key).box, builtin(key).f_min, key) for key in ("booth", "matyas")]
    cases.append((parse_polynomial("x1", 2), Box.cube(2), -1.0, "x1"))
    for f, K, f_min, label in cases:
        for t in CONVEX_TEMPERATURES:
            gap = boltzmann_expectation(f, K, t) - f_min
            bound = K.dimension * t
            results.append(_result("convex_boltzmann", gap <= bound, f"{label} t={t:g}: {gap:.6g} <= {bound:g}"))
    return results


def check_lifted_identity() -> list[dict]:
    results = []
    for f, K, t, label in (
        (_linear(), UNIT, 1.0, "x on [0,1]"),
        (builtin("matyas").polynomial, builtin("matyas").box, 0.5, "matyas"),
    ):
        lhs, rhs, gap = lifted_identity_check(f, K, t)
        ok = gap <= 1e-7 * (1.0 + abs(rhs - t))
        results.append(_result("lifted_identity", ok, f"{label} t={t:g}: gap {gap:.3e}"))
    return results


def check_boltzmann_monotone() -> list[dict]:
    results = []
    for key, entry in builtin_functions().items():
        values = [boltzmann_expectation(entry.polynomial, entry.box, t) for t in MONOTONE_TEMPERATURES]
        ok = all(b >= a - 1e-9 * (1.0 + abs(a)) for a, b in zip(values, values[1:]))
        results.append(_result("boltzmann_monotone", ok, f"{key}: {values[0]:.6g} .. {values[-1]:.6g}"))
    return results


def check_lasserre_monotone(r_max: int = 20) -> list[dict]:
    results = []
    for key, entry in builtin_functions().items():
        values = [
            lasserre_upper_bound(entry.polynomial, entry.box, r).value
            for r in range(1, r_max + 1)
        ]
        monotone = all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
        above = all(v >= entry.f_min - 1e-9 for v in values)
        results.append(_result(
            "lasserre_monotone", monotone and above,
            f"{key}: r=1..{r_max} from {values[0]:.6g} to {values[-1]:.6g}, monotone={monotone}, above f_min={above}",
        ))
    return results


def check_basis_invariance(r_max: int = 6) -> list[dict]:
    results = []
    for key, entry in builtin_functions().items():
        worst = 0.0
        for r in range(r_max + 1):
            mono = lasserre_upper_bound(entry.polynomial, entry.box, r, BasisKind.MONOMIAL).value
            ortho = lasserre_upper_bound(entry.polynomial, entry.box, r, BasisKind.ORTHONORMAL).value
            worst = max(worst, abs(mono - ortho) / (1.0 + abs(ortho)))
        results.append(_result("basis_invariance", worst <= 1e-8, f"{key}: worst scaled gap {worst:.3e}"))
    return results


def check_chain() -> list[dict]:
    """Motzkin: f-bar^(6r) <= int f phi <= E + T and f-bar^(6r) <= E + 81/2^r at t = e*81/r."""
    entry = builtin("motzkin")
    results = []
    for r in (1, 2, 3, 4):
        t = math.e * entry.fhat_max / r
        report = verify_chain(
            entry.polynomial, entry.box, r, t,
            fhat=entry.fhat_max, f_min=entry.f_min, function_name=entry.key,
        )
        results.append(_result(
            "chain", report.holds and report.schedule_ok,
            f"r={r}: {report.lasserre_value:.6g} <= {report.taylor_value:.6g} "
            f"<= {report.boltzmann_value:.6g} + {report.error_term:.3g}; "
            f"chain bound {report.chain_bound:.6g}",
        ))
    return results


def check_convex_lasserre_rate() -> list[dict]:
    """Convex f: (f-bar^(rd) - f_min) r <= (n e + 1) fhat_max."""
    results = []
    for key in ("booth", "matyas"):
        entry = builtin(key)
        c = convex_rate_constant(entry.polynomial, entry.box, entry.fhat_max)
        worst = max(
            (lasserre_upper_bound(entry.polynomial, entry.box, r * entry.degree).value - entry.f_min) * r
            for r in RATE_R
        )
        results.append(_result("convex_lasserre_rate", worst <= c, f"{key}: max r-scaled gap {worst:.6g} <= {c:.6g}"))
    return results


def check_lasserre_rate() -> list[dict]:
    """(f-bar^(2r) - f_min) r <= (n e + 1)(f_min + C1 diam + C2 diam^2)."""
    results = []
    for key, entry in builtin_functions().items():
        c = rate_constant(entry.polynomial, entry.box, entry.f_min)
        worst = max(
            (lasserre_upper_bound(entry.polynomial, entry.box, 2 * r).value - entry.f_min) * r
            for r in RATE_R
        )
        results.append(_result("lasserre_rate", worst <= c, f"{key}: max r-scaled gap {worst:.6g} <= {c:.6g}"))
    return results


CHECKS: dict[str, Callable[[], list[dict]]] = {
    "quadrature": check_quadrature,
    "oracle": check_oracle,
    "linear_boltzmann": check_linear_boltzmann,
    "exp_sandwich": check_exp_sandwich,
    "convex_boltzmann": check_convex_boltzmann,
    "lifted_identity": check_lifted_identity,
    "boltzmann_monotone": check_boltzmann_monotone,
    "lasserre_monotone": check_lasserre_monotone,
    "basis_invariance": check_basis_invariance,
    "chain": check_chain,
    "convex_lasserre_rate": check_convex_lasserre_rate,
    "lasserre_rate": check_lasserre_rate,
}


def run_verification(checks: list[str] | None = None) -> list[dict]:
    """Run all or the named checks; a check that raises is reported as CRITICAL."""
    results = []
    for name in checks or list(CHECKS):
        if name not in CHECKS:
            results.append({"check": name, "severity": "ERROR", "message": f"Unknown check '{name}'"})
            continue
        logger.info("Running check %s", name)
        try:
            results.extend(CHECKS[name]())
        except (BoundscopeError, ArithmeticError) as e:
            results.append({"check": name, "severity": "CRITICAL", "message": f"Check failed: {e}"})
    return results
