"""Run configuration: key=value config files, CLI merge and validation."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from scripts.boundscope import InputError
from scripts.boundscope.corpus import builtin
from scripts.boundscope.moments import Box
from scripts.boundscope.parser import parse_polynomial
from scripts.boundscope.poly import Polynomial

logger = logging.getLogger(__name__)

VALID_METHODS = {"lasserre", "sa", "taylor", "chain"}
VALID_BASES = {"monomial", "orthonormal"}
VALID_FHAT_MODES = {"paper", "computed"}
THREADS_ENV = "BOUNDSCOPE_THREADS"


@dataclass
class RunConfig:
    function: str | None = None
    expr: str | None = None
    n: int = 2
    box: str | None = None
    method: str = "lasserre"
    r: int = 1
    r_max: int | None = None
    t: float | None = None
    basis: str = "orthonormal"
    fhat: str = "paper"
    out: str | None = None

    @property
    def label(self) -> str:
        return self.function if self.function else self.expr

    def r_values(self) -> list[int]:
        return list(range(self.r, (self.r_max if self.r_max is not None else self.r) + 1))

    def resolve(self) -> tuple[Polynomial, Box, float | None]:
        """(f, K, printed fhat_max or None) for this run."""
        if self.function:
            entry = builtin(self.function)
            box = Box.parse(self.box) if self.box else entry.box
            if box.dimension != entry.polynomial.dimension:
                raise InputError(f"Box dimension {box.dimension} does not match {self.function} (n={entry.polynomial.dimension})")
            fhat = entry.fhat_max if self.fhat == "paper" and box == entry.box else None
            return entry.polynomial, box, fhat
        box = Box.parse(self.box) if self.box else Box.cube(self.n)
        return parse_polynomial(self.expr, self.n), box, None


CONFIG_KEYS = {f.name for f in fields(RunConfig)}
_CASTS = {"n": int, "r": int, "r_max": int, "t": float}


def load_config_file(path: Path) -> dict[str, str]:
    """Parse flat "key = value" lines; '#' starts a comment."""
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")

    values: dict[str, str] = {}
    errors = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                errors.append(f"line {lineno}: expected key = value")
                continue
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                errors.append(f"line {lineno}: unknown key '{key}'")
                continue
            values[key] = value

    if errors:
        raise InputError(f"Invalid config file {path}: {'; '.join(errors)}")
    return values


def merge_config(cli_values: dict[str, Any], file_values: dict[str, str] | None = None) -> RunConfig:
    """Build a RunConfig from file values overlaid by CLI flags (flags win)."""
    merged: dict[str, Any] = {}
    errors = []
    for key, value in (file_values or {}).items():
        cast = _CASTS.get(key, str)
        try:
            merged[key] = cast(value)
        except ValueError:
            errors.append(f"{key}: cannot read {value!r} as {cast.__name__}")
    if errors:
        raise InputError(f"Invalid run config: {'; '.join(errors)}")

    for key, value in cli_values.items():
        if key in CONFIG_KEYS and value is not None:
            merged[key] = value
    # a CLI source replaces a file source of the other kind
    if cli_values.get("function") is not None and cli_values.get("expr") is None:
        merged.pop("expr", None)
    elif cli_values.get("expr") is not None and cli_values.get("function") is None:
        merged.pop("function", None)
    return RunConfig(**merged)


def validate_run_config(config: RunConfig) -> list[str]:
    """Validate a run config. Raises InputError listing every problem."""
    errors = []

    if bool(config.function) == bool(config.expr):
        errors.append("exactly one of function or expr is required")
    if config.r < 0:
        errors.append(f"r must be >= 0, got {config.r}")
    if config.r_max is not None and config.r_max < config.r:
        errors.append(f"r_max ({config.r_max}) must be >= r ({config.r})")
    if config.t is not None and not config.t > 0:
        errors.append(f"t must be positive, got {config.t}")
    if config.n < 1:
        errors.append(f"n must be >= 1, got {config.n}")
    if config.method not in VALID_METHODS:
        errors.append(f"invalid method '{config.method}', must be one of {sorted(VALID_METHODS)}")
    if config.basis not in VALID_BASES:
        errors.append(f"invalid basis '{config.basis}', must be one of {sorted(VALID_BASES)}")
    if config.fhat not in VALID_FHAT_MODES:
        errors.append(f"invalid fhat mode '{config.fhat}', must be one of {sorted(VALID_FHAT_MODES)}")
    if config.method in ("sa", "chain") and config.r < 1:
        errors.append(f"method {config.method} needs r >= 1")
    if config.box:
        try:
            box = Box.parse(config.box)
            if config.expr and box.dimension != config.n:
                errors.append(f"box has {box.dimension} axes but n = {config.n}")
        except InputError as e:
            errors.append(str(e))

    if errors:
        raise InputError(f"Invalid run config: {'; '.join(errors)}")
    return errors


def worker_count() -> int:
    """Thread cap from BOUNDSCOPE_THREADS, else min(4, cpu count)."""
    default = min(4, os.cpu_count() or 1)
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning("Ignoring %s=%r: not an integer", THREADS_ENV, raw)
        return default
    if value < 1:
        logger.warning("Ignoring %s=%r: must be positive", THREADS_ENV, raw)
        return default
    return value
