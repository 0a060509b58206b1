"""Reference tables and the builtin test-function corpus."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any

from scripts.boundscope import REFERENCE_DIR, InputError
from scripts.boundscope.moments import Box
from scripts.boundscope.parser import parse_polynomial
from scripts.boundscope.poly import Polynomial

logger = logging.getLogger(__name__)

REQUIRED_FUNCTION_FIELDS = {"key", "name", "expression", "dimension", "fhat_max", "degree", "convex"}
TABLE2_COLUMNS = ("lasserre", "sa")
TABLE2_R = range(3, 21)


@dataclass(frozen=True)
class TestFunction:
    """One row of the test-function table, parsed."""
    __test__ = False

    key: str
    name: str
    expression: str
    polynomial: Polynomial
    box: Box
    fhat_max: float
    degree: int
    convex: bool
    f_min: float = 0.0
    fhat_max_analytic: float | None = None

    @property
    def fhat_rounded(self) -> bool:
        return self.fhat_max_analytic is not None and self.fhat_max_analytic != self.fhat_max

    @property
    def fhat_exact(self) -> float:
        """The value a computed fhat_max should be compared against."""
        return self.fhat_max_analytic if self.fhat_max_analytic is not None else self.fhat_max


@dataclass
class ReferenceTable:
    """Printed bounds keyed by (function, column, r)."""
    functions: list[str]
    values: dict[tuple[str, str, int], float] = field(default_factory=dict)

    def get(self, function: str, column: str, r: int) -> float:
        return self.values[(function, column, r)]

    def cells(self) -> list[tuple[str, str, int]]:
        """Canonical order: function in table order, then column, then r."""
        return [
            (function, column, r)
            for function in self.functions
            for column in TABLE2_COLUMNS
            for r in TABLE2_R
        ]


def validate_table1(table: dict[str, Any]) -> list[str]:
    """Validate table1.json structure. Raises InputError listing every problem."""
    errors = []

    if "version" not in table:
        errors.append("Missing 'version' field")
    if not isinstance(table.get("functions"), list):
        errors.append("'functions' must be a list")
        raise InputError(f"Invalid table1: {'; '.join(errors)}")

    seen = set()
    for i, entry in enumerate(table["functions"]):
        prefix = f"functions[{i}]"
        missing = REQUIRED_FUNCTION_FIELDS - set(entry.keys())
        if missing:
            errors.append(f"{prefix}: missing fields: {sorted(missing)}")
            continue
        if entry["key"] in seen:
            errors.append(f"{prefix}: duplicate key '{entry['key']}'")
        seen.add(entry["key"])
        if not isinstance(entry["degree"], int) or entry["degree"] < 0:
            errors.append(f"{prefix}: 'degree' must be a nonnegative integer")
        if not isinstance(entry["fhat_max"], (int, float)) or entry["fhat_max"] < 0:
            errors.append(f"{prefix}: 'fhat_max' must be a nonnegative number")
        box = entry.get("box", table.get("box"))
        if not box or len(box) != entry["dimension"]:
            errors.append(f"{prefix}: box does not match dimension {entry['dimension']}")

    if errors:
        raise InputError(f"Invalid table1: {'; '.join(errors)}")
    return errors


def load_table1(path: Path | None = None) -> dict[str, Any]:
    """Load and validate the test-function table."""
    if path is None:
        path = REFERENCE_DIR / "table1.json"

    if not path.exists():
        raise FileNotFoundError(f"Reference table not found: {path}")

    with open(path, "r", encoding="utf-8") as f:
        table = json.load(f)

    validate_table1(table)
    return table


def load_table2(path: Path | None = None, functions: list[str] | None = None) -> ReferenceTable:
    """Load the printed bound comparison: one row per (function, r)."""
    if path is None:
        path = REFERENCE_DIR / "table2.csv"
    if functions is None:
        functions = [entry["key"] for entry in load_table1()["functions"]]

    if not path.exists():
        raise FileNotFoundError(f"Reference table not found: {path}")

    errors = []
    table = ReferenceTable(functions=[])
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        missing = {"function", "r", *TABLE2_COLUMNS} - set(reader.fieldnames or [])
        if missing:
            raise InputError(f"Invalid table2: missing columns {sorted(missing)}")
        for line, row in enumerate(reader, start=2):
            try:
                r = int(row["r"])
                if row["function"] in functions and row["function"] not in table.functions:
                    table.functions.append(row["function"])
                for column in TABLE2_COLUMNS:
                    value = float(row[column])
                    if not math.isfinite(value):
                        raise ValueError(f"non-finite {column}")
                    table.values[(row["function"], column, r)] = value
            except (TypeError, ValueError) as e:
                errors.append(f"line {line}: {e}")

    for function in functions:
        rows = {r for (name, column, r) in table.values if name == function and column == "lasserre"}
        if rows != set(TABLE2_R):
            errors.append(f"{function}: expected r = 3..20, found {len(rows)} rows")
    table.functions += [function for function in functions if function not in table.functions]
    extra = {name for (name, _, _) in table.values} - set(functions)
    if extra:
        errors.append(f"unknown functions: {sorted(extra)}")

    if errors:
        raise InputError(f"Invalid table2: {'; '.join(errors)}")
    return table


@lru_cache(maxsize=None)
def builtin_functions() -> dict[str, TestFunction]:
    """Parsed corpus keyed by builtin name, in table order."""
    table = load_table1()
    corpus = {}
    for entry in table["functions"]:
        box = Box(tuple(tuple(axis) for axis in entry.get("box", table["box"])))
        corpus[entry["key"]] = TestFunction(
            key=entry["key"],
            name=entry["name"],
            expression=entry["expression"],
            polynomial=parse_polynomial(entry["expression"], entry["dimension"]),
            box=box,
            fhat_max=float(entry["fhat_max"]),
            degree=entry["degree"],
            convex=entry["convex"],
            f_min=float(entry.get("f_min", table.get("f_min", 0.0))),
            fhat_max_analytic=entry.get("fhat_max_analytic"),
        )
    logger.debug("Loaded %d builtin functions", len(corpus))
    return corpus


def builtin(key: str) -> TestFunction:
    corpus = builtin_functions()
    if key not in corpus:
        raise InputError(f"Unknown builtin function '{key}', expected one of {sorted(corpus)}")
    return corpus[key]
