"""Table reproduction: recompute every reference cell and compare against the printed value."""

from __future__ import annotations

import csv
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from scripts.boundscope import BoundscopeError, InputError, __version__, format_number
from scripts.boundscope.annealing import fhat_max, sa_bound
from scripts.boundscope.config import worker_count
from scripts.boundscope.corpus import TestFunction, builtin_functions, load_table2
from scripts.boundscope.lasserre import lasserre_upper_bound

logger = logging.getLogger(__name__)

SA_TOLERANCE = (1e-2, 2e-3)          # (absolute, relative)
LASSERRE_TOLERANCE = (5e-3, 5e-3)
FHAT_REL_TOLERANCE = 1e-3

COMPARISON_HEADER = (
    "function", "column", "r", "computed", "reference",
    "abs_dev", "rel_dev", "within_tolerance", "note",
)
TABLE1_COLUMNS = ("degree", "fhat_max")


def tolerance(column: str, reference: float) -> float:
    """Allowed absolute deviation for one cell."""
    if column == "sa":
        absolute, relative = SA_TOLERANCE
    elif column == "lasserre":
        absolute, relative = LASSERRE_TOLERANCE
    elif column == "fhat_max":
        return FHAT_REL_TOLERANCE * abs(reference)
    else:
        return 0.0
    return max(absolute, relative * abs(reference))


@dataclass
class ComparisonRow:
    function: str
    column: str
    r: int | None
    computed: float | None
    reference: float
    note: str = ""

    @property
    def abs_dev(self) -> float | None:
        if self.computed is None:
            return None
        return abs(self.computed - self.reference)

    @property
    def rel_dev(self) -> float | None:
        if self.computed is None:
            return None
        return self.abs_dev / abs(self.reference) if self.reference else self.abs_dev

    @property
    def errored(self) -> bool:
        return self.computed is None

    @property
    def within_tolerance(self) -> bool:
        return not self.errored and self.abs_dev <= tolerance(self.column, self.reference)

    @property
    def sort_key(self) -> tuple:
        return (self.column, -1 if self.r is None else self.r)

    def csv_row(self) -> list[str]:
        return [
            self.function,
            self.column,
            "" if self.r is None else str(self.r),
            format_number(self.computed),
            format_number(self.reference),
            format_number(self.abs_dev),
            format_number(self.rel_dev),
            str(self.within_tolerance).lower(),
            self.note,
        ]


@dataclass
class ComparisonReport:
    which: str
    rows: list[ComparisonRow] = field(default_factory=list)
    elapsed_seconds: float | None = None

    @property
    def failures(self) -> list[ComparisonRow]:
        return [row for row in self.rows if not row.within_tolerance]

    @property
    def errors(self) -> list[ComparisonRow]:
        return [row for row in self.rows if row.errored]

    @property
    def exceeded(self) -> bool:
        return bool(self.failures)

    def columns(self) -> dict[str, tuple[float, float, int]]:
        """column -> (max_abs_dev, max_rel_dev, cells out of tolerance)."""
        summary: dict[str, tuple[float, float, int]] = {}
        for row in self.rows:
            abs_dev, rel_dev, failures = summary.get(row.column, (0.0, 0.0, 0))
            if not row.errored:
                abs_dev = max(abs_dev, row.abs_dev)
                rel_dev = max(rel_dev, row.rel_dev)
            summary[row.column] = (abs_dev, rel_dev, failures + (not row.within_tolerance))
        return summary

    def summary(self) -> dict[str, Any]:
        return {
            "columns": self.columns(),
            "exceeded": len(self.failures),
            "elapsed_seconds": self.elapsed_seconds,
        }


class TableReproducer:
    """Recomputes the cells of one reference table concurrently."""

    def __init__(
        self,
        which: str = "table2",
        fhat_mode: str = "paper",
        reference_path: Path | None = None,
        max_workers: int | None = None,
        progress: Any = None,
        functions: list[str] | None = None,
        r_values: list[int] | None = None,
    ):
        if which not in ("table1", "table2"):
            raise InputError(f"Unknown table '{which}', expected table1 or table2")
        self.which = which
        self.fhat_mode = fhat_mode
        self.reference_path = reference_path
        self.max_workers = max_workers or worker_count()
        self.progress = progress
        self.corpus = builtin_functions()
        self.functions = functions or list(self.corpus)
        unknown = [key for key in self.functions if key not in self.corpus]
        if unknown:
            raise InputError(f"Unknown builtin functions {unknown}, expected some of {list(self.corpus)}")
        self.r_values = r_values
        self._lock = threading.Lock()
        self._rows: dict[tuple, ComparisonRow] = {}
        self._order: list[str] = list(self.corpus)

    def _cells(self) -> list[tuple[str, str, int | None, float]]:
        if self.which == "table1":
            printed = {"degree": lambda e: float(e.degree), "fhat_max": lambda e: e.fhat_exact}
            return [
                (key, column, None, printed[column](self.corpus[key]))
                for key in self.functions
                for column in TABLE1_COLUMNS
            ]
        reference = load_table2(self.reference_path, list(self.corpus))
        self._order = reference.functions
        return [
            (function, column, r, reference.get(function, column, r))
            for function, column, r in reference.cells()
            if function in self.functions and (self.r_values is None or r in self.r_values)
        ]

    def _compute(self, entry: TestFunction, column: str, r: int | None) -> float:
        f, K = entry.polynomial, entry.box
        if column == "degree":
            return float(f.degree)
        if column == "fhat_max":
            return fhat_max(f, K)
        if column == "lasserre":
            return lasserre_upper_bound(f, K, r, function_name=entry.key, f_min=entry.f_min).value
        override = entry.fhat_max if self.fhat_mode == "paper" else None
        return sa_bound(f, K, r, override, function_name=entry.key).value

    def _run_cell(self, function: str, column: str, r: int | None, reference: float) -> ComparisonRow:
        entry = self.corpus[function]
        note = ""
        if column == "fhat_max" and entry.fhat_rounded:
            note = f"printed value {format_number(entry.fhat_max)} is rounded"
        try:
            computed = self._compute(entry, column, r)
        except (BoundscopeError, ArithmeticError) as e:
            logger.error("Cell %s/%s/r=%s failed: %s", function, column, r, e)
            return ComparisonRow(function, column, r, None, reference, note=f"error: {e}")
        row = ComparisonRow(function, column, r, computed, reference, note=note)
        if not row.within_tolerance:
            logger.warning(
                "%s %s r=%s: computed %.10g vs reference %.10g", function, column, r, computed, reference,
            )
        return row

    def run(self) -> ComparisonReport:
        start_time = time.time()
        cells = self._cells()
        if self.progress:
            self.progress.show_header(__version__, self.which, len(cells), self.fhat_mode, self.max_workers)
            self.progress.start(len(cells))

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(self._run_cell, *cell): cell for cell in cells}
            for future in as_completed(futures):
                function, column, r, reference = futures[future]
                row = future.result()
                with self._lock:
                    self._rows[(function, column, r)] = row
                if self.progress:
                    label = f"{function} {column}" + (f" r={r}" if r is not None else "")
                    self.progress.advance(label, error=row.note if row.errored else None)

        if self.progress:
            self.progress.stop()

        order = {key: i for i, key in enumerate(self._order)}
        rows = sorted(self._rows.values(), key=lambda row: (order[row.function], *row.sort_key))
        report = ComparisonReport(which=self.which, rows=rows, elapsed_seconds=round(time.time() - start_time, 2))
        logger.info("Reproduced %d cells of %s (%d out of tolerance)", len(rows), self.which, len(report.failures))
        return report


def write_comparison_csv(report: ComparisonReport, path: Path) -> Path:
    """Write the comparison rows in canonical order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COMPARISON_HEADER)
        for row in report.rows:
            writer.writerow(row.csv_row())
    return path


def reproduce_table(which: str, out: Path, **kwargs) -> ComparisonReport:
    """Recompute a reference table and write the comparison CSV to out."""
    report = TableReproducer(which, **kwargs).run()
    write_comparison_csv(report, out)
    return report
