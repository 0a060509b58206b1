"""Tests for reference-table reproduction."""

import csv
import sys
from pathlib import Path
from unittest.mock import patch

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from scripts.boundscope import REFERENCE_DIR, ConditioningError, InputError
from scripts.boundscope.progress import ReproductionProgress
from scripts.boundscope.reproduce import (
    COMPARISON_HEADER,
    ComparisonReport,
    ComparisonRow,
    TableReproducer,
    reproduce_table,
    tolerance,
    write_comparison_csv,
)


def _perturbed_reference(tmp_path, line, replacement):
    text = (REFERENCE_DIR / "table2.csv").read_text()
    assert line in text
    path = tmp_path / "table2.csv"
    path.write_text(text.replace(line, replacement))
    return path


class TestTolerance:
    def test_sa(self):
        assert tolerance("sa", 367.834) == pytest.approx(2e-3 * 367.834)
        assert tolerance("sa", 1.0) == 1e-2

    def test_lasserre(self):
        assert tolerance("lasserre", 118.383) == pytest.approx(5e-3 * 118.383)
        assert tolerance("lasserre", 0.7088) == 5e-3

    def test_table1_columns(self):
        assert tolerance("degree", 6) == 0.0
        assert tolerance("fhat_max", 2594) == pytest.approx(2.594)


class TestComparisonRow:
    def test_deviations(self):
        row = ComparisonRow("booth", "sa", 3, 368.0, 367.834)
        assert row.abs_dev == pytest.approx(0.166)
        assert row.rel_dev == pytest.approx(0.166 / 367.834)
        assert row.within_tolerance

    def test_out_of_tolerance(self):
        row = ComparisonRow("booth", "lasserre", 3, 120.0, 118.383)
        assert not row.within_tolerance
        assert row.csv_row()[7] == "false"

    def test_errored_row(self):
        row = ComparisonRow("booth", "lasserre", 3, None, 118.383, note="error: boom")
        assert row.errored
        assert not row.within_tolerance
        assert row.csv_row()[3:7] == ["", "118.383", "", ""]

    def test_zero_reference(self):
        row = ComparisonRow("f", "lasserre", 3, 0.001, 0.0)
        assert row.rel_dev == row.abs_dev


class TestTable1:
    def test_metadata_reproduced(self):
        report = TableReproducer("table1", max_workers=2).run()
        assert len(report.rows) == 8
        assert not report.exceeded
        degrees = [row.computed for row in report.rows if row.column == "degree"]
        assert degrees == [2, 2, 6, 6]
        assert [row.function for row in report.rows][::2] == ["booth", "matyas", "motzkin", "camel3"]

    def test_camel_rounding_is_flagged(self):
        report = TableReproducer("table1", functions=["camel3"]).run()
        row = next(row for row in report.rows if row.column == "fhat_max")
        assert row.reference == pytest.approx(2047.9166666666667)
        assert row.note == "printed value 2048 is rounded"
        assert row.within_tolerance

    def test_csv_is_deterministic(self, tmp_results_dir):
        first = reproduce_table("table1", tmp_results_dir / "a.csv", max_workers=1)
        second = reproduce_table("table1", tmp_results_dir / "b.csv", max_workers=4)
        assert [r.csv_row() for r in first.rows] == [r.csv_row() for r in second.rows]
        assert (tmp_results_dir / "a.csv").read_text() == (tmp_results_dir / "b.csv").read_text()


class TestTable2:
    def test_matyas_subset(self):
        report = TableReproducer("table2", functions=["matyas"], r_values=[3, 10], max_workers=2).run()
        assert [(row.column, row.r) for row in report.rows] == [
            ("lasserre", 3), ("lasserre", 10), ("sa", 3), ("sa", 10),
        ]
        assert not report.exceeded, [row.csv_row() for row in report.failures]

    def test_full_table_within_tolerance(self):
        report = TableReproducer("table2").run()
        assert len(report.rows) == 144
        assert not report.errors
        assert not report.exceeded, [row.csv_row() for row in report.failures]
        assert {column: stats[2] for column, stats in report.columns().items()} == {"lasserre": 0, "sa": 0}
        assert [row.function for row in report.rows][::36] == ["booth", "matyas", "camel3", "motzkin"]

    def test_booth_first_row(self):
        report = TableReproducer("table2", functions=["booth"], r_values=[3]).run()
        values = {row.column: row.computed for row in report.rows}
        assert values["lasserre"] == pytest.approx(118.383, rel=5e-3)
        assert values["sa"] == pytest.approx(367.834, rel=2e-3)

    def test_perturbed_reference_is_flagged(self, tmp_path):
        path = _perturbed_reference(tmp_path, "matyas,3,4.2817,15.4212", "matyas,3,5.2817,15.4212")
        report = TableReproducer("table2", reference_path=path, functions=["matyas"], r_values=[3]).run()
        assert report.exceeded
        (failure,) = report.failures
        assert (failure.column, failure.r) == ("lasserre", 3)
        assert failure.abs_dev == pytest.approx(1.0, abs=2.5e-2)

    def test_computed_fhat_mode(self):
        report = TableReproducer("table2", fhat_mode="computed", functions=["matyas"], r_values=[10]).run()
        sa = next(row for row in report.rows if row.column == "sa")
        assert sa.within_tolerance

    def test_numeric_failure_becomes_error_row(self):
        with patch(
            "scripts.boundscope.reproduce.lasserre_upper_bound",
            side_effect=ConditioningError("B is not numerically positive definite"),
        ):
            report = TableReproducer("table2", functions=["motzkin"], r_values=[20]).run()
        (error,) = report.errors
        assert error.column == "lasserre"
        assert error.note.startswith("error: B is not numerically positive definite")
        assert report.columns()["lasserre"][2] == 1

    def test_unknown_function(self):
        with pytest.raises(InputError, match=r"Unknown builtin functions \['rosenbrock'\]"):
            TableReproducer("table2", functions=["booth", "rosenbrock"])

    def test_unknown_table(self):
        with pytest.raises(InputError, match="Unknown table"):
            TableReproducer("table3")


class TestComparisonCsv:
    def test_header_and_rows(self, tmp_results_dir):
        report = ComparisonReport("table2", rows=[
            ComparisonRow("booth", "lasserre", 3, 118.4, 118.383),
            ComparisonRow("booth", "sa", 3, None, 367.834, note="error: quadrature"),
        ])
        path = write_comparison_csv(report, tmp_results_dir / "nested" / "cmp.csv")
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert tuple(rows[0]) == COMPARISON_HEADER
        assert rows[1][:4] == ["booth", "lasserre", "3", "118.4"]
        assert rows[2][-2:] == ["false", "error: quadrature"]

    def test_summary(self):
        report = ComparisonReport("table2", rows=[
            ComparisonRow("booth", "lasserre", 3, 118.4, 118.383),
            ComparisonRow("booth", "lasserre", 4, 99.0, 97.6473),
        ], elapsed_seconds=1.5)
        summary = report.summary()
        abs_dev, rel_dev, failures = summary["columns"]["lasserre"]
        assert abs_dev == pytest.approx(1.3527)
        assert failures == 1
        assert summary["exceeded"] == 1
        assert summary["elapsed_seconds"] == 1.5


class TestProgress:
    def test_plain_output(self, capsys):
        progress = ReproductionProgress(verbose=True)
        TableReproducer("table1", functions=["booth"], progress=progress).run()
        progress.show_summary({"columns": {"degree": (0.0, 0.0, 0)}, "exceeded": 0, "out": "x.csv"})
        out = capsys.readouterr().out
        assert "Computing 2 cells" in out
        assert "booth degree" in out
        assert "Written:    x.csv" in out
