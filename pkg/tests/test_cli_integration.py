"""Integration tests for scripts/boundscope/cli.py subcommands."""

import csv
import sys
from argparse import Namespace
from pathlib import Path
from unittest.mock import patch

import pytest

# Ensure project root is in path
PROJECT_ROOT = Path(__file__).parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from scripts.boundscope import ConditioningError
from scripts.boundscope.cli import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_TOLERANCE,
    EXIT_USAGE,
    append_csv_row,
    cmd_verify,
    main,
    run_bound,
)
from scripts.boundscope.config import RunConfig
from scripts.boundscope.reproduce import ComparisonReport, ComparisonRow, TableReproducer


def _rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestRunBound:
    def test_motzkin_lasserre(self, tmp_results_dir):
        out = tmp_results_dir / "bounds.csv"
        report = run_bound(RunConfig(function="motzkin", r=7, out=str(out)))
        assert report.value == pytest.approx(0.7088, abs=1e-3)
        (row,) = _rows(out)
        assert row["method"] == "lasserre"
        assert row["function"] == "motzkin"
        assert float(row["value"]) == pytest.approx(0.7088, abs=1e-3)
        assert row["basis_size"] == "36"

    def test_matyas_sa(self):
        report = run_bound(RunConfig(function="matyas", method="sa", r=10))
        assert report.value == pytest.approx(12.0390, abs=1e-2)

    def test_constant_expression(self):
        assert run_bound(RunConfig(expr="1", r=3)).value == pytest.approx(1.0, rel=1e-12)

    def test_taylor_default_temperature(self):
        report = run_bound(RunConfig(expr="x1", n=1, box="0:1", method="taylor", r=1, t=1.0))
        assert report.value == pytest.approx(0.4375)
        report = run_bound(RunConfig(function="matyas", method="taylor", r=4))
        assert report.t == pytest.approx(2.718281828459045 * 100 / 4)

    def test_chain(self, tmp_results_dir):
        out = tmp_results_dir / "chain.csv"
        report = run_bound(RunConfig(function="motzkin", method="chain", r=2, out=str(out)))
        assert report.holds
        (row,) = _rows(out)
        assert row["schedule_ok"] == "true"
        assert row["holds"] == "true"

    def test_rows_accumulate(self, tmp_results_dir):
        out = tmp_results_dir / "bounds.csv"
        for r in (1, 2):
            run_bound(RunConfig(expr="x1", n=1, box="0:1", r=r, out=str(out)))
        lines = out.read_text().splitlines()
        assert lines[0] == "method,function,r,t,value,basis_size,condition"
        assert len(lines) == 3


class TestMainBound:
    def test_success(self, tmp_results_dir, capsys):
        out = tmp_results_dir / "b.csv"
        code = main(["bound", "--function", "motzkin", "--r", "6", "--r-max", "7", "--out", str(out)])
        assert code == EXIT_OK
        assert [row["r"] for row in _rows(out)] == ["6", "7"]
        assert "motzkin" in capsys.readouterr().out

    def test_config_file_with_flag_override(self, tmp_path, tmp_results_dir):
        config = tmp_path / "run.conf"
        config.write_text("function = matyas\nmethod = sa\nr = 3\n")
        out = tmp_results_dir / "b.csv"
        assert main(["bound", "--config", str(config), "--r", "10", "--out", str(out)]) == EXIT_OK
        (row,) = _rows(out)
        assert (row["method"], row["r"]) == ("sa", "10")

    @pytest.mark.parametrize("mode", ["paper", "computed"])
    def test_fhat_modes(self, mode, tmp_results_dir):
        out = tmp_results_dir / "b.csv"
        code = main(["bound", "--function", "motzkin", "--method", "sa", "--r", "3", "--fhat", mode, "--out", str(out)])
        assert code == EXIT_OK
        (row,) = _rows(out)
        assert float(row["value"]) == pytest.approx(4.0250, abs=1e-2)

    def test_missing_source_is_usage_error(self, capsys):
        assert main(["bound", "--r", "2"]) == EXIT_USAGE
        assert "exactly one of function or expr" in capsys.readouterr().err

    def test_parse_error_is_usage_error(self, capsys):
        assert main(["bound", "--expr", "x1 +", "--out", "/dev/null"]) == EXIT_USAGE
        assert "position" in capsys.readouterr().err

    def test_unknown_builtin_is_usage_error(self):
        assert main(["bound", "--function", "rosenbrock"]) == EXIT_USAGE

    def test_bad_choice_exits_with_usage_code(self):
        with pytest.raises(SystemExit) as e:
            main(["bound", "--function", "booth", "--method", "newton"])
        assert e.value.code == EXIT_USAGE

    def test_conditioning_error_is_numeric(self, mocker, tmp_results_dir, capsys):
        mocker.patch(
            "scripts.boundscope.cli.lasserre_upper_bound",
            side_effect=ConditioningError("B is not numerically positive definite", basis_kind="monomial"),
        )
        code = main(["bound", "--function", "booth", "--r", "20", "--basis", "monomial",
                     "--out", str(tmp_results_dir / "b.csv")])
        assert code == EXIT_NUMERIC
        assert "try the orthonormal basis" in capsys.readouterr().err

    def test_library_value_error_is_numeric(self, mocker, tmp_results_dir, capsys):
        mocker.patch(
            "scripts.boundscope.cli.lasserre_upper_bound",
            side_effect=ValueError("array must not contain infs or NaNs"),
        )
        code = main(["bound", "--function", "booth", "--r", "3", "--out", str(tmp_results_dir / "b.csv")])
        assert code == EXIT_NUMERIC
        assert "numeric failure" in capsys.readouterr().err

    def test_bad_config_file_is_usage_error(self, tmp_path, capsys):
        config = tmp_path / "run.conf"
        config.write_text("function = booth\nr = three\n")
        assert main(["bound", "--config", str(config)]) == EXIT_USAGE
        assert "cannot read" in capsys.readouterr().err

    def test_violated_chain_is_tolerance_failure(self, mocker, tmp_results_dir):
        report = mocker.MagicMock(holds=False, CSV_HEADER=("function",))
        report.csv_row.return_value = ["motzkin"]
        mocker.patch("scripts.boundscope.cli.verify_chain", return_value=report)
        code = main(["bound", "--function", "motzkin", "--method", "chain", "--r", "2",
                     "--out", str(tmp_results_dir / "c.csv")])
        assert code == EXIT_TOLERANCE


class TestMainTable:
    def test_table1(self, tmp_results_dir, capsys):
        out = tmp_results_dir / "t1.csv"
        assert main(["table", "table1", "--out", str(out)]) == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 8
        assert all(row["within_tolerance"] == "true" for row in rows)
        assert "Exceeded:   0 cells" in capsys.readouterr().out

    def test_exceeded_tolerance(self, mocker, tmp_results_dir):
        failing = ComparisonReport("table2", rows=[ComparisonRow("booth", "sa", 3, 400.0, 367.834)])
        mocker.patch.object(TableReproducer, "run", return_value=failing)
        assert main(["table", "table2", "--out", str(tmp_results_dir / "t2.csv")]) == EXIT_TOLERANCE

    def test_errored_cell_is_numeric(self, mocker, tmp_results_dir):
        errored = ComparisonReport("table2", rows=[ComparisonRow("booth", "sa", 3, None, 367.834, note="error: x")])
        mocker.patch.object(TableReproducer, "run", return_value=errored)
        assert main(["table", "table2", "--out", str(tmp_results_dir / "t2.csv")]) == EXIT_NUMERIC

    def test_unknown_function_is_usage_error(self, tmp_path):
        code = main(["table", "table1", "--function", "rosenbrock", "--out", str(tmp_path / "t1.csv")])
        assert code == EXIT_USAGE

    def test_missing_reference_is_usage_error(self, tmp_path):
        code = main(["table", "table2", "--reference", str(tmp_path / "absent.csv"),
                     "--out", str(tmp_path / "t2.csv")])
        assert code == EXIT_USAGE


class TestMainGrid:
    def test_boltzmann_grid(self, tmp_results_dir, capsys):
        out = tmp_results_dir / "g.csv"
        code = main(["grid", "--function", "motzkin", "--kind", "boltzmann", "--t", "0.5",
                     "--grid-m", "41", "--out", str(out)])
        assert code == EXIT_OK
        assert len(out.read_text().splitlines()) == 41 * 41 + 1
        assert "4 modes" in capsys.readouterr().out

    def test_three_dimensions_is_usage_error(self, tmp_results_dir, capsys):
        code = main(["grid", "--expr", "x1+x2+x3", "--n", "3", "--kind", "boltzmann", "--t", "1",
                     "--out", str(tmp_results_dir / "g.csv")])
        assert code == EXIT_USAGE
        assert "n = 2" in capsys.readouterr().err


class TestCmdVerify:
    def test_all_ok(self, capsys):
        with patch("scripts.boundscope.cli.run_verification",
                   return_value=[{"check": "oracle", "severity": "OK", "message": "fine"}]):
            assert cmd_verify(Namespace(check=None, verbose=False)) == EXIT_OK
        assert "[OK] oracle: fine" in capsys.readouterr().out

    def test_error_record(self):
        with patch("scripts.boundscope.cli.run_verification",
                   return_value=[{"check": "chain", "severity": "ERROR", "message": "violated"}]):
            assert cmd_verify(Namespace(check=["chain"], verbose=False)) == EXIT_TOLERANCE

    def test_critical_record(self):
        records = [
            {"check": "chain", "severity": "ERROR", "message": "violated"},
            {"check": "oracle", "severity": "CRITICAL", "message": "Check failed"},
        ]
        with patch("scripts.boundscope.cli.run_verification", return_value=records):
            assert cmd_verify(Namespace(check=None, verbose=False)) == EXIT_NUMERIC

    def test_real_checks_through_main(self):
        assert main(["verify", "--check", "oracle", "linear_boltzmann"]) == EXIT_OK


def test_append_csv_row_writes_header_once(tmp_path):
    path = tmp_path / "deep" / "rows.csv"
    append_csv_row(path, ("a", "b"), ["1", "2"])
    append_csv_row(path, ("a", "b"), ["3", "4"])
    assert path.read_text() == "a,b\n1,2\n3,4\n"
