"""Tests for run configuration: config files, CLI merge and validation."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from scripts.boundscope import InputError
from scripts.boundscope.config import (
    THREADS_ENV,
    RunConfig,
    load_config_file,
    merge_config,
    validate_run_config,
    worker_count,
)
from scripts.boundscope.moments import Box


def _write(tmp_path, text):
    path = tmp_path / "run.conf"
    path.write_text(text)
    return path


class TestLoadConfigFile:
    def test_key_values_and_comments(self, tmp_path):
        path = _write(tmp_path, "# motzkin run\nfunction = motzkin\nr = 6  # degree 12\n\nr-max=7\n")
        assert load_config_file(path) == {"function": "motzkin", "r": "6", "r_max": "7"}

    def test_unknown_key(self, tmp_path):
        path = _write(tmp_path, "function = booth\ntemperature = 3\n")
        with pytest.raises(InputError, match="line 2: unknown key 'temperature'"):
            load_config_file(path)

    def test_malformed_line(self, tmp_path):
        path = _write(tmp_path, "function booth\n")
        with pytest.raises(InputError, match="line 1: expected key = value"):
            load_config_file(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config_file(tmp_path / "absent.conf")


class TestMergeConfig:
    def test_defaults(self):
        config = merge_config({})
        assert config == RunConfig()
        assert config.method == "lasserre"
        assert config.basis == "orthonormal"
        assert config.fhat == "paper"

    def test_file_values_are_cast(self):
        config = merge_config({}, {"expr": "x1", "n": "1", "r": "3", "t": "0.5"})
        assert (config.n, config.r, config.t) == (1, 3, 0.5)

    def test_flags_win(self):
        config = merge_config({"r": 7, "method": None}, {"function": "motzkin", "r": "6", "method": "sa"})
        assert config.r == 7
        assert config.method == "sa"

    def test_cli_expr_replaces_file_function(self):
        config = merge_config({"expr": "x1^2"}, {"function": "booth"})
        assert config.function is None
        assert config.expr == "x1^2"

    def test_cli_function_replaces_file_expr(self):
        config = merge_config({"function": "matyas"}, {"expr": "x1"})
        assert config.expr is None
        assert config.function == "matyas"

    def test_uncastable_value(self):
        with pytest.raises(InputError, match="r: cannot read 'three' as int"):
            merge_config({}, {"r": "three"})


class TestValidateRunConfig:
    def test_valid(self):
        assert validate_run_config(RunConfig(function="booth", r=3)) == []

    def test_needs_exactly_one_source(self):
        with pytest.raises(InputError, match="exactly one of function or expr"):
            validate_run_config(RunConfig())
        with pytest.raises(InputError, match="exactly one of function or expr"):
            validate_run_config(RunConfig(function="booth", expr="x1"))

    def test_range_errors_are_collected(self):
        config = RunConfig(expr="x1", r=4, r_max=2, t=-1.0)
        with pytest.raises(InputError) as e:
            validate_run_config(config)
        assert "r_max (2) must be >= r (4)" in str(e.value)
        assert "t must be positive" in str(e.value)

    def test_invalid_choices(self):
        config = RunConfig(expr="x1", method="newton", basis="chebyshev", fhat="guess")
        with pytest.raises(InputError) as e:
            validate_run_config(config)
        for word in ("method", "basis", "fhat mode"):
            assert word in str(e.value)

    def test_sa_needs_positive_r(self):
        with pytest.raises(InputError, match="method sa needs r >= 1"):
            validate_run_config(RunConfig(function="booth", method="sa", r=0))

    def test_box_dimension(self):
        with pytest.raises(InputError, match="box has 1 axes but n = 2"):
            validate_run_config(RunConfig(expr="x1", box="0:1"))

    def test_bad_box(self):
        with pytest.raises(InputError, match="degenerate"):
            validate_run_config(RunConfig(expr="x1", n=1, box="1:1"))


class TestRunConfig:
    def test_r_values(self):
        assert RunConfig(r=3).r_values() == [3]
        assert RunConfig(r=3, r_max=6).r_values() == [3, 4, 5, 6]

    def test_label(self):
        assert RunConfig(function="booth").label == "booth"
        assert RunConfig(expr="x1+1").label == "x1+1"

    def test_resolve_builtin_uses_printed_fhat(self, motzkin):
        f, K, fhat = RunConfig(function="motzkin").resolve()
        assert f == motzkin.polynomial
        assert K == motzkin.box
        assert fhat == 81.0

    def test_resolve_computed_mode(self):
        _, _, fhat = RunConfig(function="motzkin", fhat="computed").resolve()
        assert fhat is None

    def test_resolve_custom_box_drops_printed_fhat(self):
        _, K, fhat = RunConfig(function="booth", box="0:1,0:1").resolve()
        assert K == Box(((0.0, 1.0), (0.0, 1.0)))
        assert fhat is None

    def test_resolve_expression(self):
        f, K, fhat = RunConfig(expr="x1*x2*x3", n=3).resolve()
        assert f.dimension == 3
        assert K == Box.cube(3)
        assert fhat is None

    def test_resolve_box_dimension_mismatch(self):
        with pytest.raises(InputError, match="does not match booth"):
            RunConfig(function="booth", box="0:1").resolve()


class TestWorkerCount:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert worker_count() == 3

    def test_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert 1 <= worker_count() <= 4

    @pytest.mark.parametrize("raw", ["abc", "0", "-2"])
    def test_invalid_values_fall_back(self, monkeypatch, raw, caplog):
        monkeypatch.setenv(THREADS_ENV, raw)
        assert 1 <= worker_count() <= 4
        assert THREADS_ENV in caplog.text
