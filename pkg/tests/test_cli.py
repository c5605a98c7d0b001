"""Tests for the command-line surface."""

from __future__ import annotations

import json

import pytest
from typer.testing import CliRunner

from defectbench.cli import app

runner = CliRunner()


@pytest.fixture()
def experiment(tmp_path):
    path = tmp_path / "defectbench.toml"
    path.write_text('n_sites = 8\nobservables = ["entropy"]\noutput_dir = "out"\n')
    return path


class TestSchemaCommand:
    def test_prints_json_schema(self):
        result = runner.invoke(app, ["print-config-schema"])
        assert result.exit_code == 0
        schema = json.loads(result.output)
        assert "n_sites" in schema["properties"]


class TestCeffCommand:
    def test_known_values(self):
        result = runner.invoke(app, ["ceff", "0", "1"])
        assert result.exit_code == 0
        assert "0.1666666" in result.output
        assert "0.5" in result.output

    def test_bad_strength(self):
        result = runner.invoke(app, ["ceff", "strong"])
        assert result.exit_code == 2

    def test_digits_below_floor(self):
        result = runner.invoke(app, ["ceff", "0.5", "--digits", "10"])
        assert result.exit_code == 2


class TestRunCommand:
    def test_run(self, experiment):
        result = runner.invoke(app, ["run", str(experiment)])
        assert result.exit_code == 0, result.output
        out = experiment.parent / "out"
        assert (out / "entropy.csv").exists()
        assert (out / "run_manifest.json").exists()

    def test_output_dir_override(self, experiment, tmp_path):
        target = tmp_path / "elsewhere"
        result = runner.invoke(app, ["run", str(experiment), "-o", str(target)])
        assert result.exit_code == 0, result.output
        assert (target / "entropy.csv").exists()

    def test_malformed_config(self, tmp_path):
        path = tmp_path / "defectbench.toml"
        path.write_text("n_sites = [8,\n")
        result = runner.invoke(app, ["run", str(path)])
        assert result.exit_code == 2

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "defectbench.toml"
        path.write_text('n_sites = 9\nobservables = ["entropy"]\n')
        result = runner.invoke(app, ["run", str(path)])
        assert result.exit_code == 2

    def test_bad_thread_setting(self, experiment, monkeypatch):
        monkeypatch.setenv("WORKBENCH_MAX_THREADS", "zero")
        result = runner.invoke(app, ["run", str(experiment)])
        assert result.exit_code == 2


class TestOracleCommand:
    def test_out_of_range(self, tmp_path):
        path = tmp_path / "defectbench.toml"
        path.write_text('n_sites = 16\nobservables = ["entropy"]\n')
        result = runner.invoke(app, ["oracle-check", str(path)])
        assert result.exit_code == 2

    def test_passes_on_small_chain(self, experiment):
        result = runner.invoke(app, ["oracle-check", str(experiment)])
        assert result.exit_code == 0, result.output
        assert "pass" in result.output
