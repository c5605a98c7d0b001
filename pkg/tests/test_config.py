"""Tests for experiment-file loading and runtime settings."""

from __future__ import annotations

from decimal import Decimal
from pathlib import Path

import pytest

from defectbench.config import (
    CONFIG_FILENAME,
    ExperimentConfig,
    RuntimeSettings,
    config_schema,
    find_config,
    load_config,
    parse_config,
)
from defectbench.errors import ConfigError

BASIC = """
n_sites = [8, 12]
defect_kind = "energy"
j_star = [0.2, 0.5]
observables = ["negativity", "entropy"]
negativity_cut = 2
"""


def _write(directory: Path, text: str) -> Path:
    path = directory / CONFIG_FILENAME
    path.write_text(text)
    return path


def _problems(raw: dict) -> list[str]:
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    return info.value.problems


class TestParseConfig:
    def test_defaults(self):
        config = parse_config({"n_sites": 16, "observables": ["entropy"]})
        assert config.n_sites == [16]
        assert config.length_for(16) == 8
        assert config.placement == "centered"
        assert config.boundary_sign == -1
        assert config.precision_ratio == Decimal("1.5")

    def test_sweep_points_n_outermost(self):
        config = parse_config(
            {
                "n_sites": [8, 12],
                "defect_kind": "energy",
                "j_star": ["0.2", "0.5"],
                "observables": ["entropy"],
            }
        )
        assert config.sweep_points() == [
            (8, Decimal("0.2")),
            (8, Decimal("0.5")),
            (12, Decimal("0.2")),
            (12, Decimal("0.5")),
        ]

    def test_uniform_sweep_has_no_strength(self):
        config = parse_config({"n_sites": [8], "observables": ["entropy"]})
        assert config.sweep_points() == [(8, None)]

    def test_observables_evaluated_in_fixed_order(self):
        config = parse_config({"n_sites": 8, "observables": ["entropy", "k_matrix"]})
        assert config.ordered_observables() == ["k_matrix", "entropy"]

    def test_unknown_key(self):
        problems = _problems({"n_sites": 8, "observables": ["entropy"], "colour": "red"})
        assert problems[0].startswith("colour:")

    def test_unknown_observable(self):
        assert _problems({"n_sites": 8, "observables": ["magnetization"]})

    def test_odd_chain(self):
        problems = _problems({"n_sites": [9], "observables": ["entropy"]})
        assert "even" in problems[0]

    def test_precision_ratio_range(self):
        assert _problems({"n_sites": 8, "observables": ["entropy"], "precision_ratio": "2.5"})

    def test_missing_prerequisites_collected(self):
        problems = _problems({"n_sites": 8, "observables": ["negativity", "renyi", "c_eff"]})
        assert "config: negativity requires negativity_cut" in problems
        assert "config: renyi requires renyi_alpha" in problems
        assert "config: c_eff requires j_star values" in problems

    def test_energy_needs_strengths(self):
        problems = _problems({"n_sites": 8, "defect_kind": "energy", "observables": ["entropy"]})
        assert problems == ["config: energy defects need at least one j_star value"]

    def test_renyi_index_one(self):
        problems = _problems({"n_sites": 8, "observables": ["renyi"], "renyi_alpha": 1})
        assert "renyi_alpha must be positive and not 1" in problems[0]

    def test_centered_placement_needs_even_length(self):
        problems = _problems(
            {
                "n_sites": 8,
                "subsystem_length": 3,
                "defect_kind": "duality",
                "observables": ["entropy"],
            }
        )
        assert "needs an even subsystem length" in problems[0]

    def test_cut_inside_measured_block(self):
        problems = _problems({"n_sites": 8, "observables": ["negativity"], "negativity_cut": 4})
        assert "negativity_cut" in problems[0]

    def test_scaling_fit_sample_count(self):
        problems = _problems({"n_sites": [8, 12], "observables": ["scaling_fit"]})
        assert problems == ["config: scaling_fit needs at least 3 (N, L) samples"]

    def test_subsystem_must_fit(self):
        problems = _problems({"n_sites": 8, "subsystem_length": 8, "observables": ["entropy"]})
        assert "below N" in problems[0]


class TestLoadConfig:
    def test_loads_file(self, tmp_path):
        config = load_config(_write(tmp_path, BASIC))
        assert config.j_star == [Decimal("0.2"), Decimal("0.5")]
        assert config.negativity_cut == 2

    def test_floats_are_exact_decimals(self, tmp_path):
        config = load_config(_write(tmp_path, BASIC))
        assert str(config.j_star[0]) == "0.2"

    def test_relative_output_dir(self, tmp_path):
        config = load_config(_write(tmp_path, BASIC + 'output_dir = "results"\n'))
        assert config.output_dir == tmp_path / "results"

    def test_searches_upward(self, tmp_path):
        _write(tmp_path, BASIC)
        nested = tmp_path / "a" / "b"
        nested.mkdir(parents=True)
        assert find_config(nested) == (tmp_path / CONFIG_FILENAME).resolve()
        assert load_config(nested).n_sites == [8, 12]

    def test_search_skips_directories_named_like_the_file(self, tmp_path):
        _write(tmp_path, BASIC)
        nested = tmp_path / "a"
        (nested / CONFIG_FILENAME).mkdir(parents=True)
        assert find_config(nested) == (tmp_path / CONFIG_FILENAME).resolve()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as info:
            load_config(tmp_path / "absent.toml")
        assert "not found" in info.value.problems[0]

    def test_malformed_toml(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(_write(tmp_path, "n_sites = [8,\n"))

    def test_explicit_defects(self, tmp_path):
        text = (
            'n_sites = 8\nobservables = ["entropy"]\n'
            'defects = [{kind = "energy", bond = 3, strength = 0.25}, '
            '{kind = "duality", bond = 6}]\n'
        )
        config = load_config(_write(tmp_path, text))
        assert [d.describe() for d in config.defects] == ["energy(0.25)@3", "duality@6"]

    def test_explicit_defect_outside_chain(self, tmp_path):
        text = 'n_sites = 8\nobservables = ["entropy"]\ndefects = [{kind = "duality", bond = 9}]\n'
        with pytest.raises(ConfigError) as info:
            load_config(_write(tmp_path, text))
        assert "outside the chain" in info.value.problems[0]


class TestRuntimeSettings:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("WORKBENCH_MAX_THREADS", raising=False)
        monkeypatch.delenv("WORKBENCH_LOG_LEVEL", raising=False)
        settings = RuntimeSettings.from_env()
        assert settings.max_threads >= 1
        assert settings.log_level == "INFO"

    def test_reads_environment(self, monkeypatch):
        monkeypatch.setenv("WORKBENCH_MAX_THREADS", "3")
        monkeypatch.setenv("WORKBENCH_LOG_LEVEL", "debug")
        assert RuntimeSettings.from_env() == RuntimeSettings(max_threads=3, log_level="DEBUG")

    @pytest.mark.parametrize("raw", ["many", "0", "-2"])
    def test_bad_thread_count(self, monkeypatch, raw):
        monkeypatch.setenv("WORKBENCH_MAX_THREADS", raw)
        with pytest.raises(ConfigError):
            RuntimeSettings.from_env()


class TestSchema:
    def test_lists_every_field(self):
        schema = config_schema()
        assert set(schema["properties"]) == set(ExperimentConfig.model_fields)
        assert "observables" in schema["required"]
