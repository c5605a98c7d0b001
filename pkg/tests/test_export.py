"""Tests for the CSV writers and the manifest templates."""

from __future__ import annotations

import json

import pytest
from jinja2 import UndefinedError

from defectbench.errors import SpecError
from defectbench.export import (
    matrix_records,
    read_matrix,
    read_records,
    render,
    write_manifest,
    write_matrix,
    write_records,
)
from defectbench.linalg import SkewMatrix
from defectbench.models import SweepRecord


def _record(label: str, value: str) -> SweepRecord:
    return SweepRecord(
        n_sites=8,
        subsystem_length=4,
        defect="energy@1",
        j_star="0.2",
        observable="entropy",
        label=label,
        value=value,
        dps=30,
        wall_time_ms=3,
    )


@pytest.fixture()
def w_pair(ctx) -> SkewMatrix:
    entries = ctx.zeros(4)
    entries[0, 3] = ctx.mpf("0.75")
    return SkewMatrix(entries)


def _manifest(**overrides) -> dict:
    manifest = {
        "status": "ok",
        "created": "2026-01-01T00:00:00+00:00",
        "versions": {
            "defectbench": "0.1.0",
            "python": "3.12.0",
            "mpmath": "1.3.0",
            "numpy": "2.0.0",
            "scipy": "1.13.0",
        },
        "sector": {
            "fermion_boundary_sign": -1,
            "spin_parity": 1,
            "rule": "ground state taken in the even spin-parity sector",
        },
        "zero_modes": "filled in the Schur orientation",
        "points": [
            {
                "n_sites": 8,
                "j_star": "0.2",
                "defect": "energy@1",
                "dps": 30,
                "escalated": False,
                "zero_modes": 0,
                "parity": 1,
                "parity_fixed": False,
                "status": "ok",
            }
        ],
        "files": ["entropy.csv"],
        "failures": [],
        "config": {"n_sites": [8]},
    }
    manifest.update(overrides)
    return manifest


# ── Matrices ──────────────────────────────────────────────────────────────────

class TestMatrixFiles:
    def test_round_trip_keeps_working_precision(self, tmp_path, ctx60, rng):
        values = rng.uniform(-1.0, 1.0, size=(6, 6))
        w = SkewMatrix.from_array(values - values.T, ctx60)
        path = write_matrix(tmp_path / "w.csv", w, ctx60)
        back = read_matrix(path, 6, ctx60)
        assert (back - w).max_abs() < ctx60.power_of_ten(-55)

    def test_only_nonzero_upper_entries(self, tmp_path, ctx, w_pair):
        path = write_matrix(tmp_path / "w.csv", w_pair, ctx)
        lines = path.read_text().splitlines()
        assert lines[0] == "row,col,value"
        assert len(lines) == 2
        assert lines[1].startswith("0,3,")

    def test_rejects_lower_triangle(self, tmp_path, ctx):
        path = tmp_path / "w.csv"
        path.write_text("row,col,value\n3,0,0.5\n")
        with pytest.raises(SpecError, match="upper triangle"):
            read_matrix(path, 4, ctx)

    def test_rejects_foreign_header(self, tmp_path, ctx):
        path = tmp_path / "w.csv"
        path.write_text("i,j,v\n0,1,0.5\n")
        with pytest.raises(SpecError, match="unexpected header"):
            read_matrix(path, 4, ctx)

    def test_matrix_records_use_row_and_column(self, ctx, w_pair):
        base = _record("", "0").model_dump(exclude={"label", "position", "value"})
        (row,) = matrix_records(w_pair, ctx, base)
        assert (row.label, row.position) == ("0", "3")
        assert ctx.mpf(row.value) == w_pair.entries[0, 3]


# ── Sweep records ─────────────────────────────────────────────────────────────

class TestRecords:
    def test_write_then_read_keeps_order(self, tmp_path):
        records = [_record("b", "0.5"), _record("a", "0.25")]
        path = write_records(tmp_path / "entropy.csv", records)
        assert read_records(path) == records

    def test_header_and_column_order(self, tmp_path):
        path = write_records(tmp_path / "entropy.csv", [_record("", "1")])
        header = path.read_text().splitlines()[0].split(",")
        assert header[0] == "n_sites"
        assert header[-1] == "wall_time_ms"

    def test_empty_file_still_has_header(self, tmp_path):
        path = write_records(tmp_path / "entropy.csv", [])
        assert path.read_text() == ",".join(SweepRecord.columns()) + "\n"

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "entropy.csv"
        path.write_text("n,value\n8,1\n")
        with pytest.raises(SpecError):
            read_records(path)


# ── Manifests ─────────────────────────────────────────────────────────────────

class TestManifest:
    def test_writes_json_and_markdown(self, tmp_path):
        paths = write_manifest(tmp_path, _manifest())
        assert [p.name for p in paths] == ["run_manifest.json", "run_manifest.md"]
        assert json.loads(paths[0].read_text())["status"] == "ok"
        text = paths[1].read_text()
        assert text.startswith("# defectbench run (ok)")
        assert "| 8 | 0.2 | energy@1 | 30 | no | 0 | 1 | no | ok |" in text

    def test_failures_section_only_when_partial(self):
        assert "## Failures" not in render("run_manifest.md.j2", _manifest())
        partial = _manifest(status="partial", failures=["N=16: precision escalation"])
        text = render("run_manifest.md.j2", partial)
        assert "## Failures" in text
        assert "- N=16: precision escalation" in text

    def test_missing_key_is_an_error(self):
        manifest = _manifest()
        del manifest["sector"]
        with pytest.raises(UndefinedError):
            render("run_manifest.md.j2", manifest)
