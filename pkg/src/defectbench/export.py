"""CSV and manifest writers for workbench runs."""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable
from pathlib import Path
from typing import Any

import numpy as np
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from .errors import SpecError
from .linalg import SkewMatrix
from .models import SweepRecord
from .precision import PrecisionContext

TEMPLATES_DIR = Path(__file__).parent / "templates"
MATRIX_COLUMNS = ["row", "col", "value"]


def _jinja_env() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(TEMPLATES_DIR)),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
    )


def render(template_name: str, context: dict[str, Any]) -> str:
    return _jinja_env().get_template(template_name).render(**context)


# ─── Sweep records ───────────────────────────────────────────────────────────


def write_records(path: Path, records: Iterable[SweepRecord]) -> Path:
    """Header plus one row per record, in the order given."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SweepRecord.columns())
        for record in records:
            writer.writerow(record.row())
    return path


def read_records(path: Path) -> list[SweepRecord]:
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != SweepRecord.columns():
            raise SpecError(f"{path.name}: unexpected header {reader.fieldnames}")
        return [SweepRecord.model_validate(row) for row in reader]


# ─── Matrices ────────────────────────────────────────────────────────────────


def write_matrix(path: Path, matrix: SkewMatrix, ctx: PrecisionContext) -> Path:
    """Upper-triangle (row, col, value) triplets of the non-zero entries."""
    path.parent.mkdir(parents=True, exist_ok=True)
    entries = matrix.entries
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(MATRIX_COLUMNS)
        for m in range(matrix.dim):
            for n in range(m + 1, matrix.dim):
                if entries[m, n] != 0:
                    writer.writerow([m, n, ctx.to_decimal_string(entries[m, n])])
    return path


def read_matrix(path: Path, dim: int, ctx: PrecisionContext) -> SkewMatrix:
    entries = ctx.zeros(dim)
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != MATRIX_COLUMNS:
            raise SpecError(f"{path.name}: unexpected header {reader.fieldnames}")
        for row in reader:
            m, n = int(row["row"]), int(row["col"])
            if not 0 <= m < n < dim:
                raise SpecError(f"{path.name}: entry ({m}, {n}) outside the upper triangle")
            entries[m, n] = ctx.mpf(row["value"])
            entries[n, m] = -entries[m, n]
    return SkewMatrix(entries)


def matrix_records(
    matrix: SkewMatrix, ctx: PrecisionContext, base: dict[str, Any]
) -> list[SweepRecord]:
    """The triplets of ``write_matrix`` as sweep rows: label = row, position = col."""
    entries = matrix.entries
    rows = []
    for m, n in zip(*np.triu_indices(matrix.dim, k=1)):
        if entries[m, n] != 0:
            rows.append(
                SweepRecord(
                    **base,
                    label=str(m),
                    position=str(n),
                    value=ctx.to_decimal_string(entries[m, n]),
                )
            )
    return rows


# ─── Manifests ───────────────────────────────────────────────────────────────


def write_manifest(output_dir: Path, manifest: dict[str, Any]) -> list[Path]:
    """run_manifest.json (machine-readable) and run_manifest.md (rendered)."""
    output_dir.mkdir(parents=True, exist_ok=True)
    json_path = output_dir / "run_manifest.json"
    json_path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    md_path = output_dir / "run_manifest.md"
    md_path.write_text(render("run_manifest.md.j2", manifest))
    return [json_path, md_path]
