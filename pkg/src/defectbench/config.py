"""TOML experiment configuration for the defect workbench.

The file is flat: top-level keys, arrays for sweeps and repeated values.  Floats are parsed
as ``Decimal`` so that a strength written ``0.2`` is exactly two tenths at any precision.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    try:
        import tomllib
    except ImportError:
        import tomli as tomllib  # type: ignore[no-reuse-import]

from .chain import MIN_CHAIN_SITES
from .errors import ConfigError
from .models import DefectSpec
from .precision import DEFAULT_PRECISION_RATIO, MAX_PRECISION_RATIO

CONFIG_FILENAME = "defectbench.toml"
DEFAULT_OUTPUT_DIR = "defectbench-out"
DEFAULT_SPECTRUM_COUNT = 10

ObservableName = Literal[
    "k_matrix",
    "nn_profile",
    "symmetric_hopping",
    "entropy",
    "renyi",
    "entropy_profile",
    "spectrum",
    "negativity",
    "fidelity",
    "c_eff",
    "scaling_fit",
]
Placement = Literal["centered", "boundary", "antipodal", "off_center", "complement"]
SweepDefectKind = Literal["none", "energy", "antiperiodic", "duality"]

# Order in which observables are evaluated and files are listed.
OBSERVABLE_ORDER: tuple[str, ...] = ObservableName.__args__  # type: ignore[attr-defined]

# Placements that put the defect on the middle bond of the subsystem.
_CENTERED_PLACEMENTS = {"centered", "antipodal", "off_center", "complement"}


class ExperimentConfig(BaseModel):
    """One experiment: a sweep over chain sizes and defect strengths plus the observables."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    # geometry
    n_sites: list[int] = Field(min_length=1)
    subsystem_start: int = Field(default=0, ge=0)
    subsystem_length: int | None = Field(default=None, ge=1)
    lengths: list[int] = Field(default_factory=list)

    # defects
    defect_kind: SweepDefectKind = "none"
    j_star: list[Decimal] = Field(default_factory=list)
    placement: Placement = "centered"
    offset: int = 0
    defects: list[DefectSpec] = Field(default_factory=list)
    boundary_sign: Literal[1, -1] = -1

    # numerics and outputs
    precision_ratio: Decimal = Decimal(str(DEFAULT_PRECISION_RATIO))
    observables: list[ObservableName] = Field(min_length=1)
    spectrum_count: int = Field(default=DEFAULT_SPECTRUM_COUNT, ge=1)
    negativity_cut: int | None = Field(default=None, ge=1)
    renyi_alpha: Decimal | None = None
    fidelity_partner_j_star: Decimal | None = None
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)

    @field_validator("n_sites", "j_star", "lengths", mode="before")
    @classmethod
    def _scalar_to_list(cls, value: Any) -> Any:
        return value if isinstance(value, list) else [value]

    @field_validator("n_sites")
    @classmethod
    def _chain_sizes(cls, value: list[int]) -> list[int]:
        bad = [n for n in value if n % 2 or n < MIN_CHAIN_SITES]
        if bad:
            raise ValueError(f"chain sizes must be even and at least {MIN_CHAIN_SITES}, got {bad}")
        return value

    @field_validator("observables")
    @classmethod
    def _distinct(cls, value: list[str]) -> list[str]:
        if len(set(value)) != len(value):
            raise ValueError(f"observables listed twice: {value}")
        return value

    @field_validator("precision_ratio")
    @classmethod
    def _ratio(cls, value: Decimal) -> Decimal:
        if not 0 < value <= Decimal(str(MAX_PRECISION_RATIO)):
            raise ValueError(f"must lie in (0, {MAX_PRECISION_RATIO}], got {value}")
        return value

    @model_validator(mode="after")
    def _prerequisites(self) -> ExperimentConfig:
        wanted = set(self.observables)
        problems: list[str] = []

        if self.defect_kind == "energy" and not self.j_star:
            problems.append("energy defects need at least one j_star value")
        if self.defect_kind in ("antiperiodic", "duality", "none") and self.j_star:
            problems.append(f"j_star does not apply to defect_kind = {self.defect_kind!r}")
        if "negativity" in wanted and self.negativity_cut is None:
            problems.append("negativity requires negativity_cut")
        if "renyi" in wanted:
            if self.renyi_alpha is None:
                problems.append("renyi requires renyi_alpha")
            elif self.renyi_alpha <= 0 or self.renyi_alpha == 1:
                problems.append(f"renyi_alpha must be positive and not 1, got {self.renyi_alpha}")
        if "fidelity" in wanted:
            if self.fidelity_partner_j_star is None:
                problems.append("fidelity requires fidelity_partner_j_star")
            if self.defect_kind != "energy":
                problems.append("fidelity compares energy defects; set defect_kind = 'energy'")
        if "c_eff" in wanted and not self.j_star:
            problems.append("c_eff requires j_star values")
        if "entropy_profile" in wanted and not self.lengths:
            problems.append("entropy_profile requires lengths")
        if "scaling_fit" in wanted and len(self.n_sites) * max(1, len(self.lengths)) < 3:
            problems.append("scaling_fit needs at least 3 (N, L) samples")

        for n in self.n_sites:
            problems.extend(self._geometry_problems(n, wanted))
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def _geometry_problems(self, n: int, wanted: set[str]) -> list[str]:
        length = self.length_for(n)
        problems = []
        if self.subsystem_start >= n:
            problems.append(f"N={n}: subsystem_start {self.subsystem_start} outside the chain")
        if not length < n:
            problems.append(f"N={n}: subsystem_length {length} must be below N")
            return problems
        measured = n - length if self.placement == "complement" else length
        if self.defect_kind != "none" and self.placement in _CENTERED_PLACEMENTS and length % 2:
            problems.append(f"N={n}: placement {self.placement!r} needs an even subsystem length")
        if "symmetric_hopping" in wanted and measured % 2:
            problems.append(f"N={n}: symmetric_hopping needs an even measured length")
        if self.negativity_cut is not None and not self.negativity_cut < measured:
            problems.append(f"N={n}: negativity_cut must lie inside the {measured}-site subsystem")
        too_long = [ell for ell in self.lengths if not 0 < ell < n]
        if too_long:
            problems.append(f"N={n}: lengths {too_long} must lie in (0, N)")
        explicit = [d.bond for d in self.defects if d.bond >= n]
        if explicit:
            problems.append(f"N={n}: defect bonds {explicit} outside the chain")
        return problems

    def length_for(self, n_sites: int) -> int:
        """Subsystem length at chain size N; half the chain unless set."""
        return self.subsystem_length if self.subsystem_length is not None else n_sites // 2

    def sweep_points(self) -> list[tuple[int, Decimal | None]]:
        """(N, J*) in config order, N outermost."""
        strengths: list[Decimal | None] = list(self.j_star) or [None]
        return [(n, j) for n in self.n_sites for j in strengths]

    def ordered_observables(self) -> list[str]:
        wanted = set(self.observables)
        return [name for name in OBSERVABLE_ORDER if name in wanted]


@dataclass(frozen=True)
class RuntimeSettings:
    """Process-level knobs read from the environment."""

    max_threads: int
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> RuntimeSettings:
        raw = os.environ.get("WORKBENCH_MAX_THREADS", "")
        try:
            threads = int(raw) if raw else (os.cpu_count() or 1)
        except ValueError as exc:
            raise ConfigError([f"WORKBENCH_MAX_THREADS: not an integer: {raw!r}"]) from exc
        if threads < 1:
            raise ConfigError([f"WORKBENCH_MAX_THREADS: must be at least 1, got {threads}"])
        level = os.environ.get("WORKBENCH_LOG_LEVEL", "INFO").upper()
        return cls(max_threads=threads, log_level=level)


def find_config(search_root: Path | None = None) -> Path | None:
    """Nearest defectbench.toml file in ``search_root`` (or cwd) or one of its parents."""
    start = Path(search_root or Path.cwd()).resolve()
    candidates = (folder / CONFIG_FILENAME for folder in (start, *start.parents))
    return next((path for path in candidates if path.is_file()), None)


def parse_config(raw: dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(_problems(exc)) from exc


def _problems(exc: ValidationError) -> list[str]:
    lines = []
    for err in exc.errors():
        where = ".".join(str(p) for p in err["loc"]) or "config"
        message = err["msg"].removeprefix("Value error, ")
        lines.extend(f"{where}: {part}" for part in message.split("; "))
    return lines


def load_config(path: Path | None = None) -> ExperimentConfig:
    """Load and validate an experiment file.

    ``path`` may be the file itself or a directory to search upward from.
    """
    if path is not None and not path.is_dir():
        config_path: Path | None = path if path.is_file() else None
    else:
        config_path = find_config(path)
    if config_path is None:
        raise ConfigError([f"{CONFIG_FILENAME}: not found from {path or Path.cwd()}"])

    try:
        with config_path.open("rb") as f:
            raw = tomllib.load(f, parse_float=Decimal)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"{config_path.name}: {exc}"]) from exc

    config = parse_config(raw)
    if not config.output_dir.is_absolute():
        config = config.model_copy(update={"output_dir": config_path.parent / config.output_dir})
    return config


def config_schema() -> dict[str, Any]:
    return ExperimentConfig.model_json_schema()
