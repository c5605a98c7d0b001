"""Pydantic data models for the defect workbench."""

from __future__ import annotations

from decimal import Decimal
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import SpecError

DefectKind = Literal["energy", "antiperiodic", "duality"]
BondKind = Literal["field", "hopping"]


# ─── Chain geometry ──────────────────────────────────────────────────────────


class DefectSpec(BaseModel):
    """One modified bond.  Antiperiodic defects are energy defects pinned at J* = -1."""

    model_config = ConfigDict(frozen=True)

    kind: DefectKind
    bond: int = Field(ge=0)
    strength: Decimal | None = None

    @model_validator(mode="after")
    def _check_strength(self) -> DefectSpec:
        if self.kind == "antiperiodic":
            if self.strength is not None and self.strength != -1:
                raise ValueError("antiperiodic defects fix strength = -1")
            object.__setattr__(self, "strength", Decimal(-1))
        elif self.kind == "energy" and self.strength is None:
            raise ValueError("energy defects need a strength")
        elif self.kind == "duality" and self.strength is not None:
            raise ValueError("duality defects take no strength")
        return self

    def describe(self) -> str:
        if self.kind == "duality":
            return f"duality@{self.bond}"
        return f"{self.kind}({self.strength})@{self.bond}"


class ChainSpec(BaseModel):
    """Transverse-field Ising ring: bond i links sites i and i+1 mod N."""

    model_config = ConfigDict(frozen=True)

    n_sites: int = Field(ge=2)
    bond_couplings: tuple[Decimal, ...]
    site_fields: tuple[Decimal, ...]
    duality_bonds: tuple[int, ...] = ()
    fermion_boundary_sign: Literal[1, -1] = -1

    @field_validator("n_sites")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError(f"n_sites must be even, got {value}")
        return value

    @model_validator(mode="after")
    def _check_lengths(self) -> ChainSpec:
        n = self.n_sites
        if len(self.bond_couplings) != n or len(self.site_fields) != n:
            raise ValueError(
                f"expected {n} couplings and fields, got "
                f"{len(self.bond_couplings)} and {len(self.site_fields)}"
            )
        bonds = self.duality_bonds
        if len(set(bonds)) != len(bonds) or any(not 0 <= b < n for b in bonds):
            raise ValueError(f"duality bonds must be distinct indices in [0, {n}), got {bonds}")
        object.__setattr__(self, "duality_bonds", tuple(sorted(bonds)))
        return self

    def skipped_majoranas(self) -> list[int]:
        """Majoranas left without any coupling by the duality defects."""
        return [(2 * b + 2) % (2 * self.n_sites) for b in self.duality_bonds]


class SubsystemSpec(BaseModel):
    """Sites a .. a+L-1 (mod N)."""

    model_config = ConfigDict(frozen=True)

    start: int = Field(ge=0)
    length: int = Field(ge=1)

    def check(self, n_sites: int) -> None:
        if self.length > n_sites:
            raise SpecError(f"subsystem length {self.length} exceeds N={n_sites}")
        if not self.start < n_sites:
            raise SpecError(f"subsystem start {self.start} outside a chain of {n_sites} sites")

    def sites(self, n_sites: int) -> list[int]:
        self.check(n_sites)
        return [(self.start + k) % n_sites for k in range(self.length)]

    def majorana_indices(self, n_sites: int) -> list[int]:
        """{2a, ..., 2(a+L)-1} mod 2N, in order."""
        self.check(n_sites)
        return [(2 * self.start + k) % (2 * n_sites) for k in range(2 * self.length)]


class BipartitionSpec(BaseModel):
    """Left block = the first ``cut`` sites (2*cut Majoranas) of a subsystem."""

    model_config = ConfigDict(frozen=True)

    cut: int = Field(ge=1)

    def blocks(self, n_modes: int) -> tuple[list[int], list[int]]:
        if not self.cut < n_modes:
            raise SpecError(f"cut {self.cut} must lie strictly inside {n_modes} modes")
        split = 2 * self.cut
        return list(range(split)), list(range(split, 2 * n_modes))


# ─── Analysis output ─────────────────────────────────────────────────────────


class ProfilePoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    position: Decimal
    value: Any  # mpf at the working precision
    kind: str = ""  # field | hopping | symmetric | cross | skipped

    @property
    def magnitude(self) -> Any:
        return abs(self.value)


class CouplingProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    points: tuple[ProfilePoint, ...] = ()

    @model_validator(mode="after")
    def _sorted(self) -> CouplingProfile:
        positions = [p.position for p in self.points]
        if positions != sorted(positions):
            raise ValueError(f"profile {self.label!r} points must be sorted by position")
        return self

    def values(self) -> list[Any]:
        return [p.value for p in self.points]

    def value_at(self, position: Decimal | int) -> Any:
        target = Decimal(position)
        for point in self.points:
            if point.position == target:
                return point.value
        raise KeyError(f"no point at position {position} in profile {self.label!r}")


# ─── Workbench rows ──────────────────────────────────────────────────────────


class SweepRecord(BaseModel):
    """One CSV row.  ``wall_time_ms`` is the only non-deterministic column and comes last."""

    model_config = ConfigDict(frozen=True)

    n_sites: int
    subsystem_length: int
    defect: str
    j_star: str
    observable: str
    label: str = ""
    position: str = ""
    value: str
    value_bits: str = ""
    dps: int
    wall_time_ms: int = 0

    @classmethod
    def columns(cls) -> list[str]:
        return list(cls.model_fields)

    def row(self) -> list[str]:
        return [str(getattr(self, name)) for name in self.columns()]
