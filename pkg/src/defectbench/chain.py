"""Defected transverse-field Ising chains and their Majorana kernels.

Conventions (0-based):

* site j carries Majoranas ``2j`` (string times sigma^x) and ``2j+1`` (string times sigma^y);
* H = -1/2 sum_j (J_j sx_j sx_{j+1} + g_j sz_j) = (i/4) sum_mn S_mn a_m a_n, so the field g_j sits
  at S[2j, 2j+1], the bond J_j at S[2j+1, 2j+2];
* a duality defect on bond j replaces J_j and g_{j+1} by the coupling b = 1 at S[2j+1, 2j+3],
  leaving Majorana 2j+2 uncoupled;
* every term that wraps from Majorana 2N-1 to 0 or 1 is multiplied by ``fermion_boundary_sign``
  (-1 selects the even-parity sector of the spin ring).
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence
from decimal import Decimal

from pydantic import ValidationError

from .errors import SpecError
from .linalg import SkewMatrix
from .models import ChainSpec, DefectSpec, SubsystemSpec
from .precision import PrecisionContext

logger = logging.getLogger(__name__)

MIN_CHAIN_SITES = 8
DUALITY_COUPLING = Decimal(1)


# ─── Construction ────────────────────────────────────────────────────────────


def build_chain(
    n_sites: int,
    defects: Iterable[DefectSpec] = (),
    boundary_sign: int = -1,
) -> ChainSpec:
    """Critical ring (J_i = g_i = 1) with the given bond defects."""
    if n_sites % 2:
        raise SpecError(f"N must be even, got {n_sites}")
    if n_sites < MIN_CHAIN_SITES:
        raise SpecError(f"N must be at least {MIN_CHAIN_SITES}, got {n_sites}")
    defects = list(defects)
    bonds = [d.bond for d in defects]
    if len(set(bonds)) != len(bonds):
        raise SpecError(f"defect bonds must be distinct, got {sorted(bonds)}")
    out_of_range = [b for b in bonds if b >= n_sites]
    if out_of_range:
        raise SpecError(f"defect bonds {out_of_range} outside [0, {n_sites})")

    couplings = [Decimal(1)] * n_sites
    duality: list[int] = []
    for defect in defects:
        if defect.kind == "duality":
            duality.append(defect.bond)
        else:
            couplings[defect.bond] = defect.strength
    return chain_from_couplings(couplings, [Decimal(1)] * n_sites, duality, boundary_sign)


def chain_from_couplings(
    bond_couplings: Sequence[Decimal | int | str],
    site_fields: Sequence[Decimal | int | str],
    duality_bonds: Iterable[int] = (),
    boundary_sign: int = -1,
) -> ChainSpec:
    """ChainSpec from explicit coupling profiles; an open chain is a ring with J_{N-1} = 0."""
    try:
        return ChainSpec(
            n_sites=len(bond_couplings),
            bond_couplings=tuple(Decimal(str(v)) for v in bond_couplings),
            site_fields=tuple(Decimal(str(v)) for v in site_fields),
            duality_bonds=tuple(duality_bonds),
            fermion_boundary_sign=boundary_sign,
        )
    except ValidationError as exc:
        raise SpecError(_first_error(exc)) from exc


def _first_error(exc: ValidationError) -> str:
    err = exc.errors()[0]
    where = ".".join(str(p) for p in err["loc"]) or "chain"
    return f"{where}: {err['msg']}"


# ─── Defect placement ────────────────────────────────────────────────────────


def centered_defect_bond(subsystem: SubsystemSpec, n_sites: int | None = None) -> int:
    """The bond between the two middle sites of an even-length subsystem."""
    if subsystem.length % 2:
        raise SpecError(f"centered defect needs an even subsystem length, got {subsystem.length}")
    bond = subsystem.start + subsystem.length // 2 - 1
    return bond % n_sites if n_sites else bond


def antipodal_defect_bonds(subsystem: SubsystemSpec, n_sites: int) -> tuple[int, int]:
    """The centered bond and the bond half a ring away from it."""
    centered = centered_defect_bond(subsystem, n_sites)
    return centered, (centered + n_sites // 2) % n_sites


def boundary_defect_bond(subsystem: SubsystemSpec, n_sites: int) -> int:
    """The bond entering the subsystem from the left, between sites a-1 and a."""
    subsystem.check(n_sites)
    return (subsystem.start - 1) % n_sites


def off_center_defect_bond(
    subsystem: SubsystemSpec, offset: int, n_sites: int | None = None
) -> int:
    """Centered bond shifted by ``offset``; must stay between two sites of the subsystem."""
    half = subsystem.length // 2
    if not -(half - 1) <= offset <= subsystem.length - half - 1:
        raise SpecError(
            f"offset {offset} moves the defect out of a subsystem of {subsystem.length}"
        )
    bond = centered_defect_bond(subsystem) + offset
    return bond % n_sites if n_sites else bond


def complement(subsystem: SubsystemSpec, n_sites: int) -> SubsystemSpec:
    subsystem.check(n_sites)
    if subsystem.length == n_sites:
        raise SpecError(f"subsystem covers all {n_sites} sites; its complement is empty")
    return SubsystemSpec(
        start=(subsystem.start + subsystem.length) % n_sites,
        length=n_sites - subsystem.length,
    )


def defect_summary(spec: ChainSpec) -> str:
    """Short text naming every non-unit coupling, used in CSV rows and logs."""
    parts = [
        f"J{i}={value}"
        for i, value in enumerate(spec.bond_couplings)
        if value != 1 and i not in spec.duality_bonds
    ]
    parts += [f"g{i}={value}" for i, value in enumerate(spec.site_fields) if value != 1]
    parts += [f"dual{b}" for b in spec.duality_bonds]
    return ";".join(parts) or "uniform"


# ─── Majorana kernel ─────────────────────────────────────────────────────────


def kernel_terms(spec: ChainSpec) -> Iterator[tuple[int, int, Decimal]]:
    """Upper-triangle-agnostic (m, n, S_mn) couplings of the Majorana kernel."""
    n = spec.n_sites
    dim = 2 * n
    sign = spec.fermion_boundary_sign
    duality = set(spec.duality_bonds)
    dropped_fields = {(b + 1) % n for b in duality}

    for j in range(n):
        if j not in dropped_fields:
            yield 2 * j, 2 * j + 1, spec.site_fields[j]
    for j in range(n):
        if j in duality:
            target = 2 * j + 3
            coupling = DUALITY_COUPLING
        else:
            target = 2 * j + 2
            coupling = spec.bond_couplings[j]
        if target >= dim:
            coupling = coupling * sign
        yield 2 * j + 1, target % dim, coupling


def majorana_hamiltonian(spec: ChainSpec, ctx: PrecisionContext) -> SkewMatrix:
    """Real skew kernel S with single-particle Hamiltonian iS (dimension 2N)."""
    entries = ctx.zeros(2 * spec.n_sites)
    for m, n, value in kernel_terms(spec):
        if value == 0:
            continue
        entries[m, n] = entries[m, n] + ctx.mpf(value)
        entries[n, m] = -entries[m, n]
    logger.debug(
        "majorana_hamiltonian: N=%d sign=%+d duality=%s",
        spec.n_sites,
        spec.fermion_boundary_sign,
        list(spec.duality_bonds),
    )
    return SkewMatrix(entries)
