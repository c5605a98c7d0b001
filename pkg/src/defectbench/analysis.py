"""Coupling profiles, entropy-scaling fits and the boundary effective central charge.

Index convention: profiles read the 0-based Majorana indices of a subsystem's W (dimension 2L).
The mirror pair of the 1-based entry K_{L-m+1, L+m} is (L-m, L+m-1) here; every profile in
the package goes through this module so that translation happens once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Iterable

import numpy as np

from .errors import SpecError
from .linalg import SkewMatrix, dilog
from .models import CouplingProfile, ProfilePoint, SubsystemSpec
from .precision import Number, PrecisionContext

logger = logging.getLogger(__name__)


# ─── Profiles ────────────────────────────────────────────────────────────────


def nn_profile(w: SkewMatrix, label: str = "nn") -> CouplingProfile:
    """W[m, m+1] for m = 0 .. 2L-2; even m are field-type bonds, odd m hopping-type."""
    entries = w.entries
    return CouplingProfile(
        label=label,
        points=tuple(
            ProfilePoint(
                position=Decimal(m),
                value=entries[m, m + 1],
                kind="field" if m % 2 == 0 else "hopping",
            )
            for m in range(w.dim - 1)
        ),
    )


def symmetric_hopping(w: SkewMatrix, label: str = "symmetric") -> CouplingProfile:
    """Mirror-pair couplings W[L-m, L+m-1], m = 1 .. L, at x = m / L."""
    sites = w.dim // 2
    if sites % 2:
        raise SpecError(f"symmetric hopping needs an even subsystem length, got {sites}")
    entries = w.entries
    return CouplingProfile(
        label=label,
        points=tuple(
            ProfilePoint(
                position=Decimal(m) / Decimal(sites),
                value=entries[sites - m, sites + m - 1],
                kind="symmetric",
            )
            for m in range(1, sites + 1)
        ),
    )


def defect_position(bond: int, subsystem: SubsystemSpec, n_sites: int) -> int:
    """Majorana position m of the nn bond (m, m+1) that carries chain bond ``bond``."""
    return 2 * ((bond - subsystem.start) % n_sites) + 1


def profile_diff(
    w_1: SkewMatrix, w_2: SkewMatrix, defect_index: int = 0, label: str = "diff"
) -> CouplingProfile:
    """nn profile of W_1 - W_2 with positions measured from ``defect_index``."""
    if w_1.dim != w_2.dim:
        raise SpecError(f"dimension mismatch: {w_1.dim} vs {w_2.dim}")
    base = nn_profile(w_1 - w_2, label=label)
    return CouplingProfile(
        label=label,
        points=tuple(
            ProfilePoint(position=p.position - defect_index, value=p.value, kind=p.kind)
            for p in base.points
        ),
    )


def decay_width(profile: CouplingProfile, threshold: Any) -> Decimal:
    """Largest distance from the origin, in lattice sites, where |value| exceeds ``threshold``."""
    above = [abs(p.position) for p in profile.points if abs(p.value) > threshold]
    return max(above) / 2 if above else Decimal(0)


def cross_defect_block(
    w: SkewMatrix, bond: int, subsystem: SubsystemSpec, n_sites: int, width: int
) -> np.ndarray:
    """Couplings between the ``width`` sites left of an interior defect and those right of it."""
    boundary = defect_position(bond, subsystem, n_sites) + 1
    if not 0 < boundary < w.dim:
        raise SpecError(f"bond {bond} is not inside the subsystem")
    left = list(range(max(0, boundary - 2 * width), boundary))
    right = list(range(boundary, min(w.dim, boundary + 2 * width)))
    return w.entries[np.ix_(left, right)]


def cross_defect_mask(dim: int, boundary: int) -> np.ndarray:
    """True where (m, n) lie on opposite sides of the Majorana ``boundary``."""
    side = np.arange(dim) >= boundary
    return side[:, None] != side[None, :]


def skipped_site_couplings(
    w: SkewMatrix, skipped: int, distance: int, label: str = "skipped"
) -> CouplingProfile:
    """W[skipped, t] for the Majoranas t of the sites ``distance`` sites away on each side."""
    site = skipped // 2
    sites = w.dim // 2
    points = []
    for neighbour in (site - distance, site + distance):
        if not 0 <= neighbour < sites:
            continue
        for t in (2 * neighbour, 2 * neighbour + 1):
            points.append(
                ProfilePoint(
                    position=Decimal(t - skipped), value=w.entries[skipped, t], kind="skipped"
                )
            )
    return CouplingProfile(label=label, points=tuple(sorted(points, key=lambda p: p.position)))


# ─── Entropy scaling ─────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ScalingFit:
    slope: Number
    intercept: Number
    residual: Number


def chord_log(n_sites: int, length: int, ctx: PrecisionContext) -> Number:
    """ln[(N / pi) sin(pi L / N)]."""
    mp = ctx.mp
    return mp.log(n_sites / mp.pi * mp.sin(mp.pi * length / n_sites))


def fit_entropy_scaling(
    samples: Iterable[tuple[int, int, Any]], ctx: PrecisionContext
) -> ScalingFit:
    """Least squares of S against ln[(N/pi) sin(pi L/N)]; residual is the max deviation."""
    rows = sorted((n, length, ctx.mpf(s)) for n, length, s in samples)
    if len(rows) < 3:
        raise SpecError(f"scaling fit needs at least 3 samples, got {len(rows)}")
    xs = [chord_log(n, length, ctx) for n, length, _ in rows]
    ys = [s for _, _, s in rows]
    ordered = sorted(xs)
    if any(b - a <= ctx.convergence_eps for a, b in zip(ordered, ordered[1:])):
        raise SpecError("scaling fit needs distinct abscissae ln[(N/pi) sin(pi L/N)]")

    count = len(xs)
    x_mean = sum(xs, ctx.mp.zero) / count
    y_mean = sum(ys, ctx.mp.zero) / count
    sxx = sum(((x - x_mean) ** 2 for x in xs), ctx.mp.zero)
    sxy = sum(((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys)), ctx.mp.zero)
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    residual = max(abs(y - (slope * x + intercept)) for x, y in zip(xs, ys))
    logger.debug("fit_entropy_scaling: %d samples, residual %s", count, ctx.mp.nstr(residual, 5))
    return ScalingFit(slope, intercept, residual)


# ─── Effective central charge ────────────────────────────────────────────────


def transmission(j_star: Any, ctx: PrecisionContext) -> Number:
    """s = |sin(2 arccot J*)| = |2 J* / (1 + J*^2)|."""
    j = ctx.mpf(j_star)
    return abs(2 * j / (1 + j * j))


def c_eff(j_star: Any, ctx: PrecisionContext) -> Number:
    """Effective central charge of an interval ending on a boundary defect of strength J*.

    c_eff(s) = s/3 - 1/3 - (3/pi^2) [(s+1) ln(s+1) ln(s) + (s-1) Li2(1-s) + (s+1) Li2(-s)].
    The first bracket term tends to 0 as s -> 0 and is dropped below 10^-(dps/2).
    """
    mp = ctx.mp
    s = transmission(j_star, ctx)
    log_term = mp.zero if s < ctx.zero_mode_eps else (s + 1) * mp.log(s + 1) * mp.log(s)
    bracket = log_term + (s - 1) * dilog(1 - s, ctx) + (s + 1) * dilog(-s, ctx)
    return s / 3 - mp.one / 3 - 3 / mp.pi**2 * bracket
