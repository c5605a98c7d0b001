"""Ground-state covariance matrices and entanglement Hamiltonians of Majorana chains.

A covariance matrix is the real skew Gamma with <a_m a_n> = delta_mn + i Gamma_mn.  Pure states
satisfy Gamma^2 = -1; the parity of a pure state is Pf(Gamma).
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from .chain import majorana_hamiltonian
from .errors import PrecisionEscalationError, SingularMatrixError, SpecError
from .linalg import (
    HermitianMatrix,
    SchurForm,
    SkewMatrix,
    apply_scalar,
    hermitian_eigen,
    invert,
    max_abs,
    orthogonal_det_sign,
    skew_function,
    skew_schur,
)
from .models import ChainSpec, SubsystemSpec
from .precision import Number, PrecisionContext

logger = logging.getLogger(__name__)


# ─── Types ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Majorana covariance Gamma plus how the ground state was selected.

    ``zero_modes`` counts Schur blocks treated as exact zero modes, ``parity`` is Pf(Gamma)
    for full-system ground states (None for restrictions) and ``parity_fixed`` records
    whether a zero-mode block was flipped to reach the requested parity.
    """

    gamma: SkewMatrix
    zero_modes: int = 0
    parity: int | None = None
    parity_fixed: bool = False

    @property
    def dim(self) -> int:
        return self.gamma.dim

    @property
    def n_modes(self) -> int:
        return self.gamma.dim // 2

    @cached_property
    def purity_defect(self) -> Number:
        """max |(Gamma^2 + 1)_mn|."""
        square = self.gamma.entries @ self.gamma.entries
        for i in range(self.dim):
            square[i, i] += 1
        return max_abs(square)

    def is_pure(self, ctx: PrecisionContext) -> bool:
        return self.purity_defect < ctx.purity_eps


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """nu descending in [0, 1]; eps = log((1+nu)/(1-nu)), +inf where nu reached 1."""

    nu: tuple
    eps: tuple
    clamp_distance: Number = 0

    def __len__(self) -> int:
        return len(self.nu)

    def finite_eps(self) -> list:
        return [e for e in self.eps if not _is_inf(e)]


def _is_inf(value: Any) -> bool:
    return hasattr(value, "_mpf_") and value.context.isinf(value)


# ─── Ground states ───────────────────────────────────────────────────────────


def ground_state_covariance(
    s: SkewMatrix,
    ctx: PrecisionContext,
    *,
    parity: int | None = None,
    method: str = "auto",
) -> CovarianceMatrix:
    """Gamma = U (+) [[0, -1], [1, 0]] U^T over the Schur blocks of S.

    Blocks with eps below ``ctx.zero_mode_eps`` are zero modes.  They are filled in the
    Schur orientation; when ``parity`` is given and the result has the other parity, the
    last zero-mode block is flipped.
    """
    form = skew_schur(s, ctx, method=method)
    return covariance_from_schur(form, ctx, parity=parity)


def covariance_from_schur(
    form: SchurForm, ctx: PrecisionContext, *, parity: int | None = None
) -> CovarianceMatrix:
    cut = ctx.zero_mode_eps
    zero_blocks = [k for k, eps in enumerate(form.block_values) if eps < cut]
    fill = [1] * len(form.block_values)
    # Pf of the block [[0, -v], [v, 0]] is -v
    found = orthogonal_det_sign(form.rotation, ctx) * (-1) ** len(fill)

    flipped = False
    if parity is not None and found != parity:
        if zero_blocks:
            fill[zero_blocks[-1]] = -1
            found = -found
            flipped = True
        else:
            logger.info(
                "ground state has parity %+d but %+d was requested and no zero mode is free",
                found,
                parity,
            )
    if zero_blocks:
        logger.info(
            "filled %d zero mode(s); parity %+d%s",
            len(zero_blocks),
            found,
            " after flipping the last zero-mode block" if flipped else "",
        )
    gamma = form.reconstruct([ctx.mpf(v) for v in fill])
    return CovarianceMatrix(gamma, zero_modes=len(zero_blocks), parity=found, parity_fixed=flipped)


def chain_ground_state(spec: ChainSpec, ctx: PrecisionContext) -> CovarianceMatrix:
    """Ground state of a chain in the parity sector selected by its boundary sign."""
    return ground_state_covariance(
        majorana_hamiltonian(spec, ctx), ctx, parity=-spec.fermion_boundary_sign
    )


def ground_state_energy(s: SkewMatrix, ctx: PrecisionContext) -> Number:
    return -sum(skew_schur(s, ctx).block_values, ctx.mp.zero) / 2


def state_energy(s: SkewMatrix, gamma: CovarianceMatrix, ctx: PrecisionContext) -> Number:
    """<H> = -1/4 sum_mn S_mn Gamma_mn; differs from the ground energy after a parity flip."""
    total = sum((a * b for a, b in zip(s.entries.flat, gamma.gamma.entries.flat)), ctx.mp.zero)
    return -total / 4


def uniform_ring_covariance(
    n_sites: int,
    ctx: PrecisionContext,
    *,
    boundary_sign: int = -1,
    subsystem: SubsystemSpec | None = None,
) -> CovarianceMatrix:
    """Closed-form ground state of the uniform critical ring with antiperiodic fermions.

    Gamma[2j, 2k+1] = -1 / (N sin(pi (j - k - 1/2) / N)) and even-even and odd-odd entries
    vanish.  With ``subsystem`` only the restricted block is built.
    """
    if boundary_sign != -1:
        raise SpecError("periodic fermions carry a zero mode; use ground_state_covariance")
    if n_sites < 2 or n_sites % 2:
        raise SpecError(f"N must be even and at least 2, got {n_sites}")
    mp = ctx.mp
    sites = subsystem.sites(n_sites) if subsystem else list(range(n_sites))
    size = len(sites)
    denominator = {
        d: -1 / (n_sites * mp.sin(mp.pi * (d - mp.mpf(0.5)) / n_sites))
        for d in range(-n_sites + 1, n_sites)
    }
    entries = ctx.zeros(2 * size)
    for a, j in enumerate(sites):
        for b, k in enumerate(sites):
            value = denominator[j - k]
            entries[2 * a, 2 * b + 1] = value
            entries[2 * b + 1, 2 * a] = -value
    return CovarianceMatrix(SkewMatrix(entries), parity=1 if subsystem is None else None)


# ─── Restriction and spectra ─────────────────────────────────────────────────


def restrict(gamma: CovarianceMatrix, subsystem: SubsystemSpec) -> CovarianceMatrix:
    """Principal submatrix on the Majoranas of ``subsystem`` (wrapping mod 2N)."""
    indices = subsystem.majorana_indices(gamma.n_modes)
    return CovarianceMatrix(gamma.gamma.take(indices))


def _nu_values(form: SchurForm, ctx: PrecisionContext) -> tuple[list, Number]:
    one = ctx.mp.one
    clamp = ctx.mp.zero
    values = []
    for nu in form.block_values:
        if nu > one:
            clamp = max(clamp, nu - one)
            nu = one
        values.append(nu)
    return values, clamp


def _entanglement_energy(nu: Number, ctx: PrecisionContext) -> Number:
    if nu >= 1:
        return ctx.mp.inf
    return ctx.mp.log((1 + nu) / (1 - nu))


def single_particle_spectrum(gamma_a: CovarianceMatrix, ctx: PrecisionContext) -> SpectrumResult:
    form = skew_schur(gamma_a.gamma, ctx)
    nu, clamp = _nu_values(form, ctx)
    if clamp:
        logger.debug("single_particle_spectrum: clamped nu by %s", ctx.mp.nstr(clamp, 5))
    return SpectrumResult(
        nu=tuple(nu),
        eps=tuple(_entanglement_energy(v, ctx) for v in nu),
        clamp_distance=clamp,
    )


def many_body_spectrum(eps: list | tuple, count: int) -> list:
    """The ``count`` smallest subset sums of ``eps`` (with multiplicity), ascending.

    Best-first expansion: a subset whose largest index is i spawns "add i+1" and
    "replace i by i+1", which reaches every subset exactly once in sorted order.
    """
    if count < 1:
        raise SpecError(f"count must be at least 1, got {count}")
    values = sorted(eps)
    if any(v < 0 or _is_inf(v) for v in values):
        raise SpecError("many-body spectrum needs finite non-negative entanglement energies")
    zero = values[0] * 0 if values else 0
    levels = [zero]
    if not values:
        return levels
    heap = [(values[0], 0)]
    while heap and len(levels) < count:
        total, last = heapq.heappop(heap)
        levels.append(total)
        if last + 1 < len(values):
            heapq.heappush(heap, (total + values[last + 1], last + 1))
            heapq.heappush(heap, (total - values[last] + values[last + 1], last + 1))
    return levels


# ─── Entanglement Hamiltonian ────────────────────────────────────────────────


def _required_digits(distance: Number, ctx: PrecisionContext) -> int:
    if distance > 0:
        needed = math.ceil(-float(ctx.mp.log10(distance))) + 16
        return max(needed, 2 * ctx.decimal_digits)
    return 2 * ctx.decimal_digits


def _check_resolved(nu: list, ctx: PrecisionContext) -> None:
    if not nu:
        return
    distance = 1 - max(nu)
    if distance < ctx.escalation_eps:
        raise PrecisionEscalationError(
            f"1 - |nu| = {ctx.mp.nstr(distance, 5)} is below the resolution of "
            f"{ctx.decimal_digits} digits",
            required_digits=_required_digits(distance, ctx),
            distance=ctx.mp.nstr(distance, 5),
        )


def entanglement_hamiltonian(gamma_a: CovarianceMatrix, ctx: PrecisionContext) -> SkewMatrix:
    """W with K = iW = log((1 + i Gamma_A) / (1 - i Gamma_A)), through the Schur basis."""
    form = skew_schur(gamma_a.gamma, ctx)
    nu, _ = _nu_values(form, ctx)
    _check_resolved(nu, ctx)
    return skew_function(gamma_a.gamma, lambda x: _entanglement_energy(x, ctx), ctx, form=form)


def entanglement_hamiltonian_by_inverse(
    gamma_a: CovarianceMatrix, ctx: PrecisionContext
) -> SkewMatrix:
    """K = -log(2 G^-1 - 1) with G = 1 + i Gamma_A, formed literally.

    Eigenvectors come from M = 2 G^-1 - 1.  Eigenvalues of M below one lose their relative
    accuracy, so those are taken from the Rayleigh quotient of M^-1 = 2 (1 - i Gamma_A)^-1 - 1.
    """
    mp = ctx.mp
    m = _cayley_transform(gamma_a, 1, ctx)
    m_inv = _cayley_transform(gamma_a, -1, ctx)
    values, vectors = hermitian_eigen(HermitianMatrix.from_complex(m, ctx), ctx)
    logs = []
    for k, value in enumerate(values):
        v = vectors[:, k]
        mu = _rayleigh(m, v) if value >= 1 else 1 / _rayleigh(m_inv, v)
        logs.append(apply_scalar(lambda x: -mp.log(x), mu, ctx))
    k_matrix = (vectors * np.asarray(logs, dtype=object)) @ np.conjugate(vectors).T
    imag = np.frompyfunc(lambda z: mp.mpf(mp.im(z)), 1, 1)(k_matrix).astype(object)
    return SkewMatrix(imag)


def _cayley_transform(gamma_a: CovarianceMatrix, sign: int, ctx: PrecisionContext) -> np.ndarray:
    """2 (1 + sign i Gamma_A)^-1 - 1."""
    mp = ctx.mp
    g = np.frompyfunc(lambda x: mp.mpc(0, sign * x), 1, 1)(gamma_a.gamma.entries).astype(object)
    for i in range(gamma_a.dim):
        g[i, i] += 1
    try:
        g_inv = invert(g, ctx)
    except SingularMatrixError as exc:
        raise PrecisionEscalationError(
            f"1 {'+' if sign > 0 else '-'} i Gamma_A is singular at {ctx.decimal_digits} digits",
            required_digits=2 * ctx.decimal_digits,
        ) from exc
    out = g_inv * 2
    for i in range(gamma_a.dim):
        out[i, i] -= 1
    return out


def _rayleigh(m: np.ndarray, v: np.ndarray) -> Number:
    return np.dot(np.conjugate(v), m @ v).real


def covariance_from_entanglement_hamiltonian(
    w: SkewMatrix, ctx: PrecisionContext
) -> CovarianceMatrix:
    """Gamma_A = tanh(iW / 2) / i, inverting ``entanglement_hamiltonian``."""
    mp = ctx.mp
    return CovarianceMatrix(skew_function(w, lambda x: mp.tanh(x / 2), ctx))
