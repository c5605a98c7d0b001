"""Scalar entanglement measures of Gaussian states: entropies, negativity, fidelity."""

from __future__ import annotations

import logging
from typing import Any

import numpy as np

from .errors import PrecisionEscalationError, SingularMatrixError, SpecError
from .gaussian import CovarianceMatrix, single_particle_spectrum
from .linalg import (
    SkewMatrix,
    invert,
    lu_det,
    lu_factor,
    lu_solve,
    one_sided_jacobi_svd,
    skew_schur,
)
from .models import BipartitionSpec
from .precision import Number, PrecisionContext

logger = logging.getLogger(__name__)


# ─── Entropies ───────────────────────────────────────────────────────────────


def _binary_entropy(p: Number, ctx: PrecisionContext) -> Number:
    mp = ctx.mp
    total = mp.zero
    for q in (p, 1 - p):
        if q > 0:
            total -= q * mp.log(q)
    return total


def entropy(gamma_a: CovarianceMatrix, ctx: PrecisionContext) -> Number:
    """Von Neumann entropy in nats."""
    spectrum = single_particle_spectrum(gamma_a, ctx)
    return sum((_binary_entropy((1 + nu) / 2, ctx) for nu in spectrum.nu), ctx.mp.zero)


def renyi_entropy(gamma_a: CovarianceMatrix, alpha: Any, ctx: PrecisionContext) -> Number:
    mp = ctx.mp
    alpha = ctx.mpf(alpha)
    if alpha <= 0:
        raise SpecError(f"Renyi index must be positive, got {mp.nstr(alpha, 10)}")
    if alpha == 1:
        raise SpecError("Renyi index 1 is the von Neumann entropy; use entropy()")
    spectrum = single_particle_spectrum(gamma_a, ctx)
    total = mp.zero
    for nu in spectrum.nu:
        p = (1 + nu) / 2
        total += mp.log(p**alpha + (1 - p) ** alpha)
    return total / (1 - alpha)


def to_bits(value: Number, ctx: PrecisionContext) -> Number:
    return value / ctx.mp.log(2)


# ─── Fermionic negativity ────────────────────────────────────────────────────


def partial_transpose_covariances(
    gamma_a: CovarianceMatrix, cut: BipartitionSpec, ctx: PrecisionContext
) -> tuple[np.ndarray, np.ndarray]:
    """Complex covariances of the two partially time-reversed Gaussian operators.

    With G = i Gamma: G_pm = [[-G_11, +-i G_12], [+-i G_21, G_22]] over the left block 1 and
    the right block 2.
    """
    mp = ctx.mp
    left, _ = cut.blocks(gamma_a.n_modes)
    split = len(left)
    g = np.frompyfunc(lambda x: mp.mpc(0, x), 1, 1)(gamma_a.gamma.entries).astype(object)
    plus = g.copy()
    plus[:split, :split] = -g[:split, :split]
    plus[:split, split:] = g[:split, split:] * 1j
    plus[split:, :split] = g[split:, :split] * 1j
    minus = plus.copy()
    minus[:split, split:] = -plus[:split, split:]
    minus[split:, :split] = -plus[split:, :split]
    return plus, minus


def log_negativity(
    gamma_a: CovarianceMatrix, cut: BipartitionSpec, ctx: PrecisionContext
) -> Number:
    """ln Tr|rho^(T_left)| under the fermionic partial transpose, clamped at zero.

    Gaussian product G_x = 1 - (1 - G_-)(1 + G_+ G_-)^-1 (1 - G_+) of the two transposed
    covariances; with +-xi the spectrum of G_x and +-nu that of G,
    E = sum ln[sqrt((1+xi)/2) + sqrt((1-xi)/2)] + 1/2 sum ln[(1 + nu^2)/2] over modes.
    """
    mp = ctx.mp
    dim = gamma_a.dim
    plus, minus = partial_transpose_covariances(gamma_a, cut, ctx)
    one = ctx.eye(dim)
    try:
        middle = invert(one + plus @ minus, ctx)
    except SingularMatrixError as exc:
        raise PrecisionEscalationError(
            f"partial-transpose product is singular at {ctx.decimal_digits} digits",
            required_digits=2 * ctx.decimal_digits,
        ) from exc
    product = one - (one - minus) @ middle @ (one - plus)

    # G_x is i times a real skew matrix up to rounding
    leak = max(abs(z.real) for z in product.flat)
    logger.debug("log_negativity: real part of G_x up to %s", mp.nstr(leak, 5))
    imag = np.frompyfunc(lambda z: mp.mpf(z.imag), 1, 1)(product).astype(object)
    xi_values = skew_schur(SkewMatrix(imag), ctx).block_values

    total = mp.zero
    for xi in xi_values:
        xi = min(xi, mp.one)
        total += mp.log(mp.sqrt((1 + xi) / 2) + mp.sqrt((1 - xi) / 2))
    for nu in single_particle_spectrum(gamma_a, ctx).nu:
        total += mp.log((1 + nu * nu) / 2) / 2
    if total < 0:
        logger.debug("log_negativity: raw value %s clamped to 0", mp.nstr(total, 10))
        return mp.zero
    return total


# ─── Fidelity ────────────────────────────────────────────────────────────────


def fidelity(
    gamma_1: CovarianceMatrix, gamma_2: CovarianceMatrix, ctx: PrecisionContext
) -> Number:
    """Root fidelity Tr sqrt(sqrt(rho_1) rho_2 sqrt(rho_1)) of two Gaussian states on n modes.

    F = 2^(-n/2) det(1 - Gamma_1 Gamma_2)^(1/4) prod_k (1 + sigma_k)^(1/4) where sigma_k are
    the 2n singular values of C = R_2 (1 - Gamma_1 Gamma_2)^-1 R_1 and R = sqrt(1 + Gamma^2)
    carries sqrt(1 - nu^2) on each Schur block.  Nothing is divided by 1 - |nu|, so nearly
    pure states stay well conditioned; for pure states C vanishes and F = |<psi_1|psi_2>|.
    """
    if gamma_1.dim != gamma_2.dim:
        raise SpecError(f"fidelity needs equal dimensions, got {gamma_1.dim} and {gamma_2.dim}")
    mp = ctx.mp
    product = gamma_1.gamma.entries @ gamma_2.gamma.entries
    overlap = ctx.eye(gamma_1.dim) - product
    try:
        factors = lu_factor(overlap, ctx)
    except SingularMatrixError:
        if gamma_1.is_pure(ctx) and gamma_2.is_pure(ctx):
            logger.debug("fidelity: 1 - Gamma_1 Gamma_2 is singular for two pure states")
            return mp.zero
        raise
    det = max(lu_det(factors, ctx), mp.zero)

    middle = _mixedness_root(gamma_2, ctx) @ lu_solve(factors, _mixedness_root(gamma_1, ctx), ctx)
    _, sigma, _ = one_sided_jacobi_svd(middle, ctx)
    total = mp.one
    for value in sigma:
        total *= 1 + value
    return mp.root(det * total, 4) / mp.sqrt(mp.mpf(2) ** gamma_1.n_modes)


def _mixedness_root(gamma: CovarianceMatrix, ctx: PrecisionContext) -> np.ndarray:
    """sqrt(1 + Gamma^2), which is U diag(sqrt(1 - nu^2)) U^T in the Schur basis."""
    mp = ctx.mp
    form = skew_schur(gamma.gamma, ctx)
    weights = []
    for nu in form.block_values:
        nu = min(nu, mp.one)
        weights += [mp.sqrt((1 - nu) * (1 + nu))] * 2
    rotation = form.rotation
    return (rotation * np.asarray(weights, dtype=object)) @ rotation.T
