"""Exact diagonalization oracle for small chains.

Basis index s = sum_j b_j 2^j (site 0 is the least significant bit).  In the spin basis
b_j = 1 means sigma^z_j = -1; in the Fock basis it is the occupation of mode j.  Majoranas are
a_2j = S_j sigma^x_j and a_2j+1 = S_j sigma^y_j with the string S_j = prod_{k<j} sigma^z_k, so
both bases share one set of matrices.

Spectra are seeded in double precision (numpy / scipy.sparse) and, for sector dimensions up to
``REFINE_LIMIT``, refined to ``ORACLE_DIGITS`` digits by shifted inverse iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from decimal import Decimal
from typing import Any, Callable, Literal

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

from .chain import DUALITY_COUPLING
from .errors import NonConvergenceError, OracleRangeError, SpecError
from .gaussian import CovarianceMatrix
from .linalg import (
    HermitianMatrix,
    SkewMatrix,
    hermitian_eigen,
    lu_factor,
    lu_solve,
    max_abs,
    skew_schur,
)
from .models import BipartitionSpec, ChainSpec, SubsystemSpec
from .precision import Number, PrecisionContext

logger = logging.getLogger(__name__)

MAX_SPIN_SITES = 14
MAX_FERMION_MODES = 8
MAX_DENSE_MODES = 6
ORACLE_DIGITS = 50
FLOAT_DIGITS = 15
REFINE_LIMIT = 256
DENSE_LIMIT = 4096
DEGENERACY_TOL = 1e-9
REFINE_SHIFT = Decimal("1e-10")
MAX_REFINE_STEPS = 12

Basis = Literal["spin", "fock"]
Phase = Callable[[np.ndarray], np.ndarray]


# ─── Types ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class DenseState:
    """Normalized vector over all 2^N basis states; ``digits`` is its verified accuracy."""

    amplitudes: np.ndarray
    n_sites: int
    digits: int
    ctx: PrecisionContext
    basis: Basis = "spin"

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> Number:
        return self.ctx.mp.sqrt(_inner(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True, eq=False)
class GroundManifold:
    energy: Number
    states: tuple[DenseState, ...]
    sector: int | None

    @property
    def degeneracy(self) -> int:
        return len(self.states)

    @property
    def ground(self) -> DenseState:
        return self.states[0]


_ORACLE_CONTEXT = PrecisionContext(ORACLE_DIGITS)


def oracle_context() -> PrecisionContext:
    return _ORACLE_CONTEXT


# ─── Operators on the bit basis ──────────────────────────────────────────────


def _bit(states: np.ndarray, site: int) -> np.ndarray:
    return (states >> site) & 1


def _popcount(values: np.ndarray) -> np.ndarray:
    counts = np.zeros_like(values)
    work = values.copy()
    while np.any(work):
        counts += work & 1
        work >>= 1
    return counts


def parity_of(states: np.ndarray) -> np.ndarray:
    """prod_j sigma^z_j = (-1)^(number of set bits)."""
    return 1 - 2 * (_popcount(states) & 1)


def majorana_action(index: int) -> tuple[int, Phase]:
    """(flip mask, phase) with a_index |s> = phase(s) |s ^ mask>."""
    site = index // 2
    below = (1 << site) - 1

    def phase(states: np.ndarray) -> np.ndarray:
        string = parity_of(states & below).astype(complex)
        if index % 2:
            return string * 1j * (1 - 2 * _bit(states, site))
        return string

    return 1 << site, phase


def _product_action(m: int, n: int) -> tuple[int, Phase]:
    """a_m a_n, applied right to left."""
    flip_n, phase_n = majorana_action(n)
    flip_m, phase_m = majorana_action(m)

    def phase(states: np.ndarray) -> np.ndarray:
        return phase_m(states ^ flip_n) * phase_n(states)

    return flip_m ^ flip_n, phase


@dataclass(frozen=True)
class _Term:
    coefficient: Any
    flip: int
    phase: Phase


def _spin_terms(spec: ChainSpec) -> list[_Term]:
    n = spec.n_sites
    half = Decimal(1) / 2
    duality = set(spec.duality_bonds)
    dropped = {(b + 1) % n for b in duality}
    terms = []
    for j in range(n):
        if j in dropped:
            continue
        terms.append(
            _Term(-spec.site_fields[j] * half, 0, lambda s, j=j: (1 - 2 * _bit(s, j)) + 0j)
        )
    for j in range(n):
        k = (j + 1) % n
        mask = (1 << j) ^ (1 << k)
        if j in duality:
            terms.append(
                _Term(-DUALITY_COUPLING * half, mask, lambda s, k=k: 1j * (1 - 2 * _bit(s, k)))
            )
        else:
            terms.append(
                _Term(-spec.bond_couplings[j] * half, mask, lambda s: np.ones(s.shape, complex))
            )
    return terms


def _majorana_terms(s: SkewMatrix) -> list[_Term]:
    """(i/2) S_mn a_m a_n for m < n."""
    terms = []
    entries = s.entries
    for m in range(s.dim):
        for n in range(m + 1, s.dim):
            if entries[m, n] == 0:
                continue
            flip, phase = _product_action(m, n)
            terms.append(_Term(entries[m, n] / 2, flip, lambda x, p=phase: 1j * p(x)))
    return terms


def _sparse_hamiltonian(terms: list[_Term], n_sites: int) -> sparse.csr_matrix:
    dim = 1 << n_sites
    states = np.arange(dim, dtype=np.int64)
    h = sparse.csr_matrix((dim, dim), dtype=complex)
    for term in terms:
        data = complex(float(term.coefficient)) * term.phase(states)
        h = h + sparse.csr_matrix((data, (states ^ term.flip, states)), shape=(dim, dim))
    return h


def _dense_hamiltonian(
    terms: list[_Term], sector_states: np.ndarray, ctx: PrecisionContext
) -> np.ndarray:
    size = sector_states.shape[0]
    position = {int(s): i for i, s in enumerate(sector_states)}
    h = np.full((size, size), ctx.mp.mpc(0), dtype=object)
    for term in terms:
        coefficient = ctx.mpf(term.coefficient)
        phases = term.phase(sector_states)
        for col, (state, phase) in enumerate(zip(sector_states, phases)):
            if phase == 0:
                continue
            row = position[int(state) ^ term.flip]
            h[row, col] += coefficient * ctx.mpc(complex(phase))
    return h


# ─── Ground states ───────────────────────────────────────────────────────────


def _sector_states(n_sites: int, sector: int | None) -> np.ndarray:
    states = np.arange(1 << n_sites, dtype=np.int64)
    if sector is None:
        return states
    if sector not in (1, -1):
        raise SpecError(f"parity sector must be +1 or -1, got {sector}")
    return states[parity_of(states) == sector]


def _lowest(h: sparse.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    dim = h.shape[0]
    if dim <= DENSE_LIMIT:
        values, vectors = np.linalg.eigh(h.toarray())
    else:
        values, vectors = sparse_linalg.eigsh(h, k=8, which="SA")
        order = np.argsort(values)
        values, vectors = values[order], vectors[:, order]
    return values, vectors


def _orthonormalize(block: np.ndarray, ctx: PrecisionContext) -> np.ndarray:
    out = block.copy()
    for k in range(out.shape[1]):
        v = out[:, k]
        for i in range(k):
            u = out[:, i]
            v = v - u * _inner(u, v)
        out[:, k] = v / ctx.mp.sqrt(_inner(v, v).real)
    return out


def _inner(u: np.ndarray, v: np.ndarray) -> Number:
    return np.dot(np.conjugate(u), v)


def _refine(
    h: np.ndarray, seeds: np.ndarray, energy: float, ctx: PrecisionContext
) -> tuple[list, np.ndarray]:
    """Block inverse iteration on (H - shift) with the shift just below the seed energy."""
    mp = ctx.mp
    shift = ctx.mpf(Decimal(repr(energy))) - ctx.mpf(REFINE_SHIFT) * max(1, abs(energy))
    shifted = h.copy()
    for i in range(h.shape[0]):
        shifted[i, i] -= shift
    factors = lu_factor(shifted, ctx)
    block = ctx.ascomplex(seeds)
    target = ctx.convergence_eps * max(mp.one, abs(ctx.mpf(Decimal(repr(energy)))))
    residual = mp.inf
    for step in range(1, MAX_REFINE_STEPS + 1):
        block = _orthonormalize(lu_solve(factors, block, ctx), ctx)
        projected = np.conjugate(block).T @ h @ block
        projected = (projected + np.conjugate(projected).T) / 2
        values, rotation = hermitian_eigen(HermitianMatrix.from_complex(projected, ctx), ctx)
        block = block @ rotation
        residual = max_abs(h @ block - block * np.asarray(values, dtype=object))
        if residual < target:
            logger.debug("ED refinement converged after %d steps", step)
            return values, block
    raise NonConvergenceError(
        "inverse iteration did not converge", residual=mp.nstr(residual, 5), sweeps=MAX_REFINE_STEPS
    )


def _ground_manifold(
    terms: list[_Term], n_sites: int, sector: int | None, basis: Basis
) -> GroundManifold:
    ctx = oracle_context()
    states = _sector_states(n_sites, sector)
    full = _sparse_hamiltonian(terms, n_sites)
    h = full[states][:, states]
    values, vectors = _lowest(h)
    e0 = float(values[0])
    degeneracy = int(np.sum(values - e0 < DEGENERACY_TOL * max(1.0, abs(e0))))
    logger.debug(
        "%s ED: N=%d sector=%s dim=%d degeneracy=%d",
        basis,
        n_sites,
        sector,
        len(states),
        degeneracy,
    )

    if len(states) <= REFINE_LIMIT:
        dense = _dense_hamiltonian(terms, states, ctx)
        refined, block = _refine(dense, vectors[:, :degeneracy], e0, ctx)
        energy, digits = refined[0], ORACLE_DIGITS
    else:
        block = ctx.ascomplex(vectors[:, :degeneracy])
        energy, digits = ctx.mpf(Decimal(repr(e0))), FLOAT_DIGITS

    manifold = []
    for k in range(degeneracy):
        amplitudes = np.full(1 << n_sites, ctx.mp.mpc(0), dtype=object)
        amplitudes[states] = block[:, k]
        manifold.append(DenseState(amplitudes, n_sites, digits, ctx, basis))
    return GroundManifold(energy, tuple(manifold), sector)


def spin_ed_ground(spec: ChainSpec, sector: int | None = None) -> GroundManifold:
    """Ground manifold of H = -1/2 sum (J_i sx_i sx_i+1 + g_i sz_i) with duality terms.

    A duality bond j contributes -1/2 sx_j sy_j+1 instead of its sx sx bond and the field on
    site j+1.  ``sector`` restricts to one eigenspace of prod sigma^z.
    """
    if spec.n_sites > MAX_SPIN_SITES:
        raise OracleRangeError(f"spin ED is limited to N <= {MAX_SPIN_SITES}, got {spec.n_sites}")
    return _ground_manifold(_spin_terms(spec), spec.n_sites, sector, "spin")


def fermion_ed_ground(s: SkewMatrix, sector: int | None = None) -> GroundManifold:
    """Ground manifold of (i/4) sum S_mn a_m a_n in the 2^N-dimensional Fock space."""
    n_modes = s.dim // 2
    if n_modes > MAX_FERMION_MODES:
        raise OracleRangeError(f"fermion ED is limited to {MAX_FERMION_MODES} modes, got {n_modes}")
    return _ground_manifold(_majorana_terms(s), n_modes, sector, "fock")


# ─── State analysis ──────────────────────────────────────────────────────────


def apply_majorana(index: int, amplitudes: np.ndarray) -> np.ndarray:
    flip, phase = majorana_action(index)
    states = np.arange(amplitudes.shape[0], dtype=np.int64)
    out = np.empty_like(amplitudes)
    out[states ^ flip] = amplitudes * phase(states).astype(object)
    return out


def covariance_from_state(state: DenseState) -> CovarianceMatrix:
    """Gamma_mn = Im <a_m a_n>."""
    ctx = state.ctx
    dim = 2 * state.n_sites
    images = [apply_majorana(m, state.amplitudes) for m in range(dim)]
    entries = ctx.zeros(dim)
    for m in range(dim):
        for n in range(m + 1, dim):
            entries[m, n] = ctx.mpf(_inner(images[m], images[n]).imag)
    return CovarianceMatrix(SkewMatrix(entries))


def align_with_covariance(manifold: GroundManifold, gamma: CovarianceMatrix) -> DenseState:
    """The state of a degenerate ``manifold`` that is the pure Gaussian state ``gamma``.

    With b_k = (u1_k - i u2_k) . a / 2 the annihilators of the Schur modes of ``gamma``, the
    combination of manifold vectors minimising sum_k |b_k psi|^2 is returned.  A
    non-degenerate manifold gives its only vector back.
    """
    if manifold.degeneracy == 1:
        return manifold.ground
    first = manifold.ground
    ctx = first.ctx
    mp = ctx.mp
    form = skew_schur(SkewMatrix(ctx.asarray(gamma.gamma.entries)), ctx)
    annihilators = (form.first_columns() - form.second_columns() * mp.mpc(0, 1)).T / 2
    lowered = []
    for state in manifold.states:
        images = np.vstack([apply_majorana(m, state.amplitudes) for m in range(gamma.dim)])
        lowered.append(annihilators @ images)

    size = manifold.degeneracy
    weight = np.full((size, size), mp.mpc(0), dtype=object)
    for i in range(size):
        for j in range(size):
            weight[i, j] = sum(
                (_inner(x, y) for x, y in zip(lowered[i], lowered[j])), mp.mpc(0)
            )
    values, vectors = hermitian_eigen(HermitianMatrix.from_complex(weight, ctx), ctx)
    amplitudes = np.full(first.dim, mp.mpc(0), dtype=object)
    for state, c in zip(manifold.states, vectors[:, 0]):
        amplitudes = amplitudes + state.amplitudes * c
    amplitudes = amplitudes / mp.sqrt(_inner(amplitudes, amplitudes).real)
    logger.debug(
        "aligned a %d-fold ground manifold; residual occupation %s",
        size,
        mp.nstr(values[0], 5),
    )
    digits = min(state.digits for state in manifold.states)
    return DenseState(amplitudes, first.n_sites, digits, ctx, first.basis)


def rdm_spectrum(state: DenseState, region: SubsystemSpec) -> list:
    """Schmidt weights of ``region``, descending."""
    n = state.n_sites
    sites = region.sites(n)
    if state.basis == "fock" and region.start + region.length > n:
        raise SpecError("Fock-space regions must not wrap around the chain")
    rest = [j for j in range(n) if j not in sites]
    tensor = state.amplitudes.reshape((2,) * n)
    # numpy axis 0 is the most significant bit
    axes = [n - 1 - j for j in reversed(sites)] + [n - 1 - j for j in reversed(rest)]
    matrix = np.transpose(tensor, axes).reshape(1 << len(sites), 1 << len(rest))
    small = matrix @ np.conjugate(matrix).T
    if small.shape[0] > matrix.shape[1]:
        small = np.conjugate(matrix).T @ matrix
    values, _ = hermitian_eigen(HermitianMatrix.from_complex(small, state.ctx), state.ctx)
    zero = state.ctx.mp.zero
    weights = [max(v, zero) for v in reversed(values)]
    weights += [zero] * ((1 << len(sites)) - len(weights))
    return weights


# ─── Dense negativity ────────────────────────────────────────────────────────


def majorana_matrices(n_modes: int, ctx: PrecisionContext) -> list[np.ndarray]:
    dim = 1 << n_modes
    states = np.arange(dim, dtype=np.int64)
    out = []
    for index in range(2 * n_modes):
        flip, phase = majorana_action(index)
        matrix = np.full((dim, dim), ctx.mp.mpc(0), dtype=object)
        for state, value in zip(states, phase(states)):
            matrix[state ^ flip, state] = ctx.mpc(complex(value))
        out.append(matrix)
    return out


def gaussian_density_matrix(gamma: CovarianceMatrix, ctx: PrecisionContext) -> np.ndarray:
    """rho = prod_k (1 + i nu_k b_2k b_2k+1) / 2 in the Schur frame b = U^T a."""
    n_modes = gamma.n_modes
    if n_modes > MAX_DENSE_MODES:
        raise OracleRangeError(f"dense states are limited to {MAX_DENSE_MODES} modes")
    form = skew_schur(gamma.gamma, ctx)
    majoranas = majorana_matrices(n_modes, ctx)
    size = 1 << n_modes
    rotated = [
        sum((majoranas[m] * form.rotation[m, k] for m in range(2 * n_modes)), ctx.zeros(size))
        for k in range(2 * n_modes)
    ]
    rho = ctx.ascomplex(ctx.eye(1 << n_modes))
    for k, nu in enumerate(form.block_values):
        factor = (rotated[2 * k] @ rotated[2 * k + 1]) * ctx.mp.mpc(0, nu)
        for i in range(factor.shape[0]):
            factor[i, i] += 1
        rho = rho @ (factor / 2)
    return rho


def density_matrix(state: DenseState) -> np.ndarray:
    column = state.amplitudes.reshape(-1, 1)
    return column @ np.conjugate(column).T


def fermionic_partial_transpose(rho: np.ndarray, cut: BipartitionSpec) -> np.ndarray:
    """Partial time reversal of the first ``cut.cut`` modes, in the occupation basis.

    |n_A n_B><m_A m_B| -> i^((t_A + s_A) mod 2 + 2 (t_A + s_A)(t_B + s_B)) |m_A n_B><n_A m_B|
    where t and s count occupied modes of the ket and bra.
    """
    dim = rho.shape[0]
    n_modes = dim.bit_length() - 1
    cut.blocks(n_modes)
    mask_a = (1 << cut.cut) - 1
    mask_b = (dim - 1) ^ mask_a
    count = [bin(i).count("1") for i in range(dim)]
    out = np.empty_like(rho)
    for s in range(dim):
        for t in range(dim):
            tau_a = count[s & mask_a] + count[t & mask_a]
            tau_b = count[s & mask_b] + count[t & mask_b]
            phase = 1j ** ((tau_a % 2) + 2 * tau_a * tau_b)
            row = (t & mask_a) | (s & mask_b)
            col = (s & mask_a) | (t & mask_b)
            out[row, col] = rho[s, t] * phase
    return out


def dense_negativity(
    source: DenseState | CovarianceMatrix | np.ndarray,
    cut: BipartitionSpec,
    ctx: PrecisionContext | None = None,
) -> Number:
    """ln Tr|rho^(T_left)|, from a state, a Gaussian covariance or a density matrix."""
    if isinstance(source, DenseState):
        ctx = source.ctx
        rho = density_matrix(source)
    elif isinstance(source, CovarianceMatrix):
        ctx = ctx or oracle_context()
        rho = gaussian_density_matrix(source, ctx)
    else:
        ctx = ctx or oracle_context()
        rho = ctx.ascomplex(source)
    n_modes = rho.shape[0].bit_length() - 1
    if n_modes > MAX_DENSE_MODES:
        raise OracleRangeError(f"dense negativity is limited to {MAX_DENSE_MODES} modes")
    transposed = fermionic_partial_transpose(rho, cut)
    gram = np.conjugate(transposed).T @ transposed
    values, _ = hermitian_eigen(HermitianMatrix.from_complex(gram, ctx), ctx)
    mp = ctx.mp
    trace_norm = sum((mp.sqrt(max(v, mp.zero)) for v in values), mp.zero)
    return mp.log(trace_norm)
