"""Arbitrary-precision dense linear algebra.

Matrices are numpy object arrays whose entries are mpmath numbers bound to a
``PrecisionContext``.  numpy supplies the vectorised row/column updates, mpmath the
arithmetic; no routine here touches the global ``mpmath.mp`` state.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, Literal

import numpy as np

from .errors import DomainError, NonConvergenceError, SingularMatrixError, SpecError
from .precision import Number, PrecisionContext

logger = logging.getLogger(__name__)

MAX_SWEEPS = 30

ScalarMap = Callable[[Any], Any]


# ─── Matrix types ────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class SkewMatrix:
    """Real skew-symmetric matrix.

    The strict upper triangle is authoritative: construction mirrors it into the lower
    triangle with a sign flip and zeroes the diagonal, so antisymmetry is exact.  The
    entry array is read-only afterwards.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=object)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise SpecError(f"skew matrix must be square, got shape {entries.shape}")
        n = entries.shape[0]
        if n == 0 or n % 2:
            raise SpecError(f"skew matrix dimension must be even and positive, got {n}")
        upper = np.triu_indices(n, 1)
        entries[upper[1], upper[0]] = -entries[upper]
        zero = entries[0, 1] * 0
        for i in range(n):
            entries[i, i] = zero
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_array(cls, values: Any, ctx: PrecisionContext) -> SkewMatrix:
        return cls(ctx.asarray(values))

    @classmethod
    def zeros(cls, dim: int, ctx: PrecisionContext) -> SkewMatrix:
        return cls(ctx.zeros(dim))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def take(self, indices: list[int]) -> SkewMatrix:
        """Principal submatrix on ``indices`` (in the given order)."""
        idx = np.asarray(indices, dtype=int)
        return SkewMatrix(self.entries[np.ix_(idx, idx)])

    def max_abs(self) -> Number:
        return max_abs(self.entries)

    def __sub__(self, other: SkewMatrix) -> SkewMatrix:
        if other.dim != self.dim:
            raise SpecError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return SkewMatrix(self.entries - other.entries)


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Hermitian matrix M = sym + i*skew; ``skew`` is None for real symmetric M."""

    sym: np.ndarray
    skew: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.sym.shape[0]

    @classmethod
    def from_skew(cls, s: SkewMatrix, ctx: PrecisionContext) -> HermitianMatrix:
        """The purely imaginary Hermitian matrix iS."""
        return cls(ctx.zeros(s.dim), ctx.asarray(s.entries))

    @classmethod
    def from_real(cls, values: Any, ctx: PrecisionContext) -> HermitianMatrix:
        return cls(ctx.asarray(values))

    @classmethod
    def from_complex(cls, values: Any, ctx: PrecisionContext) -> HermitianMatrix:
        arr = ctx.ascomplex(values)
        real = np.frompyfunc(lambda z: z.real, 1, 1)(arr).astype(object)
        imag = np.frompyfunc(lambda z: z.imag, 1, 1)(arr).astype(object)
        return cls(real, imag)

    def to_complex(self, ctx: PrecisionContext) -> np.ndarray:
        if self.skew is None:
            return ctx.ascomplex(self.sym)
        return np.frompyfunc(ctx.mp.mpc, 2, 1)(self.sym, self.skew).astype(object)


@dataclass(frozen=True, eq=False)
class SchurForm:
    """S = U B U^T with B the direct sum of [[0, -eps_i], [eps_i, 0]], eps descending."""

    rotation: np.ndarray
    block_values: tuple

    @property
    def dim(self) -> int:
        return self.rotation.shape[0]

    def first_columns(self) -> np.ndarray:
        return self.rotation[:, 0::2]

    def second_columns(self) -> np.ndarray:
        return self.rotation[:, 1::2]

    def reconstruct(self, values: list | tuple | None = None) -> SkewMatrix:
        """U B U^T, optionally with replacement block values."""
        vals = np.asarray(self.block_values if values is None else values, dtype=object)
        half = (self.second_columns() * vals) @ self.first_columns().T
        return SkewMatrix(half - half.T)


@dataclass(frozen=True, eq=False)
class LUFactors:
    """P A Q = L U with unit-lower L and U packed in ``lu``."""

    lu: np.ndarray
    rows: tuple[int, ...]
    cols: tuple[int, ...]


# ─── Small helpers ───────────────────────────────────────────────────────────


def max_abs(values: np.ndarray) -> Number:
    return max(abs(v) for v in np.asarray(values, dtype=object).flat)


def _frobenius_sq(values: np.ndarray) -> Number:
    return (values * values).sum()


def _is_complex(values: np.ndarray) -> bool:
    return any(hasattr(v, "_mpc_") or isinstance(v, complex) for v in values.flat)


def _as_working(values: Any, ctx: PrecisionContext) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    return ctx.ascomplex(arr) if _is_complex(arr) else ctx.asarray(arr)


def _real_part(values: np.ndarray) -> np.ndarray:
    return np.frompyfunc(lambda z: z.real, 1, 1)(values).astype(object)


def _imag_part(values: np.ndarray) -> np.ndarray:
    return np.frompyfunc(lambda z: z.imag, 1, 1)(values).astype(object)


def orthogonal_det_sign(rotation: np.ndarray, ctx: PrecisionContext) -> int:
    """det U = +-1 for orthogonal U; the sign is read from a double-precision copy."""
    sign, _ = np.linalg.slogdet(ctx.to_float(rotation))
    return 1 if sign > 0 else -1


# ─── Hermitian eigensolver ───────────────────────────────────────────────────


def hermitian_eigen(m: HermitianMatrix, ctx: PrecisionContext) -> tuple[list, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) by cyclic two-sided Jacobi.

    Vectors are real when ``m.skew`` is None, complex otherwise.  Identical inputs
    give identical outputs.
    """
    mp = ctx.mp
    re = ctx.asarray(m.sym).copy()
    n = re.shape[0]
    if n < 1 or re.shape != (n, n):
        raise SpecError(f"Hermitian matrix must be square and non-empty, got {re.shape}")
    im = None if m.skew is None else ctx.asarray(m.skew).copy()
    if im is not None and all(v == 0 for v in im.flat):
        im = None

    scale = mp.sqrt(_frobenius_sq(re) + (_frobenius_sq(im) if im is not None else 0))
    asym = max_abs(re - re.T) + (max_abs(im + im.T) if im is not None else 0)
    if asym > ctx.convergence_eps * max(scale, mp.one):
        raise SpecError(f"matrix is not Hermitian (asymmetry {mp.nstr(asym, 5)})")

    vr = ctx.eye(n)
    vi = None if im is None else ctx.zeros(n)
    sweeps = _jacobi_sweeps(re, im, vr, vi, ctx, scale)
    logger.debug("hermitian_eigen: dim=%d converged after %d sweeps", n, sweeps)

    diagonal = [re[i, i] for i in range(n)]
    order = sorted(range(n), key=lambda i: diagonal[i])
    values = [diagonal[i] for i in order]
    if vi is None:
        return values, vr[:, order]
    vectors = np.frompyfunc(mp.mpc, 2, 1)(vr[:, order], vi[:, order]).astype(object)
    return values, vectors


def symmetric_eigen(values: Any, ctx: PrecisionContext) -> tuple[list, np.ndarray]:
    return hermitian_eigen(HermitianMatrix.from_real(values, ctx), ctx)


def _off_diagonal_sq(re: np.ndarray, im: np.ndarray | None) -> Number:
    total = _frobenius_sq(re) - sum(re[i, i] * re[i, i] for i in range(re.shape[0]))
    if im is not None:
        total += _frobenius_sq(im)
    return total / 2


def _jacobi_sweeps(
    re: np.ndarray,
    im: np.ndarray | None,
    vr: np.ndarray,
    vi: np.ndarray | None,
    ctx: PrecisionContext,
    scale: Number,
) -> int:
    mp = ctx.mp
    n = re.shape[0]
    if scale == 0 or n == 1:
        return 0
    target = ctx.convergence_eps * scale
    skip = target / n
    zero = mp.zero
    off = mp.sqrt(_off_diagonal_sq(re, im))
    for sweep in range(MAX_SWEEPS):
        if off <= target:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                x = re[p, q]
                y = zero if im is None else im[p, q]
                r = mp.hypot(x, y)
                if r <= skip:
                    continue
                a, b = re[p, p], re[q, q]
                theta = (b - a) / (2 * r)
                t = 1 / (abs(theta) + mp.sqrt(theta * theta + 1))
                if theta < 0:
                    t = -t
                c = 1 / mp.sqrt(t * t + 1)
                s = t * c
                # phase w = conj(M[p, q]) / |M[p, q]| makes the pivot real
                wr, wi = x / r, -y / r

                rp, rq = re[:, p].copy(), re[:, q].copy()
                if im is None:
                    wq = rq * wr
                    re[:, p] = rp * c - wq * s
                    re[:, q] = rp * s + wq * c
                else:
                    ip, iq = im[:, p].copy(), im[:, q].copy()
                    wq_re = rq * wr - iq * wi
                    wq_im = iq * wr + rq * wi
                    re[:, p] = rp * c - wq_re * s
                    re[:, q] = rp * s + wq_re * c
                    im[:, p] = ip * c - wq_im * s
                    im[:, q] = ip * s + wq_im * c
                    im[p, :] = -im[:, p]
                    im[q, :] = -im[:, q]
                    im[p, q] = im[q, p] = im[p, p] = im[q, q] = zero
                re[p, :] = re[:, p]
                re[q, :] = re[:, q]
                re[p, p] = a - t * r
                re[q, q] = b + t * r
                re[p, q] = re[q, p] = zero

                vp, vq = vr[:, p].copy(), vr[:, q].copy()
                if vi is None:
                    wv = vq * wr
                    vr[:, p] = vp * c - wv * s
                    vr[:, q] = vp * s + wv * c
                else:
                    jp, jq = vi[:, p].copy(), vi[:, q].copy()
                    wv_re = vq * wr - jq * wi
                    wv_im = jq * wr + vq * wi
                    vr[:, p] = vp * c - wv_re * s
                    vr[:, q] = vp * s + wv_re * c
                    vi[:, p] = jp * c - wv_im * s
                    vi[:, q] = jp * s + wv_im * c
        off = mp.sqrt(_off_diagonal_sq(re, im))
    if off <= target:
        return MAX_SWEEPS
    raise NonConvergenceError(
        "Jacobi eigensolver did not converge", residual=mp.nstr(off / scale, 5), sweeps=MAX_SWEEPS
    )


# ─── Real Schur form of skew matrices ────────────────────────────────────────


def skew_schur(
    s: SkewMatrix,
    ctx: PrecisionContext,
    method: Literal["auto", "tridiagonal", "hermitian"] = "auto",
) -> SchurForm:
    """Canonical real Schur form of a skew-symmetric matrix.

    ``auto``/``tridiagonal``: Householder reduction to skew-tridiagonal form (skipped for
    bipartite input, where only even-odd entries are nonzero), then singular values of
    the even-odd block by one-sided Jacobi.  ``hermitian``: eigenvectors of iS paired
    into real rotation columns.  Each block's first column has its first nonzero
    component positive.
    """
    a = ctx.asarray(s.entries)
    if method == "hermitian":
        rotation, values = _schur_by_hermitian(a, ctx)
    elif method in ("auto", "tridiagonal"):
        rotation, values = _schur_by_bidiagonal(a, ctx)
    else:
        raise SpecError(f"unknown Schur method {method!r}")
    _orient_blocks(rotation, ctx)
    return SchurForm(rotation, tuple(values))


def is_bipartite(values: np.ndarray) -> bool:
    """True when only even-odd index pairs carry nonzero entries."""
    return bool(np.all(values[0::2, 0::2] == 0) and np.all(values[1::2, 1::2] == 0))


def _schur_by_bidiagonal(a: np.ndarray, ctx: PrecisionContext) -> tuple[np.ndarray, list]:
    n = a.shape[0]
    if is_bipartite(a):
        basis = None
        block = a[0::2, 1::2]
    else:
        reduced, basis = skew_tridiagonalize(a, ctx)
        block = reduced[0::2, 1::2]
    left, sigma, right = one_sided_jacobi_svd(block, ctx)

    # block = A[even, odd] = P diag(sigma) V^T; u1 = even(p), u2 = -odd(v) gives S u1 = sigma u2
    rotation = ctx.zeros(n)
    for k, value in enumerate(sigma):
        rotation[0::2, 2 * k] = left[:, k]
        rotation[1::2, 2 * k + 1] = -right[:, k] if value > 0 else right[:, k]
    if basis is not None:
        rotation = basis @ rotation
    return rotation, sigma


def skew_tridiagonalize(a: np.ndarray, ctx: PrecisionContext) -> tuple[np.ndarray, np.ndarray]:
    """Householder similarity T = Q^T A Q with T skew-tridiagonal."""
    mp = ctx.mp
    t = ctx.asarray(a).copy()
    n = t.shape[0]
    q = ctx.eye(n)
    zero = mp.zero
    for k in range(n - 2):
        x = t[k + 1 :, k].copy()
        tail = np.dot(x[1:], x[1:])
        if tail == 0:
            continue
        alpha = mp.sqrt(x[0] * x[0] + tail)
        if x[0] > 0:
            alpha = -alpha
        v = x
        v[0] = x[0] - alpha
        beta = 2 / np.dot(v, v)

        # H A H = A + v p^T - p v^T on the trailing block, p = beta A v (v^T A v = 0)
        trailing = t[k + 1 :, k + 1 :]
        p = (trailing @ v) * beta
        t[k + 1 :, k + 1 :] = trailing + np.outer(v, p) - np.outer(p, v)
        t[k + 1 :, k] = zero
        t[k, k + 1 :] = zero
        t[k + 1, k] = alpha
        t[k, k + 1] = -alpha

        qv = q[:, k + 1 :] @ v
        q[:, k + 1 :] = q[:, k + 1 :] - np.outer(qv * beta, v)
    return t, q


def one_sided_jacobi_svd(
    c: np.ndarray, ctx: PrecisionContext
) -> tuple[np.ndarray, list, np.ndarray]:
    """C = P diag(sigma) V^T for square C, sigma descending, by Hestenes rotations."""
    mp = ctx.mp
    y = ctx.asarray(c).copy()
    m = y.shape[1]
    v = ctx.eye(m)
    tol = ctx.convergence_eps
    total = _frobenius_sq(y)
    floor = tol * tol * total

    for sweep in range(MAX_SWEEPS + 1):
        if total == 0:
            break
        norms = [np.dot(y[:, j], y[:, j]) for j in range(m)]
        rotated = False
        for j in range(m - 1):
            for k in range(j + 1, m):
                gamma = np.dot(y[:, j], y[:, k])
                if gamma == 0:
                    continue
                alpha, beta = norms[j], norms[k]
                if abs(gamma) <= floor or abs(gamma) <= tol * mp.sqrt(alpha * beta):
                    continue
                if sweep == MAX_SWEEPS:
                    raise NonConvergenceError(
                        "one-sided Jacobi SVD did not converge",
                        residual=mp.nstr(abs(gamma) / mp.sqrt(alpha * beta), 5),
                        sweeps=MAX_SWEEPS,
                    )
                rotated = True
                zeta = (beta - alpha) / (2 * gamma)
                t = 1 / (abs(zeta) + mp.sqrt(1 + zeta * zeta))
                if zeta < 0:
                    t = -t
                cs = 1 / mp.sqrt(1 + t * t)
                sn = cs * t
                yj, yk = y[:, j].copy(), y[:, k].copy()
                y[:, j] = yj * cs - yk * sn
                y[:, k] = yj * sn + yk * cs
                vj, vk = v[:, j].copy(), v[:, k].copy()
                v[:, j] = vj * cs - vk * sn
                v[:, k] = vj * sn + vk * cs
                norms[j] = alpha - t * gamma
                norms[k] = beta + t * gamma
        if not rotated:
            logger.debug("one_sided_jacobi_svd: dim=%d converged after %d sweeps", m, sweep)
            break

    sigma = [mp.sqrt(np.dot(y[:, j], y[:, j])) for j in range(m)]
    order = sorted(range(m), key=lambda j: -sigma[j])
    sigma = [sigma[j] for j in order]
    y, v = y[:, order], v[:, order]
    cutoff = tol * max(sigma[0] if sigma else mp.zero, mp.one)

    left = ctx.zeros(y.shape[0], m)
    deficient = []
    for j, value in enumerate(sigma):
        if value > cutoff:
            left[:, j] = y[:, j] / value
        else:
            deficient.append(j)
    if deficient:
        kept = [left[:, j] for j in range(m) if j not in deficient]
        for j, column in zip(deficient, _orthogonal_completion(kept, [], len(deficient), ctx)):
            left[:, j] = column
    return left, sigma, v


def _schur_by_hermitian(a: np.ndarray, ctx: PrecisionContext) -> tuple[np.ndarray, list]:
    mp = ctx.mp
    n = a.shape[0]
    values, vectors = hermitian_eigen(HermitianMatrix(ctx.zeros(n), a), ctx)
    scale = max(mp.sqrt(_frobenius_sq(a)), mp.one)
    cut = ctx.zero_mode_eps * scale
    root2 = mp.sqrt(2)

    columns: list[np.ndarray] = []
    block_values: list = []
    for k in reversed(range(n)):
        if values[k] <= cut:
            break
        vec = vectors[:, k]
        columns += [_real_part(vec) * root2, _imag_part(vec) * root2]
        block_values.append(values[k])

    null_count = n - len(columns)
    if null_count:
        candidates = []
        for k in range(n):
            if abs(values[k]) <= cut:
                candidates += [_real_part(vectors[:, k]), _imag_part(vectors[:, k])]
        null_basis = _orthogonal_completion(columns, candidates, null_count, ctx)
        for b1, b2 in zip(null_basis[0::2], null_basis[1::2]):
            coupling = np.dot(b2, a @ b1)
            if coupling < 0:
                b2, coupling = -b2, -coupling
            columns += [b1, b2]
            block_values.append(coupling)

    rotation = ctx.zeros(n)
    for j, col in enumerate(columns):
        rotation[:, j] = col
    return rotation, block_values


def _orthogonal_completion(
    existing: list[np.ndarray], candidates: list[np.ndarray], count: int, ctx: PrecisionContext
) -> list[np.ndarray]:
    """``count`` orthonormal vectors orthogonal to the orthonormal ``existing`` ones.

    Each step takes the pool vector (``candidates`` first, then the unit vectors) with the
    largest component outside the current span.  While the span is incomplete the unit vectors
    alone leave at least ``1/n`` outside it, so the best residual never drops below ``1/(4n)``
    unless ``existing`` was not orthonormal.
    """
    mp = ctx.mp
    n = existing[0].shape[0] if existing else candidates[0].shape[0]
    pool = []
    for w in candidates:
        norm = mp.sqrt(np.dot(w, w))
        if norm > 0:
            pool.append(w / norm)
    for i in range(n):
        unit = ctx.vector(n)
        unit[i] = mp.one
        pool.append(unit)

    basis = list(existing)
    residual = [1 - sum((np.dot(u, w) ** 2 for u in basis), mp.zero) for w in pool]
    floor = mp.one / (4 * n)
    found: list[np.ndarray] = []
    while len(found) < count:
        best = max(range(len(pool)), key=lambda i: residual[i])
        if residual[best] <= floor:
            raise NonConvergenceError(
                "could not complete orthonormal basis",
                residual=mp.nstr(residual[best], 5),
                sweeps=0,
            )
        w = pool[best]
        for _ in range(2):
            for u in basis:
                w = w - u * np.dot(u, w)
        w = w / mp.sqrt(np.dot(w, w))
        basis.append(w)
        found.append(w)
        residual = [r - np.dot(w, p) ** 2 for r, p in zip(residual, pool)]
    return found


def _orient_blocks(rotation: np.ndarray, ctx: PrecisionContext) -> None:
    eps = ctx.convergence_eps
    for k in range(rotation.shape[1] // 2):
        first = rotation[:, 2 * k]
        lead = next((value for value in first if abs(value) > eps), None)
        if lead is not None and lead < 0:
            rotation[:, 2 * k] = -first
            rotation[:, 2 * k + 1] = -rotation[:, 2 * k + 1]


# ─── Elimination ─────────────────────────────────────────────────────────────


def lu_factor(m: Any, ctx: PrecisionContext) -> LUFactors:
    """Full-pivot LU.  Raises SingularMatrixError below 10^-(dps-5)."""
    a = _as_working(m, ctx).copy()
    n = a.shape[0]
    if n < 1 or a.shape != (n, n):
        raise SpecError(f"matrix must be square and non-empty, got {a.shape}")
    rows, cols = list(range(n)), list(range(n))
    threshold = ctx.convergence_eps
    for k in range(n):
        mags = np.abs(a[k:, k:])
        i, j = divmod(int(np.argmax(mags)), n - k)
        pivot = mags[i, j]
        if pivot < threshold:
            raise SingularMatrixError(k, ctx.mp.nstr(pivot, 5))
        i += k
        j += k
        if i != k:
            a[[k, i], :] = a[[i, k], :]
            rows[k], rows[i] = rows[i], rows[k]
        if j != k:
            a[:, [k, j]] = a[:, [j, k]]
            cols[k], cols[j] = cols[j], cols[k]
        if k + 1 < n:
            a[k + 1 :, k] = a[k + 1 :, k] / a[k, k]
            a[k + 1 :, k + 1 :] = a[k + 1 :, k + 1 :] - np.outer(a[k + 1 :, k], a[k, k + 1 :])
    return LUFactors(a, tuple(rows), tuple(cols))


def lu_solve(factors: LUFactors, b: Any, ctx: PrecisionContext) -> np.ndarray:
    lu = factors.lu
    n = lu.shape[0]
    rhs = _as_working(b, ctx)
    vector = rhs.ndim == 1
    if vector:
        rhs = rhs.reshape(n, 1)
    y = rhs[list(factors.rows), :].copy()
    for k in range(n - 1):
        y[k + 1 :, :] = y[k + 1 :, :] - np.outer(lu[k + 1 :, k], y[k, :])
    for k in reversed(range(n)):
        y[k, :] = y[k, :] / lu[k, k]
        if k:
            y[:k, :] = y[:k, :] - np.outer(lu[:k, k], y[k, :])
    x = np.empty_like(y)
    x[list(factors.cols), :] = y
    return x[:, 0] if vector else x


def lu_det(factors: LUFactors, ctx: PrecisionContext) -> Number:
    """det A from P A Q = L U."""
    total = ctx.mp.one
    for k in range(factors.lu.shape[0]):
        total *= factors.lu[k, k]
    return total * _permutation_sign(factors.rows) * _permutation_sign(factors.cols)


def _permutation_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length and length % 2 == 0:
            sign = -sign
    return sign


def solve(m: Any, b: Any, ctx: PrecisionContext) -> np.ndarray:
    return lu_solve(lu_factor(m, ctx), b, ctx)


def invert(m: Any, ctx: PrecisionContext) -> np.ndarray:
    n = np.asarray(m, dtype=object).shape[0]
    return lu_solve(lu_factor(m, ctx), ctx.eye(n), ctx)


# ─── Matrix functions ────────────────────────────────────────────────────────


def apply_scalar(f: ScalarMap, value: Number, ctx: PrecisionContext) -> Number:
    """f(value) as a finite real number, or DomainError."""
    mp = ctx.mp
    try:
        result = f(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"function undefined ({exc})", mp.nstr(value, 10)) from exc
    if hasattr(result, "_mpc_") or isinstance(result, complex):
        if abs(result.imag) > ctx.convergence_eps * max(abs(result.real), mp.one):
            raise DomainError("function is not real at eigenvalue", mp.nstr(value, 10))
        result = result.real
    result = ctx.mpf(result)
    if mp.isinf(result) or mp.isnan(result):
        raise DomainError("function is not finite at eigenvalue", mp.nstr(value, 10))
    return result


def matrix_function(m: HermitianMatrix, f: ScalarMap, ctx: PrecisionContext) -> np.ndarray:
    """V diag(f(lambda)) V^dagger; real array for real symmetric M, complex otherwise."""
    values, vectors = hermitian_eigen(m, ctx)
    mapped = np.asarray([apply_scalar(f, lam, ctx) for lam in values], dtype=object)
    return (vectors * mapped) @ np.conjugate(vectors).T


def skew_function(
    s: SkewMatrix, f: ScalarMap, ctx: PrecisionContext, *, form: SchurForm | None = None
) -> SkewMatrix:
    """f(iS) for odd real f, returned as the real skew matrix W with f(iS) = iW.

    Pass ``form`` when the Schur form of ``s`` is already known.
    """
    if form is None:
        form = skew_schur(s, ctx)
    return form.reconstruct([apply_scalar(f, eps, ctx) for eps in form.block_values])


# ─── Special functions ───────────────────────────────────────────────────────


def dilog(x: Any, ctx: PrecisionContext) -> Number:
    """Li2(x) on [-1, 1].

    Power series for |x| <= 1/2, the reflection Li2(x) + Li2(1-x) = pi^2/6 - ln x ln(1-x)
    on (1/2, 1), and Landen's identity on [-1, -1/2).
    """
    mp = ctx.mp
    x = ctx.mpf(x)
    if x < -1 or x > 1:
        raise DomainError("dilog argument outside [-1, 1]", mp.nstr(x, 10))
    if x == 0:
        return mp.zero
    if x == 1:
        return mp.pi**2 / 6
    if abs(x) <= mp.mpf(0.5):
        return _dilog_series(x, ctx)
    if x > 0:
        return mp.pi**2 / 6 - mp.log(x) * mp.log(1 - x) - _dilog_series(1 - x, ctx)
    return -_dilog_series(x / (x - 1), ctx) - mp.log(1 - x) ** 2 / 2


def _dilog_series(x: Number, ctx: PrecisionContext) -> Number:
    mp = ctx.mp
    eps = mp.mpf(2) ** (-mp.prec)
    total = mp.zero
    power = x
    k = 1
    while True:
        term = power / (k * k)
        total += term
        if abs(term) <= eps * abs(total):
            return total
        k += 1
        power *= x
