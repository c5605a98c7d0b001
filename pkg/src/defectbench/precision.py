"""Working precision: decimal digits, derived tolerances and a private mpmath context.

Every ``PrecisionContext`` owns its own ``mpmath.MPContext``.  Numbers created through
it carry that context, so arithmetic on them never reads the global ``mpmath.mp``
precision and contexts of different precision can be used from different threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any

import numpy as np
from mpmath import MPContext

from .errors import SpecError

MIN_DIGITS = 30
GUARD_BITS = 16
DEFAULT_PRECISION_RATIO = 1.5
MAX_PRECISION_RATIO = 2.0

Number = Any  # an mpf/mpc of some PrecisionContext


@dataclass(frozen=True)
class PrecisionContext:
    decimal_digits: int
    purity_tol: Decimal | None = None
    convergence_tol: Decimal | None = None
    mp: MPContext = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.decimal_digits < MIN_DIGITS:
            raise SpecError(f"decimal_digits must be >= {MIN_DIGITS}, got {self.decimal_digits}")
        purity = (
            Decimal(10) ** -(self.decimal_digits - 10)
            if self.purity_tol is None
            else Decimal(self.purity_tol)
        )
        convergence = (
            Decimal(10) ** -(self.decimal_digits - 5)
            if self.convergence_tol is None
            else Decimal(self.convergence_tol)
        )
        if not convergence > 0 or purity < convergence:
            raise SpecError(
                f"need purity_tol >= convergence_tol > 0, got {purity} and {convergence}"
            )
        object.__setattr__(self, "purity_tol", purity)
        object.__setattr__(self, "convergence_tol", convergence)
        mp = MPContext()
        mp.prec = self.bits
        object.__setattr__(self, "mp", mp)

    @classmethod
    def for_system_size(
        cls, n_sites: int, ratio: float | Decimal = DEFAULT_PRECISION_RATIO
    ) -> PrecisionContext:
        """dps = ceil(ratio * N), never below ``MIN_DIGITS``."""
        if not 0 < Decimal(str(ratio)) <= Decimal(str(MAX_PRECISION_RATIO)):
            raise SpecError(f"precision ratio must lie in (0, {MAX_PRECISION_RATIO}], got {ratio}")
        digits = math.ceil(Decimal(str(ratio)) * n_sites)
        return cls(max(MIN_DIGITS, digits))

    @property
    def bits(self) -> int:
        return math.ceil(self.decimal_digits * math.log2(10)) + GUARD_BITS

    def with_digits(self, decimal_digits: int) -> PrecisionContext:
        return PrecisionContext(decimal_digits)

    # ── Scalars ───────────────────────────────────────────────────────────────

    def mpf(self, value: Any) -> Number:
        if isinstance(value, Decimal):
            value = str(value)
        return self.mp.mpf(value)

    def mpc(self, real: Any, imag: Any = 0) -> Number:
        if imag == 0 and not isinstance(real, (str, Decimal)):
            real, imag = real.real, real.imag
        return self.mp.mpc(self.mpf(real), self.mpf(imag))

    def power_of_ten(self, exponent: int) -> Number:
        return self.mp.mpf(10) ** exponent

    @property
    def purity_eps(self) -> Number:
        return self.mpf(self.purity_tol)

    @property
    def convergence_eps(self) -> Number:
        return self.mpf(self.convergence_tol)

    @property
    def zero_mode_eps(self) -> Number:
        """Schur values below 10^-(dps/2) count as zero modes."""
        return self.power_of_ten(-(self.decimal_digits // 2))

    @property
    def escalation_eps(self) -> Number:
        """Distance 1 - |nu| below which the entanglement Hamiltonian is unresolved."""
        return self.power_of_ten(-(self.decimal_digits - 8))

    def to_decimal_string(self, value: Number) -> str:
        """Decimal rendering at the working precision (re-parses to the same digits)."""
        if self.mp.isinf(value):
            return "inf" if value > 0 else "-inf"
        return self.mp.nstr(value, self.decimal_digits, strip_zeros=True)

    # ── Arrays (numpy object arrays of this context's numbers) ─────────────────

    def zeros(self, rows: int, cols: int | None = None) -> np.ndarray:
        return np.full((rows, rows if cols is None else cols), self.mp.zero, dtype=object)

    def vector(self, size: int) -> np.ndarray:
        return np.full(size, self.mp.zero, dtype=object)

    def eye(self, size: int) -> np.ndarray:
        out = self.zeros(size)
        for i in range(size):
            out[i, i] = self.mp.one
        return out

    def asarray(self, values: Any) -> np.ndarray:
        """Convert nested numbers or an array to an object array of this context's mpf."""
        arr = np.asarray(values, dtype=object)
        return np.frompyfunc(self.mpf, 1, 1)(arr).astype(object)

    def ascomplex(self, values: Any) -> np.ndarray:
        arr = np.asarray(values, dtype=object)
        return np.frompyfunc(self.mpc, 1, 1)(arr).astype(object)

    def to_float(self, values: np.ndarray) -> np.ndarray:
        """Double-precision copy, used for seeds and sign checks only."""
        arr = np.asarray(values, dtype=object)
        if any(hasattr(v, "_mpc_") or isinstance(v, complex) for v in arr.flat):
            return np.frompyfunc(complex, 1, 1)(arr).astype(np.complex128)
        return np.frompyfunc(float, 1, 1)(arr).astype(np.float64)
