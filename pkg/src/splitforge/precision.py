"""Working-precision management.

All pipeline arithmetic runs on gmpy2 (MPFR/MPC) scalars under a single
binary precision chosen per run.  The splitting distances behave like
exp(-alpha0*pi/(2*delta)) and underflow hardware floats long before the
interesting parameter range, so every quantity is created through a
PrecisionContext.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

MIN_BITS = 64
GUARD_BITS = 128

_saved_contexts: list = []


@dataclass(frozen=True)
class PrecisionContext:
    """Binary working precision for one pipeline run."""

    bits: int

    def __post_init__(self):
        if self.bits < MIN_BITS:
            raise ValueError(f"precision must be at least {MIN_BITS} bits, got {self.bits}")

    # -- scalar constructors -------------------------------------------------

    def real(self, x) -> gmpy2.mpfr:
        with self:
            return gmpy2.mpfr(x)

    def complex(self, re, im=0) -> gmpy2.mpc:
        with self:
            return gmpy2.mpc(gmpy2.mpfr(re), gmpy2.mpfr(im))

    def pi(self) -> gmpy2.mpfr:
        with self:
            return gmpy2.const_pi()

    def e(self) -> gmpy2.mpfr:
        with self:
            return gmpy2.exp(gmpy2.mpfr(1))

    @property
    def digits(self) -> int:
        """Decimal digits carried by this context."""
        return int(self.bits * math.log10(2))

    # -- activation ----------------------------------------------------------

    def activate(self) -> None:
        """Make this precision the ambient gmpy2 precision (not scoped)."""
        gmpy2.get_context().precision = self.bits

    def __enter__(self) -> "PrecisionContext":
        _saved_contexts.append(gmpy2.get_context())
        ctx = gmpy2.context(precision=self.bits)
        gmpy2.set_context(ctx)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        gmpy2.set_context(_saved_contexts.pop())


def bits_for_delta(alpha0: float, delta_min: float) -> int:
    """Precision so the e^(-alpha0*pi/(2*delta)) splitting keeps its digits.

    ceil(alpha0*pi/(2*delta_min)/ln 2) bits cover the exponential smallness;
    the guard bits keep >= 38 significant digits on top of it.
    """
    need = math.ceil(float(alpha0) * math.pi / (2.0 * float(delta_min)) / math.log(2.0))
    return max(MIN_BITS, need + GUARD_BITS)


def bits_for_inner_window(alpha: float, y_max: float) -> int:
    """Precision covering the e^(-alpha*y) size of the inner difference."""
    need = math.ceil(float(alpha) * float(y_max) / math.log(2.0))
    return max(MIN_BITS, need + GUARD_BITS)


def to_decimal(x) -> str:
    """Full-precision decimal string; round-trips through mpfr() exactly."""
    if isinstance(x, gmpy2.mpc):
        raise TypeError("serialize mpc as a (re, im) pair of decimal strings")
    return str(gmpy2.mpfr(x))


def is_finite(x) -> bool:
    return bool(gmpy2.is_finite(x))
