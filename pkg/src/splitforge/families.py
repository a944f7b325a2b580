"""Reference families used by the test suite, scripts, and shipped configs."""
from __future__ import annotations

from .precision import PrecisionContext
from .unfolding import UnfoldingSpec

Z3 = (0, 0, 3, 0, 0)


def unperturbed(ctx: PrecisionContext, b=1, c=0, d=1) -> UnfoldingSpec:
    """f = g = h = 0: the manifolds coincide and the splitting vanishes."""
    return UnfoldingSpec.create(ctx, 1, 0, b, c, d)


def linear_inner_oracle(ctx: PrecisionContext) -> UnfoldingSpec:
    """f = Z^3 with b = c = 0, d = 1: the inner equation is solvable in
    closed form and its Stokes constant is -pi*alpha0^3/3."""
    return UnfoldingSpec.create(ctx, 1, 0, 0, 0, 1, f=[(1, Z3)])


def pinned_cubic(ctx: PrecisionContext) -> UnfoldingSpec:
    """The repo-pinned cubic test family.

    alpha0 = 1, alpha1 = 0, b = 1, c = 0, d = 1, f = Z^3, g = 0,
    h = -0.7 Z^3 (so h0 = 0.7).  The nonzero h0 keeps the prefactor
    exponent, the inner log-phase, and the fundamental-matrix deviation all
    active, while the splitting stays single-harmonic and fast to measure.
    """
    return UnfoldingSpec.create(ctx, 1, 0, 1, 0, 1,
                                f=[(1, Z3)], h=[("-0.7", Z3)])
