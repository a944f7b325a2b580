"""Data model and evaluation of the rescaled saddle-focus unfolding.

The family is

    dx/dt = x(sigma - d z) + (alpha/delta + c z) y + delta^-2 f(dx, dy, dz, delta, delta sigma)
    dy/dt = -(alpha/delta + c z) x + y(sigma - d z) + delta^-2 g(...)
    dz/dt = -1 + b(x^2 + y^2) + z^2 + delta^-2 h(...)

with alpha = alpha0 + alpha1*delta*sigma, and f, g, h real polynomials in
(X, Y, Z, D, S) whose monomials all have total degree >= 3.  Evaluation is
generic over scalars and Taylor jets (only ring operations are used).
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from .precision import PrecisionContext, to_decimal


class DenominatorNearZero(ArithmeticError):
    """The shared denominator of the complexified chart left its safe range."""


@dataclass(frozen=True)
class Polynomial5:
    """Real polynomial in the formal variables (X, Y, Z, D, S)."""

    monomials: tuple  # of (coeff: mpfr, exps: tuple of 5 ints)

    def __post_init__(self):
        seen = set()
        for _, exps in self.monomials:
            if len(exps) != 5 or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent tuple {exps}")
            if exps in seen:
                raise ValueError(f"duplicate exponent tuple {exps}")
            seen.add(exps)

    @classmethod
    def from_entries(cls, ctx: PrecisionContext, entries) -> "Polynomial5":
        return cls(tuple((ctx.real(c), tuple(int(e) for e in exps)) for c, exps in entries))

    @classmethod
    def zero(cls) -> "Polynomial5":
        return cls(())

    def is_zero(self) -> bool:
        return all(c == 0 for c, _ in self.monomials)

    def min_degree(self):
        degs = [sum(e) for c, e in self.monomials if c != 0]
        return min(degs) if degs else None

    def eval(self, args):
        """Evaluate at 5 arguments (scalars or Series); exact ring arithmetic."""
        total = None
        cache = {}
        for coeff, exps in self.monomials:
            term = coeff
            skip = False
            for i, e in enumerate(exps):
                if e == 0:
                    continue
                a = args[i]
                if not hasattr(a, "coeff") and a == 0:
                    skip = True
                    break
                key = (i, e)
                p = cache.get(key)
                if p is None:
                    p = a if e == 1 else a ** e
                    cache[key] = p
                term = term * p
            if skip:
                continue
            total = term if total is None else total + term
        if total is None:
            return gmpy2.mpfr(0)
        return total

    def partial(self, i: int) -> "Polynomial5":
        out = []
        for coeff, exps in self.monomials:
            if exps[i] == 0:
                continue
            new = list(exps)
            new[i] -= 1
            out.append((coeff * exps[i], tuple(new)))
        return Polynomial5(tuple(out))

    def coefficient(self, exps) -> gmpy2.mpfr:
        exps = tuple(exps)
        for c, e in self.monomials:
            if e == exps:
                return c
        return gmpy2.mpfr(0)

    def to_json(self):
        return [{"coeff": to_decimal(c), "exps": list(e)} for c, e in self.monomials]

    @classmethod
    def from_json(cls, ctx: PrecisionContext, data) -> "Polynomial5":
        return cls.from_entries(ctx, [(m["coeff"], m["exps"]) for m in data])


@dataclass(frozen=True)
class UnfoldingSpec:
    alpha0: object
    alpha1: object
    b: object
    c: object
    d: object
    f: Polynomial5
    g: Polynomial5
    h: Polynomial5

    @classmethod
    def create(cls, ctx: PrecisionContext, alpha0, alpha1, b, c, d,
               f=(), g=(), h=()) -> "UnfoldingSpec":
        mk = lambda p: p if isinstance(p, Polynomial5) else Polynomial5.from_entries(ctx, p)
        return cls(ctx.real(alpha0), ctx.real(alpha1), ctx.real(b), ctx.real(c),
                   ctx.real(d), mk(f), mk(g), mk(h))

    def to_json(self):
        return {
            "alpha0": to_decimal(self.alpha0), "alpha1": to_decimal(self.alpha1),
            "b": to_decimal(self.b), "c": to_decimal(self.c), "d": to_decimal(self.d),
            "f": self.f.to_json(), "g": self.g.to_json(), "h": self.h.to_json(),
        }

    @classmethod
    def from_json(cls, ctx: PrecisionContext, data) -> "UnfoldingSpec":
        return cls(ctx.real(data["alpha0"]), ctx.real(data["alpha1"]),
                   ctx.real(data["b"]), ctx.real(data["c"]), ctx.real(data["d"]),
                   Polynomial5.from_json(ctx, data["f"]),
                   Polynomial5.from_json(ctx, data["g"]),
                   Polynomial5.from_json(ctx, data["h"]))


@dataclass(frozen=True)
class ParamPoint:
    delta: object
    sigma: object

    @classmethod
    def create(cls, ctx: PrecisionContext, delta, sigma=0) -> "ParamPoint":
        return cls(ctx.real(delta), ctx.real(sigma))


def validate(spec: UnfoldingSpec, p: ParamPoint):
    """List of violated admissibility conditions (empty means ok)."""
    violations = []
    if not p.delta > 0:
        violations.append("delta must be positive")
    if not spec.d > 0:
        violations.append("d must be positive")
    elif not abs(p.sigma) < spec.d:
        violations.append("|sigma| must be below d")
    if spec.alpha0 == 0:
        violations.append("alpha0 must be nonzero")
    for name, poly in (("f", spec.f), ("g", spec.g), ("h", spec.h)):
        deg = poly.min_degree()
        if deg is not None and deg < 3:
            violations.append(f"{name} has a monomial of total degree {deg} < 3")
    return violations


def alpha_of(spec: UnfoldingSpec, p: ParamPoint):
    """alpha evaluated at delta*sigma, truncated at the first jet."""
    return spec.alpha0 + spec.alpha1 * (p.delta * p.sigma)


def eval_field(spec: UnfoldingSpec, state, p: ParamPoint):
    """(dx/dt, dy/dt, dz/dt); generic over scalars and Taylor jets."""
    x, y, z = state
    delta = p.delta
    sigma = p.sigma
    ds = delta * sigma
    al = alpha_of(spec, p)
    rot = al / delta + spec.c * z
    damp = sigma - spec.d * z
    inv_d2 = 1 / (delta * delta)
    args = (delta * x, delta * y, delta * z, delta, ds)
    fx = x * damp + rot * y + inv_d2 * spec.f.eval(args)
    fy = -rot * x + y * damp + inv_d2 * spec.g.eval(args)
    fz = -1 + spec.b * (x * x + y * y) + z * z + inv_d2 * spec.h.eval(args)
    return fx, fy, fz


def eval_jacobian(spec: UnfoldingSpec, state, p: ParamPoint):
    """Analytic 3x3 Jacobian of eval_field at a (scalar) state."""
    x, y, z = state
    delta = p.delta
    sigma = p.sigma
    ds = delta * sigma
    al = alpha_of(spec, p)
    rot = al / delta + spec.c * z
    damp = sigma - spec.d * z
    inv_d = 1 / delta  # the chain rule through (dx, dy, dz) leaves delta^-1
    args = (delta * x, delta * y, delta * z, delta, ds)
    fX, fY, fZ = (spec.f.partial(i).eval(args) for i in range(3))
    gX, gY, gZ = (spec.g.partial(i).eval(args) for i in range(3))
    hX, hY, hZ = (spec.h.partial(i).eval(args) for i in range(3))
    row1 = (damp + inv_d * fX, rot + inv_d * fY, -spec.d * x + spec.c * y + inv_d * fZ)
    row2 = (-rot + inv_d * gX, damp + inv_d * gY, -spec.c * x - spec.d * y + inv_d * gZ)
    row3 = (2 * spec.b * x + inv_d * hX, 2 * spec.b * y + inv_d * hY, 2 * z + inv_d * hZ)
    return (row1, row2, row3)


def h0_of(spec: UnfoldingSpec):
    """Minus the Z^3 coefficient of h restricted to X=Y=D=S=0."""
    return -spec.h.coefficient((0, 0, 3, 0, 0))


def complexified_args(xi, xib, zval, delta, ds):
    """Arguments fed to f, g, h in the complexified chart xi = x + iy."""
    half = gmpy2.mpfr("0.5")
    x = half * (xi + xib)
    y = gmpy2.mpc(0, -1) * half * (xi - xib)
    return (delta * x, delta * y, delta * zval, delta, ds)


def eval_field_xi(spec: UnfoldingSpec, xi, xib, u, p: ParamPoint, den_floor="1e-6"):
    """(dxi/du, dxib/du) of the complexified system along z = -tanh(u).

    Scalar evaluation only; u must avoid the poles of tanh at i pi/2 + i k pi.
    For real u and xib = conjugate(xi) the two outputs form a conjugate pair.
    """
    I = gmpy2.mpc(0, 1)
    delta = p.delta
    sigma = p.sigma
    ds = delta * sigma
    al = alpha_of(spec, p)
    z0 = -gmpy2.tanh(gmpy2.mpc(u))
    args = complexified_args(xi, xib, z0, delta, ds)
    F1 = spec.f.eval(args) + I * spec.g.eval(args)
    F2 = spec.f.eval(args) - I * spec.g.eval(args)
    Hv = spec.h.eval(args)
    inv_d2 = 1 / (delta * delta)
    rot = al / delta + spec.c * z0
    damp = sigma - spec.d * z0
    den = 1 + (spec.b * xi * xib + inv_d2 * Hv) / (-1 + z0 * z0)
    if abs(den) < gmpy2.mpfr(den_floor):
        raise DenominatorNearZero(f"chart denominator {den} near zero at u={u}")
    dxi = (-rot * I * xi + xi * damp + inv_d2 * F1) / den
    dxib = (rot * I * xib + xib * damp + inv_d2 * F2) / den
    return dxi, dxib
