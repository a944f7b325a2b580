"""Closed-form predictions and regression against measured splittings.

Three jobs live here: evaluating the asymptotic splitting formula for a
given Stokes constant, comparing the closed leading form of the fundamental
matrix against direct quadrature of the variational diagonal, and fitting a
measured splitting ladder to recover the exponent and the Stokes prefactor.
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2
import mpmath

from .precision import to_decimal
from .unfolding import (DenominatorNearZero, UnfoldingSpec, ParamPoint,
                        alpha_of, h0_of)


class IllConditionedFit(ValueError):
    """The regression system is numerically singular (degenerate delta grid)."""


class NonPositiveDistance(ValueError):
    """A sample with dist <= 0 cannot enter the logarithmic fit."""


@dataclass(frozen=True)
class Prediction:
    p: ParamPoint
    first_component: object   # mpc
    second_component: object  # mpc, exact conjugate of the first
    modulus: object           # mpfr, |first_component|

    @property
    def modulus_unscaled(self):
        """The same prediction in the original (unrescaled) variables."""
        return self.p.delta * self.modulus

    def to_json(self):
        return {
            "delta": to_decimal(self.p.delta), "sigma": to_decimal(self.p.sigma),
            "first_component": {"re": to_decimal(self.first_component.real),
                                "im": to_decimal(self.first_component.imag)},
            "second_component": {"re": to_decimal(self.second_component.real),
                                 "im": to_decimal(self.second_component.imag)},
            "modulus": to_decimal(self.modulus),
            "modulus_unscaled": to_decimal(self.modulus_unscaled),
        }


@dataclass(frozen=True)
class FitResult:
    slope: object              # estimate of -alpha0*pi/2 (diagnostic fit)
    C_star_fit: object         # constant-model fit (no extrapolation term)
    extrapolated_C_star: object
    kappa: object              # coefficient of 1/log(1/delta)
    residuals: tuple           # y_i - model, in sample order
    window: tuple              # (delta_min, delta_max)

    def to_json(self):
        return {
            "slope": to_decimal(self.slope),
            "C_star_fit": to_decimal(self.C_star_fit),
            "extrapolated_C_star": to_decimal(self.extrapolated_C_star),
            "kappa": to_decimal(self.kappa),
            "residuals": [to_decimal(r) for r in self.residuals],
            "window": [to_decimal(self.window[0]), to_decimal(self.window[1])],
        }


def predict_split(C_in, spec: UnfoldingSpec, p: ParamPoint) -> Prediction:
    """Dominant term of the splitting vector at the section, from C_in."""
    delta = p.delta
    sigma = p.sigma
    h0 = h0_of(spec)
    pi = gmpy2.const_pi()
    logd = gmpy2.log(delta)
    pref = gmpy2.exp(-(1 + spec.d) * logd
                     - spec.alpha0 * pi / (2 * delta)
                     + (pi / 2) * (spec.c + spec.alpha0 * h0 - spec.alpha1 * sigma))
    theta = sigma * pi / 2 + spec.alpha0 * h0 / 2 + (spec.c + spec.alpha0 * h0) * logd
    phase = gmpy2.exp(gmpy2.mpc(0, -1) * theta)
    first = pref * gmpy2.mpc(C_in) * phase
    second = gmpy2.mpc(first.real, -first.imag)
    return Prediction(p=p, first_component=first, second_component=second,
                      modulus=abs(first))


def _z0(u):
    return -gmpy2.tanh(gmpy2.mpc(u))


def a_diag(spec: UnfoldingSpec, p: ParamPoint, u):
    """Diagonal of the dominant variational system along the heteroclinic."""
    z0 = _z0(u)
    al = alpha_of(spec, p)
    h0 = h0_of(spec)
    den = 1 - p.delta * h0 * z0 ** 3 / (-1 + z0 * z0)
    if abs(den) < gmpy2.mpfr("1e-8"):
        raise DenominatorNearZero(f"a_diag prefactor denominator {den} at u={u}")
    pref = 1 / den
    I = gmpy2.mpc(0, 1)
    rot = (al / p.delta + spec.c * z0) * I
    rest = p.sigma - spec.d * z0
    return pref * (-rot + rest), pref * (rot + rest)


def _closed_m(spec, p, u, sign):
    al = alpha_of(spec, p)
    h0 = h0_of(spec)
    I = gmpy2.mpc(0, sign)
    u = gmpy2.mpc(u)
    ch = gmpy2.cosh(u)
    sh = gmpy2.sinh(u)
    logch = gmpy2.log(ch)
    return gmpy2.exp(spec.d * logch
                     - I * al * u / p.delta
                     + p.sigma * u
                     + I * al * h0 * (-sh * sh / 2 + logch)
                     + I * spec.c * logch)


def fundamental_matrix(spec: UnfoldingSpec, p: ParamPoint, u,
                       quad_maxdegree: int = 10):
    """(m1_closed, m2_closed, m1_quad, m2_quad) at u.

    The closed forms drop the 1 + O(1/log(1/delta)) correction factor; the
    quadrature route exponentiates the integral of the variational diagonal
    and serves as ground truth for measuring that factor.
    """
    u = gmpy2.mpc(u)
    m1_closed = _closed_m(spec, p, u, 1)
    m2_closed = _closed_m(spec, p, u, -1)
    if u == 0:
        one = gmpy2.mpc(1)
        return m1_closed, m2_closed, one, one

    old_prec = mpmath.mp.prec
    mpmath.mp.prec = gmpy2.get_context().precision
    try:
        um = mpmath.mpc(mpmath.mpf(str(u.real)), mpmath.mpf(str(u.imag)))

        def integrand(i):
            def g(t):
                w = mpmath.mpc(um * t)
                wg = gmpy2.mpc(gmpy2.mpfr(str(w.real)), gmpy2.mpfr(str(w.imag)))
                a = a_diag(spec, p, wg)[i]
                return um * mpmath.mpc(mpmath.mpf(str(a.real)), mpmath.mpf(str(a.imag)))
            return g

        # cluster nodes toward the endpoint, where z0 steepens near i*pi/2
        pts = [mpmath.mpf(0), mpmath.mpf("0.5"), mpmath.mpf("0.9"),
               mpmath.mpf("0.99"), mpmath.mpf("0.999"), mpmath.mpf(1)]
        quads = []
        for i in range(2):
            v = mpmath.quad(integrand(i), pts, maxdegree=quad_maxdegree)
            quads.append(gmpy2.exp(gmpy2.mpc(gmpy2.mpfr(str(v.real)),
                                             gmpy2.mpfr(str(v.imag)))))
    finally:
        mpmath.mp.prec = old_prec
    return m1_closed, m2_closed, quads[0], quads[1]


def _lsq2(xs, ys):
    """Two-parameter least squares y = a + b x over real mpfr data."""
    n = len(xs)
    sx = sum(xs, gmpy2.mpfr(0))
    sy = sum(ys, gmpy2.mpfr(0))
    sxx = sum((x * x for x in xs), gmpy2.mpfr(0))
    sxy = sum((x * y for x, y in zip(xs, ys)), gmpy2.mpfr(0))
    det = n * sxx - sx * sx
    if det <= 0:
        raise IllConditionedFit("degenerate design (need distinct delta values)")
    b = (n * sxy - sx * sy) / det
    a = (sy - b * sx) / n
    return a, b


def measurement_y(sample, spec: UnfoldingSpec):
    """The reduced log-splitting y(delta) whose limit is log C*."""
    p = sample.p
    h0 = h0_of(spec)
    pi = gmpy2.const_pi()
    if not sample.dist > 0:
        raise NonPositiveDistance(f"dist = {sample.dist} at delta = {p.delta}")
    return (gmpy2.log(sample.dist) + (1 + spec.d) * gmpy2.log(p.delta)
            + spec.alpha0 * pi / (2 * p.delta)
            - (pi / 2) * (spec.c + spec.alpha0 * h0 - spec.alpha1 * p.sigma))


def fit_stokes_from_measurements(samples, spec: UnfoldingSpec,
                                 refine_steps: int = 12) -> FitResult:
    """Exponent diagnostic and extrapolated Stokes prefactor from a ladder.

    The prefactor uses the one-correction model C*(delta) = C*_inf +
    kappa/log(1/delta), fitted to y = log C*(delta) by Gauss-Newton seeded
    from the linear fit of exp(y); the slope comes from an independent
    two-parameter fit of the reduced log distance against 1/delta.
    """
    if len(samples) < 4:
        raise IllConditionedFit("need at least 4 samples at distinct delta")
    sigmas = {to_decimal(s.p.sigma) for s in samples}
    if len(sigmas) != 1:
        raise IllConditionedFit("samples must share a common sigma")
    deltas = [s.p.delta for s in samples]
    if len({to_decimal(d) for d in deltas}) != len(deltas):
        raise IllConditionedFit("delta values must be distinct")

    ys = [measurement_y(s, spec) for s in samples]
    xs = [1 / gmpy2.log(1 / d) for d in deltas]

    # slope diagnostic: reduced log distance against 1/delta
    g = [gmpy2.log(s.dist) + (1 + spec.d) * gmpy2.log(s.p.delta) for s in samples]
    _, slope = _lsq2([1 / d for d in deltas], g)

    # seed from the linear model exp(y) = C + kappa x, then refine in log space
    C, kappa = _lsq2(xs, [gmpy2.exp(y) for y in ys])
    for _ in range(refine_steps):
        vals = [C + kappa * x for x in xs]
        if any(not v > 0 for v in vals):
            break
        r = [y - gmpy2.log(v) for y, v in zip(ys, vals)]
        # jacobian rows: d(log(C + kappa x))/dC = 1/v, /dkappa = x/v
        j11 = sum((1 / (v * v) for v in vals), gmpy2.mpfr(0))
        j12 = sum((x / (v * v) for x, v in zip(xs, vals)), gmpy2.mpfr(0))
        j22 = sum((x * x / (v * v) for x, v in zip(xs, vals)), gmpy2.mpfr(0))
        b1 = sum((ri / v for ri, v in zip(r, vals)), gmpy2.mpfr(0))
        b2 = sum((ri * x / v for ri, x, v in zip(r, xs, vals)), gmpy2.mpfr(0))
        det = j11 * j22 - j12 * j12
        if det == 0:
            break
        C += (j22 * b1 - j12 * b2) / det
        kappa += (j11 * b2 - j12 * b1) / det

    vals = [C + kappa * x for x in xs]
    residuals = tuple(y - gmpy2.log(v) for y, v in zip(ys, vals))
    C_plain = gmpy2.exp(sum(ys, gmpy2.mpfr(0)) / len(ys))
    return FitResult(slope=slope, C_star_fit=C_plain, extrapolated_C_star=C,
                     kappa=kappa, residuals=residuals,
                     window=(min(deltas), max(deltas)))


def fit_table_csv(samples, spec: UnfoldingSpec, fit: FitResult) -> str:
    """Plot-ready CSV of (delta, y, fitted)."""
    lines = ["delta,y,fitted"]
    for s in samples:
        y = measurement_y(s, spec)
        x = 1 / gmpy2.log(1 / s.p.delta)
        fitted = gmpy2.log(fit.extrapolated_C_star + fit.kappa * x)
        lines.append(",".join([to_decimal(s.p.delta), to_decimal(y), to_decimal(fitted)]))
    return "\n".join(lines) + "\n"
