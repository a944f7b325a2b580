"""Inner equation: decaying solutions on complex paths and the Stokes constant.

The inner system is the singular (delta = 0) limit of the complexified family
in the blown-up variable s near the i*pi/2 singularity of the heteroclinic:

    dpsi/ds  = [-(alpha - c/s) i psi  + d psi / s + F1(psi, psib, -1/s)] / Den
    dpsib/ds = [ (alpha - c/s) i psib + d psib / s + F2(psi, psib, -1/s)] / Den
    Den      = 1 + s^2 (b psi psib + H(psi, psib, -1/s))

Two solutions decay like |s|^-3 on left/right sectors of the lower half
plane; their difference on the overlap carries the Stokes constant:

    DeltaPsi0(s) = s^d exp(-i(alpha s - (c + alpha h0) log s)) ((C_in, 0) + chi)

with |chi_1| <= K/|s|.  C_in is read off on the negative imaginary axis and
fitted with the one-term model C_in + c1/y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

from .precision import to_decimal
from .taylor import IntegratorConfig, Series, as_series, integrate_path, shift_down
from .unfolding import Polynomial5, UnfoldingSpec, h0_of

DEFAULT_BETA0 = math.pi / 6
DEFAULT_RHO = 20.0
DEFAULT_SEED_ORDER = 8


class PathOutsideSector(ValueError):
    """A solve path left the sectorial domain of the requested branch."""


class DenominatorBlowup(ArithmeticError):
    """The inner denominator approached zero along the path."""


class WindowTooFar(ArithmeticError):
    """The inner difference fell below the integration noise floor."""


class WindowTooClose(ArithmeticError):
    """The fit residual exceeded half of |C_in|."""


class DegenerateRecurrence(ArithmeticError):
    """The seed recurrence would divide by alpha = 0."""


@dataclass(frozen=True)
class InnerParams:
    alpha: object
    b: object
    c: object
    d: object
    h0: object
    f: Polynomial5
    g: Polynomial5
    h: Polynomial5

    @classmethod
    def from_spec(cls, spec: UnfoldingSpec) -> "InnerParams":
        return cls(alpha=spec.alpha0, b=spec.b, c=spec.c, d=spec.d,
                   h0=h0_of(spec), f=spec.f, g=spec.g, h=spec.h)


@dataclass(frozen=True)
class InnerSolution:
    branch: str       # "u" | "s"
    samples: tuple    # of (s, (psi, psib))
    seed_order: int
    seed_tail: object  # magnitude of the last retained seed term at the start
    path_meta: tuple  # of waypoint tuples, one per target


@dataclass(frozen=True)
class StokesResult:
    C_in: object        # mpc
    err_estimate: object
    fit_window: tuple   # (y_min, y_max)
    raw: tuple          # of (y, C_est)

    def to_json(self):
        return {
            "C_in": {"re": to_decimal(self.C_in.real), "im": to_decimal(self.C_in.imag)},
            "err_estimate": to_decimal(self.err_estimate),
            "fit_window": [to_decimal(self.fit_window[0]), to_decimal(self.fit_window[1])],
            "raw": [{"y": to_decimal(y),
                     "C_est": {"re": to_decimal(c.real), "im": to_decimal(c.imag)}}
                    for y, c in self.raw],
        }


def _inner_args(psi, psib, zval):
    half = gmpy2.mpfr("0.5")
    x = half * (psi + psib)
    y = gmpy2.mpc(0, -1) * half * (psi - psib)
    return (x, y, zval, gmpy2.mpfr(0), gmpy2.mpfr(0))


def inner_field(ip: InnerParams, psi, psib, s, den_floor="0.25"):
    """(dpsi/ds, dpsib/ds); generic over scalars and Taylor jets."""
    I = gmpy2.mpc(0, 1)
    inv_s = 1 / s
    args = _inner_args(psi, psib, -inv_s)
    fv = ip.f.eval(args)
    gv = ip.g.eval(args)
    F1 = fv + I * gv
    F2 = fv - I * gv
    Hv = ip.h.eval(args)
    den = 1 + (s * s) * (ip.b * psi * psib + Hv)
    if not isinstance(den, Series) and abs(den) < gmpy2.mpfr(den_floor):
        raise DenominatorBlowup(f"inner denominator {den} near zero at s={s}")
    lin = (ip.alpha - ip.c * inv_s) * I
    d1 = (-lin * psi + ip.d * psi * inv_s + F1) / den
    d2 = (lin * psib + ip.d * psib * inv_s + F2) / den
    return d1, d2


def seed_coefficients(ip: InnerParams, k_terms: int):
    """Coefficients a_k, b_k of the formal solution sum_{k>=3} a_k s^-k.

    Derived order by order from the inner system written in w = 1/s; the
    update is strictly triangular, so one sweep fills everything in.
    """
    if ip.alpha == 0:
        raise DegenerateRecurrence("alpha must be nonzero")
    if k_terms < 1:
        raise ValueError("k_terms must be at least 1")
    K = k_terms + 2
    I = gmpy2.mpc(0, 1)
    zero = gmpy2.mpc(0)
    a = [zero] * (K + 3)
    b = [zero] * (K + 3)
    ia = I * ip.alpha
    # Order k of every right-hand-side node only involves a_j, b_j with j < k
    # (arguments carrying psi enter at order >= 3 and z = -w at order 1, so
    # every mixed product loses at least two orders).  The graph is rebuilt
    # per order, so node caches never hold values read before assignment.
    for k in range(3, K + 1):
        wv = Series.affine(gmpy2.mpfr(0), gmpy2.mpfr(1))
        psi = Series.from_coeffs(a)
        psib = Series.from_coeffs(b)
        psid = Series.from_coeffs([(j + 1) * a[j + 1] for j in range(K + 2)])
        psibd = Series.from_coeffs([(j + 1) * b[j + 1] for j in range(K + 2)])
        args = _inner_args(psi, psib, -wv)
        fv = ip.f.eval(args)
        gv = ip.g.eval(args)
        F1 = fv + I * gv
        F2 = fv - I * gv
        Hv = ip.h.eval(args)
        E = ip.b * (psi * psib) + Hv
        den = 1 + shift_down(as_series(E), 2)
        lhs1 = (-(wv * wv) * psid) * den
        lhs2 = (-(wv * wv) * psibd) * den
        # numerators with the -i alpha psi (resp. +i alpha psib) terms removed
        n1 = (I * ip.c) * (wv * psi) + ip.d * (wv * psi) + F1
        n2 = (-I * ip.c) * (wv * psib) + ip.d * (wv * psib) + F2
        a[k] = (n1.coeff(k) - lhs1.coeff(k)) / ia
        b[k] = (n2.coeff(k) - lhs2.coeff(k)) / (-ia)
    return a[: K + 1], b[: K + 1]


def _eval_seed(a, b, s):
    w = 1 / gmpy2.mpc(s)

    def horner(coeffs):
        acc = gmpy2.mpc(0)
        for c in reversed(coeffs):
            acc = acc * w + c
        return acc

    return horner(a), horner(b)


def asymptotic_seed(ip: InnerParams, s, k_terms: int = DEFAULT_SEED_ORDER):
    """(psi, psib) of the truncated formal solution at a (large) point s."""
    return _eval_seed(*seed_coefficients(ip, k_terms), s)


def choose_seed_order(ip: InnerParams, S0, tol, k_max: int = 160):
    """Coefficients truncated so the tail at |s| = S0 sits below tol.

    The series is factorially divergent, so the order is grown only while the
    last retained term at S0 keeps shrinking; returns (a, b, order, tail).
    """
    S0 = abs(gmpy2.mpc(S0))
    tol = gmpy2.mpfr(tol)
    k = DEFAULT_SEED_ORDER
    best = None
    while True:
        a, b = seed_coefficients(ip, k)
        tail = max(abs(a[-1]), abs(b[-1])) * S0 ** (-(len(a) - 1))
        if best is None or tail < best[3]:
            best = (a, b, k, tail)
        if tail < tol or k >= k_max or tail > best[3]:
            return best
        k = min(k * 2, k_max)


def seed_residual(ip: InnerParams, s, k_terms: int):
    """Max norm of d/ds(seed) - inner_field(seed) at s (seed quality check)."""
    a, b = seed_coefficients(ip, k_terms)
    s = gmpy2.mpc(s)
    w = 1 / s
    psi = psib = dpsi = dpsib = gmpy2.mpc(0)
    for k in range(len(a) - 1, 2, -1):
        wk = w ** k
        psi += a[k] * wk
        psib += b[k] * wk
        dpsi += -k * a[k] * wk * w
        dpsib += -k * b[k] * wk * w
    f1, f2 = inner_field(ip, psi, psib, s)
    return max(abs(dpsi - f1), abs(dpsib - f2))


def in_sector(s, branch: str, beta0=DEFAULT_BETA0, rho=DEFAULT_RHO, upper=False) -> bool:
    """Membership in the sectorial validity domain of a branch."""
    s = gmpy2.mpc(s)
    im = -s.imag if upper else s.imag
    re = s.real
    if not im < 0:
        return False
    t = gmpy2.mpfr(math.tan(beta0))
    if branch == "u":
        return abs(im) >= t * re + gmpy2.mpfr(rho)
    if branch == "s":
        return abs(im) >= -t * re + gmpy2.mpfr(rho)
    raise ValueError(f"branch must be 'u' or 's', got {branch!r}")


def solve_inner(ip: InnerParams, branch: str, targets, S0, cfg: IntegratorConfig,
                beta0=DEFAULT_BETA0, rho=DEFAULT_RHO,
                seed_order=None, upper=False) -> InnerSolution:
    """Decaying branch solution at target points via far-field seeding.

    Each target gets a horizontal approach segment from Re = -S0 (branch u)
    or +S0 (branch s), seeded with the truncated formal solution; the seed
    order defaults to matching the seed tail to the integrator tolerance.
    """
    S0 = gmpy2.mpfr(S0)
    targets = [gmpy2.mpc(t) for t in targets]
    if not targets:
        raise ValueError("no targets")
    tmax = max(abs(t) for t in targets)
    if not S0 >= 10 * tmax:
        raise ValueError(f"S0 = {S0} must be at least 10*max|target| = {10 * tmax}")
    if seed_order is None:
        a, b, order, tail = choose_seed_order(ip, S0, cfg.abs_tol)
    else:
        a, b = seed_coefficients(ip, seed_order)
        order = seed_order
        tail = max(abs(a[-1]), abs(b[-1])) * S0 ** (-(len(a) - 1))
    sgn = -1 if branch == "u" else 1
    samples = []
    meta = []

    def field(s, y):
        return inner_field(ip, y[0], y[1], s)

    for tgt in targets:
        start = gmpy2.mpc(sgn * S0, tgt.imag)
        for pt in (start, tgt):
            if not in_sector(pt, branch, beta0, rho, upper):
                raise PathOutsideSector(f"{pt} outside sector of branch {branch!r}")
        y0 = _eval_seed(a, b, start)
        y = integrate_path(field, y0, [start, tgt], cfg)
        samples.append((tgt, (y[0], y[1])))
        meta.append((start, tgt))
    return InnerSolution(branch=branch, samples=tuple(samples),
                         seed_order=order, seed_tail=tail, path_meta=tuple(meta))


def _inverse_prefactor(ip: InnerParams, s, upper=False):
    """1 / (s^d exp(-+i(alpha s - (c + alpha h0) log s))), principal branch."""
    s = gmpy2.mpc(s)
    logs = gmpy2.log(s)
    I = gmpy2.mpc(0, 1)
    phase = ip.alpha * s - (ip.c + ip.alpha * ip.h0) * logs
    sign = -1 if upper else 1
    return gmpy2.exp(-ip.d * logs + sign * I * phase)


def _fit_const_plus_inverse(ys, vals):
    """Least squares v = C + c1/y; returns (C, c1, residuals)."""
    n = len(ys)
    s11 = gmpy2.mpfr(n)
    s1x = sum(1 / y for y in ys)
    sxx = sum(1 / (y * y) for y in ys)
    r1 = sum(vals, gmpy2.mpc(0))
    rx = sum((v / y for v, y in zip(vals, ys)), gmpy2.mpc(0))
    det = s11 * sxx - s1x * s1x
    if det == 0:
        raise ValueError("degenerate fit window")
    C = (sxx * r1 - s1x * rx) / det
    c1 = (s11 * rx - s1x * r1) / det
    res = [v - (C + c1 / y) for v, y in zip(vals, ys)]
    return C, c1, res


def stokes_constant(ip: InnerParams, y_window, n_points: int, cfg: IntegratorConfig,
                    S0=None, beta0=DEFAULT_BETA0, rho=DEFAULT_RHO,
                    seed_order=None) -> StokesResult:
    """C_in from the branch difference along the negative imaginary axis."""
    y_min = gmpy2.mpfr(y_window[0])
    y_max = gmpy2.mpfr(y_window[1])
    if n_points < 2:
        raise ValueError("need at least 2 window points")
    if not y_min >= rho:
        raise ValueError(f"y_min = {y_min} below the sector parameter rho = {rho}")
    ys = [y_min + (y_max - y_min) * k / (n_points - 1) for k in range(n_points)]
    targets = [gmpy2.mpc(0, -y) for y in ys]
    if S0 is None:
        S0 = max(gmpy2.mpfr(1000), 10 * y_max)
    sol_u = solve_inner(ip, "u", targets, S0, cfg, beta0, rho, seed_order)
    sol_s = solve_inner(ip, "s", targets, S0, cfg, beta0, rho, seed_order)
    ests = []
    for (tgt, pu), (_, ps) in zip(sol_u.samples, sol_s.samples):
        dpsi = pu[0] - ps[0]
        ests.append(dpsi * _inverse_prefactor(ip, tgt))
    C, c1, res = _fit_const_plus_inverse(ys, ests)
    fit_err = max(abs(r) for r in res) + abs(c1) / y_max
    floor = gmpy2.mpfr(cfg.abs_tol) + sol_u.seed_tail + sol_s.seed_tail
    noise = floor * gmpy2.exp(ip.alpha * y_max) * y_max ** (-ip.d)
    err = fit_err + noise
    if abs(C) > 0 and abs(C) < 2 * noise:
        raise WindowTooFar(f"|C_in| = {abs(C)} within noise floor {noise}")
    if abs(C) > 2 * noise and max(abs(r) for r in res) > abs(C) / 2:
        raise WindowTooClose("fit residual exceeds half of |C_in|")
    return StokesResult(C_in=C, err_estimate=err, fit_window=(y_min, y_max),
                        raw=tuple(zip(ys, ests)))


def conjugate_stokes(r: StokesResult):
    """The constant carried near the conjugate singularity: conj(C_in).

    Justified by the real-analyticity of the family; no second solve is done.
    """
    c = r.C_in
    return gmpy2.mpc(c.real, -c.imag)


def mirrored_second_component(ip: InnerParams, y_window, n_points: int,
                              cfg: IntegratorConfig, S0=None,
                              beta0=DEFAULT_BETA0, rho=DEFAULT_RHO,
                              seed_order=None):
    """Explicit upper-half-plane solve: the second-component constant.

    Verifies conjugate_stokes: the returned value should match conj(C_in)
    within the error estimates.
    """
    y_min = gmpy2.mpfr(y_window[0])
    y_max = gmpy2.mpfr(y_window[1])
    ys = [y_min + (y_max - y_min) * k / (n_points - 1) for k in range(n_points)]
    targets = [gmpy2.mpc(0, y) for y in ys]
    if S0 is None:
        S0 = max(gmpy2.mpfr(1000), 10 * y_max)
    sol_u = solve_inner(ip, "u", targets, S0, cfg, beta0, rho, seed_order, upper=True)
    sol_s = solve_inner(ip, "s", targets, S0, cfg, beta0, rho, seed_order, upper=True)
    ests = []
    for (tgt, pu), (_, ps) in zip(sol_u.samples, sol_s.samples):
        dpsib = pu[1] - ps[1]
        ests.append(dpsib * _inverse_prefactor(ip, tgt, upper=True))
    C, c1, res = _fit_const_plus_inverse(ys, ests)
    return C, max(abs(r) for r in res) + abs(c1) / y_max
