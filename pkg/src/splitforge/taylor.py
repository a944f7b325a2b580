"""Adaptive Taylor-series ODE integration over multiprecision scalars.

One step works by generating the solution jet at the current point: the field
is evaluated once on lazy truncated power series (`Series`), and the classic
recurrence y_{k+1} = f_k/(k+1) fills in coefficients order by order.  The step
size is then chosen so the last retained terms of the jet stay below the local
tolerance.  The same machinery integrates over real time, over piecewise
linear paths in complex time, and (with the independent variable swapped to z)
lands exactly on the section {z = 0}.

Fields are callables field(t, y) -> sequence of derivatives, written with
plain arithmetic only, so they evaluate both on gmpy2 scalars and on Series.
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2


class StepSizeUnderflow(ArithmeticError):
    """Required step fell below min_step: singularity or too-tight tolerance."""


class NonFiniteState(ArithmeticError):
    """State left the representable range (blow-up)."""


class NoSectionCrossing(RuntimeError):
    """z never changed sign within the supplied time window."""


class DegenerateSegment(ValueError):
    """A path segment has zero length."""


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: object
    abs_tol: object
    max_step: object
    min_step: object
    order: int

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (self.min_step < self.max_step):
            raise ValueError("min_step must be below max_step")
        if self.order < 2:
            raise ValueError("order must be at least 2")

    @classmethod
    def for_bits(cls, bits: int, max_step=0.5, tol=None) -> "IntegratorConfig":
        """Tolerance tracking the working precision, with 40 bits of slack."""
        if tol is None:
            tol = gmpy2.mpfr(2) ** (-(bits - 40))
        tol = gmpy2.mpfr(tol)
        order = order_for_tol(tol)
        return cls(rel_tol=tol, abs_tol=tol, max_step=gmpy2.mpfr(max_step),
                   min_step=gmpy2.mpfr(2) ** (-bits), order=order)

    def refined(self, factor=100) -> "IntegratorConfig":
        return IntegratorConfig(rel_tol=self.rel_tol / factor,
                                abs_tol=self.abs_tol / factor,
                                max_step=self.max_step,
                                min_step=self.min_step,
                                order=order_for_tol(self.abs_tol / factor))


def order_for_tol(tol) -> int:
    """Near-optimal Taylor degree for a target tolerance (about -ln(tol)/2)."""
    return max(6, int(-float(gmpy2.log(gmpy2.mpfr(tol))) / 2.0) + 6)


# ---------------------------------------------------------------------------
# Lazy truncated power series


def _var_op(k):
    raise RuntimeError("series coefficient requested beyond computed jet")


def _zero_op(k):
    return 0


class Series:
    """A node of the jet evaluation graph; coefficients computed on demand."""

    __slots__ = ("_c", "_op")

    def __init__(self, op=_var_op):
        self._c = []
        self._op = op

    @classmethod
    def var(cls, value) -> "Series":
        s = cls()
        s._c = [value]
        return s

    @classmethod
    def affine(cls, c0, c1) -> "Series":
        s = cls(_zero_op)
        s._c = [c0, c1]
        return s

    @classmethod
    def constant(cls, value) -> "Series":
        s = cls(_zero_op)
        s._c = [value]
        return s

    @classmethod
    def from_coeffs(cls, coeffs) -> "Series":
        s = cls(_zero_op)
        s._c = list(coeffs)
        return s

    def coeff(self, k):
        c = self._c
        op = self._op
        while len(c) <= k:
            c.append(op(len(c)))
        return c[k]

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        a = self
        if isinstance(other, Series):
            b = other
            return Series(lambda k: a.coeff(k) + b.coeff(k))
        return Series(lambda k: a.coeff(0) + other if k == 0 else a.coeff(k))

    __radd__ = __add__

    def __neg__(self):
        a = self
        return Series(lambda k: -a.coeff(k))

    def __sub__(self, other):
        a = self
        if isinstance(other, Series):
            b = other
            return Series(lambda k: a.coeff(k) - b.coeff(k))
        return Series(lambda k: a.coeff(0) - other if k == 0 else a.coeff(k))

    def __rsub__(self, other):
        a = self
        return Series(lambda k: other - a.coeff(0) if k == 0 else -a.coeff(k))

    def __mul__(self, other):
        a = self
        if not isinstance(other, Series):
            return Series(lambda k: other * a.coeff(k))
        b = other

        def op(k):
            a.coeff(k)
            b.coeff(k)
            ac = a._c
            bc = b._c
            s = ac[0] * bc[k]
            for j in range(1, k + 1):
                s += ac[j] * bc[k - j]
            return s

        return Series(op)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a = self
        if not isinstance(other, Series):
            inv = 1 / other
            return Series(lambda k: inv * a.coeff(k))
        b = other
        out = Series()
        inv0 = []

        def op(k):
            if not inv0:
                inv0.append(1 / b.coeff(0))
            if k == 0:
                return a.coeff(0) * inv0[0]
            a.coeff(k)
            b.coeff(k)
            oc = out._c
            bc = b._c
            s = a._c[k]
            for j in range(k):
                s -= oc[j] * bc[k - j]
            return s * inv0[0]

        out._op = op
        return out

    def __rtruediv__(self, other):
        b = self
        out = Series()
        inv0 = []

        def op(k):
            if not inv0:
                inv0.append(1 / b.coeff(0))
            if k == 0:
                return other * inv0[0]
            b.coeff(k)
            oc = out._c
            bc = b._c
            s = -oc[0] * bc[k]
            for j in range(1, k):
                s -= oc[j] * bc[k - j]
            return s * inv0[0]

        out._op = op
        return out

    def __pow__(self, n):
        if not isinstance(n, int) or n < 1:
            raise ValueError("Series powers must be positive integers")
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result


def shift_down(a: Series, m: int) -> Series:
    """Divide by the m-th power of the expansion variable (known-zero head)."""
    return Series(lambda k: a.coeff(k + m))


def as_series(x) -> Series:
    return x if isinstance(x, Series) else Series.constant(x)


# ---------------------------------------------------------------------------
# Stepping


def _expand(field, t, y, order):
    """Taylor coefficients of the local solution, one list per component."""
    tv = Series.affine(t, 1)
    yv = [Series.var(v) for v in y]
    fs = [as_series(f) for f in field(tv, yv)]
    for k in range(order):
        kk = k + 1
        for i, f in enumerate(fs):
            yv[i]._c.append(f.coeff(k) / kk)
    return [v._c for v in yv]


def _coeff_norm(coeffs, k):
    return max(abs(c[k]) for c in coeffs)


def _step_size(coeffs, order, tol):
    """Largest h keeping the two top jet layers below tol (with safety 0.8)."""
    m_top = _coeff_norm(coeffs, order)
    m_prev = _coeff_norm(coeffs, order - 1)
    h = None
    if m_prev > 0:
        h = (tol / m_prev) ** (1 / gmpy2.mpfr(order - 1))
    if m_top > 0:
        h2 = (tol / m_top) ** (1 / gmpy2.mpfr(order))
        h = h2 if h is None else min(h, h2)
    if h is None:
        return None  # polynomial solution: any step is exact
    return gmpy2.mpfr("0.8") * h


def _horner(c, h):
    acc = c[-1]
    for k in range(len(c) - 2, -1, -1):
        acc = acc * h + c[k]
    return acc


@dataclass(frozen=True)
class _Step:
    t0: object
    h: object
    coeffs: tuple


class Trajectory:
    """Dense output: per-step local Taylor polynomials."""

    def __init__(self, steps, t0, t1, final):
        self.steps = steps
        self.t0 = t0
        self.t1 = t1
        self.final = final

    def __call__(self, t):
        if not self.steps:
            return list(self.final)
        forward = self.t1 >= self.t0
        lo, hi = (self.t0, self.t1) if forward else (self.t1, self.t0)
        if not (lo <= t <= hi):
            raise ValueError("dense evaluation outside the integration span")
        for st in self.steps:
            inside = (st.t0 <= t <= st.t0 + st.h) if forward else (st.t0 + st.h <= t <= st.t0)
            if inside:
                dt = t - st.t0
                return [_horner(c, dt) for c in st.coeffs]
        st = self.steps[-1]
        return [_horner(c, t - st.t0) for c in st.coeffs]


def _tol_eff(cfg, coeffs):
    ynorm = _coeff_norm(coeffs, 0)
    # the extra 2^-10 margin keeps the realized global error well below the
    # configured tolerance, so tolerance-halving reruns agree to many digits
    return max(gmpy2.mpfr(cfg.abs_tol), gmpy2.mpfr(cfg.rel_tol) * ynorm) / 1024


def _advance(field, t, y, t1, cfg):
    """One accepted step toward t1; returns (t_new, y_new, step_record)."""
    coeffs = _expand(field, t, y, cfg.order)
    h = _step_size(coeffs, cfg.order, _tol_eff(cfg, coeffs))
    hmag = cfg.max_step if h is None else min(h, gmpy2.mpfr(cfg.max_step))
    rem = t1 - t
    arem = abs(rem)
    if hmag < cfg.min_step and hmag < arem:
        raise StepSizeUnderflow(f"step {hmag} below min_step near t={t}")
    if arem <= hmag:
        hs = rem
        t_new = t1
    else:
        hs = hmag if rem > 0 else -hmag
        t_new = t + hs
    y_new = [_horner(c, hs) for c in coeffs]
    for v in y_new:
        if not gmpy2.is_finite(v):
            raise NonFiniteState(f"non-finite state near t={t}")
    return t_new, y_new, _Step(t, hs, tuple(coeffs))


def integrate(field, y0, t0, t1, cfg, record=True):
    """Integrate field(t, y) from t0 to t1 (either order).

    Returns (final_state, Trajectory).
    """
    t = gmpy2.mpfr(t0)
    t1 = gmpy2.mpfr(t1)
    y = list(y0)
    steps = []
    while t != t1:
        t, y, st = _advance(field, t, y, t1, cfg)
        if record:
            steps.append(st)
    return y, Trajectory(steps, gmpy2.mpfr(t0), t1, y)


def integrate_path(field, y0, path, cfg):
    """Analytic continuation of field(s, y) along piecewise-linear complex s.

    Each segment is reparameterized to tau in [0, 1]; the result is the state
    at the final waypoint.
    """
    if len(path) < 2:
        raise ValueError("path needs at least 2 waypoints")
    y = list(y0)
    zero = gmpy2.mpfr(0)
    one = gmpy2.mpfr(1)
    for a, b in zip(path[:-1], path[1:]):
        d = gmpy2.mpc(b) - gmpy2.mpc(a)
        if d == 0:
            raise DegenerateSegment(f"zero-length segment at {a}")

        def seg_field(tau, y, a=a, d=d):
            s = d * tau + a
            return [d * f for f in field(s, y)]

        y, _ = integrate(seg_field, y, zero, one, cfg, record=False)
    return y


# ---------------------------------------------------------------------------
# Section crossing (Henon variable swap)


def _swapped_field(field, n):
    """The field with z promoted to independent variable; state (y[:-1], t)."""

    def g(zv, w):
        state = list(w[: n - 1]) + [zv]
        d = [as_series(f) for f in field(w[n - 1], state)]
        inv = 1 / d[n - 1]
        return [d[i] * inv for i in range(n - 1)] + [inv]

    return g


def section_cross(field, y_near, cfg, t0=0, t_window=1000):
    """Land exactly on {z = 0}, z being the last state component.

    Integrates forward until z changes sign (or comes close to 0), then swaps
    the independent variable to z and integrates to z = 0 in one final run.
    Returns (state_on_section, crossing_time).
    """
    n = len(y_near)
    t = gmpy2.mpfr(t0)
    y = list(y_near)
    z = y[-1]
    if z == 0:
        return y, t
    z_sign = 1 if z > 0 else -1
    t_end = t + gmpy2.mpfr(t_window)
    near = gmpy2.mpfr("0.05")
    while True:
        z = y[-1]
        if z == 0:
            return y, t
        if (z > 0) != (z_sign > 0) or abs(z) < near:
            break
        if t >= t_end:
            raise NoSectionCrossing(f"no sign change of z within window {t_window}")
        t, y, _ = _advance(field, t, y, t_end, cfg)
    g = _swapped_field(field, n)
    w = y[: n - 1] + [t]
    w, _ = integrate(g, w, y[-1], gmpy2.mpfr(0), cfg, record=False)
    state = w[: n - 1] + [gmpy2.mpfr(0)]
    return state, w[n - 1]
