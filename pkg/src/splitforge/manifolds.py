"""Shooting the 1D invariant manifolds to the section {z = 0}.

The unstable manifold of the plus equilibrium is integrated forward in time,
the stable manifold of the minus equilibrium backward, both from first-order
seeds.  Shooting happens in the real 3D variables (the complexified chart has
poles on the section's approach), and the final landing uses the Henon
variable swap so |z| at the crossing is zero to tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from .precision import to_decimal
from .taylor import IntegratorConfig, section_cross, _advance
from .unfolding import UnfoldingSpec, ParamPoint, eval_field, validate
from .equilibria import find_fixed_points, seed_manifold


class OrbitEscape(RuntimeError):
    """The orbit left the validity ball |state| <= delta^(-1/3)."""


class NoCrossing(RuntimeError):
    """No section crossing within the time budget."""


class InvalidParameters(ValueError):
    """The (spec, parameter) pair failed validation."""


@dataclass(frozen=True)
class SplittingSample:
    p: ParamPoint
    cross_u: tuple   # (x, y) on z=0 from the unstable side
    cross_s: tuple   # (x, y) on z=0 from the stable side
    delta_xy: tuple  # cross_u - cross_s
    dist: object     # Euclidean norm of delta_xy
    dist_unscaled: object  # delta * dist (original, unrescaled variables)

    def csv_row(self) -> str:
        return ",".join([to_decimal(self.p.delta), to_decimal(self.p.sigma),
                         to_decimal(self.delta_xy[0]), to_decimal(self.delta_xy[1]),
                         to_decimal(self.dist), to_decimal(self.dist_unscaled)])


CSV_HEADER = "delta,sigma,dx,dy,dist,dist_unscaled"


def default_eps(bits: int):
    """Seed offset splitting the error budget: O(eps^2) ~ integration tol."""
    digits = int(bits * 0.30103)
    return gmpy2.mpfr(10) ** (-(digits // 2))


def _shoot(spec, p, eq, eps, cfg, backward, t_budget=400):
    """Integrate a manifold seed to its first section crossing."""
    seed, _ = seed_manifold(eq, eps)
    field = lambda t, y: eval_field(spec, y, p)
    if backward:
        field_run = lambda t, y: [-v for v in eval_field(spec, y, p)]
    else:
        field_run = field
    escape = p.delta ** (-1 / gmpy2.mpfr(3))
    ball = 10 * eps
    t = gmpy2.mpfr(0)
    t_end = gmpy2.mpfr(t_budget)
    y = list(seed)
    armed = False
    hand_off = gmpy2.mpfr("0.5")
    while True:
        if not armed:
            d = gmpy2.sqrt(sum((a - b) ** 2 for a, b in zip(y, eq.point)))
            armed = d > ball
        if armed and abs(y[2]) < hand_off:
            break
        if max(abs(v) for v in y) > escape:
            raise OrbitEscape(f"orbit left the ball of radius {float(escape):.3g}")
        if t >= t_end:
            raise NoCrossing(f"no approach to the section within time {t_budget}")
        t, y, _ = _advance(field_run, t, y, t_end, cfg)
    state, t_cross = section_cross(field_run, y, cfg, t0=t, t_window=float(t_end - t))
    return (state[0], state[1])


def unstable_crossing(spec: UnfoldingSpec, p: ParamPoint, eps, cfg: IntegratorConfig):
    """(x, y) where the unstable manifold of the plus point first meets z=0."""
    bad = validate(spec, p)
    if bad:
        raise InvalidParameters("; ".join(bad))
    plus, _ = find_fixed_points(spec, p)
    return _shoot(spec, p, plus, eps, cfg, backward=False)


def stable_crossing(spec: UnfoldingSpec, p: ParamPoint, eps, cfg: IntegratorConfig):
    """(x, y) where the stable manifold of the minus point first meets z=0."""
    bad = validate(spec, p)
    if bad:
        raise InvalidParameters("; ".join(bad))
    _, minus = find_fixed_points(spec, p)
    return _shoot(spec, p, minus, eps, cfg, backward=True)


def splitting(spec: UnfoldingSpec, p: ParamPoint, eps, cfg: IntegratorConfig,
              norm="euclid") -> SplittingSample:
    """One splitting measurement at (delta, sigma).

    norm selects the planar distance: "euclid" (default) or "sum" (sum of
    component moduli).
    """
    cu = unstable_crossing(spec, p, eps, cfg)
    cs = stable_crossing(spec, p, eps, cfg)
    dx = cu[0] - cs[0]
    dy = cu[1] - cs[1]
    if norm == "euclid":
        dist = gmpy2.sqrt(dx * dx + dy * dy)
    elif norm == "sum":
        dist = abs(dx) + abs(dy)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return SplittingSample(p=p, cross_u=cu, cross_s=cs, delta_xy=(dx, dy),
                           dist=dist, dist_unscaled=p.delta * dist)
