"""Saddle-focus equilibria: Newton location, eigen-data, manifold seeds."""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2

from .unfolding import UnfoldingSpec, ParamPoint, eval_field, eval_jacobian


class NewtonDivergence(ArithmeticError):
    """Newton iteration failed to reach the residual tolerance."""


class SingularJacobian(ArithmeticError):
    """The Jacobian was numerically singular at an iterate."""


class EigvecAmbiguous(ArithmeticError):
    """The real eigendirection could not be identified."""


@dataclass(frozen=True)
class Equilibrium:
    point: tuple          # (x, y, z) mpfr
    eigenvalues: tuple    # 3 mpc; real one first, then the conjugate pair
    real_eigvec: tuple    # normalized 3-vector along the 1D manifold
    kind: str             # "plus" | "minus"


def _solve3(J, rhs):
    """Gaussian elimination with partial pivoting for a 3x3 system."""
    a = [list(row) + [r] for row, r in zip(J, rhs)]
    n = 3
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise SingularJacobian("zero pivot in 3x3 solve")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            m = a[r][col] * inv
            if m != 0:
                for c in range(col, n + 1):
                    a[r][c] -= m * a[col][c]
    x = [None] * n
    for r in range(n - 1, -1, -1):
        s = a[r][n]
        for c in range(r + 1, n):
            s -= a[r][c] * x[c]
        x[r] = s / a[r][r]
    return x


def _charpoly_coeffs(J):
    """Monic cubic det(lambda I - J) = l^3 + c2 l^2 + c1 l + c0."""
    (a, b, c), (d, e, f), (g, h, i) = J
    tr = a + e + i
    m2 = (a * e - b * d) + (a * i - c * g) + (e * i - f * h)
    det = (a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g))
    return -tr, m2, -det


def eigen3(J, polish_steps=2):
    """Eigenvalues of a real 3x3 matrix via the closed-form cubic.

    Cardano roots at working precision, one or two Newton polish passes per
    root, and exact symmetrization of the conjugate pair.
    """
    c2, c1, c0 = _charpoly_coeffs(J)
    one_third = 1 / gmpy2.mpfr(3)
    shift = c2 * one_third
    p = c1 - c2 * c2 * one_third
    q = c0 + c2 * one_third * (2 * c2 * c2 / 9 - c1)
    pc = gmpy2.mpc(p)
    qc = gmpy2.mpc(q)
    disc = gmpy2.sqrt(qc * qc / 4 + pc * pc * pc / 27)
    # pick the branch avoiding cancellation in -q/2 +- sqrt(disc)
    cand1 = -qc / 2 + disc
    cand2 = -qc / 2 - disc
    w = cand1 if abs(cand1) >= abs(cand2) else cand2
    roots = []
    if w == 0:
        roots = [gmpy2.mpc(-shift)] * 3
    else:
        u = gmpy2.exp(gmpy2.log(w) * one_third)
        # primitive cube root of unity
        half = gmpy2.mpfr("0.5")
        om = gmpy2.mpc(-half, gmpy2.sqrt(gmpy2.mpfr(3)) * half)
        for uk in (u, u * om, u * om * om):
            roots.append(uk - pc / (3 * uk) - shift)

    def cp(l):
        return ((l + c2) * l + c1) * l + c0

    def cpd(l):
        return (3 * l + 2 * c2) * l + c1

    polished = []
    for r in roots:
        for _ in range(polish_steps):
            d = cpd(r)
            if abs(d) == 0:
                break
            r = r - cp(r) / d
        polished.append(r)

    # symmetrize: a real matrix has either 3 near-real roots or one near-real
    # root and an exact conjugate pair
    tol = gmpy2.mpfr(2) ** (-(gmpy2.get_context().precision // 2))
    scale = max(abs(r) for r in polished) + 1
    ims = [abs(r.imag) for r in polished]
    if max(ims) <= tol * scale:
        return tuple(gmpy2.mpc(r.real) for r in polished)
    k_real = min(range(3), key=lambda k: ims[k])
    rest = [polished[k] for k in range(3) if k != k_real]
    pos = max(rest, key=lambda r: r.imag)
    neg = min(rest, key=lambda r: r.imag)
    pair = (pos + gmpy2.mpc(neg.real, -neg.imag)) / 2
    return (gmpy2.mpc(polished[k_real].real),
            pair,
            gmpy2.mpc(pair.real, -pair.imag))


def _real_eigvec(J, lam):
    """Nullspace direction of J - lam I via the largest pairwise row cross."""
    rows = [[J[r][c] - (lam if r == c else 0) for c in range(3)] for r in range(3)]

    def cross(u, v):
        return (u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0])

    best = None
    best_norm = -1
    for i, j in ((0, 1), (0, 2), (1, 2)):
        v = cross(rows[i], rows[j])
        n = max(abs(c) for c in v)
        if n > best_norm:
            best, best_norm = v, n
    if best_norm == 0:
        raise EigvecAmbiguous("all row crosses vanished for the real eigenvalue")
    norm = gmpy2.sqrt(sum(c * c for c in best))
    return tuple(c / norm for c in best)


def _classify(point, J, kind):
    eig = eigen3(J)
    tol = gmpy2.mpfr(2) ** (-(gmpy2.get_context().precision // 2))
    scale = max(abs(e) for e in eig) + 1
    reals = [e for e in eig if abs(e.imag) <= tol * scale]
    if len(reals) != 1:
        raise EigvecAmbiguous(f"expected exactly one real eigenvalue, got {len(reals)}")
    lam = reals[0].real
    pair = [e for e in eig if abs(e.imag) > tol * scale]
    want_pos = kind == "plus"
    if (lam > 0) != want_pos:
        raise EigvecAmbiguous(f"real eigenvalue {lam} has the wrong sign for kind={kind}")
    vec = _real_eigvec(J, lam)
    return Equilibrium(point=tuple(point),
                       eigenvalues=(gmpy2.mpc(lam),) + tuple(pair),
                       real_eigvec=vec, kind=kind)


def _newton(spec, p, start, newton_tol, max_iter):
    y = [gmpy2.mpfr(v) for v in start]
    for _ in range(max_iter):
        F = eval_field(spec, y, p)
        res = max(abs(v) for v in F)
        if res <= newton_tol:
            return y
        J = eval_jacobian(spec, y, p)
        dy = _solve3(J, F)
        y = [yi - di for yi, di in zip(y, dy)]
        if max(abs(v) for v in y) > 4:
            raise NewtonDivergence(f"Newton iterate escaped near {start}")
    raise NewtonDivergence(f"no convergence to {newton_tol} in {max_iter} iterations")


def find_fixed_points(spec: UnfoldingSpec, p: ParamPoint, newton_tol=None, max_iter=60):
    """The two saddle-focus equilibria near (0, 0, +-1), with eigen-data."""
    if newton_tol is None:
        bits = gmpy2.get_context().precision
        newton_tol = gmpy2.mpfr(2) ** (-(bits - 16))
    out = []
    for z0, kind in ((1, "plus"), (-1, "minus")):
        pt = _newton(spec, p, (0, 0, z0), newton_tol, max_iter)
        J = eval_jacobian(spec, pt, p)
        out.append(_classify(pt, J, kind))
    return tuple(out)


def seed_manifold(eq: Equilibrium, eps):
    """First-order manifold seed point + orientation sign.

    The eigendirection is oriented into the region between the equilibria:
    decreasing z for the plus point, increasing z for the minus point.
    """
    eps = gmpy2.mpfr(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    v = eq.real_eigvec
    vz = v[2]
    if abs(vz) < gmpy2.mpfr("1e-6"):
        raise EigvecAmbiguous("real eigendirection nearly tangent to the section")
    want_neg = eq.kind == "plus"
    sign = 1
    if (vz < 0) != want_neg:
        sign = -1
    state = tuple(pi + eps * sign * vi for pi, vi in zip(eq.point, v))
    return state, sign
