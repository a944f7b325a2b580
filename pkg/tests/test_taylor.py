import gmpy2
import pytest

from splitforge.precision import PrecisionContext
from splitforge.taylor import (IntegratorConfig, Series, integrate,
                               integrate_path, section_cross)


def cfg_for(bits=192, **kw):
    return IntegratorConfig.for_bits(bits, **kw)


def tol_of(cfg):
    return gmpy2.mpfr(cfg.abs_tol)


# -- integrate ---------------------------------------------------------------


def test_exponential_decay():
    cfg = cfg_for()
    y, _ = integrate(lambda t, y: [-y[0]], [gmpy2.mpfr(1)], 0, 1, cfg)
    assert abs(y[0] - gmpy2.exp(gmpy2.mpfr(-1))) < 10 * tol_of(cfg)


def test_zero_field_identity():
    cfg = cfg_for()
    y0 = [gmpy2.mpfr("1.5"), gmpy2.mpfr(-3)]
    y, _ = integrate(lambda t, y: [0 * y[0], 0 * y[1]], y0, 0, 7, cfg)
    assert y == y0


def test_heteroclinic_tanh():
    cfg = cfg_for()
    y, _ = integrate(lambda t, y: [-1 + y[0] * y[0]], [gmpy2.mpfr(0)], 0, 1, cfg)
    assert abs(y[0] + gmpy2.tanh(gmpy2.mpfr(1))) < 10 * tol_of(cfg)


def test_dense_output_matches_closed_form():
    cfg = cfg_for()
    _, traj = integrate(lambda t, y: [-y[0]], [gmpy2.mpfr(1)], 0, 2, cfg)
    for t in ("0.3", "1.1", "1.9"):
        t = gmpy2.mpfr(t)
        assert abs(traj(t)[0] - gmpy2.exp(-t)) < 100 * tol_of(cfg)


def test_convergence_order_fixed_step():
    """Halving a forced fixed step cuts the global error by >= 2^(order-1)."""
    errs = []
    for h in ("0.25", "0.125"):
        cfg = IntegratorConfig(rel_tol=gmpy2.mpfr("1e60"), abs_tol=gmpy2.mpfr("1e60"),
                               max_step=gmpy2.mpfr(h), min_step=gmpy2.mpfr("1e-40"),
                               order=4)
        y, _ = integrate(lambda t, y: [-y[0]], [gmpy2.mpfr(1)], 0, 1, cfg)
        errs.append(abs(y[0] - gmpy2.exp(gmpy2.mpfr(-1))))
    assert errs[0] / errs[1] >= 2 ** (4 - 1)


def test_backward_forward_consistency():
    cfg = cfg_for()
    field = lambda t, y: [y[1], -y[0]]  # harmonic oscillator
    y0 = [gmpy2.mpfr(1), gmpy2.mpfr("0.5")]
    y1, _ = integrate(field, y0, 0, 3, cfg)
    y2, _ = integrate(field, y1, 3, 0, cfg)
    assert all(abs(a - b) < 10 * tol_of(cfg) for a, b in zip(y0, y2))


def test_realness_exact():
    cfg = cfg_for()
    y, _ = integrate(lambda t, y: [-1 + y[0] * y[0]], [gmpy2.mpfr(0)], 0, 1, cfg)
    assert isinstance(y[0], gmpy2.mpfr)


# -- integrate_path ----------------------------------------------------------


def test_path_linear_rotation():
    cfg = cfg_for()
    alpha = gmpy2.mpfr(1)
    I = gmpy2.mpc(0, 1)
    s0, s1 = gmpy2.mpc(0), gmpy2.mpc(2, -1)
    y = integrate_path(lambda s, y: [-I * alpha * y[0]], [gmpy2.mpc(1)], [s0, s1], cfg)
    want = gmpy2.exp(-I * alpha * (s1 - s0))
    assert abs(y[0] - want) < 100 * tol_of(cfg)


def test_path_constant_field():
    cfg = cfg_for()
    y = integrate_path(lambda s, y: [gmpy2.mpc(1)], [gmpy2.mpc(3)],
                       [gmpy2.mpc(0), gmpy2.mpc(0, 1), gmpy2.mpc(1, 1)], cfg)
    assert abs(y[0] - gmpy2.mpc(4, 1)) < 100 * tol_of(cfg)


def test_path_zero_invariant():
    cfg = cfg_for()
    # inner-like linear system with zero initial data stays exactly zero
    field = lambda s, y: [(-gmpy2.mpc(0, 1) + 1 / s) * y[0]]
    y = integrate_path(field, [gmpy2.mpc(0)], [gmpy2.mpc(-100, -30), gmpy2.mpc(0, -30)], cfg)
    assert y[0] == 0


def test_path_independence_homotopic():
    cfg = cfg_for()
    field = lambda s, y: [s * y[0]]  # entire field: any two paths agree
    y0 = [gmpy2.mpc(1)]
    a = integrate_path(field, y0, [gmpy2.mpc(0), gmpy2.mpc(1, 1)], cfg)
    b = integrate_path(field, y0, [gmpy2.mpc(0), gmpy2.mpc(1), gmpy2.mpc(1, 1)], cfg)
    assert abs(a[0] - b[0]) < 10 * tol_of(cfg)


# -- section_cross -----------------------------------------------------------


def test_section_linear_flow():
    cfg = cfg_for()
    state, t = section_cross(lambda tt, y: [gmpy2.mpfr(-1)], [gmpy2.mpfr("0.5")], cfg)
    assert state[-1] == 0
    assert abs(t - gmpy2.mpfr("0.5")) < 10 * tol_of(cfg)


def test_section_unperturbed_heteroclinic():
    cfg = cfg_for()
    z0 = gmpy2.mpfr("0.8")
    field = lambda t, y: [y[0] * 0, y[1] * 0, -1 + y[2] * y[2]]
    state, t = section_cross(field, [gmpy2.mpfr(0), gmpy2.mpfr(0), z0], cfg)
    assert state[0] == 0 and state[1] == 0 and state[2] == 0
    assert abs(t - gmpy2.atanh(z0)) < 100 * tol_of(cfg)


def test_section_refined_agreement():
    cfg = cfg_for()
    field = lambda t, y: [1 - y[0], -1 + y[1] * y[1] + y[0] * y[0] / 4]
    start = [gmpy2.mpfr("0.3"), gmpy2.mpfr("0.6")]
    s1, _ = section_cross(field, list(start), cfg)
    s2, _ = section_cross(field, list(start), cfg.refined(100))
    assert abs(s1[0] - s2[0]) < tol_of(cfg) / gmpy2.mpfr(10) ** 10


# -- Series ------------------------------------------------------------------


def test_series_division_roundtrip():
    a = Series.from_coeffs([gmpy2.mpfr(v) for v in (1, 2, 3, 4)])
    b = Series.from_coeffs([gmpy2.mpfr(v) for v in (2, -1, 5, 0)])
    q = a / b
    back = q * b
    for k in range(4):
        assert abs(back.coeff(k) - a.coeff(k)) < gmpy2.mpfr("1e-50")


def test_series_pow_matches_repeated_mul():
    a = Series.from_coeffs([gmpy2.mpfr(v) for v in (1, 1, 0, 0, 0, 0)])
    p3 = a ** 3
    m3 = a * a * a
    for k in range(6):
        assert p3.coeff(k) == m3.coeff(k)


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=gmpy2.mpfr(0), abs_tol=gmpy2.mpfr(1),
                         max_step=gmpy2.mpfr(1), min_step=gmpy2.mpfr("0.1"), order=8)
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=gmpy2.mpfr(1), abs_tol=gmpy2.mpfr(1),
                         max_step=gmpy2.mpfr("0.1"), min_step=gmpy2.mpfr(1), order=8)
