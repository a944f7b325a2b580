import gmpy2
import pytest
from hypothesis import given, strategies as st

from splitforge.precision import (GUARD_BITS, MIN_BITS, PrecisionContext,
                                  bits_for_delta, bits_for_inner_window,
                                  to_decimal)


def test_min_bits_enforced():
    with pytest.raises(ValueError):
        PrecisionContext(32)


def test_scoped_context_restores_ambient():
    gmpy2.get_context().precision = 100
    with PrecisionContext(300):
        assert gmpy2.get_context().precision == 300
        x = gmpy2.mpfr(1) / 3
    assert gmpy2.get_context().precision == 100
    assert x.precision == 300


def test_bits_for_delta_formula():
    import math
    need = math.ceil(math.pi / (2 * 0.04) / math.log(2))
    assert bits_for_delta(1, 0.04) == need + GUARD_BITS
    assert bits_for_delta(1, 100) >= MIN_BITS


def test_bits_for_inner_window_formula():
    import math
    assert bits_for_inner_window(1, 80) == math.ceil(80 / math.log(2)) + GUARD_BITS


def test_digits_property():
    assert PrecisionContext(256).digits == 77


@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_to_decimal_roundtrip_floats(x):
    ctx = PrecisionContext(192)
    ctx.activate()
    v = ctx.real(x)
    assert ctx.real(to_decimal(v)) == v


def test_to_decimal_roundtrip_high_precision():
    ctx = PrecisionContext(512)
    ctx.activate()
    v = gmpy2.sqrt(gmpy2.mpfr(2))
    assert gmpy2.mpfr(to_decimal(v)) == v


def test_to_decimal_rejects_mpc():
    with pytest.raises(TypeError):
        to_decimal(gmpy2.mpc(1, 2))
