import gmpy2
import pytest

from splitforge.precision import PrecisionContext


@pytest.fixture(autouse=True)
def _default_precision():
    """Every test starts from a known ambient precision."""
    ctx = PrecisionContext(192)
    ctx.activate()
    yield ctx
    gmpy2.get_context().precision = 53


def activate(bits: int) -> PrecisionContext:
    ctx = PrecisionContext(bits)
    ctx.activate()
    return ctx
