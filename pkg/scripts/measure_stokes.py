#!/usr/bin/env python3
"""Measure the inner Stokes constant for a config over one or more windows
and print the window-consistency of the estimates.

Usage: python scripts/measure_stokes.py [CONFIG] [WINDOW ...]
where each WINDOW is MIN:MAX:N (default: 40:80:9 and 80:160:9).
"""
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import gmpy2  # noqa: E402

from splitforge.precision import PrecisionContext, bits_for_inner_window  # noqa: E402
from splitforge.taylor import IntegratorConfig  # noqa: E402
from splitforge.unfolding import UnfoldingSpec  # noqa: E402
from splitforge.inner import InnerParams, stokes_constant  # noqa: E402


def main():
    config = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "configs", "cubic.json")
    windows = sys.argv[2:] or ["40:80:9", "80:160:9"]
    with open(config) as f:
        data = json.load(f)
    results = []
    for win in windows:
        y0, y1, n = win.split(":")
        bits = bits_for_inner_window(abs(float(data["spec"]["alpha0"])), float(y1))
        ctx = PrecisionContext(bits)
        ctx.activate()
        spec = UnfoldingSpec.from_json(ctx, data["spec"])
        ip = InnerParams.from_spec(spec)
        cfg = IntegratorConfig.for_bits(bits, max_step=100)
        r = stokes_constant(ip, (ctx.real(y0), ctx.real(y1)), int(n), cfg)
        results.append(r)
        print(f"window ({y0},{y1}) n={n} bits={bits}:")
        print(f"  C_in = {complex(r.C_in)}  |C_in| = {float(abs(r.C_in)):.12f}")
        print(f"  err_estimate = {float(r.err_estimate):.3e}")
    for a, b in zip(results, results[1:]):
        gap = abs(a.C_in - b.C_in)
        budget = a.err_estimate + b.err_estimate
        ok = "consistent" if gap <= budget else "INCONSISTENT"
        print(f"window gap {float(gap):.3e} vs error budget {float(budget):.3e}: {ok}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
