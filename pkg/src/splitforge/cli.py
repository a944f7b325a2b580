"""Command-line interface: thin JSON/CSV wrappers over the module operations.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 partial study.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import gmpy2

from .precision import (PrecisionContext, bits_for_delta, bits_for_inner_window,
                        to_decimal)
from .taylor import IntegratorConfig
from .unfolding import UnfoldingSpec, ParamPoint
from .equilibria import find_fixed_points
from .manifolds import CSV_HEADER, default_eps, splitting
from .inner import InnerParams, solve_inner, stokes_constant
from .asymptotics import predict_split
from .study import StudyConfig, run_study, write_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_PARTIAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="splitforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, delta=False, window=False, cin=False):
        sp.add_argument("--config", required=True, help="study/spec JSON path")
        sp.add_argument("--sigma", default=None, help="sigma override")
        sp.add_argument("--precision", default="auto", help="bits or 'auto'")
        sp.add_argument("--out", default=None, help="output directory")
        if delta:
            sp.add_argument("--delta", required=True, help="delta value")
        if window:
            sp.add_argument("--window", default=None, help="MIN:MAX:N")
        if cin:
            sp.add_argument("--cin", required=True,
                            help="Stokes constant, 're,im' or a real")

    common(sub.add_parser("equilibria", help="locate the saddle-foci"), delta=True)
    common(sub.add_parser("split", help="one splitting sample (CSV)"), delta=True)
    common(sub.add_parser("inner", help="inner branch solutions on the axis"),
           window=True)
    common(sub.add_parser("stokes", help="Stokes constant (JSON)"), window=True)
    common(sub.add_parser("predict", help="asymptotic prediction (JSON)"),
           delta=True, cin=True)
    common(sub.add_parser("study", help="full delta-ladder study"))
    return parser


def _load_config(path):
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}")


def _parse_window(args, data):
    raw = getattr(args, "window", None)
    if raw is None:
        win = data.get("inner_window", ["40", "80", 9])
        return str(win[0]), str(win[1]), int(win[2])
    parts = raw.split(":")
    if len(parts) != 3:
        raise UsageError("--window must be MIN:MAX:N")
    try:
        int(parts[2])
    except ValueError:
        raise UsageError("--window count must be an integer")
    return parts[0], parts[1], int(parts[2])


def _resolve_bits(args, data, delta=None, y_max=None, alpha0=1):
    raw = args.precision
    if raw == "auto":
        raw = data.get("precision", "auto")
    if raw != "auto":
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise UsageError(f"bad precision {raw!r}")
    cands = [64]
    if delta is not None:
        cands.append(bits_for_delta(alpha0, delta))
    if y_max is not None:
        cands.append(bits_for_inner_window(alpha0, y_max))
    return max(cands)


def _sigma_of(args, data):
    if args.sigma is not None:
        return args.sigma
    return data.get("sigma", 0)


def _emit(args, payload, filename):
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, filename), "w") as f:
            f.write(text)
    sys.stdout.write(text)


def _cmd_equilibria(args, data):
    delta = float(args.delta)
    bits = _resolve_bits(args, data, delta=delta,
                         alpha0=abs(float(data["spec"]["alpha0"])))
    ctx = PrecisionContext(bits)
    ctx.activate()
    spec = UnfoldingSpec.from_json(ctx, data["spec"])
    p = ParamPoint.create(ctx, args.delta, _sigma_of(args, data))
    out = {"delta": to_decimal(p.delta), "sigma": to_decimal(p.sigma),
           "precision_bits": bits, "equilibria": []}
    for eq in find_fixed_points(spec, p):
        out["equilibria"].append({
            "kind": eq.kind,
            "point": [to_decimal(v) for v in eq.point],
            "eigenvalues": [{"re": to_decimal(e.real), "im": to_decimal(e.imag)}
                            for e in eq.eigenvalues],
            "real_eigvec": [to_decimal(v) for v in eq.real_eigvec],
        })
    _emit(args, out, "equilibria.json")
    return EXIT_OK


def _cmd_split(args, data):
    delta = float(args.delta)
    bits = _resolve_bits(args, data, delta=delta,
                         alpha0=abs(float(data["spec"]["alpha0"])))
    ctx = PrecisionContext(bits)
    ctx.activate()
    spec = UnfoldingSpec.from_json(ctx, data["spec"])
    p = ParamPoint.create(ctx, args.delta, _sigma_of(args, data))
    cfg = IntegratorConfig.for_bits(bits)
    s = splitting(spec, p, default_eps(bits), cfg)
    _emit(args, CSV_HEADER + "\n" + s.csv_row() + "\n", "sample.csv")
    return EXIT_OK


def _cmd_inner(args, data):
    y0, y1, n = _parse_window(args, data)
    bits = _resolve_bits(args, data, y_max=float(y1),
                         alpha0=abs(float(data["spec"]["alpha0"])))
    ctx = PrecisionContext(bits)
    ctx.activate()
    spec = UnfoldingSpec.from_json(ctx, data["spec"])
    ip = InnerParams.from_spec(spec)
    cfg = IntegratorConfig.for_bits(bits, max_step=100)
    ys = [ctx.real(y0) + (ctx.real(y1) - ctx.real(y0)) * k / (n - 1)
          for k in range(n)]
    targets = [gmpy2.mpc(0, -y) for y in ys]
    S0 = max(gmpy2.mpfr(1000), 10 * ctx.real(y1))
    out = {"precision_bits": bits, "branches": {}}
    for branch in ("u", "s"):
        sol = solve_inner(ip, branch, targets, S0, cfg)
        out["branches"][branch] = [
            {"s_im": to_decimal(t.imag),
             "psi": {"re": to_decimal(v[0].real), "im": to_decimal(v[0].imag)},
             "psib": {"re": to_decimal(v[1].real), "im": to_decimal(v[1].imag)}}
            for t, v in sol.samples]
    _emit(args, out, "inner.json")
    return EXIT_OK


def _cmd_stokes(args, data):
    y0, y1, n = _parse_window(args, data)
    bits = _resolve_bits(args, data, y_max=float(y1),
                         alpha0=abs(float(data["spec"]["alpha0"])))
    ctx = PrecisionContext(bits)
    ctx.activate()
    spec = UnfoldingSpec.from_json(ctx, data["spec"])
    ip = InnerParams.from_spec(spec)
    cfg = IntegratorConfig.for_bits(bits, max_step=100)
    res = stokes_constant(ip, (ctx.real(y0), ctx.real(y1)), n, cfg)
    _emit(args, res.to_json(), "stokes.json")
    return EXIT_OK


def _parse_cin(raw):
    parts = raw.split(",")
    try:
        if len(parts) == 1:
            return gmpy2.mpc(gmpy2.mpfr(parts[0]))
        if len(parts) == 2:
            return gmpy2.mpc(gmpy2.mpfr(parts[0]), gmpy2.mpfr(parts[1]))
    except ValueError:
        pass
    raise UsageError(f"--cin must be 're,im' or a real, got {raw!r}")


def _cmd_predict(args, data):
    delta = float(args.delta)
    bits = _resolve_bits(args, data, delta=delta,
                         alpha0=abs(float(data["spec"]["alpha0"])))
    ctx = PrecisionContext(bits)
    ctx.activate()
    spec = UnfoldingSpec.from_json(ctx, data["spec"])
    p = ParamPoint.create(ctx, args.delta, _sigma_of(args, data))
    pred = predict_split(_parse_cin(args.cin), spec, p)
    _emit(args, pred.to_json(), "prediction.json")
    return EXIT_OK


def _cmd_study(args, data):
    bits_probe = PrecisionContext(128)
    cfg = StudyConfig.from_json(data, bits_probe)
    if args.sigma is not None:
        cfg = StudyConfig(spec=cfg.spec, delta_grid=cfg.delta_grid,
                          sigma=bits_probe.real(args.sigma),
                          precision_policy=cfg.precision_policy,
                          inner_window=cfg.inner_window,
                          output_dir=cfg.output_dir, tol=cfg.tol, eps=cfg.eps)
    if args.precision != "auto":
        cfg = StudyConfig(spec=cfg.spec, delta_grid=cfg.delta_grid,
                          sigma=cfg.sigma, precision_policy=int(args.precision),
                          inner_window=cfg.inner_window,
                          output_dir=cfg.output_dir, tol=cfg.tol, eps=cfg.eps)
    report = run_study(cfg)
    out_dir = args.out or cfg.output_dir
    if out_dir:
        write_report(report, cfg, out_dir)
    sys.stdout.write(json.dumps(report.to_json(), indent=2) + "\n")
    return EXIT_PARTIAL if report.partial else EXIT_OK


_COMMANDS = {
    "equilibria": _cmd_equilibria,
    "split": _cmd_split,
    "inner": _cmd_inner,
    "stokes": _cmd_stokes,
    "predict": _cmd_predict,
    "study": _cmd_study,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        data = _load_config(args.config)
        if "spec" not in data:
            raise UsageError("config is missing the 'spec' section")
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args, data)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:
        sys.stdout.write(json.dumps(
            {"error": f"{type(exc).__name__}: {exc}"}, indent=2) + "\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
