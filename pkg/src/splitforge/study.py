"""End-to-end studies: a delta-ladder of splittings, the inner Stokes
constant, the asymptotic fit, and a prediction table, from one JSON config."""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import gmpy2

from .precision import (PrecisionContext, bits_for_delta, bits_for_inner_window,
                        to_decimal)
from .taylor import IntegratorConfig
from .unfolding import UnfoldingSpec, ParamPoint, validate
from .manifolds import CSV_HEADER, SplittingSample, default_eps, splitting
from .inner import InnerParams, StokesResult, stokes_constant
from .asymptotics import (FitResult, fit_stokes_from_measurements, fit_table_csv,
                          predict_split)


class InvalidStudyConfig(ValueError):
    """The study configuration violates a structural invariant."""


@dataclass(frozen=True)
class StudyConfig:
    spec: UnfoldingSpec
    delta_grid: tuple       # strictly decreasing reals
    sigma: object
    precision_policy: object  # "auto" | int bits
    inner_window: tuple     # (y_min, y_max, n_points)
    output_dir: object      # path or None
    tol: object = None      # optional integrator tolerance override
    eps: object = None      # optional manifold seed offset override

    @classmethod
    def from_json(cls, data, ctx: PrecisionContext) -> "StudyConfig":
        spec = UnfoldingSpec.from_json(ctx, data["spec"])
        grid = tuple(ctx.real(d) for d in data["delta_grid"])
        win = data.get("inner_window", ["40", "80", 9])
        return cls(spec=spec, delta_grid=grid,
                   sigma=ctx.real(data.get("sigma", 0)),
                   precision_policy=data.get("precision", "auto"),
                   inner_window=(ctx.real(win[0]), ctx.real(win[1]), int(win[2])),
                   output_dir=data.get("output_dir"),
                   tol=data.get("tol"), eps=data.get("eps"))

    def validate(self):
        if not self.delta_grid:
            raise InvalidStudyConfig("empty delta grid")
        for a, b in zip(self.delta_grid, self.delta_grid[1:]):
            if not b < a:
                raise InvalidStudyConfig("delta_grid must be strictly decreasing")
        for d in self.delta_grid:
            bad = validate(self.spec, ParamPoint(delta=d, sigma=self.sigma))
            if bad:
                raise InvalidStudyConfig(f"delta={d}: " + "; ".join(bad))
        if not (self.inner_window[0] < self.inner_window[1]
                and self.inner_window[2] >= 2):
            raise InvalidStudyConfig("inner_window must be (y_min < y_max, n >= 2)")
        if self.precision_policy != "auto" and int(self.precision_policy) < 64:
            raise InvalidStudyConfig("fixed precision must be >= 64 bits")


@dataclass(frozen=True)
class StudyReport:
    samples: tuple            # SplittingSample, one per successful grid point
    errors: tuple             # (delta_string, message) for failed points
    stokes: object            # StokesResult or None
    stokes_error: object      # message or None
    fit: object               # FitResult or None
    fit_skip_reason: object   # message or None
    prediction_table: tuple   # (delta, predicted, measured, ratio) decimal strings
    environment: dict
    partial: bool

    def to_json(self):
        return {
            "environment": self.environment,
            "partial": self.partial,
            "samples": [dict(zip(CSV_HEADER.split(","), s.csv_row().split(",")))
                        for s in self.samples],
            "errors": [{"delta": d, "message": m} for d, m in self.errors],
            "stokes": self.stokes.to_json() if self.stokes else None,
            "stokes_error": self.stokes_error,
            "fit": self.fit.to_json() if self.fit else None,
            "fit_skip_reason": self.fit_skip_reason,
            "prediction_table": [
                {"delta": r[0], "predicted": r[1], "measured": r[2], "ratio": r[3]}
                for r in self.prediction_table],
        }


def study_bits(cfg: StudyConfig) -> int:
    if cfg.precision_policy != "auto":
        return int(cfg.precision_policy)
    alpha0 = abs(cfg.spec.alpha0)
    return max(bits_for_delta(alpha0, min(cfg.delta_grid)),
               bits_for_inner_window(alpha0, cfg.inner_window[1]))


def _worker_count() -> int:
    raw = os.environ.get("SPLITFORGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _integrator(cfg: StudyConfig, bits: int) -> IntegratorConfig:
    tol = gmpy2.mpfr(cfg.tol) if cfg.tol is not None else None
    return IntegratorConfig.for_bits(bits, tol=tol)


def run_study(cfg: StudyConfig) -> StudyReport:
    """Full pipeline over a delta grid; failures are contained per point."""
    cfg.validate()
    bits = study_bits(cfg)
    ctx = PrecisionContext(bits)
    ctx.activate()
    # re-materialize all inputs at study precision (decimal round-trip is
    # exact, so configs parsed at probe precision land on the same values)
    cfg = StudyConfig(
        spec=UnfoldingSpec.from_json(ctx, cfg.spec.to_json()),
        delta_grid=tuple(ctx.real(to_decimal(d)) for d in cfg.delta_grid),
        sigma=ctx.real(to_decimal(cfg.sigma)),
        precision_policy=cfg.precision_policy,
        inner_window=(ctx.real(to_decimal(cfg.inner_window[0])),
                      ctx.real(to_decimal(cfg.inner_window[1])),
                      cfg.inner_window[2]),
        output_dir=cfg.output_dir, tol=cfg.tol, eps=cfg.eps)
    icfg = _integrator(cfg, bits)
    eps = gmpy2.mpfr(cfg.eps) if cfg.eps is not None else default_eps(bits)
    spec = cfg.spec

    def one_point(delta):
        # per-thread context: gmpy2 contexts are thread-local
        ctx.activate()
        p = ParamPoint(delta=delta, sigma=cfg.sigma)
        return splitting(spec, p, eps, icfg)

    results = {}
    errors = []
    deltas = list(cfg.delta_grid)
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        futures = {pool.submit(one_point, d): d for d in deltas}
        for fut, d in futures.items():
            try:
                results[to_decimal(d)] = fut.result()
            except Exception as exc:  # contained: the study continues
                errors.append((to_decimal(d), f"{type(exc).__name__}: {exc}"))

    samples = tuple(results[to_decimal(d)] for d in deltas
                    if to_decimal(d) in results)

    stokes = None
    stokes_error = None
    try:
        ip = InnerParams.from_spec(spec)
        y_min, y_max, n = cfg.inner_window
        stokes = stokes_constant(ip, (y_min, y_max), n, icfg)
    except Exception as exc:
        stokes_error = f"{type(exc).__name__}: {exc}"

    # splittings at the integration floor carry no fit information
    floor = 100 * max(gmpy2.mpfr(icfg.abs_tol), eps * eps)
    fit = None
    fit_skip_reason = None
    if samples and all(s.dist <= floor for s in samples):
        fit_skip_reason = "zero splitting"
    elif len(samples) < 4:
        fit_skip_reason = "fewer than 4 successful grid points"
    else:
        try:
            fit = fit_stokes_from_measurements(samples, spec)
        except Exception as exc:
            fit_skip_reason = f"{type(exc).__name__}: {exc}"

    table = []
    for s in samples:
        if stokes is not None:
            pred = predict_split(stokes.C_in, spec, s.p).modulus
            ratio = s.dist / pred if pred > 0 else gmpy2.mpfr("nan")
            table.append((to_decimal(s.p.delta), to_decimal(pred),
                          to_decimal(s.dist), to_decimal(ratio)))
        else:
            table.append((to_decimal(s.p.delta), "", to_decimal(s.dist), ""))

    env = {
        "precision_bits": bits,
        "rel_tol": to_decimal(icfg.rel_tol),
        "abs_tol": to_decimal(icfg.abs_tol),
        "order": icfg.order,
        "eps": to_decimal(eps),
        "threads": _worker_count(),
    }
    return StudyReport(samples=samples, errors=tuple(errors), stokes=stokes,
                       stokes_error=stokes_error, fit=fit,
                       fit_skip_reason=fit_skip_reason,
                       prediction_table=tuple(table), environment=env,
                       partial=bool(errors) or stokes_error is not None)


def write_report(report: StudyReport, cfg: StudyConfig, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        json.dump(report.to_json(), f, indent=2)
        f.write("\n")
    with open(os.path.join(out_dir, "samples.csv"), "w") as f:
        f.write(CSV_HEADER + "\n")
        for s in report.samples:
            f.write(s.csv_row() + "\n")
    if report.fit is not None:
        with open(os.path.join(out_dir, "fit_table.csv"), "w") as f:
            f.write(fit_table_csv(report.samples, cfg.spec, report.fit))
