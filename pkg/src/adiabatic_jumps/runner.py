"""Single-point and sweep orchestration plus file emission.

A point runs the full pipeline (model -> frame -> couplings -> phases ->
expansion -> both oracles) and collects amplitudes, residuals and bound
margins.  Sweeps map points over a thread pool; every point is independent
and internally deterministic, and results are merged in sorted key order, so
emitted CSV/JSON summaries are byte-identical for any worker count.  The
manifest records config hash, versions, grid sizes and wall time (wall time
makes the manifest itself non-reproducible by design; determinism claims
cover amplitudes.csv and summary.json).
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import AdiabaticJumpsError, PipelineError
from .pipeline import Pipeline, build_pipeline
from .propagate import cross_validate, initial_eigenstate, moving_amplitudes
from .scaling import (
    ScalingReport,
    coupling_gamma,
    fit_power_law,
    secular_probe,
    standard_bound,
)

ENVELOPE_TAIL = 0.1


@dataclass(frozen=True)
class RunResult:
    lam: float
    duration: float
    order: int
    m0: int
    moving_amplitudes: np.ndarray        # (K+1, d) endpoint, per order
    transition_amplitudes: np.ndarray    # (K+1, d) with dynamical prefactor
    envelope_first_order: float          # max |A~^(1)(s)| over the trailing window
    exact_moving: np.ndarray             # (d,) from the ODE oracle
    residuals: np.ndarray                # (d,) |exact - truncated sum|
    cross_oracle_diff: float
    ode_norm_drift: float
    slicing_norm_drift: float
    gamma: float
    bound: float
    bound_margins: np.ndarray            # (d,) bound - |A~^(1)_m|, m != m0 rows valid
    grid_nodes: int
    min_gap: float
    berry_phase: float | None
    wall_time: float


@dataclass
class SweepResult:
    axis: str | None
    results: dict                        # (lam, S) -> RunResult
    errors: dict                         # (lam, S) -> error string
    fits: dict = field(default_factory=dict)   # name -> ScalingReport
    wall_time: float = 0.0


def _stage(stage_name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and isinstance(exc, AdiabaticJumpsError) \
                    and not isinstance(exc, PipelineError):
                raise PipelineError(stage_name, exc) from exc
            return False
    return _Ctx()


def run_single(config: RunConfig, lam: float | None = None,
               duration: float | None = None) -> RunResult:
    """Execute one (lambda, S) point of the config, deterministically."""
    t0 = time.perf_counter()
    lam = lam if lam is not None else config.lam_values[0]
    duration = duration if duration is not None else config.s_values[0]
    spec = config.model.with_duration(duration)

    with _stage("frame"):
        pipe: Pipeline = build_pipeline(
            spec, lam, gap_tol=config.gap_tol, policy=config.grid_policy,
            points_per_period=config.points_per_period,
            shape_points=config.shape_points,
            uniform_nodes=config.uniform_nodes)
    with _stage("expansion"):
        series = pipe.expand(lam, config.order)
        # per-order endpoint amplitudes with the dynamical prefactor restored
        prefactor = np.exp(-1j * lam * pipe.phases.final)
        restored = series.amplitudes[:, -1, :] * prefactor[None, :]
        tail = pipe.grid.nodes >= (1.0 - ENVELOPE_TAIL) * duration
        envelope = float(np.abs(series.amplitudes[1][tail]).max()) \
            if config.order >= 1 else 0.0
    with _stage("oracle"):
        state0 = initial_eigenstate(pipe.model)
        cross = cross_validate(pipe.model, lam, rtol=config.rtol,
                               n_slices=config.slices, state=state0,
                               frame=pipe.frame, phases=pipe.phases)
        exact = moving_amplitudes(cross.ode.state, pipe.frame, pipe.phases, lam)
    with _stage("report"):
        truncated = series.cumulative_final(config.order)
        residuals = np.abs(exact - truncated)
        gamma = coupling_gamma(pipe.kernel, pipe.frame.m0)
        bound = standard_bound(pipe.kernel, lam, pipe.frame.m0)
        first = np.abs(series.final(1)) if config.order >= 1 \
            else np.zeros(pipe.frame.dim)
        margins = bound - first
        berry = None
        if config.reports.get("berry_check"):
            berry = _berry_phase(pipe, cross.ode.state, lam)

    return RunResult(
        lam=lam, duration=duration, order=config.order, m0=pipe.frame.m0,
        moving_amplitudes=series.amplitudes[:, -1, :].copy(),
        transition_amplitudes=restored,
        envelope_first_order=envelope,
        exact_moving=exact, residuals=residuals,
        cross_oracle_diff=cross.state_diff,
        ode_norm_drift=cross.ode.norm_drift,
        slicing_norm_drift=cross.slicing.norm_drift,
        gamma=gamma, bound=bound, bound_margins=margins,
        grid_nodes=len(pipe.grid), min_gap=pipe.frame.min_gap,
        berry_phase=berry,
        wall_time=time.perf_counter() - t0)


def _berry_phase(pipe: Pipeline, exact_state: np.ndarray, lam: float) -> float:
    """Geometric phase of the tracked initial level from the exact state.

    Project onto the level's s = 0 eigenvector (closed loops return to the
    initial Hamiltonian) and strip the dynamical phase.
    """
    m0 = pipe.frame.m0
    v0 = pipe.frame.vectors[0][:, m0]
    amp = np.vdot(v0, exact_state) * np.exp(1j * lam * pipe.phases.final[m0])
    return float(np.angle(amp))


def run_sweep(config: RunConfig, threads: int | None = None) -> SweepResult:
    """Parallel map over sweep points; per-point failures do not stop the sweep."""
    t0 = time.perf_counter()
    points = config.points()

    def _one(point):
        lam, s = point
        try:
            return point, run_single(config, lam=lam, duration=s), None
        except PipelineError as exc:
            return point, None, (f"{type(exc.cause).__name__} at stage "
                                 f"{exc.stage}: {exc.cause}")
        except AdiabaticJumpsError as exc:
            return point, None, f"{type(exc).__name__}: {exc}"

    results, errors = {}, {}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for point, result, err in pool.map(_one, points):
            if err is None:
                results[point] = result
            else:
                errors[point] = err

    sweep = SweepResult(axis=config.sweep_axis, results=results, errors=errors)
    _attach_fits(sweep, config)
    sweep.wall_time = time.perf_counter() - t0
    return sweep


def _attach_fits(sweep: SweepResult, config: RunConfig) -> None:
    """Scaling fits over successful sweep points, on envelope magnitudes."""
    if sweep.axis is None:
        return
    keys = sorted(sweep.results)
    if config.reports.get("scaling_fit"):
        if len(keys) < 4:
            sweep.fits["first_order"] = None
        else:
            xs = np.array([k[0] if sweep.axis == "lambda" else k[1]
                           for k in keys])
            ys = np.array([sweep.results[k].envelope_first_order for k in keys])
            try:
                fit = fit_power_law(xs, ys)
            except AdiabaticJumpsError:
                fit = None
            sweep.fits["first_order"] = ScalingReport(
                axis_name=sweep.axis, axis=xs, magnitudes=ys, fit=fit,
                gamma=max(sweep.results[k].gamma for k in keys),
                notes=("envelope over trailing history window",))
    if config.reports.get("secular_probe") and sweep.axis == "S" \
            and config.order >= 2 and len(keys) >= 2:
        sweep.fits["secular"] = secular_probe(
            config.model, config.lam_values[0],
            [k[1] for k in keys],
            points_per_period=min(config.points_per_period, 24))


# --- emission -------------------------------------------------------------------

def _fmt(x) -> str:
    """17 significant digits: exact round trip for doubles, stable across runs."""
    return f"{float(x):.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return f"__float__{_fmt(obj)}"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": f"__float__{_fmt(obj.real)}",
                "im": f"__float__{_fmt(obj.imag)}"}
    return obj


_FLOAT_MARK = re.compile(r'"__float__([^"]*)"')


def _dump_json(obj) -> str:
    """JSON with floats rendered at 17 significant digits, keys sorted."""
    marked = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    return _FLOAT_MARK.sub(r"\1", marked)


def config_hash(config: RunConfig) -> str:
    blob = _dump_json(config.canonical_dict()).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _result_summary(r: RunResult) -> dict:
    summary = {
        "lambda": r.lam,
        "S": r.duration,
        "order": r.order,
        "initial_level": r.m0,
        "amplitude_moduli": [[float(a) for a in np.abs(row)]
                             for row in r.moving_amplitudes],
        "exact_moduli": [float(a) for a in np.abs(r.exact_moving)],
        "residuals": [float(x) for x in r.residuals],
        "envelope_first_order": r.envelope_first_order,
        "cross_oracle_diff": r.cross_oracle_diff,
        "ode_norm_drift": r.ode_norm_drift,
        "slicing_norm_drift": r.slicing_norm_drift,
        "gamma": r.gamma,
        "bound": r.bound,
        "bound_margins": [float(x) for x in r.bound_margins],
        "min_gap": r.min_gap,
        "grid_nodes": r.grid_nodes,
    }
    if r.berry_phase is not None:
        summary["berry_phase"] = r.berry_phase
    return summary


def _fit_summary(report: ScalingReport | None) -> dict | None:
    if report is None:
        return None
    out = {
        "axis": report.axis_name,
        "axis_values": [float(x) for x in report.axis],
        "magnitudes": [float(x) for x in report.magnitudes],
        "gamma": report.gamma,
        "null_case": report.null_case,
        "notes": list(report.notes),
    }
    if report.fit is not None:
        out["exponent"] = report.fit.exponent
        out["intercept"] = report.fit.intercept
        out["r_squared"] = report.fit.r_squared
    return out


def emit(outcome: RunResult | SweepResult, config: RunConfig,
         out_dir: str | Path, formats: tuple[str, ...] = ("csv", "json")
         ) -> list[Path]:
    """Write amplitudes.csv, summary.json and manifest.json.

    Rows and keys are fully sorted; floats carry 17 significant digits, so
    identical configs produce byte-identical CSV/summary regardless of worker
    count or execution order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if isinstance(outcome, RunResult):
        results = {(outcome.lam, outcome.duration): outcome}
        errors, fits, axis = {}, {}, None
        wall = outcome.wall_time
    else:
        results, errors, fits = outcome.results, outcome.errors, outcome.fits
        axis, wall = outcome.axis, outcome.wall_time

    if "csv" in formats:
        path = out_dir / "amplitudes.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "S", "level", "order", "modulus", "phase"])
            for key in sorted(results):
                r = results[key]
                for m in range(r.transition_amplitudes.shape[1]):
                    for k in range(r.transition_amplitudes.shape[0]):
                        amp = r.transition_amplitudes[k, m]
                        # signed zeros would otherwise flip the phase to pi
                        phase = np.angle(amp) if abs(amp) > 0.0 else 0.0
                        writer.writerow([
                            _fmt(r.lam), _fmt(r.duration), m, k,
                            _fmt(abs(amp)), _fmt(phase)])
        written.append(path)

    if "json" in formats:
        summary = {
            "sweep_axis": axis,
            "points": [_result_summary(results[k]) for k in sorted(results)],
            "errors": {f"lambda={k[0]:g},S={k[1]:g}": v
                       for k, v in sorted(errors.items())},
            "fits": {name: _fit_summary(rep) for name, rep in sorted(fits.items())},
        }
        path = out_dir / "summary.json"
        path.write_text(_dump_json(summary) + "\n")
        written.append(path)

    manifest = {
        "tool": "adiabatic-jumps",
        "version": __version__,
        "config_hash": config_hash(config),
        "config": config.canonical_dict(),
        "grid_nodes": {f"lambda={k[0]:g},S={k[1]:g}": results[k].grid_nodes
                       for k in sorted(results)},
        "wall_time_s": wall,
        "n_errors": len(errors),
    }
    path = out_dir / "manifest.json"
    path.write_text(_dump_json(manifest) + "\n")
    written.append(path)
    return written
