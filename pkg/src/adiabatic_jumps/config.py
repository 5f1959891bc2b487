"""Run configuration: strict TOML schema with explicit defaults.

Scaling studies are tolerance-sensitive, so the loader is strict: unknown
keys are errors, every default is written back into the resolved config, and
the canonical form of the config is what gets hashed into the run manifest.

Schema (all sections optional except [model] and a lambda source):

    [model]
    family = "rotated_frame"        # required
    dim = 2
    initial_state_index = 0
    [model.params]                  # family-specific, see models.py
    energies = [0.0, 1.0]
    [model.scales]                  # optional: physical scales instead of run.lambda
    energy = 10.0
    time = 1.0

    [run]
    lambda = 10.0                   # single point ...
    lambda_list = [50, 100, 200]    # ... or sweep (one sweep axis per run)
    S = 1.0
    S_list = [5, 10, 20]
    order = 2                       # expansion order K, <= 6
    gap_tol = 1e-3
    seed = 0

    [grid]
    policy = "oscillation_resolving"   # or "uniform"
    points_per_period = 64
    shape_points = 512
    uniform_nodes = 2049            # only with policy = "uniform"

    [oracle]
    rtol = 1e-10                    # in [1e-13, 1e-6]
    slices = 100000

    [output]
    directory = "out"
    formats = ["csv", "json"]

    [reports]
    scaling_fit = false
    bound_check = true
    berry_check = false
    secular_probe = false
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .errors import ParseError, ValidationError
from .models import ModelScales, ModelSpec

MAX_ORDER = 6
RTOL_RANGE = (1e-13, 1e-6)

_SCHEMA = {
    "model": {"family", "dim", "initial_state_index", "params", "scales"},
    "run": {"lambda", "lambda_list", "S", "S_list", "order", "gap_tol", "seed"},
    "grid": {"policy", "points_per_period", "shape_points", "uniform_nodes"},
    "oracle": {"rtol", "slices"},
    "output": {"directory", "formats"},
    "reports": {"scaling_fit", "bound_check", "berry_check", "secular_probe"},
}


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    lam_values: tuple[float, ...]
    s_values: tuple[float, ...]
    sweep_axis: str | None           # None | "lambda" | "S"
    order: int = 2
    gap_tol: float = 1e-3
    seed: int = 0
    grid_policy: str = "oscillation_resolving"
    points_per_period: int = 64
    shape_points: int = 512
    uniform_nodes: int | None = None
    rtol: float = 1e-10
    slices: int = 100_000
    out_dir: str = "out"
    formats: tuple[str, ...] = ("csv", "json")
    reports: dict = field(default_factory=dict)

    def points(self) -> list[tuple[float, float]]:
        """All (lambda, S) pairs of the run, sorted."""
        pts = [(lam, s) for lam in self.lam_values for s in self.s_values]
        return sorted(pts)

    def canonical_dict(self) -> dict:
        """Stable, JSON-friendly image of the resolved config (for hashing)."""
        params = {k: _plain(v) for k, v in sorted(self.model.params.items())}
        return {
            "model": {
                "family": self.model.family,
                "dim": self.model.dim,
                "initial_state_index": self.model.initial_state_index,
                "params": params,
                "scales": {
                    "energy": self.model.scales.energy,
                    "time": self.model.scales.time,
                    "duration": self.model.scales.duration,
                },
            },
            "run": {
                "lambda_values": list(self.lam_values),
                "S_values": list(self.s_values),
                "sweep_axis": self.sweep_axis,
                "order": self.order,
                "gap_tol": self.gap_tol,
                "seed": self.seed,
            },
            "grid": {
                "policy": self.grid_policy,
                "points_per_period": self.points_per_period,
                "shape_points": self.shape_points,
                "uniform_nodes": self.uniform_nodes,
            },
            "oracle": {"rtol": self.rtol, "slices": self.slices},
            "output": {"directory": self.out_dir, "formats": list(self.formats)},
            "reports": dict(sorted(self.reports.items())),
        }


def _plain(v):
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _require_keys(section: str, table: dict) -> None:
    allowed = _SCHEMA[section]
    for key in table:
        if key not in allowed:
            raise ValidationError(f"unknown key '{section}.{key}'")


def _get(table: dict, key: str, default, types, what: str):
    value = table.get(key, default)
    if value is not None and not isinstance(value, types):
        raise ValidationError(f"{what}: wrong type {type(value).__name__}")
    return value


def load_config(path: str | Path, strict: bool = True) -> RunConfig:
    """Parse and validate a run config file.

    The schema is strict regardless of the flag (unknown keys are always
    errors); `strict` is accepted for interface stability.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        data = _toml.loads(raw.decode("utf-8"))
    except _toml.TOMLDecodeError as exc:
        # tomli reports "... (at line L, column C)" in the message
        raise ParseError(f"{path}: {exc}") from exc
    return parse_config(data)


def parse_config(data: dict) -> RunConfig:
    for section in data:
        if section not in _SCHEMA:
            raise ValidationError(f"unknown section '[{section}]'")
        if not isinstance(data[section], dict):
            raise ValidationError(f"'[{section}]' must be a table")

    model_tbl = data.get("model")
    if not model_tbl:
        raise ValidationError("missing [model] section")
    _require_keys("model", model_tbl)
    family = model_tbl.get("family")
    if not isinstance(family, str):
        raise ValidationError("model.family is required and must be a string")
    dim = _get(model_tbl, "dim", 2, int, "model.dim")
    m0 = _get(model_tbl, "initial_state_index", 0, int, "model.initial_state_index")
    params = _get(model_tbl, "params", {}, dict, "model.params")

    run_tbl = data.get("run", {})
    _require_keys("run", run_tbl)
    lam_single = _get(run_tbl, "lambda", None, (int, float), "run.lambda")
    lam_list = _get(run_tbl, "lambda_list", None, list, "run.lambda_list")
    s_single = _get(run_tbl, "S", None, (int, float), "run.S")
    s_list = _get(run_tbl, "S_list", None, list, "run.S_list")

    scales_tbl = model_tbl.get("scales")
    if scales_tbl is not None:
        for key in scales_tbl:
            if key not in ("energy", "time"):
                raise ValidationError(f"unknown key 'model.scales.{key}'")
        if lam_single is not None or lam_list is not None:
            raise ValidationError(
                "give either model.scales or run.lambda/lambda_list, not both")
        energy = _get(scales_tbl, "energy", None, (int, float), "model.scales.energy")
        time = _get(scales_tbl, "time", 1.0, (int, float), "model.scales.time")
        if energy is None:
            raise ValidationError("model.scales.energy is required")
        lam_single = float(energy) * float(time)
        tau = float(time)
    else:
        tau = 1.0

    if lam_single is not None and lam_list is not None:
        raise ValidationError("run.lambda and run.lambda_list are exclusive")
    if s_single is not None and s_list is not None:
        raise ValidationError("run.S and run.S_list are exclusive")
    if lam_list is not None and s_list is not None:
        raise ValidationError(
            "run.lambda_list and run.S_list: only one sweep axis per run")
    if lam_single is None and lam_list is None:
        raise ValidationError("run.lambda (or run.lambda_list) is required")

    def _positive_floats(values, what):
        out = []
        for v in values:
            if not isinstance(v, (int, float)) or v <= 0:
                raise ValidationError(f"{what}: entries must be positive numbers")
            out.append(float(v))
        if not out:
            raise ValidationError(f"{what}: empty sweep list")
        if len(set(out)) != len(out):
            raise ValidationError(f"{what}: duplicate entries")
        return tuple(out)

    if lam_list is not None:
        lam_values = _positive_floats(lam_list, "run.lambda_list")
        sweep_axis = "lambda"
    else:
        if lam_single <= 0:
            raise ValidationError("run.lambda must be > 0")
        lam_values = (float(lam_single),)
        sweep_axis = None
    if s_list is not None:
        s_values = _positive_floats(s_list, "run.S_list")
        sweep_axis = "S"
    else:
        s_val = float(s_single) if s_single is not None else 1.0
        if s_val <= 0:
            raise ValidationError("run.S must be > 0")
        s_values = (s_val,)

    order = _get(run_tbl, "order", 2, int, "run.order")
    if not 0 <= order <= MAX_ORDER:
        raise ValidationError(f"run.order (K) must lie in [0, {MAX_ORDER}]")
    gap_tol = float(_get(run_tbl, "gap_tol", 1e-3, (int, float), "run.gap_tol"))
    if gap_tol <= 0:
        raise ValidationError("run.gap_tol must be > 0")
    seed = _get(run_tbl, "seed", 0, int, "run.seed")

    grid_tbl = data.get("grid", {})
    _require_keys("grid", grid_tbl)
    policy = _get(grid_tbl, "policy", "oscillation_resolving", str, "grid.policy")
    if policy not in ("oscillation_resolving", "uniform"):
        raise ValidationError(f"grid.policy: unknown policy '{policy}'")
    ppp = _get(grid_tbl, "points_per_period", 64, int, "grid.points_per_period")
    if ppp < 8:
        raise ValidationError("grid.points_per_period must be >= 8")
    shape_points = _get(grid_tbl, "shape_points", 512, int, "grid.shape_points")
    if shape_points < 4:
        raise ValidationError("grid.shape_points must be >= 4")
    uniform_nodes = _get(grid_tbl, "uniform_nodes", None, int, "grid.uniform_nodes")
    if uniform_nodes is not None and uniform_nodes < 5:
        raise ValidationError("grid.uniform_nodes must be >= 5")

    oracle_tbl = data.get("oracle", {})
    _require_keys("oracle", oracle_tbl)
    rtol = float(_get(oracle_tbl, "rtol", 1e-10, (int, float), "oracle.rtol"))
    if not RTOL_RANGE[0] <= rtol <= RTOL_RANGE[1]:
        raise ValidationError(
            f"oracle.rtol must lie in [{RTOL_RANGE[0]:g}, {RTOL_RANGE[1]:g}]")
    slices = _get(oracle_tbl, "slices", 100_000, int, "oracle.slices")
    if slices < 1:
        raise ValidationError("oracle.slices must be >= 1")

    output_tbl = data.get("output", {})
    _require_keys("output", output_tbl)
    out_dir = _get(output_tbl, "directory", "out", str, "output.directory")
    formats_raw = _get(output_tbl, "formats", ["csv", "json"], list,
                       "output.formats")
    formats = []
    for fmt in formats_raw:
        if fmt not in ("csv", "json"):
            raise ValidationError(f"output.formats: unknown format '{fmt}'")
        if fmt not in formats:
            formats.append(fmt)

    reports_tbl = data.get("reports", {})
    _require_keys("reports", reports_tbl)
    reports = {
        "scaling_fit": _get(reports_tbl, "scaling_fit", False, bool,
                            "reports.scaling_fit"),
        "bound_check": _get(reports_tbl, "bound_check", True, bool,
                            "reports.bound_check"),
        "berry_check": _get(reports_tbl, "berry_check", False, bool,
                            "reports.berry_check"),
        "secular_probe": _get(reports_tbl, "secular_probe", False, bool,
                              "reports.secular_probe"),
    }
    if reports["secular_probe"] and order < 2:
        raise ValidationError("reports.secular_probe needs run.order >= 2")

    # model built per point with the right duration; keep the first S here
    scales = ModelScales(energy=lam_values[0] / tau, time=tau,
                         duration=s_values[0])
    spec = ModelSpec(family=family, dim=dim, params=params, scales=scales,
                     initial_state_index=m0)
    return RunConfig(model=spec, lam_values=lam_values, s_values=s_values,
                     sweep_axis=sweep_axis, order=order, gap_tol=gap_tol,
                     seed=seed, grid_policy=policy, points_per_period=ppp,
                     shape_points=shape_points, uniform_nodes=uniform_nodes,
                     rtol=rtol, slices=slices, out_dir=out_dir,
                     formats=tuple(formats), reports=reports)
