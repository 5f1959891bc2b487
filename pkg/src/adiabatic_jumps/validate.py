"""Built-in validation suite behind the `validate` CLI subcommand.

Quick oracle cross-checks and frame invariants on every built-in family, at a
single moderate adiabaticity.  Meant as a smoke test of an installation, not
a replacement for the pytest suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdiabaticJumpsError
from .expansion import diagram_paths, nested_quadrature_term
from .models import ModelSpec
from .pipeline import build_pipeline
from .propagate import cross_validate

VALIDATION_FAMILIES = (
    "constant",
    "rotated_frame",
    "rotating_spin",
    "landau_zener_window",
    "smooth_interpolation",
    "flat_endpoint_ramp",
)


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


def _check(name: str, ok: bool, detail: str) -> Check:
    return Check(name=name, ok=bool(ok), detail=detail)


def run_validation(lam: float = 50.0, slices: int = 100_000,
                   rtol: float = 1e-10, tolerance: float = 1e-6,
                   seed: int = 0) -> list[Check]:
    checks: list[Check] = []
    for family in VALIDATION_FAMILIES:
        spec = ModelSpec(family=family)
        try:
            checks.extend(_family_checks(spec, lam, slices, rtol, tolerance, seed))
        except AdiabaticJumpsError as exc:
            checks.append(_check(f"{family}", False,
                                 f"{type(exc).__name__}: {exc}"))
    checks.append(_recursion_vs_nested())
    return checks


def _family_checks(spec, lam, slices, rtol, tolerance, seed) -> list[Check]:
    family = spec.family
    out: list[Check] = []
    pipe = build_pipeline(spec, lam)

    gram = np.einsum("jam,jan->jmn", pipe.frame.vectors.conj(),
                     pipe.frame.vectors)
    ortho = float(np.max(np.abs(gram - np.eye(pipe.frame.dim)[None])))
    out.append(_check(f"{family}: frame orthonormality", ortho <= 1e-10,
                      f"max deviation {ortho:.2e}"))

    anti = float(np.max(np.abs(pipe.kernel.g + pipe.kernel.g.conj()
                               .transpose(0, 2, 1))))
    diag = float(np.max(np.abs(np.diagonal(pipe.kernel.g, axis1=1, axis2=2))))
    out.append(_check(f"{family}: couplings anti-Hermitian", anti <= 1e-9,
                      f"max |g + g^dagger| {anti:.2e}"))
    out.append(_check(f"{family}: coupling diagonal vanishes", diag <= 1e-9,
                      f"max |g_nn| {diag:.2e}"))

    cross = cross_validate(pipe.model, lam, rtol=rtol, n_slices=slices,
                           frame=pipe.frame, phases=pipe.phases,
                           threshold=tolerance)
    out.append(_check(f"{family}: oracle agreement", cross.adequate,
                      f"|dpsi| {cross.state_diff:.2e} (threshold {tolerance:g})"))

    # gauge invariance of jump magnitudes under raw-phase jitter
    rng = np.random.default_rng(seed)
    jittered = build_pipeline(spec, lam, phase_rng=rng)
    a0 = np.abs(pipe.expand(lam, 2).amplitudes[:, -1, :])
    a1 = np.abs(jittered.expand(lam, 2).amplitudes[:, -1, :])
    gauge = float(np.max(np.abs(a0 - a1)))
    out.append(_check(f"{family}: gauge invariance", gauge <= 1e-8,
                      f"max |A| shift {gauge:.2e}"))
    return out


def _recursion_vs_nested() -> Check:
    spec = ModelSpec(family="rotated_frame", dim=3,
                     params={"energies": [0.0, 1.0, 2.2]})
    lam = 20.0
    pipe = build_pipeline(spec, lam, points_per_period=1024,
                          shape_points=2048)
    series = pipe.expand(lam, 2)
    worst = 0.0
    for k in (1, 2):
        forecast = np.zeros(3, dtype=complex)
        for path in diagram_paths(3, k, 0):
            forecast[path.levels[-1]] += nested_quadrature_term(
                pipe.frame, pipe.kernel, pipe.phases, lam, path)
        worst = max(worst, float(np.max(np.abs(forecast - series.final(k)))))
    return _check("recursion vs nested quadrature", worst <= 1e-6,
                  f"max |difference| {worst:.2e}")
