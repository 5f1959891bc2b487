"""Convenience wiring: spec -> model -> grid -> frame -> couplings -> phases.

Shared by the scaling scans, the runner and the tests so that every consumer
builds the same pipeline the same way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expansion import JumpSeries, expand
from .frame import (
    CouplingKernel,
    EigenFrame,
    PhaseTable,
    TimeGrid,
    build_frame,
    coupling_kernel,
    oscillation_grid,
    phase_table,
    uniform_grid,
)
from .models import Model, ModelSpec, build_model


@dataclass(frozen=True)
class Pipeline:
    model: Model
    grid: TimeGrid
    frame: EigenFrame
    kernel: CouplingKernel
    phases: PhaseTable

    def expand(self, lam: float, order: int, rule: str = "simpson") -> JumpSeries:
        return expand(self.frame, self.kernel, self.phases, lam, order, rule)


def build_pipeline(spec: ModelSpec, lam: float, *,
                   gap_tol: float = 1e-3,
                   policy: str = "oscillation_resolving",
                   points_per_period: int = 64,
                   shape_points: int = 512,
                   uniform_nodes: int | None = None,
                   phase_rng: np.random.Generator | None = None) -> Pipeline:
    model = build_model(spec)
    if policy == "oscillation_resolving":
        grid = oscillation_grid(model, lam, points_per_period=points_per_period,
                                shape_points=shape_points)
    elif policy == "uniform":
        grid = uniform_grid(model.duration, uniform_nodes or shape_points + 1)
    else:
        raise ValueError(f"unknown policy '{policy}'")
    frame = build_frame(model, grid, gap_tol=gap_tol, phase_rng=phase_rng)
    kernel = coupling_kernel(frame, model, gap_tol=gap_tol)
    phases = phase_table(frame)
    return Pipeline(model=model, grid=grid, frame=frame, kernel=kernel,
                    phases=phases)
