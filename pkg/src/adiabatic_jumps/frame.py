"""Gauge-fixed instantaneous eigenframe along a time grid.

The frame holds, per grid node, the tracked instantaneous energies and
eigenvectors of h(s).  Levels are labelled by continuity (maximum-overlap
assignment against the previous node), not by energy order, so labels survive
avoided crossings.  Phases are fixed by discrete parallel transport: each
vector is rotated so its overlap with its predecessor is real and positive,
which reproduces the continuum gauge <n'|n> = 0 as the grid refines.  On a
closed loop the leftover endpoint phase of a level is its geometric phase.

Couplings g_mn = <m'|n> are evaluated through the Hamiltonian derivative,
g_mn = <m|h'|n> / (eps_m - eps_n) for m != n and exactly zero on the
diagonal, which avoids amplifying eigenvector finite-difference noise near
narrow gaps.  A discrete-difference estimate is kept as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import (
    GapCollapse,
    GridTooCoarse,
    InvalidParameter,
    NonFinite,
    NumericalFailure,
    TrackingAmbiguous,
)
from .models import Model

DEFAULT_GAP_TOL = 1e-3
TRACKING_MIN_OVERLAP = 0.7
ORTHONORMALITY_TOL = 1e-10
EIGEN_RESIDUAL_TOL = 1e-10
MIN_POINTS_PER_PERIOD = 8


def cumulative_simpson_c(y: np.ndarray, dx: float, axis: int = 0) -> np.ndarray:
    """Cumulative composite Simpson (4th order) with complex support.

    scipy's cumulative_simpson silently drops imaginary parts, so complex
    input is integrated component-wise.
    """
    if np.iscomplexobj(y):
        return (cumulative_simpson(y.real, dx=dx, initial=0.0, axis=axis)
                + 1j * cumulative_simpson(y.imag, dx=dx, initial=0.0, axis=axis))
    return cumulative_simpson(y, dx=dx, initial=0.0, axis=axis)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid s_0 = 0 < ... < s_M = S with a resolution-policy tag."""

    nodes: np.ndarray
    policy: str = "uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or len(nodes) < 5:
            raise InvalidParameter("grid needs at least 5 nodes")
        d = np.diff(nodes)
        if np.any(d <= 0):
            raise InvalidParameter("grid nodes must be strictly increasing")
        if abs(nodes[0]) > 1e-15:
            raise InvalidParameter("grid must start at s = 0")
        if not np.allclose(d, d[0], rtol=1e-9, atol=1e-15):
            raise InvalidParameter("grid spacing must be uniform")
        if self.policy not in ("uniform", "oscillation_resolving"):
            raise InvalidParameter(f"unknown grid policy '{self.policy}'")

    @property
    def step(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    @property
    def duration(self) -> float:
        return float(self.nodes[-1])

    def __len__(self) -> int:
        return len(self.nodes)


def uniform_grid(duration: float, nodes: int = 513) -> TimeGrid:
    return TimeGrid(np.linspace(0.0, duration, nodes), policy="uniform")


def max_level_spread(model: Model, scan_points: int = 129) -> float:
    """Largest instantaneous energy spread max_s (eps_max - eps_min), coarsely scanned."""
    s = np.linspace(0.0, model.duration, scan_points)
    e = np.linalg.eigvalsh(model.h_batch(s))
    return float(np.max(e[:, -1] - e[:, 0]))


def oscillation_grid(model: Model, lam: float, points_per_period: int = 64,
                     shape_points: int = 512, scan_points: int = 129,
                     max_nodes: int = 4_000_000) -> TimeGrid:
    """Grid dense enough to resolve both h(s) and the fastest phase factor.

    Step = min(S/shape_points, 2*pi / (lam * max_spread * points_per_period)),
    where max_spread bounds the fastest Bohr frequency on the grid.
    """
    if points_per_period < MIN_POINTS_PER_PERIOD:
        raise InvalidParameter(
            f"points_per_period must be >= {MIN_POINTS_PER_PERIOD}")
    S = model.duration
    step = S / shape_points
    spread = max_level_spread(model, scan_points)
    if lam * spread > 0:
        step = min(step, 2.0 * np.pi / (abs(lam) * spread * points_per_period))
    n = int(np.ceil(S / step)) + 1
    if n > max_nodes:
        raise GridTooCoarse(
            f"resolving lambda={lam} needs {n} nodes (> max_nodes={max_nodes})")
    return TimeGrid(np.linspace(0.0, S, n), policy="oscillation_resolving")


def decompose(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, energies ascending.

    Residual ||h v - e v|| is checked per pair; raises NumericalFailure if the
    solver fails or the residual exceeds tolerance.
    """
    dev = np.max(np.abs(h - h.conj().T))
    if not dev <= 1e-10:
        raise InvalidParameter(f"matrix is not Hermitian (deviation {dev:.2e})")
    try:
        energies, vectors = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    residual = np.max(np.abs(h @ vectors - vectors * energies[None, :]))
    if not residual <= 1e-11 * max(1.0, np.max(np.abs(energies))):
        raise NumericalFailure(f"eigen-residual {residual:.2e} too large")
    return energies, vectors


@dataclass(frozen=True)
class EigenFrame:
    """Tracked, parallel-transported eigendecomposition on a grid.

    energies[j, m] and vectors[j, :, m] belong to continuity label m; labels
    are seeded by ascending energy at s = 0.  min_gap is the smallest level
    separation seen anywhere on the grid.
    """

    grid: TimeGrid
    energies: np.ndarray          # (M+1, d) real
    vectors: np.ndarray           # (M+1, d, d) complex, columns = levels
    min_gap: float
    m0: int
    tracking_log: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.energies.shape[1]

    def max_spread(self) -> float:
        return float(np.max(self.energies.max(axis=1) - self.energies.min(axis=1)))


def _greedy_assign(weights: np.ndarray) -> tuple[np.ndarray, float]:
    """Greedy maximum-|overlap| matching of labels (rows) to columns."""
    d = weights.shape[0]
    w = weights.copy()
    perm = np.full(d, -1, dtype=int)
    worst = 1.0
    for _ in range(d):
        i, j = np.unravel_index(np.argmax(w), w.shape)
        worst = min(worst, float(w[i, j]))
        perm[i] = j
        w[i, :] = -1.0
        w[:, j] = -1.0
    return perm, worst


def build_frame(model: Model, grid: TimeGrid, gap_tol: float = DEFAULT_GAP_TOL,
                phase_rng: np.random.Generator | None = None) -> EigenFrame:
    """Diagonalize h on the grid, track levels, fix the transport gauge.

    phase_rng, when given, multiplies every raw eigenvector by a random unit
    phase before gauge fixing; physics downstream must not change (used by the
    gauge-invariance checks).
    """
    if gap_tol <= 0:
        raise InvalidParameter("gap_tol must be > 0")
    s = grid.nodes
    hs = model.h_batch(s)
    if not np.all(np.isfinite(hs)):
        raise NonFinite("h(s) evaluated to a non-finite entry")
    energies, vectors = np.linalg.eigh(hs)       # ascending per node

    if phase_rng is not None:
        jitter = np.exp(2j * np.pi * phase_rng.random(energies.shape))
        vectors = vectors * jitter[:, None, :]

    # gap guard on the sorted energies (adjacent differences suffice)
    adjacent = np.diff(energies, axis=1)
    j_min, pair_min = np.unravel_index(np.argmin(adjacent), adjacent.shape)
    min_gap = float(adjacent[j_min, pair_min])
    if min_gap < gap_tol:
        raise GapCollapse(float(s[j_min]), (int(pair_min), int(pair_min) + 1),
                          min_gap, gap_tol)

    # level tracking: fast path when every step is overlap-dominant and keeps order
    n_nodes, d = energies.shape
    overlaps_raw = np.einsum("jam,jan->jmn", vectors[:-1].conj(), vectors[1:])
    mags = np.abs(overlaps_raw)
    diag = mags[:, np.arange(d), np.arange(d)]
    argmax_rows = mags.argmax(axis=2)
    identity_ok = (np.all(argmax_rows == np.arange(d)[None, :])
                   and np.all(diag >= TRACKING_MIN_OVERLAP))
    permuted_steps = 0
    if identity_ok:
        perms = None
        min_overlap = float(diag.min())
    else:
        perms = np.empty((n_nodes, d), dtype=int)
        perms[0] = np.arange(d)
        min_overlap = 1.0
        for j in range(n_nodes - 1):
            w = mags[j][perms[j], :]
            perm, worst = _greedy_assign(w)
            if worst < TRACKING_MIN_OVERLAP:
                raise TrackingAmbiguous(float(s[j + 1]), worst)
            min_overlap = min(min_overlap, worst)
            perms[j + 1] = perm
            if np.any(perm != perms[j]):
                permuted_steps += 1
        energies = np.take_along_axis(energies, perms, axis=1)
        idx = np.broadcast_to(perms[:, None, :], vectors.shape)
        vectors = np.take_along_axis(vectors, idx, axis=2)

    # parallel-transport gauge: successive overlaps become real positive;
    # the per-step phases accumulate, so a cumulative sum fixes every node
    o = np.einsum("jam,jam->jm", vectors[:-1].conj(), vectors[1:])
    if float(np.min(np.abs(o))) < TRACKING_MIN_OVERLAP:
        j_bad = int(np.argmin(np.abs(o).min(axis=1)))
        raise TrackingAmbiguous(float(s[j_bad + 1]), float(np.min(np.abs(o))))
    theta = np.cumsum(np.angle(o), axis=0)
    vectors = vectors.copy()
    vectors[1:] *= np.exp(-1j * theta)[:, None, :]

    _check_frame_health(hs, energies, vectors)
    log = {"min_overlap": min_overlap, "permuted_steps": permuted_steps}
    return EigenFrame(grid=grid, energies=energies, vectors=vectors,
                      min_gap=min_gap, m0=model.spec.initial_state_index,
                      tracking_log=log)


def _check_frame_health(hs, energies, vectors) -> None:
    d = energies.shape[1]
    gram = np.einsum("jam,jan->jmn", vectors.conj(), vectors)
    ortho_dev = np.max(np.abs(gram - np.eye(d)[None]))
    if not ortho_dev <= ORTHONORMALITY_TOL:
        raise NumericalFailure(f"frame orthonormality deviation {ortho_dev:.2e}")
    resid = np.einsum("jab,jbm->jam", hs, vectors) - vectors * energies[:, None, :]
    scale = max(1.0, float(np.max(np.abs(energies))))
    rmax = np.max(np.abs(resid))
    if not rmax <= EIGEN_RESIDUAL_TOL * scale:
        raise NumericalFailure(f"frame eigen-residual {rmax:.2e}")


def loop_phase(frame: EigenFrame, level: int) -> float:
    """Endpoint transport phase arg <n(0)|n(S)> of one tracked level.

    For a schedule that closes a loop (h(S) = h(0)) this is the geometric
    phase accumulated by the level.
    """
    v0 = frame.vectors[0][:, level]
    v1 = frame.vectors[-1][:, level]
    return float(np.angle(np.vdot(v0, v1)))


# --- couplings ----------------------------------------------------------------

@dataclass(frozen=True)
class CouplingKernel:
    """g_mn(s_j) = <m'(s_j)|n(s_j)> per node; anti-Hermitian, zero diagonal."""

    grid: TimeGrid
    g: np.ndarray                  # (M+1, d, d) complex

    @property
    def dim(self) -> int:
        return self.g.shape[1]


def _couplings_from(energies: np.ndarray, vectors: np.ndarray, dh: np.ndarray,
                    gap_tol: float, nodes: np.ndarray) -> np.ndarray:
    """Batched g = V^† h' V / (eps_m - eps_n), zero diagonal, gap-guarded."""
    num = np.einsum("jam,jab,jbn->jmn", vectors.conj(), dh, vectors)
    de = energies[:, :, None] - energies[:, None, :]
    d = energies.shape[1]
    off = ~np.eye(d, dtype=bool)
    ade = np.abs(de)
    ade[:, ~off] = np.inf
    if ade.min() < gap_tol:
        j, m, n = np.unravel_index(np.argmin(ade), ade.shape)
        raise GapCollapse(float(nodes[j]), (int(m), int(n)),
                          float(ade[j, m, n]), gap_tol)
    g = np.zeros_like(num)
    g[:, off] = num[:, off] / de[:, off]
    return g


def coupling_kernel(frame: EigenFrame, model: Model,
                    gap_tol: float = DEFAULT_GAP_TOL) -> CouplingKernel:
    dh = model.dh_batch(frame.grid.nodes)
    g = _couplings_from(frame.energies, frame.vectors, dh, gap_tol,
                        frame.grid.nodes)
    if not np.all(np.isfinite(g)):
        raise NonFinite("coupling kernel has non-finite entries")
    return CouplingKernel(grid=frame.grid, g=g)


def coupling_at(frame: EigenFrame, model: Model, j: int,
                gap_tol: float = DEFAULT_GAP_TOL) -> np.ndarray:
    """Coupling matrix at a single node index."""
    dh = model.dh(frame.grid.nodes[j])
    return _couplings_from(frame.energies[j:j + 1], frame.vectors[j:j + 1],
                           dh[None], gap_tol, frame.grid.nodes[j:j + 1])[0]


def coupling_fd(frame: EigenFrame, j: int) -> np.ndarray:
    """Discrete-difference estimate <(m_{j+1} - m_{j-1}) / (2 ds) | n_j>.

    Second-order cross-check of the Hamiltonian-derivative route; needs an
    interior node.
    """
    if not 0 < j < len(frame.grid) - 1:
        raise InvalidParameter("finite-difference coupling needs an interior node")
    ds = frame.grid.step
    dm = (frame.vectors[j + 1] - frame.vectors[j - 1]) / (2.0 * ds)
    return np.einsum("am,an->mn", dm.conj(), frame.vectors[j])


# --- cumulative dynamical phases ------------------------------------------------

@dataclass(frozen=True)
class PhaseTable:
    """f_m(s_j) = integral of eps_m from 0 to s_j, per tracked level."""

    grid: TimeGrid
    f: np.ndarray                  # (M+1, d) real

    @property
    def final(self) -> np.ndarray:
        return self.f[-1]


def phase_table(frame: EigenFrame) -> PhaseTable:
    f = cumulative_simpson_c(frame.energies, dx=frame.grid.step, axis=0)
    return PhaseTable(grid=frame.grid, f=f)
