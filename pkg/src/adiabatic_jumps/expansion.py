"""Order-by-order jump expansion in the moving frame.

Amplitudes are kept in the interaction-picture convention

    A~_m(s) = <m(s)|psi(s)> * exp(+i lambda f_m(s)),

which factors the fastest dynamical phase out of the integrand; the expansion
then solves a first-order Volterra recursion

    A~_m^(k)(s) = sum_{n != m} int_0^s K_mn(s') A~_n^(k-1)(s') ds',
    K_mn(s) = g_mn(s) exp(i lambda (f_m(s) - f_n(s))),

one cumulative quadrature pass per order, at cost K * M * dim^2 instead of
M^k for k-fold nested integrals.  The nested form survives as a low-order
oracle (`nested_quadrature_term`) that integrates a single jump path with an
independent quadrature rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import (
    GridTooCoarse,
    InvalidParameter,
    LevelOutOfRange,
    NonFinite,
    OrderUnavailable,
    PathTooLong,
)
from .frame import (
    CouplingKernel,
    EigenFrame,
    MIN_POINTS_PER_PERIOD,
    PhaseTable,
    cumulative_simpson_c,
)

MAX_ORACLE_JUMPS = 3


@dataclass(frozen=True)
class JumpSeries:
    """Per-order moving-frame amplitude histories A~_m^(k)(s_j).

    amplitudes[k, j, m] is the order-k amplitude of level m at node j.
    Order 0 is delta_{m, m0} at every node (the pure-phase term lives in the
    factored-out prefactor); order 1 of the initial level is identically zero
    because the transport gauge removes the diagonal coupling.
    """

    lam: float
    m0: int
    order: int
    amplitudes: np.ndarray         # (K+1, M+1, d) complex
    order_norms: np.ndarray        # (K+1,) endpoint norms per order

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[2]

    def final(self, k: int) -> np.ndarray:
        if not 0 <= k <= self.order:
            raise OrderUnavailable(f"order {k} not computed (have 0..{self.order})")
        return self.amplitudes[k, -1, :]

    def cumulative_final(self, up_to: int) -> np.ndarray:
        """sum_{k <= up_to} A~^(k)(S) per level."""
        if not 0 <= up_to <= self.order:
            raise OrderUnavailable(
                f"order {up_to} not computed (have 0..{self.order})")
        return self.amplitudes[: up_to + 1, -1, :].sum(axis=0)


def _policy_check(frame: EigenFrame, lam: float) -> None:
    spread = frame.max_spread()
    if lam * spread <= 0:
        return
    max_step = 2.0 * np.pi / (abs(lam) * spread * MIN_POINTS_PER_PERIOD)
    if frame.grid.step > max_step * (1.0 + 1e-9):
        raise GridTooCoarse(
            f"step {frame.grid.step:.3e} exceeds {max_step:.3e} needed to keep "
            f">= {MIN_POINTS_PER_PERIOD} points per period at lambda={lam:g}")


def moving_kernel(kernel: CouplingKernel, phases: PhaseTable, lam: float) -> np.ndarray:
    """K_mn(s_j) = g_mn(s_j) * exp(i lambda (f_m - f_n)(s_j)) on the grid."""
    f = phases.f
    return kernel.g * np.exp(1j * lam * (f[:, :, None] - f[:, None, :]))


def expand(frame: EigenFrame, kernel: CouplingKernel, phases: PhaseTable,
           lam: float, order: int, rule: str = "simpson") -> JumpSeries:
    """Run the Volterra recursion up to the requested order.

    rule selects cumulative composite Simpson (default, 4th order) or
    cumulative trapezoid (2nd order).
    """
    if order < 0:
        raise InvalidParameter("order must be >= 0")
    if rule not in ("simpson", "trapezoid"):
        raise InvalidParameter(f"unknown quadrature rule '{rule}'")
    _policy_check(frame, lam)

    n_nodes, d = frame.energies.shape
    ker = moving_kernel(kernel, phases, lam)
    amps = np.zeros((order + 1, n_nodes, d), dtype=complex)
    amps[0, :, frame.m0] = 1.0
    dx = frame.grid.step
    for k in range(1, order + 1):
        integrand = np.einsum("jmn,jn->jm", ker, amps[k - 1])
        if rule == "simpson":
            amps[k] = cumulative_simpson_c(integrand, dx=dx, axis=0)
        else:
            amps[k, 1:] = np.cumsum(
                0.5 * dx * (integrand[1:] + integrand[:-1]), axis=0)
    if not np.all(np.isfinite(amps)):
        raise NonFinite("jump-expansion amplitudes went non-finite")
    norms = np.sqrt((np.abs(amps[:, -1, :]) ** 2).sum(axis=1))
    return JumpSeries(lam=lam, m0=frame.m0, order=order, amplitudes=amps,
                      order_norms=norms)


def assemble_state(series: JumpSeries, frame: EigenFrame, phases: PhaseTable,
                   lam: float, order: int) -> np.ndarray:
    """Truncated state at s = S:  sum_m e^{-i lam f_m(S)} (sum_k A~_m^(k)(S)) |m(S)>.

    At order 0 this is the plain adiabatic state with its dynamical phase.
    """
    total = series.cumulative_final(order)
    pref = np.exp(-1j * lam * phases.final)
    return frame.vectors[-1] @ (pref * total)


def transition_amplitude(series: JumpSeries, phases: PhaseTable, lam: float,
                    m: int, order: int) -> complex:
    """Transition amplitude <m(S)|psi(S)> with the dynamical prefactor restored.

    Equals e^{-i lam f_m(S)} * sum_{k <= order} A~_m^(k)(S); the prefactor has
    unit modulus so |transition_amplitude| == |sum of moving amplitudes| exactly.
    """
    if not 0 <= m < series.dim:
        raise LevelOutOfRange(f"level {m} outside [0, {series.dim})")
    total = series.cumulative_final(order)[m]
    return complex(np.exp(-1j * lam * phases.final[m]) * total)


@dataclass(frozen=True)
class DiagramPath:
    """Ordered level sequence m0 -> n1 -> ... -> nk, no consecutive repeats."""

    levels: tuple[int, ...]

    def __post_init__(self):
        if len(self.levels) < 1:
            raise InvalidParameter("path needs at least the starting level")
        for a, b in zip(self.levels, self.levels[1:]):
            if a == b:
                raise InvalidParameter(f"consecutive repeat {a} -> {b} in path")

    @property
    def jumps(self) -> int:
        return len(self.levels) - 1

    def __iter__(self):
        return iter(self.levels)

    def __str__(self) -> str:
        return " -> ".join(str(x) for x in self.levels)


def diagram_paths(dim: int, jumps: int, start: int = 0) -> list[DiagramPath]:
    """All k-jump level sequences from `start`, lexicographic, (dim-1)^k of them."""
    if dim < 2:
        raise InvalidParameter("dim must be >= 2")
    if jumps < 0:
        raise InvalidParameter("jumps must be >= 0")
    if not 0 <= start < dim:
        raise LevelOutOfRange(f"start level {start} outside [0, {dim})")
    paths = []
    for tail in product(range(dim), repeat=jumps):
        seq = (start,) + tail
        if any(a == b for a, b in zip(seq, seq[1:])):
            continue
        paths.append(DiagramPath(seq))
    return paths


def _cumulative_trapezoid_1d(y: np.ndarray, dx: float) -> np.ndarray:
    # hand-rolled so the oracle shares no quadrature code with `expand`
    out = np.zeros(len(y), dtype=complex)
    np.cumsum(0.5 * dx * (y[1:] + y[:-1]), out=out[1:])
    return out


def nested_quadrature_term(frame: EigenFrame, kernel: CouplingKernel,
                           phases: PhaseTable, lam: float,
                           path: DiagramPath | tuple[int, ...]) -> complex:
    """Time-ordered nested integral for one jump path, trapezoid rule.

    Independent oracle for `expand`: summing the terms of every k-jump path
    reproduces the order-k recursion amplitudes.  Second-order accurate, so
    use a denser grid than Simpson needs.  Paths longer than
    MAX_ORACLE_JUMPS jumps are refused.
    """
    if not isinstance(path, DiagramPath):
        path = DiagramPath(tuple(path))
    if path.jumps > MAX_ORACLE_JUMPS:
        raise PathTooLong(f"{path.jumps} jumps > {MAX_ORACLE_JUMPS} (oracle limit)")
    if any(not 0 <= lvl < frame.dim for lvl in path):
        raise LevelOutOfRange(f"path {path} has levels outside [0, {frame.dim})")
    if path.levels[0] != frame.m0:
        raise InvalidParameter(
            f"path starts at {path.levels[0]}, frame initial level is {frame.m0}")
    if path.jumps == 0:
        return 1.0 + 0.0j
    ker = moving_kernel(kernel, phases, lam)
    dx = frame.grid.step
    inner = None
    for a, b in zip(path.levels[:-1], path.levels[1:]):
        integrand = ker[:, b, a] if inner is None else ker[:, b, a] * inner
        inner = _cumulative_trapezoid_1d(integrand, dx)
    return complex(inner[-1])
