"""Parametric time-dependent Hamiltonian families.

Everything is dimensionless: a family defines h(s) on s in [0, S] together
with its physical scales (energy E, drive time tau), and the adiabaticity
parameter lambda = E*tau multiplies h wherever the Schroedinger equation is
integrated.  Families are evaluated either at a single s or on a whole array
of nodes at once; the batch path is what the frame builder uses.

Built-in families and the claim each one probes:

    constant             h(s) fixed; null test, every jump amplitude vanishes
    rotated_frame        h(s) = e^{As} h0 e^{-As}; constant gaps and constant
                         couplings, so first-order amplitudes have an exact
                         closed form
    rotating_spin        spin-1/2 field on a cone; closed loops expose the
                         geometric phase of the transported frame
    landau_zener_window  linear sweep through an avoided crossing
    smooth_interpolation (1-u) h0 + u h1, u = s/S; annealing-style schedule
    flat_endpoint_ramp   smoothstep schedule with h'(0) = h'(S) = 0, the
                         regime where the first-order correction drops from
                         1/lambda to 1/lambda^2
    user_matrix_polynomial  h(s) = sum_k C_k s^k with Hermitian C_k

Typical dimensionless magnitudes for the defaults (documented, not enforced):
energy derivatives |eps'| and coupling norms are O(1) for every family except
`constant` (both zero) and `rotating_spin`, where |<m'|n>| = pi*sin(theta)
per revolution (~2.7 at theta = pi/3).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParameter,
    OutOfDomain,
    UnknownFamily,
)

HERMITIAN_TOL = 1e-12
DOMAIN_SLACK = 1e-12

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class ModelScales:
    """Physical scales: energy E, drive time tau, dimensionless duration S."""

    energy: float = 1.0
    time: float = 1.0
    duration: float = 1.0

    def __post_init__(self):
        if not self.energy > 0:
            raise InvalidParameter("scales.energy must be > 0")
        if not self.time > 0:
            raise InvalidParameter("scales.time must be > 0")
        if not self.duration > 0:
            raise InvalidParameter("scales.duration must be > 0")

    @property
    def lam(self) -> float:
        """Adiabaticity parameter lambda = E * tau (always derived)."""
        return self.energy * self.time

    @property
    def total_time(self) -> float:
        """Physical duration T = S * tau."""
        return self.duration * self.time

    @staticmethod
    def from_lambda(lam: float, duration: float = 1.0) -> "ModelScales":
        """Scales with tau = 1 so that E = lambda; dimensionless work only needs lambda."""
        return ModelScales(energy=lam, time=1.0, duration=duration)


@dataclass(frozen=True)
class ModelSpec:
    family: str
    dim: int = 2
    params: Mapping = field(default_factory=dict)
    scales: ModelScales = field(default_factory=ModelScales)
    initial_state_index: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidParameter("dim must be >= 2")
        if not 0 <= self.initial_state_index < self.dim:
            raise InvalidParameter("initial_state_index must lie in [0, dim)")

    def with_duration(self, duration: float) -> "ModelSpec":
        scales = ModelScales(self.scales.energy, self.scales.time, duration)
        return ModelSpec(self.family, self.dim, dict(self.params), scales,
                         self.initial_state_index)


class Model:
    """Immutable evaluable Hamiltonian family instance.

    `h(s)` returns the dimensionless Hamiltonian, `dh(s)` its s-derivative
    (analytic when the family provides one, high-order central difference
    otherwise).  Batch variants take an array of s values.  Instances hold no
    mutable state and are safe to share across workers.
    """

    def __init__(self, spec: ModelSpec,
                 h_batch: Callable[[np.ndarray], np.ndarray],
                 dh_batch: Callable[[np.ndarray], np.ndarray] | None):
        self.spec = spec
        self._h_batch = h_batch
        self._dh_batch = dh_batch

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def duration(self) -> float:
        return self.spec.scales.duration

    @property
    def has_analytic_derivative(self) -> bool:
        return self._dh_batch is not None

    def _check_domain(self, s: np.ndarray) -> None:
        S = self.duration
        outside = (s < -DOMAIN_SLACK) | (s > S + DOMAIN_SLACK)
        if np.any(outside):
            bad = float(np.asarray(s).ravel()[np.argmax(np.ravel(outside))])
            raise OutOfDomain(f"s = {bad:.6g} outside [0, {S:.6g}]")

    def h(self, s: float) -> np.ndarray:
        self._check_domain(np.asarray(s, dtype=float))
        out = self._h_batch(np.array([float(s)]))[0]
        _require_hermitian(out, f"h({s})")
        return out

    def h_batch(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        self._check_domain(s)
        return self._h_batch(s)

    def dh(self, s: float) -> np.ndarray:
        return self.dh_batch(np.array([float(s)]))[0]

    def dh_batch(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        self._check_domain(s)
        if self._dh_batch is not None:
            return self._dh_batch(s)
        return _central_difference_batch(self._h_batch, s)


def build_model(spec: ModelSpec) -> Model:
    """Validate a spec and return the evaluable model.

    Raises UnknownFamily, InvalidParameter (naming the field) or
    DimensionMismatch on bad input.
    """
    try:
        builder = _FAMILIES[spec.family]
    except KeyError:
        raise UnknownFamily(
            f"unknown family '{spec.family}'; known: {', '.join(sorted(_FAMILIES))}"
        ) from None
    known = _FAMILY_PARAMS[spec.family]
    for key in spec.params:
        if key not in known:
            raise InvalidParameter(
                f"params.{key} is not a parameter of family '{spec.family}'"
            )
    h_batch, dh_batch = builder(spec)
    model = Model(spec, h_batch, dh_batch)
    # one evaluation up front so bad parameters fail at build time
    _require_hermitian(model.h_batch(np.array([0.0, spec.scales.duration]))[0], "h(0)")
    return model


def h_at(model: Model, s: float) -> np.ndarray:
    return model.h(s)


def dh_ds_at(model: Model, s: float) -> np.ndarray:
    return model.dh(s)


# --- derivative fallback -----------------------------------------------------

def central_difference_derivative(h_batch: Callable[[np.ndarray], np.ndarray],
                                  s: float) -> np.ndarray:
    """4th-order central difference of a matrix-valued function of s.

    Step balances truncation against round-off: eps^(1/5) * max(1, |s|).
    The raw family evaluator is used so the stencil may step slightly past the
    domain ends; every built-in family extends smoothly.
    """
    return _central_difference_batch(h_batch, np.array([float(s)]))[0]


def _central_difference_batch(h_batch, s: np.ndarray) -> np.ndarray:
    step = np.finfo(float).eps ** 0.2 * np.maximum(1.0, np.abs(s))
    stencil = []
    for k in (-2.0, -1.0, 1.0, 2.0):
        stencil.append(h_batch(s + k * step))
    m2, m1, p1, p2 = stencil
    out = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * step)[:, None, None]
    return out


def _require_hermitian(m: np.ndarray, what: str, tol: float = HERMITIAN_TOL) -> None:
    dev = np.max(np.abs(m - m.conj().T))
    if not dev <= tol:
        raise InvalidParameter(f"{what} is not Hermitian (max deviation {dev:.2e})")


# --- parameter coercion helpers ----------------------------------------------

def _as_matrix(value, dim: int, name: str, hermitian: bool = True) -> np.ndarray:
    """Coerce a nested list (entries real, complex, or strings like '1+2j')."""
    try:
        rows = [[complex(x) for x in row] for row in value]
        m = np.array(rows, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InvalidParameter(f"params.{name}: not a matrix of numbers ({exc})")
    if m.shape != (dim, dim):
        raise DimensionMismatch(
            f"params.{name}: shape {m.shape} does not match dim={dim}"
        )
    if hermitian:
        _require_hermitian(m, f"params.{name}")
    return m


def _as_vector(value, dim: int, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (dim,):
        raise DimensionMismatch(f"params.{name}: length {v.shape} does not match dim={dim}")
    return v


def _require_dim(spec: ModelSpec, dim: int) -> None:
    if spec.dim != dim:
        raise DimensionMismatch(f"family '{spec.family}' requires dim={dim}, got {spec.dim}")


# --- families ----------------------------------------------------------------

def _family_constant(spec: ModelSpec):
    energies = _as_vector(spec.params.get("energies", np.arange(spec.dim)),
                          spec.dim, "energies")
    h0 = np.diag(energies).astype(complex)

    def h_batch(s):
        return np.broadcast_to(h0, (len(s),) + h0.shape).copy()

    def dh_batch(s):
        return np.zeros((len(s),) + h0.shape, dtype=complex)

    return h_batch, dh_batch


def _default_generator(dim: int) -> np.ndarray:
    """Nearest-neighbour rotation generator; antisymmetric, unit couplings."""
    a = np.zeros((dim, dim))
    for i in range(dim - 1):
        a[i, i + 1] = -1.0
        a[i + 1, i] = 1.0
    return a


def _family_rotated_frame(spec: ModelSpec):
    energies = _as_vector(spec.params.get("energies", np.arange(spec.dim)),
                          spec.dim, "energies")
    a = np.asarray(spec.params.get("generator", _default_generator(spec.dim)),
                   dtype=float)
    if a.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"params.generator: shape {a.shape} vs dim={spec.dim}")
    if np.max(np.abs(a + a.T)) > 1e-12:
        raise InvalidParameter("params.generator must be real antisymmetric")
    h0 = np.diag(energies).astype(complex)
    # iA is Hermitian, so exp(A s) = W exp(-i mu s) W^dagger with eigh(iA) = (mu, W)
    mu, w = np.linalg.eigh(1j * a)

    def rot(s):
        ph = np.exp(-1j * np.outer(s, mu))            # (M, d)
        return np.einsum("ab,jb,cb->jac", w, ph, w.conj())

    def h_batch(s):
        r = rot(s)
        return np.einsum("jab,bc,jdc->jad", r, h0, r.conj())

    def dh_batch(s):
        hs = h_batch(s)
        return np.einsum("ab,jbc->jac", a.astype(complex), hs) - np.einsum(
            "jab,bc->jac", hs, a.astype(complex))

    return h_batch, dh_batch


def _family_rotating_spin(spec: ModelSpec):
    _require_dim(spec, 2)
    theta = float(spec.params.get("theta", np.pi / 3))
    revolutions = float(spec.params.get("revolutions", 1.0))
    gap = float(spec.params.get("gap", 1.0))
    if not 0 < theta < np.pi:
        raise InvalidParameter("params.theta must lie in (0, pi)")
    if gap <= 0:
        raise InvalidParameter("params.gap must be > 0")
    S = spec.scales.duration
    omega = 2.0 * np.pi * revolutions / S
    st, ct = np.sin(theta), np.cos(theta)

    # h = (gap/2) (I - n.sigma): the field-aligned state sits at energy 0 and
    # carries the closed-loop transport phase; the anti-aligned state sits at +gap.
    def h_batch(s):
        phi = omega * s
        nx, ny = st * np.cos(phi), st * np.sin(phi)
        out = np.empty((len(s), 2, 2), dtype=complex)
        out[:] = 0.5 * gap * np.eye(2)
        out -= 0.5 * gap * (nx[:, None, None] * _SX + ny[:, None, None] * _SY
                            + ct * _SZ[None])
        return out

    def dh_batch(s):
        phi = omega * s
        dnx, dny = -st * np.sin(phi) * omega, st * np.cos(phi) * omega
        return -0.5 * gap * (dnx[:, None, None] * _SX + dny[:, None, None] * _SY)

    return h_batch, dh_batch


def _family_landau_zener_window(spec: ModelSpec):
    _require_dim(spec, 2)
    gap = float(spec.params.get("gap", 1.5))
    sweep = float(spec.params.get("sweep", 1.5))
    if gap <= 0:
        raise InvalidParameter("params.gap must be > 0")
    if sweep <= 0:
        raise InvalidParameter("params.sweep must be > 0")
    S = spec.scales.duration

    # diabatic level a(s) runs -sweep -> +sweep; instantaneous energies are
    # +-sqrt(a^2 + (gap/2)^2), so the minimum gap at the midpoint equals `gap`
    def h_batch(s):
        a = sweep * (2.0 * s / S - 1.0)
        return a[:, None, None] * _SZ + (0.5 * gap) * _SX[None]

    def dh_batch(s):
        return np.broadcast_to((2.0 * sweep / S) * _SZ,
                               (len(s), 2, 2)).astype(complex).copy()

    return h_batch, dh_batch


def _interp_endpoints(spec: ModelSpec):
    if spec.dim == 2:
        h0 = spec.params.get("h_start", _SX)
        h1 = spec.params.get("h_end", _SZ)
    else:
        if "h_start" not in spec.params or "h_end" not in spec.params:
            raise InvalidParameter(
                "params.h_start and params.h_end are required for dim != 2")
        h0, h1 = spec.params["h_start"], spec.params["h_end"]
    return (_as_matrix(h0, spec.dim, "h_start"),
            _as_matrix(h1, spec.dim, "h_end"))


def _family_smooth_interpolation(spec: ModelSpec):
    h0, h1 = _interp_endpoints(spec)
    S = spec.scales.duration
    dh_const = (h1 - h0) / S

    def h_batch(s):
        u = (s / S)[:, None, None]
        return (1.0 - u) * h0 + u * h1

    def dh_batch(s):
        return np.broadcast_to(dh_const, (len(s),) + dh_const.shape).copy()

    return h_batch, dh_batch


def _family_flat_endpoint_ramp(spec: ModelSpec):
    h0, h1 = _interp_endpoints(spec)
    S = spec.scales.duration

    # smoothstep weight w(u) = u^2 (3 - 2u) has w'(0) = w'(1) = 0, so the
    # couplings vanish at both endpoints
    def h_batch(s):
        u = s / S
        w = (u * u * (3.0 - 2.0 * u))[:, None, None]
        return (1.0 - w) * h0 + w * h1

    def dh_batch(s):
        u = s / S
        dw = (6.0 * u * (1.0 - u) / S)[:, None, None]
        return dw * (h1 - h0)

    return h_batch, dh_batch


def _family_user_matrix_polynomial(spec: ModelSpec):
    coeffs = spec.params.get("coefficients")
    if not coeffs:
        raise InvalidParameter("params.coefficients: at least one matrix required")
    cs = [_as_matrix(c, spec.dim, f"coefficients[{k}]") for k, c in enumerate(coeffs)]

    def h_batch(s):
        out = np.zeros((len(s), spec.dim, spec.dim), dtype=complex)
        sk = np.ones_like(s)
        for c in cs:
            out += sk[:, None, None] * c
            sk = sk * s
        return out

    def dh_batch(s):
        out = np.zeros((len(s), spec.dim, spec.dim), dtype=complex)
        sk = np.ones_like(s)
        for k, c in enumerate(cs[1:], start=1):
            out += (k * sk)[:, None, None] * c
            sk = sk * s
        return out

    return h_batch, dh_batch


_FAMILIES = {
    "constant": _family_constant,
    "rotated_frame": _family_rotated_frame,
    "rotating_spin": _family_rotating_spin,
    "landau_zener_window": _family_landau_zener_window,
    "smooth_interpolation": _family_smooth_interpolation,
    "flat_endpoint_ramp": _family_flat_endpoint_ramp,
    "user_matrix_polynomial": _family_user_matrix_polynomial,
}

_FAMILY_PARAMS = {
    "constant": {"energies"},
    "rotated_frame": {"energies", "generator"},
    "rotating_spin": {"theta", "revolutions", "gap"},
    "landau_zener_window": {"gap", "sweep"},
    "smooth_interpolation": {"h_start", "h_end"},
    "flat_endpoint_ramp": {"h_start", "h_end"},
    "user_matrix_polynomial": {"coefficients"},
}

FAMILY_NAMES = tuple(sorted(_FAMILIES))
