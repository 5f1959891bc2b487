"""Shared helpers for the suite."""

import numpy as np

import adiabatic_jumps as aj

# Frozen closed-form values |1 - exp(-i*lam*S)| / lam at S = 1, computed with
# 40-digit mpmath arithmetic and rounded to double precision.
CONSTANT_CASE = {
    10.0: 0.19178485493262769,
    50.0: 0.0052940700039109212,
    100.0: 0.0052474970740785757,
}

BUILTIN_SPECS = {
    "constant": {"energies": [0.0, 1.0]},
    "rotated_frame": {},
    "rotating_spin": {},
    "landau_zener_window": {},
    "smooth_interpolation": {},
    "flat_endpoint_ramp": {},
    "user_matrix_polynomial": {
        "coefficients": [
            [[0.0, 0.0], [0.0, 1.0]],
            [[0.2, 0.1], [0.1, 0.6]],
        ],
    },
}


def make_spec(family, duration=1.0, dim=2, params=None, m0=0):
    base = dict(BUILTIN_SPECS.get(family, {}))
    if params:
        base.update(params)
    return aj.ModelSpec(family=family, dim=dim, params=base,
                        scales=aj.ModelScales(duration=duration),
                        initial_state_index=m0)


def make_model(family, **kw):
    return aj.build_model(make_spec(family, **kw))


def three_level_spec(duration=1.0):
    """Fully coupled 3-level rotated frame used by the nested-oracle checks."""
    return aj.ModelSpec(
        family="rotated_frame", dim=3,
        params={"energies": [0.0, 1.0, 2.2],
                "generator": [[0.0, -1.0, 0.5],
                              [1.0, 0.0, -0.7],
                              [-0.5, 0.7, 0.0]]},
        scales=aj.ModelScales(duration=duration))


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (m + m.conj().T)


def unit_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
