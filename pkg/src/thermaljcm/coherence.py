"""Relative entropy of coherence of the 2x2 atomic state.

C = S(rho_diag) - S(rho) in the atomic energy basis, computed from the
closed-form qubit eigenvalues.  Perturbative inputs can leave the physical
set slightly; the projection here clamps the population and radially rescales
the coherence to the positivity boundary, preserving its phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

__all__ = [
    "AtomState",
    "PHYS_EPS",
    "make_atom_state",
    "physicality_project",
    "rel_entropy_coherence",
    "coherence_values",
    "project_values",
]

#: tolerance for classifying a raw perturbative state as physical
PHYS_EPS = 1e-6

#: changes smaller than this do not count as a projection
_PROJ_TOL = 1e-12

LN2 = math.log(2.0)


@dataclass(frozen=True)
class AtomState:
    """2x2 atomic density matrix written as (rho00, rho01); rho11 = 1 - rho00
    and rho10 = conj(rho01) are implied.  Index 0 is the excited level, so
    rho00 is the excitation probability."""

    rho00: float
    rho01: complex
    physical: bool
    projection_applied: bool = False
    rho00_raw: float | None = None
    rho01_raw: complex | None = None


def _within_physical(rho00: float, rho01: complex, eps: float) -> bool:
    if not (-eps <= rho00 <= 1.0 + eps):
        return False
    p = min(max(rho00, 0.0), 1.0)
    return abs(rho01) ** 2 <= p * (1.0 - p) + eps


def make_atom_state(rho00: float, rho01: complex, eps: float = PHYS_EPS) -> AtomState:
    """Wrap raw matrix elements, classifying physicality within ``eps``."""
    rho00 = float(rho00)
    rho01 = complex(rho01)
    return AtomState(rho00=rho00, rho01=rho01,
                     physical=_within_physical(rho00, rho01, eps))


def physicality_project(state: AtomState) -> AtomState:
    """Project onto the physical set: clamp rho00 to [0, 1] and rescale rho01
    radially onto the positivity boundary sqrt(rho00 (1 - rho00)) when it
    exceeds it.  The coherence phase is preserved and |rho01| never grows.
    Original values are kept for diagnostics."""
    p = min(max(state.rho00, 0.0), 1.0)
    z = state.rho01
    bound = math.sqrt(p * (1.0 - p))
    mag = abs(z)
    if mag > bound:
        z = z * (bound / mag) if mag > 0 else 0.0
    changed = abs(p - state.rho00) > _PROJ_TOL or abs(abs(z) - mag) > _PROJ_TOL
    return AtomState(
        rho00=p,
        rho01=z,
        physical=True,
        projection_applied=changed or state.projection_applied,
        rho00_raw=state.rho00_raw if state.rho00_raw is not None else state.rho00,
        rho01_raw=state.rho01_raw if state.rho01_raw is not None else state.rho01,
    )


def _binary_entropy(x):
    return -xlogy(x, x) - xlogy(1.0 - x, 1.0 - x)


def coherence_values(rho00, abs_rho01):
    """Relative entropy of coherence from (rho00, |rho01|); vectorized.

    Inputs must already be physical.  The qubit eigenvalues are
    (1 +- sqrt((1 - 2 rho00)^2 + 4 |rho01|^2))/2; 0 ln 0 := 0 by continuity
    and rounding-level negatives are clipped to 0.
    """
    p = np.asarray(rho00, dtype=float)
    z = np.asarray(abs_rho01, dtype=float)
    disc = np.clip((1.0 - 2.0 * p) ** 2 + 4.0 * z * z, 0.0, 1.0)
    lam = 0.5 * (1.0 + np.sqrt(disc))
    out = np.clip(_binary_entropy(p) - _binary_entropy(lam), 0.0, LN2)
    return float(out) if np.ndim(rho00) == 0 and np.ndim(abs_rho01) == 0 else out


def rel_entropy_coherence(state: AtomState) -> float:
    """Relative entropy of coherence of a physical atomic state, in [0, ln 2].

    Raises on non-physical input; callers holding raw perturbative values
    must run :func:`physicality_project` first.
    """
    if not _within_physical(state.rho00, state.rho01, _PROJ_TOL):
        raise ValueError("state is not physical; apply physicality_project first")
    p = min(max(state.rho00, 0.0), 1.0)
    return coherence_values(p, abs(state.rho01))


def project_values(rho00, abs_rho01):
    """Vectorized projection of (rho00, |rho01|) arrays onto the physical set.

    Returns (rho00, |rho01|, projection_applied mask); the array counterpart
    of :func:`physicality_project` for grid pipelines.
    """
    p_raw = np.asarray(rho00, dtype=float)
    z_raw = np.asarray(abs_rho01, dtype=float)
    p = np.clip(p_raw, 0.0, 1.0)
    bound = np.sqrt(p * (1.0 - p))
    z = np.minimum(z_raw, bound)
    changed = (np.abs(p - p_raw) > _PROJ_TOL) | (np.abs(z - z_raw) > _PROJ_TOL)
    return p, z, changed
