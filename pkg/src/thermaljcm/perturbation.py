"""Low-temperature perturbation series of the thermal l-photon JCM.

Evaluates the excitation probability and the atomic coherence through second
order in the bosonic Bogoliubov angle.  Every series is a Poisson-weighted
sum over photon number; weights are built in the log domain so that the
alpha = 12, n_max = 250 regime never overflows, and all reductions run in a
fixed ascending-n order (numpy pairwise over the contiguous n axis), so a
value is bitwise independent of how the time grid is batched.

Convention: the S-type sums returned here carry the normalized Poisson
weights, i.e. they equal exp(-|alpha|^2) times the bare sums written with
|alpha|^(2n)/n! coefficients.  The order-term prefactors below already
account for this.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from .coherence import AtomState, make_atom_state
from .model import EigenvalueTable, ModelParams, ThermalParams, _osc_pair

__all__ = [
    "TruncationPolicy",
    "TruncationWarning",
    "PeOrders",
    "Rho01Orders",
    "poisson_log_weight",
    "pe_zero_temperature",
    "series_S",
    "pe_order_terms",
    "pe_thermal",
    "tilde_S",
    "rho01_order_terms",
    "rho01_thermal",
    "atom_state",
]

DEFAULT_TAIL_TOL = 1e-9

#: time-axis block size for the grid engines; keeps the (t, n) trig tables
#: under ~50 MB without affecting any per-time-point result
_T_CHUNK = 2048


class TruncationWarning(UserWarning):
    """Poisson tail mass beyond n_max exceeds the requested tolerance."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Series truncation: sum photon numbers n = 0 .. n_max.

    The CLI figure presets use n_max = 110, 80 and 250; the adaptive
    constructor sizes the cut from the Poisson mean and spread instead.
    """

    n_max: int = 250
    tail_tol: float | None = None

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @classmethod
    def adaptive(cls, params: ModelParams, tail_tol: float = 1e-12) -> "TruncationPolicy":
        aa = params.abs_alpha_sq
        n_max = math.ceil(aa + 12.0 * math.sqrt(aa + 1.0) + params.l + 10)
        return cls(n_max=n_max, tail_tol=tail_tol)

    def tail_mass(self, alpha: complex) -> float:
        """Poisson probability mass above n_max for intensity |alpha|^2."""
        return float(gammainc(self.n_max + 1, abs(alpha) ** 2))

    def warn_if_leaky(self, alpha: complex) -> None:
        tol = self.tail_tol if self.tail_tol is not None else DEFAULT_TAIL_TOL
        tail = self.tail_mass(alpha)
        if tail > tol:
            warnings.warn(
                f"Poisson tail mass {tail:.3e} beyond n_max={self.n_max} exceeds "
                f"tolerance {tol:.1e}; increase n_max",
                TruncationWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class PeOrders:
    """Excitation-probability order terms (zeroth, first, second) for the two
    atomic-weight channels; channel 1 multiplies sin^2 and channel 2 cos^2 of
    the atomic mixing angle."""

    p1: tuple
    p2: tuple


@dataclass(frozen=True)
class Rho01Orders:
    """Coherence order terms, same channel convention as :class:`PeOrders`."""

    r1: tuple
    r2: tuple


def poisson_log_weight(n, alpha: complex):
    """log of the Poisson weight e^(-|alpha|^2) |alpha|^(2n) / n!.

    alpha = 0 degenerates to weight 1 at n = 0 and 0 elsewhere.
    """
    n_arr = np.asarray(n, dtype=float)
    aa = abs(alpha) ** 2
    if aa == 0.0:
        out = np.where(n_arr == 0, 0.0, -np.inf)
    else:
        out = n_arr * math.log(aa) - gammaln(n_arr + 1.0) - aa
    return float(out) if np.ndim(n) == 0 else out


def _weights(alpha: complex, n_max: int) -> np.ndarray:
    return np.exp(poisson_log_weight(np.arange(n_max + 1), alpha))


def _as_grid(t):
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.ndim != 1:
        raise ValueError("time must be a scalar or 1-d array")
    return arr, np.ndim(t) == 0


def _unwrap(out, scalar: bool):
    if not scalar:
        return out
    return complex(out[0]) if np.iscomplexobj(out) else float(out[0])


def _reduce_n(prod: np.ndarray) -> np.ndarray:
    """Fixed summation order over the trailing (ascending-n) axis."""
    return np.add.reduce(np.ascontiguousarray(prod), axis=-1)


def _sin_sq_over(d: np.ndarray, arg: np.ndarray, t: np.ndarray) -> np.ndarray:
    """sin^2(sqrt(D) t)/D columnwise, with the t^2 limit where D is exactly 0."""
    zero = d == 0.0
    s = np.sin(arg)
    out = s * s / np.where(zero, 1.0, d)[None, :]
    if zero.any():
        out[:, zero] = (t * t)[:, None]
    return out


def _s_tables(params: ModelParams, trunc: TruncationPolicy, t: np.ndarray):
    """e^(-|alpha|^2)-scaled S1(k), S2(k) for k = 0, 1, 2; shapes (3, nt)."""
    n_max = trunc.n_max
    table = EigenvalueTable(params, n_max + 2)
    w = _weights(params.alpha, n_max)
    half_delta_sq = (params.delta / 2.0) ** 2
    n_cols = n_max + 1

    S1 = np.empty((3, t.size))
    S2 = np.empty((3, t.size))
    for lo in range(0, t.size, _T_CHUNK):
        sl = slice(lo, lo + _T_CHUNK)
        tc = t[sl]
        arg = tc[:, None] * table.sqrt_d[None, :]
        c2 = np.cos(arg)
        c2 *= c2
        s2d = _sin_sq_over(table.d, arg, tc)
        s1 = c2 + half_delta_sq * s2d
        for k in range(3):
            S1[k, sl] = _reduce_n(s1[:, k : k + n_cols] * w[None, :])
            S2[k, sl] = _reduce_n(s2d[:, k : k + n_cols] * w[None, :])
    return S1, S2


def series_S(j: int, k: int, t, params: ModelParams, trunc: TruncationPolicy):
    """Poisson-weighted trigonometric sum S_j(k), j in {1, 2}, k in {0, 1, 2}.

    S1 sums cos^2(sqrt(D_{n+k}) t) + (delta/2)^2 sin^2(...)/D_{n+k}; S2 sums
    sin^2(sqrt(D_{n+k}) t)/D_{n+k}.  Returned with normalized weights (the
    module-level convention), so S1(k) -> 1 and S2(k) -> 0 at t = 0.
    """
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    trunc.warn_if_leaky(params.alpha)
    t_arr, scalar = _as_grid(t)
    S1, S2 = _s_tables(params, trunc, t_arr)
    out = S1[k] if j == 1 else S2[k]
    return _unwrap(out, scalar)


def _pe_order_arrays(params: ModelParams, trunc: TruncationPolicy, t: np.ndarray):
    S1, S2 = _s_tables(params, trunc, t)
    aa = params.abs_alpha_sq
    g2 = params.g**2
    l = params.l
    p01 = S1[0]
    p02 = g2 * aa**l * S2[0]
    p11 = -2.0 * aa * (S1[0] - S1[1])
    p12 = 2.0 * g2 * aa**l * ((l - aa) * S2[0] + aa * S2[1])
    p21 = 2.0 * (
        -(1.0 + aa - 2.0 * aa * aa) * S1[0]
        + (1.0 - 4.0 * aa * aa) * S1[1]
        + aa * (1.0 + 2.0 * aa) * S1[2]
    )
    p22 = (
        2.0
        * g2
        * (1.0 + 2.0 * aa)
        * aa ** (l - 1)
        * (
            (l * l - (1.0 + 2.0 * l) * aa + aa * aa) * S2[0]
            - aa * (-1.0 - 2.0 * l + 2.0 * aa) * S2[1]
            + aa * aa * S2[2]
        )
    )
    return (p01, p11, p21), (p02, p12, p22)


def pe_order_terms(t, params: ModelParams, trunc: TruncationPolicy) -> PeOrders:
    """All six order terms of the excitation probability at time(s) t."""
    trunc.warn_if_leaky(params.alpha)
    t_arr, scalar = _as_grid(t)
    p1, p2 = _pe_order_arrays(params, trunc, t_arr)
    return PeOrders(
        p1=tuple(_unwrap(x, scalar) for x in p1),
        p2=tuple(_unwrap(x, scalar) for x in p2),
    )


def pe_zero_temperature(t, params: ModelParams, trunc: TruncationPolicy, clamp: bool = True):
    """Zero-temperature excitation probability.

    g^2 |alpha|^(2l) e^(-|alpha|^2) sum_m |alpha|^(2m)/m! sin^2(sqrt(D_m) t)/D_m.
    The truncated sum lies in [0, 1] up to rounding; with ``clamp`` the value
    is clipped to [0, 1], and a clip that moves it by more than 1e-12 (which
    would indicate a real defect, not rounding) is reported as a warning.
    """
    trunc.warn_if_leaky(params.alpha)
    t_arr, scalar = _as_grid(t)
    _, p2 = _pe_order_arrays(params, trunc, t_arr)
    vals = p2[0]
    if clamp:
        clipped = np.clip(vals, 0.0, 1.0)
        if np.any(np.abs(clipped - vals) > 1e-12):
            warnings.warn("zero-temperature probability left [0, 1] by more than 1e-12",
                          UserWarning, stacklevel=2)
        vals = clipped
    return _unwrap(vals, scalar)


def pe_thermal(t, params: ModelParams, thermal: ThermalParams, trunc: TruncationPolicy):
    """Excitation probability through second order in the Bogoliubov angle.

    Returned raw: at larger angles the truncated expansion may leave [0, 1]
    slightly; physicality is classified downstream (see :func:`atom_state`
    and the coherence module), never clamped here.
    """
    trunc.warn_if_leaky(params.alpha)
    t_arr, scalar = _as_grid(t)
    p1, p2 = _pe_order_arrays(params, trunc, t_arr)
    th = thermal.theta
    pe1 = p1[0] + th * p1[1] + 0.5 * th * th * p1[2]
    pe2 = p2[0] + th * p2[1] + 0.5 * th * th * p2[2]
    out = thermal.sin_atom**2 * pe1 + thermal.cos_atom**2 * pe2
    return _unwrap(out, scalar)


# ---------------------------------------------------------------------------
# coherence series

#: conj(alpha) exponent carried by each of the six series per family
_ALPHA_POWERS = (0, -1, 1, -2, 2, 0)  # offsets relative to l


def _tilde_tables(params: ModelParams, trunc: TruncationPolicy, t: np.ndarray) -> np.ndarray:
    """The twelve series of the coherence expansion, shape (2, 6, nt).

    Family 1 weighs A(m+l) B'(m+l) style products (matrix elements through
    the excited-state branch); family 2 weighs B A' products.  The printed
    unit-step guards and shifted factorials are absorbed by summing over the
    natural weight index m = 0..n_max, which shifts each series start so no
    negative index is ever touched.
    """
    n_max = trunc.n_max
    l = params.l
    table = EigenvalueTable(params, n_max + l + 2)
    w = _weights(params.alpha, n_max)
    m = np.arange(n_max + 1, dtype=float)
    half_delta = params.delta / 2.0
    n_cols = n_max + 1

    # polynomial coefficients of the six series, folded into the weights
    cw = (
        w,
        w * (m + l),
        w,
        w * ((m + l - 1) * (m + l)),
        w,
        w * (m + l + 1),
    )
    # photon-index offset of the oscillator product for each series
    off1 = (l, l, l + 1, l, l + 2, l + 1)
    off2 = (0, 0, 1, 0, 2, 1)

    out = np.empty((2, 6, t.size), dtype=complex)
    for lo in range(0, t.size, _T_CHUNK):
        sl = slice(lo, lo + _T_CHUNK)
        tc = t[sl][:, None]
        a, b = _osc_pair(table.sqrt_d[None, :], table.d, tc, half_delta)
        ap, bp = _osc_pair(table.sqrt_d_prime[None, :], table.d_prime, tc, half_delta)
        ab1 = a * bp
        ab2 = b * ap
        for k in range(6):
            out[0, k, sl] = _reduce_n(ab1[:, off1[k] : off1[k] + n_cols] * cw[k][None, :])
            out[1, k, sl] = _reduce_n(ab2[:, off2[k] : off2[k] + n_cols] * cw[k][None, :])

    alpha = params.alpha
    ac = np.conj(alpha)
    for k in range(6):
        p = l + _ALPHA_POWERS[k]
        if alpha == 0:
            pref = 1.0 if p == 0 else 0.0
        else:
            pref = ac**p
        out[0, k] *= -1j * params.g * pref
        out[1, k] *= 1j * params.g * pref
    return out


def tilde_S(j: int, k: int, t, params: ModelParams, trunc: TruncationPolicy):
    """One of the twelve coherence series, exactly as printed (j in {1, 2},
    k in {0..5}), including sign, conj(alpha) power and unit-step shifts."""
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    if k not in range(6):
        raise ValueError("k must be in 0..5")
    trunc.warn_if_leaky(params.alpha)
    t_arr, scalar = _as_grid(t)
    out = _tilde_tables(params, trunc, t_arr)[j - 1, k]
    return _unwrap(out, scalar)


def _rho01_order_arrays(params: ModelParams, trunc: TruncationPolicy, t: np.ndarray):
    S = _tilde_tables(params, trunc, t)
    aa = params.abs_alpha_sq
    alpha = params.alpha
    ac = np.conj(alpha)
    r0 = S[:, 0]
    r1 = -2.0 * aa * S[:, 0] + ac * S[:, 1] + alpha * S[:, 2]
    r2 = (
        2.0 * (-1.0 - aa + 2.0 * aa * aa) * S[:, 0]
        - (1.0 + 4.0 * aa) * ac * S[:, 1]
        - (1.0 + 4.0 * aa) * alpha * S[:, 2]
        + ac * ac * S[:, 3]
        + alpha * alpha * S[:, 4]
        + 2.0 * (1.0 + aa) * S[:, 5]
    )
    return r0, r1, r2  # each (2, nt)


def rho01_order_terms(t, params: ModelParams, trunc: TruncationPolicy) -> Rho01Orders:
    """Order terms of the atomic coherence for both channels."""
    trunc.warn_if_leaky(params.alpha)
    t_arr, scalar = _as_grid(t)
    r0, r1, r2 = _rho01_order_arrays(params, trunc, t_arr)
    return Rho01Orders(
        r1=tuple(_unwrap(x, scalar) for x in (r0[0], r1[0], r2[0])),
        r2=tuple(_unwrap(x, scalar) for x in (r0[1], r1[1], r2[1])),
    )


def rho01_thermal(t, params: ModelParams, thermal: ThermalParams, trunc: TruncationPolicy):
    """Atomic coherence through second order in the Bogoliubov angle.

    Note on orientation: this is the expansion of the expectation of
    (u00^dag u10, u01^dag u11), which is the conjugate of the excited-ground
    matrix element the exact reduced state yields; magnitudes agree, complex
    comparisons against the oracle must conjugate one side (verified in the
    test suite rather than asserted symbolically).
    """
    trunc.warn_if_leaky(params.alpha)
    t_arr, scalar = _as_grid(t)
    r0, r1, r2 = _rho01_order_arrays(params, trunc, t_arr)
    th = thermal.theta
    ch1 = r0[0] + th * r1[0] + 0.5 * th * th * r2[0]
    ch2 = r0[1] + th * r1[1] + 0.5 * th * th * r2[1]
    out = thermal.sin_atom**2 * ch1 + thermal.cos_atom**2 * ch2
    return _unwrap(out, scalar)


def atom_state(t: float, params: ModelParams, thermal: ThermalParams,
               trunc: TruncationPolicy) -> AtomState:
    """Perturbative 2x2 atomic state at a single time.

    rho00 is the excitation probability, rho11 = 1 - rho00, and the state
    carries a physicality flag; values are raw (no clamping) so that the
    residual scaling against the exact solver stays measurable.
    """
    rho00 = pe_thermal(t, params, thermal, trunc)
    rho01 = rho01_thermal(t, params, thermal, trunc)
    return make_atom_state(rho00, rho01)
