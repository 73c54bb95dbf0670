"""Physical parameters and closed-form building blocks of the l-photon JCM.

The rotating-wave Hamiltonian couples the atomic raising operator to the
l-th power of the cavity annihilation operator.  In the interaction picture
the propagator is block diagonal on the pairs {|e,n>, |g,n+l>}; everything
here is expressed through the Rabi eigenvalues of those 2x2 blocks and the
temperature-dependent Bogoliubov angles of the thermal vacuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "ThermalParams",
    "EigenvalueTable",
    "derived_detuning",
    "bogoliubov_angles",
    "thermal_from_inv_beta",
    "block_amplitudes",
    "tau1",
    "t0_period",
    "t0_prime_period",
    "interference_period",
    "rabi_period",
]


def derived_detuning(omega0: float, omega: float, l: int) -> float:
    """Detuning between l cavity quanta and the atomic transition, l*omega - omega0."""
    if omega0 <= 0 or omega <= 0:
        raise ValueError("frequencies must be positive")
    if l < 1:
        raise ValueError("photon multiplicity must be >= 1")
    return l * omega - omega0


@dataclass(frozen=True)
class ModelParams:
    """Constants of the l-photon Jaynes-Cummings model (hbar = 1).

    The detuning is always recomputed from (omega0, omega, l); it is never an
    independent input.
    """

    l: int
    g: float
    omega0: float
    omega: float
    alpha: complex

    def __post_init__(self) -> None:
        if self.l < 1 or self.l != int(self.l):
            raise ValueError("l must be an integer >= 1")
        # g = 0 is admitted so the overall-g**2 structure of the series is
        # testable; the period formulas below still require g > 0.
        if self.g < 0:
            raise ValueError("coupling constant must be >= 0")
        if self.omega0 <= 0 or self.omega <= 0:
            raise ValueError("frequencies must be positive")
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def delta(self) -> float:
        return derived_detuning(self.omega0, self.omega, self.l)

    @property
    def abs_alpha_sq(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class ThermalParams:
    """Inverse temperature and the derived Bogoliubov angles (k_B = 1).

    ``theta`` is the bosonic squeeze angle of the cavity thermal vacuum;
    ``cos_atom``/``sin_atom`` are the fermionic mixing angle of the atomic
    thermal vacuum.  ``beta = math.inf`` is the zero-temperature limit and
    gives theta = 0, sin_atom = 0.
    """

    beta: float
    theta: float
    cosh_theta: float
    sinh_theta: float
    cos_atom: float
    sin_atom: float


def bogoliubov_angles(beta: float, omega: float, omega0: float) -> ThermalParams:
    """Bogoliubov angles of the bosonic and fermionic thermal vacua.

    cosh(theta) = [1 - e^(-beta*omega)]^(-1/2), sinh(theta) = [e^(beta*omega) - 1]^(-1/2)
    for the cavity mode, and cos/sin of the atomic mixing angle carry the
    Fermi factor e^(-beta*omega0).
    """
    if omega <= 0 or omega0 <= 0:
        raise ValueError("frequencies must be positive")
    if math.isinf(beta) and beta > 0:
        return ThermalParams(beta=math.inf, theta=0.0, cosh_theta=1.0,
                             sinh_theta=0.0, cos_atom=1.0, sin_atom=0.0)
    if not beta > 0:
        raise ValueError("inverse temperature must be positive (or math.inf)")
    # 1/sqrt(e^x - 1) written as e^(-x/2)/sqrt(1 - e^(-x)): underflows
    # gracefully at large beta instead of overflowing e^x
    cosh_theta = 1.0 / math.sqrt(-math.expm1(-beta * omega))
    sinh_theta = math.exp(-beta * omega / 2.0) * cosh_theta
    theta = math.asinh(sinh_theta)
    boltz = math.exp(-beta * omega0)
    cos_atom = 1.0 / math.sqrt(1.0 + boltz)
    sin_atom = math.exp(-beta * omega0 / 2.0) * cos_atom
    return ThermalParams(beta=beta, theta=theta, cosh_theta=cosh_theta,
                         sinh_theta=sinh_theta, cos_atom=cos_atom, sin_atom=sin_atom)


def thermal_from_inv_beta(inv_beta: float, params: ModelParams) -> ThermalParams:
    """Bogoliubov angles at temperature 1/beta; 0 means zero temperature."""
    if inv_beta < 0:
        raise ValueError("temperature must be >= 0")
    beta = math.inf if inv_beta == 0 else 1.0 / inv_beta
    return bogoliubov_angles(beta, params.omega, params.omega0)


class EigenvalueTable:
    """Frozen tables of the Rabi eigenvalues D_m and D'_n.

    D_m  = (delta/2)^2 + g^2 * prod_{k=1..l} (m + k)
    D'_n = (delta/2)^2 + g^2 * prod_{k=1..l} (n - k + 1)   (zero product for n <= l-1)

    The photon-number products are evaluated in floating point; they stay well
    inside double range for m <= 1e6 and l <= 8 (max ~1e48).  Arrays are
    read-only after construction, so the table is safe to share across
    threads.
    """

    def __init__(self, params: ModelParams, n_max: int):
        if n_max < 0:
            raise ValueError("n_max must be >= 0")
        self.params = params
        self.n_max = int(n_max)
        l, g = params.l, params.g
        half_delta_sq = (params.delta / 2.0) ** 2
        m = np.arange(self.n_max + 1, dtype=float)
        prod_up = np.prod(m[:, None] + np.arange(1, l + 1)[None, :], axis=1)
        prod_down = np.prod(m[:, None] - np.arange(l)[None, :], axis=1)
        prod_down[: min(l, self.n_max + 1)] = 0.0
        self.d = half_delta_sq + g * g * prod_up
        self.d_prime = half_delta_sq + g * g * prod_down
        self.sqrt_d = np.sqrt(self.d)
        self.sqrt_d_prime = np.sqrt(self.d_prime)
        for arr in (self.d, self.d_prime, self.sqrt_d, self.sqrt_d_prime):
            arr.setflags(write=False)


def _osc_pair(sqrt_d: np.ndarray, d: np.ndarray, t, half_delta: float):
    """cos(sqrt(D) t) - i (delta/2) sin(sqrt(D) t)/sqrt(D) and sin(sqrt(D) t)/sqrt(D).

    The removable singularity at D = 0 (possible only when the eigenvalue is
    structurally zero) is evaluated by its limit: the pair (1, t).  Broadcasts
    over any combination of eigenvalue and time axes.
    """
    t = np.asarray(t, dtype=float)
    arg = sqrt_d * t
    zero = d == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(zero, 1.0, np.sin(arg) / np.where(zero, 1.0, sqrt_d))
    b = np.where(zero, np.broadcast_to(t, np.broadcast_shapes(d.shape, t.shape)), sinc)
    a = np.cos(arg) - 1j * half_delta * b
    return a, b


def block_amplitudes(n: int, t: float, params: ModelParams):
    """Propagator block amplitudes (A(n), A'(n), B(n), B'(n)) at photon index n.

    A(n) = cos(sqrt(D_n) t) - i (delta/2) sin(sqrt(D_n) t)/sqrt(D_n),
    B(n) = sin(sqrt(D_n) t)/sqrt(D_n); primed versions use D'_n.  When
    D'_n = 0 (delta = 0 and n <= l-1) the limit values A' = 1, B' = t are
    returned; no division by the vanishing eigenvalue ever happens.
    """
    if n < 0:
        raise ValueError("photon index must be >= 0")
    table = EigenvalueTable(params, n)
    half_delta = params.delta / 2.0
    a, b = _osc_pair(table.sqrt_d[n], table.d[n], t, half_delta)
    ap, bp = _osc_pair(table.sqrt_d_prime[n], table.d_prime[n], t, half_delta)
    return complex(a), complex(ap), float(b.real), float(bp.real)


def _require_drive(params: ModelParams) -> None:
    if params.g <= 0:
        raise ValueError("period formulas require g > 0")


def tau1(params: ModelParams) -> float:
    """Fast Rabi period pi/(g |alpha|) of the single-photon model."""
    _require_drive(params)
    if params.alpha == 0:
        raise ValueError("tau1 is undefined for alpha = 0")
    return math.pi / (params.g * abs(params.alpha))


def t0_period(params: ModelParams) -> float:
    """Zero-temperature revival period 2 pi / (g l |alpha|^(l-2)).

    Written through (|alpha|^2)^(1 - l/2) so that the thermal period below
    reduces to it bitwise at theta = 0.
    """
    _require_drive(params)
    if params.alpha == 0 and params.l != 2:
        raise ValueError("revival period is undefined for alpha = 0 unless l = 2")
    aa = params.abs_alpha_sq
    return (2.0 * math.pi / (params.g * params.l)) * aa ** (1.0 - params.l / 2.0)


def t0_prime_period(params: ModelParams, thermal: ThermalParams) -> float:
    """Thermally corrected revival period.

    Replaces |alpha|^2 in the zero-temperature formula by the thermal mean
    photon number expanded to second order in the Bogoliubov angle:
    |alpha|^2 [1 + 2 theta + 2 theta^2] + theta^2.  Independent of both
    |alpha| and theta when l = 2.
    """
    _require_drive(params)
    th = thermal.theta
    mean = params.abs_alpha_sq * (1.0 + 2.0 * th + 2.0 * th * th) + th * th
    if mean == 0 and params.l != 2:
        raise ValueError("revival period is undefined for alpha = 0 unless l = 2")
    return (2.0 * math.pi / (params.g * params.l)) * mean ** (1.0 - params.l / 2.0)


def interference_period(params: ModelParams, m: int) -> float:
    """Revival time from the constructive-interference condition at photon number m.

    Solves 2 g [m^(l/2) - (m-1)^(l/2)] T = 2 pi.  Exactly pi/g for l = 2,
    independent of m.
    """
    _require_drive(params)
    if m < 1:
        raise ValueError("photon number m must be >= 1")
    gap = float(m) ** (params.l / 2.0) - float(m - 1) ** (params.l / 2.0)
    return math.pi / (params.g * gap)


def rabi_period(params: ModelParams) -> float:
    """Period of the fast oscillation of P_e at mean photon number |alpha|^2.

    pi / (g |alpha|^l), the period of the dominant sin^2 term; coincides with
    tau1 for the single-photon model, and approximates the spacing of the
    P_e maxima near a revival.  Used as the envelope window and sampling
    scale in period extraction.
    """
    _require_drive(params)
    if params.alpha == 0:
        raise ValueError("rabi_period is undefined for alpha = 0")
    return math.pi / (params.g * abs(params.alpha) ** params.l)
