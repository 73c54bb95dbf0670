"""Exact solver in the doubled Hilbert space on a truncated Fock basis.

The state lives on (atom) x (tilde atom) x (cavity) x (tilde cavity) with
each boson mode cut at n_fock levels.  The initial state is the fermionic
thermal vacuum tensored with a thermal coherent state (a displaced two-mode
squeezed vacuum), and propagation applies the closed-form blockwise
propagator (the physical factor couples only |e, n> with |g, n+l>, and the
tilde factor is its complex conjugate), so no exponential of the full
Hamiltonian is ever formed and each time sample costs O(n_fock^2).

This module is the validation oracle for every perturbative series in
:mod:`thermaljcm.perturbation`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .coherence import AtomState, make_atom_state
from .model import EigenvalueTable, ModelParams, ThermalParams, _osc_pair

__all__ = [
    "FockTruncation",
    "DoubledFockState",
    "LeakageError",
    "two_mode_squeezed_vacuum",
    "displacement_matrix",
    "coherent_state_vector",
    "thermal_coherent_state",
    "thermal_coherent_state_via_generator",
    "build_initial_state",
    "propagate",
    "observe_pe",
    "reduce_atom",
    "pe_curve",
    "atom_block_matrices",
    "apply_free_phase",
]


class LeakageError(RuntimeError):
    """Truncated-basis population leaked past the tolerated norm budget."""


@dataclass(frozen=True)
class FockTruncation:
    """Single-mode Fock cutoff (levels 0 .. n_fock-1) and the norm-leakage
    budget accepted before raising."""

    n_fock: int
    leak_tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.n_fock < 2:
            raise ValueError("n_fock must be >= 2")
        if not 0 < self.leak_tol < 1:
            raise ValueError("leak_tol must be in (0, 1)")

    @classmethod
    def auto(cls, params: ModelParams, thermal: ThermalParams | None = None,
             leak_tol: float = 1e-8) -> "FockTruncation":
        """Size the cutoff as mean + 8 standard deviations + l + 5.

        The mean photon number includes the thermal amplification
        |alpha|^2 e^(2 theta) + sinh^2 theta, which keeps both the Poisson
        and thermal tails below ~1e-10 for angles up to ~0.3.
        """
        th = 0.0 if thermal is None else thermal.theta
        mean = params.abs_alpha_sq * math.exp(2.0 * th) + math.sinh(th) ** 2
        n = math.ceil(mean + 8.0 * math.sqrt(mean + 1.0) + params.l + 5)
        return cls(n_fock=int(n), leak_tol=leak_tol)


@dataclass
class DoubledFockState:
    """Amplitudes over (atom, tilde atom, cavity, tilde cavity).

    ``amp[f, ft, n, nt]`` with f = 1 the excited atomic level.  The array is
    exclusively owned by its state; propagation returns a fresh state.
    """

    amp: np.ndarray
    trunc: FockTruncation

    def __post_init__(self) -> None:
        n = self.trunc.n_fock
        if self.amp.shape != (2, 2, n, n):
            raise ValueError(f"amplitude array must have shape (2, 2, {n}, {n})")

    @property
    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))


def _check_norm(norm_sq: float, leak_tol: float, what: str) -> None:
    if abs(norm_sq - 1.0) > leak_tol:
        raise LeakageError(f"{what}: |norm^2 - 1| = {abs(norm_sq - 1.0):.3e} "
                           f"exceeds leak_tol = {leak_tol:.1e}")


def two_mode_squeezed_vacuum(theta: float, trunc: FockTruncation) -> np.ndarray:
    """Two-mode squeezed vacuum (1/cosh) sum_n tanh^n |n, n>, truncated and
    renormalized; this is the bosonic thermal vacuum of the doubled space."""
    if theta < 0:
        raise ValueError("squeeze angle must be >= 0")
    n = trunc.n_fock
    tanh = math.tanh(theta)
    tail = tanh ** (2 * n)  # exact mass above the cutoff of the geometric law
    if tail > trunc.leak_tol:
        raise LeakageError(f"squeezed-vacuum tail {tail:.3e} exceeds leak_tol")
    diag = tanh ** np.arange(n) / math.cosh(theta)
    diag /= math.sqrt(np.sum(diag**2))
    out = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(out, diag)
    return out


def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


def displacement_matrix(gamma: complex, trunc: FockTruncation) -> np.ndarray:
    """Matrix exponential of gamma a^dag - conj(gamma) a on the truncated basis.

    The generator is anti-Hermitian, so the result is unitary on the
    truncated space (scipy's scaling-and-squaring expm); column 0 is the
    coherent state |gamma> up to truncation.  Leakage is budgeted as
    probability mass (squared amplitude at the cutoff), like every other
    norm check in this module.
    """
    n = trunc.n_fock
    a = _ladder(n)
    k = gamma * a.T.conj().astype(complex) - np.conj(gamma) * a
    d = expm(k)
    if abs(d[n - 1, 0]) ** 2 > trunc.leak_tol:
        raise LeakageError(
            f"displaced-vacuum mass at the cutoff {abs(d[n-1, 0])**2:.3e} exceeds leak_tol")
    return d


def coherent_state_vector(alpha: complex, n_fock: int) -> np.ndarray:
    """Truncated coherent-state amplitudes e^(-|a|^2/2) a^n / sqrt(n!),
    built in the log domain so large amplitudes never overflow."""
    n = np.arange(n_fock, dtype=float)
    if alpha == 0:
        out = np.zeros(n_fock, dtype=complex)
        out[0] = 1.0
        return out
    from scipy.special import gammaln

    log_mag = -abs(alpha) ** 2 / 2.0 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1.0)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def thermal_coherent_state(alpha: complex, theta: float, trunc: FockTruncation) -> np.ndarray:
    """Thermal coherent state as a (n, tilde n) amplitude matrix.

    Built analytically as D(alpha e^theta) x D(conj(alpha) e^theta) acting on
    the two-mode squeezed vacuum, i.e. the Bogoliubov conjugate of displacing
    a doubled coherent state, which avoids any exponential on the doubled
    space.  The generator route below cross-validates this on small cutoffs.
    """
    scale = math.exp(theta)
    d_phys = displacement_matrix(alpha * scale, trunc)
    d_tilde = displacement_matrix(np.conj(alpha) * scale, trunc)
    phi = d_phys @ two_mode_squeezed_vacuum(theta, trunc) @ d_tilde.T
    _check_norm(float(np.sum(np.abs(phi) ** 2)), trunc.leak_tol, "thermal coherent state")
    return phi


def thermal_coherent_state_via_generator(alpha: complex, theta: float,
                                         trunc: FockTruncation) -> np.ndarray:
    """Reference construction: exponentiate -theta (a a~ - a~^dag a^dag) on the
    doubled space and apply it to |alpha> x |conj(alpha)>.  O(n_fock^6); only
    for small cutoffs in cross-checks."""
    n = trunc.n_fock
    a = _ladder(n).astype(complex)
    ad = a.T.conj()
    gen = -theta * (np.kron(a, a) - np.kron(ad, ad))
    vec = np.kron(coherent_state_vector(alpha, n), coherent_state_vector(np.conj(alpha), n))
    return (expm(gen) @ vec).reshape(n, n)


def build_initial_state(params: ModelParams, thermal: ThermalParams,
                        trunc: FockTruncation) -> DoubledFockState:
    """Fermionic thermal vacuum tensored with the thermal coherent state."""
    n = trunc.n_fock
    phi = thermal_coherent_state(params.alpha, thermal.theta, trunc)
    amp = np.zeros((2, 2, n, n), dtype=complex)
    amp[0, 0] = thermal.cos_atom * phi
    amp[1, 1] = thermal.sin_atom * phi
    state = DoubledFockState(amp=amp, trunc=trunc)
    _check_norm(state.norm_sq, trunc.leak_tol, "initial state")
    return state


def _block_elements(params: ModelParams, t: float, n_fock: int):
    """Closed-form propagator pieces on the truncated basis.

    Returns (diag_e, diag_g, coup):
      diag_e[n]  acts on |e, n>; equals conj(A(n)) where the partner
                 |g, n+l> exists, and the bare detuning phase where the
                 partner is past the cutoff (so the truncated propagator
                 stays exactly unitary);
      diag_g[m]  = A'(m) acting on |g, m>;
      coup[n]    = -i g sqrt((n+l)!/n!) B(n), the |e, n> <-> |g, n+l>
                 coupling for n = 0 .. n_fock-1-l.
    """
    l, g = params.l, params.g
    table = EigenvalueTable(params, n_fock - 1)
    half_delta = params.delta / 2.0
    a_n, b_n = _osc_pair(table.sqrt_d, table.d, t, half_delta)
    ap_m, _ = _osc_pair(table.sqrt_d_prime, table.d_prime, t, half_delta)
    diag_e = np.conj(np.asarray(a_n, dtype=complex))
    diag_g = np.asarray(ap_m, dtype=complex)
    ncpl = n_fock - l
    if ncpl > 0:
        nn = np.arange(ncpl, dtype=float)
        beta = np.sqrt(np.prod(nn[:, None] + np.arange(1, l + 1)[None, :], axis=1))
        coup = -1j * g * beta * np.asarray(b_n, dtype=float)[:ncpl]
        diag_e[ncpl:] = np.exp(1j * params.delta * t / 2.0)
    else:
        coup = np.zeros(0, dtype=complex)
        diag_e[:] = np.exp(1j * params.delta * t / 2.0)
    return diag_e, diag_g, coup


def propagate(state: DoubledFockState, t: float, params: ModelParams) -> DoubledFockState:
    """Apply the interaction-picture propagator at time t.

    The physical factor uses the closed-form block elements; the tilde factor
    is their elementwise complex conjugate (the tilde Hamiltonian enters with
    the opposite sign of i t).  Raises when population within l levels of
    either cutoff exceeds the leakage budget.
    """
    n = state.trunc.n_fock
    l = params.l
    if n <= l:
        raise ValueError("n_fock must exceed the photon multiplicity")
    diag_e, diag_g, coup = _block_elements(params, t, n)
    ncpl = n - l

    old_g, old_e = state.amp[0], state.amp[1]  # (2, n, ntilde)
    new_e = diag_e[None, :, None] * old_e
    new_e[:, :ncpl, :] += coup[None, :, None] * old_g[:, l:, :]
    new_g = diag_g[None, :, None] * old_g
    new_g[:, l:, :] += coup[None, :, None] * old_e[:, :ncpl, :]
    half = np.stack([new_g, new_e])  # [f, ftilde, n, ntilde]

    tg, te = half[:, 0], half[:, 1]  # (2, n, ntilde), indexed [f, n, ntilde]
    cde, cdg, cc = np.conj(diag_e), np.conj(diag_g), np.conj(coup)
    new_te = cde[None, None, :] * te
    new_te[:, :, :ncpl] += cc[None, None, :] * tg[:, :, l:]
    new_tg = cdg[None, None, :] * tg
    new_tg[:, :, l:] += cc[None, None, :] * te[:, :, :ncpl]
    amp = np.stack([new_tg, new_te], axis=1)

    out = DoubledFockState(amp=amp, trunc=state.trunc)
    edge = float(np.sum(np.abs(amp[:, :, n - l :, :]) ** 2)
                 + np.sum(np.abs(amp[:, :, :, n - l :]) ** 2))
    if edge > state.trunc.leak_tol:
        raise LeakageError(f"population {edge:.3e} within {l} levels of the Fock "
                           f"cutoff exceeds leak_tol")
    return out


def observe_pe(state: DoubledFockState) -> float:
    """Excitation probability: total weight on the excited physical level."""
    return float(np.sum(np.abs(state.amp[1]) ** 2))


def reduce_atom(state: DoubledFockState) -> AtomState:
    """Partial trace over the tilde atom and both boson modes.

    rho01 is the excited-ground matrix element <e| rho |g>; Hermiticity is
    automatic because rho10 is its conjugate by construction.
    """
    rho00 = observe_pe(state)
    rho01 = complex(np.sum(state.amp[1] * np.conj(state.amp[0])))
    return make_atom_state(rho00, rho01)


def pe_curve(params: ModelParams, thermal: ThermalParams, times,
             trunc: FockTruncation | None = None) -> np.ndarray:
    """Exact excitation probability over a time grid.

    Each sample propagates the initial state directly to its time with the
    closed-form propagator (no stepping, no error accumulation).
    """
    if trunc is None:
        trunc = FockTruncation.auto(params, thermal)
    init = build_initial_state(params, thermal, trunc)
    return np.array([observe_pe(propagate(init, float(t), params)) for t in np.atleast_1d(times)])


def atom_block_matrices(t: float, params: ModelParams, n_fock: int):
    """The four single-mode operator blocks (u00, u01, u10, u11) of the
    physical propagator as truncated matrices.

    Used to evaluate coherence-series operator expectations directly in the
    Fock basis, independently of the series code.
    """
    l, g = params.l, params.g
    table = EigenvalueTable(params, n_fock - 1)
    half_delta = params.delta / 2.0
    a_n, b_n = _osc_pair(table.sqrt_d, table.d, t, half_delta)
    ap_m, bp_m = _osc_pair(table.sqrt_d_prime, table.d_prime, t, half_delta)
    u00 = np.diag(np.conj(np.asarray(a_n, dtype=complex)))
    u11 = np.diag(np.asarray(ap_m, dtype=complex))
    u01 = np.zeros((n_fock, n_fock), dtype=complex)
    u10 = np.zeros((n_fock, n_fock), dtype=complex)
    ncpl = n_fock - l
    if ncpl > 0:
        nn = np.arange(ncpl, dtype=float)
        beta = np.sqrt(np.prod(nn[:, None] + np.arange(1, l + 1)[None, :], axis=1))
        rows = np.arange(ncpl)
        u01[rows, rows + l] = -1j * g * beta * np.asarray(b_n, dtype=float)[:ncpl]
        u10[rows + l, rows] = -1j * g * beta * np.asarray(bp_m, dtype=float)[rows + l]
    return u00, u01, u10, u11


def apply_free_phase(state: DoubledFockState, t: float, params: ModelParams) -> DoubledFockState:
    """Multiply in the free-evolution phase omega [l (f - f~) + (n - n~)].

    It commutes with the interaction propagator and only rotates phases, so
    every observable computed here (P_e, |rho01|, the coherence) is unchanged;
    exposed to let tests assert exactly that.
    """
    n = state.trunc.n_fock
    w = params.omega
    phase_n = np.exp(-1j * w * t * np.arange(n))
    f_phase = np.exp(-1j * w * t * params.l * np.arange(2))
    amp = (state.amp
           * f_phase[:, None, None, None]
           * np.conj(f_phase)[None, :, None, None]
           * phase_n[None, None, :, None]
           * np.conj(phase_n)[None, None, None, :])
    return DoubledFockState(amp=amp, trunc=state.trunc)
