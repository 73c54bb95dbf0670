"""Cross-validation of the perturbation series against the exact solver.

Every check compares two independent routes to the same quantity: the
closed-form series on one side, direct Fock-basis linear algebra in the
doubled space on the other.  The residual of the second-order series against
the exact solver must shrink like the cube of the Bogoliubov angle; the
twelve coherence series are checked one by one against operator expectations
evaluated with explicit truncated matrices.
"""

from __future__ import annotations

import math

import numpy as np

from . import oracle, perturbation
from .model import ModelParams, ThermalParams, bogoliubov_angles, thermal_from_inv_beta
from .oracle import FockTruncation
from .perturbation import TruncationPolicy

__all__ = ["run_validation_suite", "theta_for_angle", "SLOPE_BOUNDS"]

#: acceptable log-log slope range for the order-cubed residual
SLOPE_BOUNDS = (2.7, 3.3)

#: angle grid for the residual-scaling fits
THETA_GRID = np.geomspace(0.02, 0.2, 7)

#: residuals below this are indistinguishable from truncation noise and are
#: excluded from the scaling fit
RESIDUAL_FLOOR = 1e-12


def theta_for_angle(theta: float, omega: float, omega0: float) -> ThermalParams:
    """ThermalParams with a prescribed bosonic angle.

    Inverts sinh(theta) = [e^(beta omega) - 1]^(-1/2) for beta so the
    fermionic angle stays consistent with the same temperature.
    """
    if theta == 0:
        return bogoliubov_angles(math.inf, omega, omega0)
    beta = math.log1p(1.0 / math.sinh(theta) ** 2) / omega
    return bogoliubov_angles(beta, omega, omega0)


def _default_params(l: int, alpha: complex) -> ModelParams:
    return ModelParams(l=l, g=1.0, omega0=1.0, omega=1.0, alpha=alpha)


def _fit_slope(theta: np.ndarray, residual: np.ndarray):
    mask = residual > RESIDUAL_FLOOR
    if mask.sum() < 3:
        return None
    coeffs = np.polyfit(np.log(theta[mask]), np.log(residual[mask]), 1)
    return float(coeffs[0])


def _check_theta_scaling(params: ModelParams, t_values, trunc: TruncationPolicy) -> list[dict]:
    checks = []
    ftrunc = FockTruncation.auto(params, theta_for_angle(float(THETA_GRID[-1]),
                                                         params.omega, params.omega0))
    for t in t_values:
        pe_res = []
        rho_res = []
        conv_res = []
        for th in THETA_GRID:
            thermal = theta_for_angle(float(th), params.omega, params.omega0)
            state = oracle.propagate(oracle.build_initial_state(params, thermal, ftrunc),
                                     float(t), params)
            exact = oracle.reduce_atom(state)
            pe_res.append(abs(perturbation.pe_thermal(float(t), params, thermal, trunc)
                              - exact.rho00))
            series01 = perturbation.rho01_thermal(float(t), params, thermal, trunc)
            rho_res.append(abs(abs(series01) - abs(exact.rho01)))
            # the series expands the conjugate orientation of <e|rho|g>; the
            # full complex residual in that orientation must stay cubic-small
            conv_res.append(abs(series01 - np.conj(exact.rho01)))
        for name, res in (("pe", pe_res), ("rho01", rho_res)):
            slope = _fit_slope(THETA_GRID, np.asarray(res))
            checks.append({
                "name": f"theta_scaling_{name}[l={params.l},t={t}]",
                "passed": slope is not None and SLOPE_BOUNDS[0] <= slope <= SLOPE_BOUNDS[1],
                "slope": slope,
                "max_residual": float(np.max(res)),
            })
        ratio = float(conv_res[0] / THETA_GRID[0] ** 3)
        checks.append({
            "name": f"rho01_conjugate_orientation[l={params.l},t={t}]",
            "passed": ratio < 100.0,
            "residual_over_theta3": ratio,
        })
    return checks


def _check_tilde_series(params: ModelParams, t: float, trunc: TruncationPolicy,
                        n_fock: int, tol: float = 1e-8) -> list[dict]:
    u00, u01, u10, u11 = oracle.atom_block_matrices(t, params, n_fock)
    a = np.diag(np.sqrt(np.arange(1, n_fock, dtype=float)), 1).astype(complex)
    ad = a.T.conj()
    vec = oracle.coherent_state_vector(params.alpha, n_fock)

    def expect(op: np.ndarray) -> complex:
        return complex(vec.conj() @ (op @ vec))

    base = {1: u00.conj().T @ u10, 2: u01.conj().T @ u11}
    sandwiches = {
        0: lambda x: x,
        1: lambda x: a @ x,
        2: lambda x: x @ ad,
        3: lambda x: a @ a @ x,
        4: lambda x: x @ ad @ ad,
        5: lambda x: a @ x @ ad,
    }
    checks = []
    for j in (1, 2):
        for k in range(6):
            series = perturbation.tilde_S(j, k, t, params, trunc)
            direct = expect(sandwiches[k](base[j]))
            err = abs(series - direct)
            checks.append({
                "name": f"tilde_series_vs_fock[j={j},k={k},l={params.l}]",
                "passed": bool(err < tol),
                "error": float(err),
                "tol": tol,
            })
    return checks


def _check_t0_identities(params: ModelParams, trunc: TruncationPolicy) -> list[dict]:
    checks = []
    for inv_beta in (0.0, 0.05, 0.1, 0.2):
        thermal = thermal_from_inv_beta(inv_beta, params)
        pe0 = perturbation.pe_thermal(0.0, params, thermal, trunc)
        rho0 = perturbation.rho01_thermal(0.0, params, thermal, trunc)
        err_pe = abs(pe0 - thermal.sin_atom**2)
        err_rho = abs(rho0)
        checks.append({
            "name": f"t0_identities[l={params.l},1/beta={inv_beta}]",
            "passed": bool(err_pe < 1e-12 and err_rho < 1e-12),
            "pe_error": float(err_pe),
            "rho01_error": float(err_rho),
        })
    return checks


def _check_thermal_states(params: ModelParams, theta: float) -> list[dict]:
    checks = []
    trunc = FockTruncation.auto(params, theta_for_angle(theta, params.omega, params.omega0))

    # reduced boson distribution of the squeezed vacuum follows the
    # geometric law with ratio tanh^2
    tmsv = oracle.two_mode_squeezed_vacuum(theta, trunc)
    dist = np.sum(np.abs(tmsv) ** 2, axis=1)
    ratio = math.tanh(theta) ** 2
    n_half = trunc.n_fock // 2
    expected = (1.0 - ratio) * ratio ** np.arange(n_half)
    err_be = float(np.max(np.abs(dist[:n_half] - expected)))
    checks.append({"name": "bose_einstein_reduced", "passed": err_be < 1e-8,
                   "max_error": err_be})

    # thermal coherent state mean photon number
    phi = oracle.thermal_coherent_state(params.alpha, theta, trunc)
    nbar = float(np.sum(np.arange(trunc.n_fock)[:, None] * np.abs(phi) ** 2))
    target = params.abs_alpha_sq * math.exp(2.0 * theta) + math.sinh(theta) ** 2
    err_n = abs(nbar - target)
    checks.append({"name": "thermal_coherent_mean_photon", "passed": err_n < 1e-6,
                   "error": float(err_n), "mean_photon": nbar})

    # analytic construction against the generator exponential on a small cutoff
    small = FockTruncation(n_fock=30, leak_tol=1e-6)
    alpha_small = params.alpha / max(abs(params.alpha), 1.0)
    direct = oracle.thermal_coherent_state(alpha_small, theta, small)
    via_gen = oracle.thermal_coherent_state_via_generator(alpha_small, theta, small)
    overlap = abs(np.vdot(via_gen, direct))
    checks.append({"name": "thermal_state_routes_overlap",
                   "passed": bool(overlap > 1.0 - 1e-8), "overlap": float(overlap)})

    # fermionic reduced weights follow the Fermi-Dirac law exactly
    thermal = theta_for_angle(theta, params.omega, params.omega0)
    state = oracle.build_initial_state(params, thermal, trunc)
    w_excited = float(np.sum(np.abs(state.amp[1]) ** 2))
    w_ground = float(np.sum(np.abs(state.amp[0]) ** 2))
    if math.isinf(thermal.beta):
        fd_e, fd_g = 0.0, 1.0
    else:
        boltz = math.exp(-thermal.beta * params.omega0)
        fd_g = 1.0 / (1.0 + boltz)
        fd_e = boltz / (1.0 + boltz)
    err_fd = max(abs(w_excited - fd_e), abs(w_ground - fd_g))
    checks.append({"name": "fermi_dirac_weights", "passed": err_fd < 1e-12,
                   "max_error": float(err_fd)})

    # unitarity of the closed-form propagation
    drift = 0.0
    for t in (0.5, 5.0, 50.0):
        drift = max(drift, abs(oracle.propagate(state, t, params).norm_sq - 1.0))
    checks.append({"name": "unitarity_drift", "passed": drift < trunc.leak_tol,
                   "max_drift": float(drift)})
    return checks


def _check_zero_temperature_degeneracy(params: ModelParams,
                                       trunc: TruncationPolicy) -> dict:
    thermal = bogoliubov_angles(math.inf, params.omega, params.omega0)
    ftrunc = FockTruncation.auto(params)
    t_grid = np.linspace(0.0, 3.0, 100)
    exact = oracle.pe_curve(params, thermal, t_grid, ftrunc)
    series = perturbation.pe_thermal(t_grid, params, thermal, trunc)
    err = float(np.max(np.abs(exact - series)))
    return {"name": f"zero_temperature_degeneracy[l={params.l}]",
            "passed": err < 1e-9, "max_error": err}


def run_validation_suite(l_values=(1, 2), alpha: complex = 2.0,
                         t_values=(0.5, 1.0)) -> dict:
    """Run every oracle-vs-series check and return a structured report.

    The report is a dict with ``passed`` (overall) and a ``checks`` list of
    per-check records; callers decide how to render it.
    """
    checks: list[dict] = []
    for l in l_values:
        params = _default_params(l, alpha)
        trunc = TruncationPolicy.adaptive(params)
        checks.extend(_check_t0_identities(params, trunc))
        checks.extend(_check_theta_scaling(params, t_values, trunc))
        checks.extend(_check_tilde_series(params, t_values[-1], trunc,
                                          FockTruncation.auto(params).n_fock + 10))
        checks.append(_check_zero_temperature_degeneracy(params, trunc))
    checks.extend(_check_thermal_states(_default_params(2, alpha), theta=0.2))
    # complex amplitude exercises the conjugate-power structure of the series
    cparams = _default_params(2, 1.1 + 0.6j)
    checks.extend(_check_tilde_series(cparams, 0.9, TruncationPolicy.adaptive(cparams),
                                      FockTruncation.auto(cparams).n_fock + 10))
    return {"passed": bool(all(c["passed"] for c in checks)), "checks": checks}
