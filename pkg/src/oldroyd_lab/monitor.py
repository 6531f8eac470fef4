"""Diagnostics evaluated on solver snapshots.

All norms are computed spectrally (Plancherel on the rfft lattice); the
relative-entropy functional and the bilinear-term inequality checks need
pointwise values and go through physical space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotSPD
from .model import ModelParams
from .solver import SpectralState, _SYM_IDX, _phys_fields, leray_project, q_bilinear

__all__ = [
    "sobolev_norms",
    "h3_total",
    "energy_functional",
    "entropy",
    "inequality_checks",
    "MonitorRecord",
    "observe",
]

_TAU_W = np.array([1.0, 2.0, 2.0, 1.0, 2.0, 1.0])


def sobolev_norms(state: SpectralState, max_order: int = 3) -> dict:
    """{(field, k): || Lambda^k field ||_{L^2}} for k = 0..max_order."""
    g = state.grid
    out = {}
    for k in range(max_order + 1):
        u2 = g.norm2(state.u_hat, k)
        tau2 = sum(_TAU_W[c] * g.norm2(state.tau_hat[c], k) for c in range(6))
        out[("u", k)] = math.sqrt(u2)
        out[("tau", k)] = math.sqrt(tau2)
    return out


def h3_total(state: SpectralState) -> float:
    """Squared combined norm ||(u, tau)||_{H^3}^2."""
    norms = sobolev_norms(state)
    return sum(norms[(f, k)] ** 2 for f in ("u", "tau") for k in range(4))


def _sigma_hat(state: SpectralState) -> np.ndarray:
    """sigma_hat_j = i P_{jk} (xi_l / r) tau_hat_{lk}; zero at the zero mode."""
    g = state.grid
    r = np.sqrt(g.r2)
    safe_r = np.where(r == 0.0, 1.0, r)
    khat = g.k / safe_r
    tau_m = state.tau_hat[_SYM_IDX]
    w = np.einsum("l...,lk...->k...", khat, tau_m)
    sigma = 1j * leray_project(w, g)
    sigma[:, r == 0.0] = 0.0
    return sigma


def energy_functional(state: SpectralState, params: ModelParams,
                      eps2: float | None = None) -> float:
    """E = (alpha ||u||_{H^3}^2 + kappa ||tau||_{H^3}^2)/2
         + eps2 * sum_{k=1..3} <Lambda^{k-1} sigma, Lambda^k u>.

    The cross terms use <Lambda^{k-1} sigma, Lambda^k u>
    = Vol/n^6 sum w r^{2k-1} Re(conj(sigma_hat).u_hat).
    """
    if eps2 is None:
        eps2 = min(params.alpha, params.kappa) / 8.0
    g = state.grid
    norms = sobolev_norms(state)
    h3u = sum(norms[("u", k)] ** 2 for k in range(4))
    h3tau = sum(norms[("tau", k)] ** 2 for k in range(4))
    sigma = _sigma_hat(state)
    inner = np.real(np.sum(np.conj(sigma) * state.u_hat, axis=0))
    r = np.sqrt(g.r2)
    cross = 0.0
    for k in (1, 2, 3):
        cross += float(np.sum(g.plancherel_w * r ** (2 * k - 1) * inner))
    cross *= g.volume / g.n**6
    return 0.5 * (params.alpha * h3u + params.kappa * h3tau) + eps2 * cross


def entropy(state: SpectralState) -> float:
    """Relative entropy integral of tr(A - log A - I) with A = tau + I.

    Raises NotSPD if A loses positive definiteness anywhere on the grid.
    """
    g = state.grid
    tau = g.to_phys(state.tau_hat)
    a = np.moveaxis(np.moveaxis(tau[_SYM_IDX], 0, -1), 0, -1)
    eigs = np.linalg.eigvalsh(a)          # eigenvalues e of tau; A has 1 + e
    if np.min(eigs) <= -1.0:
        i = np.unravel_index(np.argmin(eigs[..., 0]), eigs[..., 0].shape)
        raise NotSPD(f"tau + I has eigenvalue {1.0 + np.min(eigs):.3e} at"
                     f" grid point {i}")
    # lam - log(lam) - 1 with lam = 1 + e cancels catastrophically for
    # small stress; evaluate e - log1p(e), with a Taylor branch for tiny e.
    direct = eigs - np.log1p(np.where(np.abs(eigs) < 1e-4, 0.0, eigs))
    series = eigs**2 * (0.5 + eigs * (-1.0 / 3.0 + eigs * 0.25))
    density = np.sum(np.where(np.abs(eigs) < 1e-4, series, direct), axis=-1)
    return float(np.mean(density)) * g.volume


def inequality_checks(state: SpectralState, params: ModelParams) -> dict:
    """L^1 bounds on the quadratic terms against products of L^2 norms.

    Returns {name: (lhs, rhs)}; the 'projected_transport' entry is
    informational (the Leray projector is not an L^1 contraction).
    """
    g = state.grid
    vol = g.volume
    u, tau, grad_u, grad_tau = _phys_fields(state)

    def l1(x):
        return float(np.mean(np.sqrt(np.sum(x * x, axis=tuple(
            range(x.ndim - 3)))))) * vol

    def l2(x):
        return math.sqrt(float(np.mean(np.sum(x * x, axis=tuple(
            range(x.ndim - 3))))) * vol)

    conv_u = np.einsum("j...,ij...->i...", u, grad_u)
    conv_tau = np.einsum("j...,cj...->c...", u, grad_tau)
    w4 = np.sqrt(_TAU_W).reshape(6, 1, 1, 1)
    w5 = np.sqrt(_TAU_W).reshape(6, 1, 1, 1, 1)
    q = q_bilinear(grad_u, tau, params.b) * w4
    c_q = 2.0 * (1.0 + abs(params.b))
    out = {
        "transport_u": l2(u) * l2(grad_u) - l1(conv_u),
        "transport_tau": l2(u) * l2(grad_tau * w5) - l1(conv_tau * w4),
        "rotation_stretching": c_q * l2(grad_u) * l2(tau * w4) - l1(q),
    }
    # Informational only: the Leray projector has no L^1 bound with
    # constant 1, so this pair is reported but never asserted.
    proj = g.to_phys(leray_project(g.to_spec(conv_u), g))
    out["projected_transport_lhs"] = l1(proj)
    out["projected_transport_rhs"] = l2(u) * l2(grad_u)
    return out


@dataclass
class MonitorRecord:
    time: float
    sobolev: dict = field(repr=False)
    h3_total: float = 0.0
    energy_e: float = 0.0
    entropy_value: float = 0.0
    ineq_slack: dict = field(default_factory=dict, repr=False)

    HEADER = ("t,u_k0,u_k1,u_k2,u_k3,tau_k0,tau_k1,tau_k2,"
              "H3_total,E_energy,entropy")

    def row(self) -> list[float]:
        return ([self.time]
                + [self.sobolev[("u", k)] for k in range(4)]
                + [self.sobolev[("tau", k)] for k in range(3)]
                + [self.h3_total, self.energy_e, self.entropy_value])


def observe(state: SpectralState, params: ModelParams,
            eps2: float | None = None) -> MonitorRecord:
    norms = sobolev_norms(state)
    return MonitorRecord(
        time=state.time,
        sobolev=norms,
        h3_total=sum(norms[(f, k)] ** 2
                     for f in ("u", "tau") for k in range(4)),
        energy_e=energy_functional(state, params, eps2),
        entropy_value=entropy(state),
        ineq_slack=inequality_checks(state, params),
    )
