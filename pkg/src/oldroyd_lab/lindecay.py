"""Whole-space linear decay rates by frequency quadrature.

The linear semigroup norms

    ||grad^k u_L(t)||^2 = int |xi|^{2k} |u_hat(xi, t)|^2 dxi

are evaluated with a composite Gauss-Legendre radial rule (panels doubling
outward from the integrand's Gaussian core, split exactly at r = R) crossed
with a product spherical rule (Gauss-Legendre in the polar cosine, uniform
azimuth). Log-log fits of the resulting series against (1+t) read off the
decay exponents; lower-rate checks test that the compensated envelope
norm(t)*(1+t)^{-target} has a positive infimum.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    HypothesisViolated,
    QuadratureNotConverged,
    WindowTooNarrow,
)
from .model import ModelParams, derive_constants
from .symbols import matrix_to_sym6, propagate_utau_arrays

__all__ = [
    "InitialSpec",
    "QuadSpec",
    "DecaySeries",
    "ExponentFit",
    "linear_norm",
    "norms_at_time",
    "decay_series",
    "fit_exponent",
    "lower_rate_check",
    "target_exponent",
    "write_series_csv",
]

U_ORDERS = (0, 1, 2, 3)
TAU_ORDERS = (0, 1, 2)


@dataclass(frozen=True)
class InitialSpec:
    """Frequency-space initial data built from a radial Gaussian profile.

    u_hat0(xi)   = P(xi) a / |P(xi) a| * phi(r)   (unit-normalized, so
                   |u_hat0| = phi(r) and the low-frequency infimum
                   hypothesis holds with constant c0*exp(-R^2/w^2))
    tau_hat0(xi) = T * phi(r) for a fixed symmetric template T

    phi(r) = c0 * exp(-(r/w)^2). On the singular ray xi || a the projected
    direction is undefined; nodes exactly on the ray take the limit 0.
    """

    c0: float = 1.0
    width: float = 1.0
    u_ref: tuple = (0.0, 0.0, 1.0)
    tau_template: tuple = ((1.0, 0.0, 0.0), (0.0, -1.0, 0.0), (0.0, 0.0, 0.0))
    tau_scale: float = 1.0 / math.sqrt(2.0)
    which: str = "both"  # 'u-only' | 'tau-only' | 'both'

    def profile(self, r: np.ndarray) -> np.ndarray:
        return self.c0 * np.exp(-((r / self.width) ** 2))

    def evaluate(self, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (u_hat0, tau_hat0) at nodes xi with shape (..., 3)."""
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(xi, axis=-1)
        phi = self.profile(r)
        u0 = np.zeros(xi.shape, dtype=complex)
        if self.which in ("u-only", "both"):
            a = np.asarray(self.u_ref, dtype=float)
            r2 = np.maximum(r * r, 1e-300)
            proj = a - xi * (xi @ a / r2)[..., None]
            mag = np.linalg.norm(proj, axis=-1)
            safe = np.maximum(mag, 1e-300)
            u0 = np.where(mag[..., None] > 0.0,
                          proj / safe[..., None] * phi[..., None], 0.0)
        tau0 = np.zeros(xi.shape[:-1] + (6,), dtype=complex)
        if self.which in ("tau-only", "both"):
            template = matrix_to_sym6(np.asarray(self.tau_template, dtype=float))
            tau0 = self.tau_scale * template * phi[..., None]
        return u0, tau0


@dataclass(frozen=True)
class QuadSpec:
    radial_nodes: int = 32      # Gauss-Legendre nodes per radial panel
    polar_nodes: int = 16       # Gauss-Legendre nodes in cos(theta)
    azimuth_nodes: int = 32     # uniform nodes in phi
    amplitude_cutoff: float = 1e-18  # radial truncation threshold on phi^2


def _radial_rule(t: float, params: ModelParams, init: InitialSpec,
                 quad: QuadSpec) -> tuple[np.ndarray, np.ndarray]:
    """Panelized Gauss-Legendre nodes and weights on (0, r_max].

    Panels double outward from the Gaussian core scale of the integrand
    (the narrower of the profile width and the kernel width 1/sqrt(theta t)),
    with an exact split at r = R. r_max truncates where phi^2 falls below
    the amplitude cutoff.
    """
    dc = derive_constants(params)
    r_max = init.width * math.sqrt(-0.5 * math.log(quad.amplitude_cutoff))
    core = min(init.width, 1.0 / math.sqrt(1.0 + 2.0 * dc.theta * t))
    edges = {r_max, min(dc.R, r_max)}
    s = core
    while s < r_max:
        edges.add(s)
        s *= 2.0
    edges = np.concatenate([[0.0], np.sort(np.array(sorted(edges)))])
    base_x, base_w = np.polynomial.legendre.leggauss(quad.radial_nodes)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (base_x + 1.0))
        weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def _angular_rule(quad: QuadSpec) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions (M, 3) and weights summing to 4*pi."""
    mu, w_mu = np.polynomial.legendre.leggauss(quad.polar_nodes)
    phi = 2.0 * math.pi * np.arange(quad.azimuth_nodes) / quad.azimuth_nodes
    w_phi = 2.0 * math.pi / quad.azimuth_nodes
    sin_th = np.sqrt(1.0 - mu * mu)
    d = np.stack([
        np.outer(sin_th, np.cos(phi)),
        np.outer(sin_th, np.sin(phi)),
        np.outer(mu, np.ones_like(phi)),
    ], axis=-1).reshape(-1, 3)
    w = (w_mu[:, None] * w_phi * np.ones_like(phi)).reshape(-1)
    return d, w


def _norms_once(t: float, init: InitialSpec, params: ModelParams,
                quad: QuadSpec) -> dict:
    r_nodes, r_w = _radial_rule(t, params, init, quad)
    dirs, d_w = _angular_rule(quad)
    xi = r_nodes[:, None, None] * dirs[None, :, :]      # (Nr, Na, 3)
    u0, tau0 = init.evaluate(xi)
    u, tau = propagate_utau_arrays(xi, u0, tau0, t, params)
    # Off-diagonal tensor entries appear twice in the Frobenius norm.
    tau_w = np.array([1.0, 2.0, 2.0, 1.0, 2.0, 1.0])
    u_density = np.sum(np.abs(u) ** 2, axis=-1)
    tau_density = np.sum(tau_w * np.abs(tau) ** 2, axis=-1)
    shell_w = (r_w * r_nodes**2)[:, None] * d_w[None, :]
    out = {}
    for k in U_ORDERS:
        mult = r_nodes[:, None] ** (2 * k)
        out[("u", k)] = math.sqrt(float(np.sum(shell_w * mult * u_density)))
    for k in TAU_ORDERS:
        mult = r_nodes[:, None] ** (2 * k)
        out[("tau", k)] = math.sqrt(float(np.sum(shell_w * mult * tau_density)))
    return out


def norms_at_time(t: float, init: InitialSpec, params: ModelParams,
                  quad: QuadSpec | None = None, *,
                  check_convergence: bool = False) -> dict:
    """All (field, k) norms of the linear flow at time t.

    With check_convergence, recomputes with doubled radial panels and
    raises QuadratureNotConverged on relative drift above 1e-6.
    """
    quad = quad or QuadSpec()
    out = _norms_once(t, init, params, quad)
    if check_convergence:
        fine = _norms_once(
            t, init, params,
            QuadSpec(2 * quad.radial_nodes, quad.polar_nodes,
                     quad.azimuth_nodes, quad.amplitude_cutoff))
        for key, v in out.items():
            ref = fine[key]
            if abs(v - ref) > 1e-6 * max(ref, 1e-300):
                raise QuadratureNotConverged(
                    f"{key} at t={t}: {v!r} vs refined {ref!r}")
    return out


def linear_norm(k: int, t: float, field: str, init: InitialSpec,
                params: ModelParams, quad: QuadSpec | None = None, *,
                check_convergence: bool = False) -> float:
    """One Plancherel norm ||grad^k field(t)||_{L^2} of the linear flow."""
    return norms_at_time(t, init, params, quad,
                         check_convergence=check_convergence)[(field, k)]


@dataclass
class DecaySeries:
    times: np.ndarray                  # (T,)
    u_norms: np.ndarray                # (T, 4), k = 0..3
    tau_norms: np.ndarray              # (T, 3), k = 0..2
    params: ModelParams | None = None
    init: InitialSpec | None = None
    quad: QuadSpec | None = None
    extra: dict = field(default_factory=dict)

    def norm(self, fieldname: str, k: int) -> np.ndarray:
        if fieldname == "u":
            return self.u_norms[:, k]
        if fieldname == "tau":
            return self.tau_norms[:, k]
        raise KeyError(fieldname)


def decay_series(init: InitialSpec, params: ModelParams, time_grid,
                 quad: QuadSpec | None = None) -> DecaySeries:
    """Tabulate all linear norms over a (log-spaced) time grid."""
    quad = quad or QuadSpec()
    times = np.asarray(time_grid, dtype=float)
    if times.size == 0:
        raise WindowTooNarrow("empty time grid")
    u_norms = np.empty((times.size, len(U_ORDERS)))
    tau_norms = np.empty((times.size, len(TAU_ORDERS)))
    for i, t in enumerate(times):
        vals = norms_at_time(float(t), init, params, quad)
        u_norms[i] = [vals[("u", k)] for k in U_ORDERS]
        tau_norms[i] = [vals[("tau", k)] for k in TAU_ORDERS]
    return DecaySeries(times, u_norms, tau_norms, params, init, quad)


def target_exponent(fieldname: str, k: int) -> float:
    """Theoretical log-log decay exponent of ||grad^k field(t)||."""
    if fieldname == "u":
        return -0.75 - 0.5 * k
    if fieldname == "tau":
        return -1.25 - 0.5 * k
    raise KeyError(fieldname)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    window: tuple
    target: float
    pass_: bool

    def to_dict(self) -> dict:
        return {"slope": self.slope, "stderr": self.stderr,
                "window": list(self.window), "target": self.target,
                "pass": self.pass_}


def fit_exponent(series: DecaySeries, fieldname: str, k: int,
                 window: tuple, tolerance: float = 0.05) -> ExponentFit:
    """OLS fit of log(norm) against log(1+t) over the window."""
    t_a, t_b = window
    if t_b / t_a < 100.0:
        raise WindowTooNarrow(f"window ratio {t_b / t_a:.3g} < 100")
    mask = (series.times >= t_a) & (series.times <= t_b)
    if np.count_nonzero(mask) < 3:
        raise WindowTooNarrow("fewer than 3 samples in window")
    x = np.log1p(series.times[mask])
    y = np.log(series.norm(fieldname, k)[mask])
    n = x.size
    design = np.stack([np.ones(n), x], axis=-1)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    sxx = np.sum((x - x.mean()) ** 2)
    dof = max(n - 2, 1)
    stderr = math.sqrt(float(resid @ resid) / dof / sxx)
    slope = float(coef[1])
    target = target_exponent(fieldname, k)
    return ExponentFit(slope, stderr, (t_a, t_b), target,
                       abs(slope - target) <= tolerance)


def lower_rate_check(init: InitialSpec, params: ModelParams, time_grid,
                     quad: QuadSpec | None = None, *,
                     orders: dict | None = None) -> dict:
    """Empirical lower-rate constants c with norm(t) >= c (1+t)^{target}.

    Returns {(field, k): {"c": inf of compensated envelope, "pass": c > 0,
    "stable": refinement agreement}}. Raises HypothesisViolated when the
    initial data cannot satisfy the low-frequency infimum hypothesis.
    """
    if init.which == "tau-only" or init.c0 <= 0.0:
        raise HypothesisViolated(
            "lower-rate check requires u data with positive c0")
    quad = quad or QuadSpec()
    orders = orders or {"u": (0, 1, 2), "tau": (0, 1)}
    series = decay_series(init, params, time_grid, quad)
    fine_quad = QuadSpec(2 * quad.radial_nodes, quad.polar_nodes,
                         quad.azimuth_nodes, quad.amplitude_cutoff)
    fine = decay_series(init, params, time_grid, fine_quad)
    out = {}
    comp = (1.0 + series.times)
    for fieldname, ks in orders.items():
        for k in ks:
            target = target_exponent(fieldname, k)
            env = series.norm(fieldname, k) * comp ** (-target)
            env_fine = fine.norm(fieldname, k) * comp ** (-target)
            c = float(np.min(env))
            c_fine = float(np.min(env_fine))
            stable = abs(c - c_fine) <= 1e-6 * max(c_fine, 1e-300)
            out[(fieldname, k)] = {"c": c, "pass": c > 0.0, "stable": stable}
    return out


def write_series_csv(series: DecaySeries, path) -> None:
    """CSV dump: t,u_k0,u_k1,u_k2,u_k3,tau_k0,tau_k1,tau_k2."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "u_k0", "u_k1", "u_k2", "u_k3",
                         "tau_k0", "tau_k1", "tau_k2"])
        for i, t in enumerate(series.times):
            row = [t, *series.u_norms[i], *series.tau_norms[i]]
            writer.writerow([f"{v:.17g}" for v in row])
