"""Closed-form per-mode linear propagators.

Each Fourier mode of the linearized system evolves by a 2x2 companion
structure with eigenvalues lambda_+/- solving

    lambda^2 + [(mu+eps)r^2 + beta]*lambda + r^2*[eps*(mu*r^2+beta) + alpha*kappa/2] = 0.

Three scalar kernels built from the eigenvalues,

    g1 = (e^{l+ t} - e^{l- t}) / (l+ - l-)
    g2 = (l+ e^{l+ t} - l- e^{l- t}) / (l+ - l-)
    g3 = (l+ e^{l- t} - l- e^{l+ t}) / (l+ - l-),

assemble the u-sigma block matrix and the full u-tau propagator. All
kernel functions broadcast over numpy arrays of r and t; the ModeState
operations are thin scalar wrappers. An RK4 oracle integrating the
per-mode ODE directly is provided for verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroFrequency
from .model import ModelParams

__all__ = [
    "EigenPair",
    "GKernels",
    "ModeState",
    "eigenvalues",
    "g_kernels",
    "g_kernels_arrays",
    "propagate_usigma",
    "propagate_utau",
    "propagate_utau_arrays",
    "propagate_zero_mode",
    "tau_to_sigma",
    "ode_oracle",
    "ode_oracle_batch",
]

# Symmetric 3x3 <-> 6-component storage, order (xx, xy, xz, yy, yz, zz).
_SYM_IDX = np.array([[0, 1, 2], [1, 3, 4], [2, 4, 5]])
_PAIRS = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]

# Below this value of |lambda_+ - lambda_-|*t/2 the kernels switch to the
# degenerate Taylor branch; the x^4 series then has error ~x^6/5040 < 1e-16.
_DEGENERATE_X = 1e-2


def sym6_to_matrix(tau6: np.ndarray) -> np.ndarray:
    """Expand (..., 6) symmetric storage to a (..., 3, 3) matrix."""
    return np.asarray(tau6)[..., _SYM_IDX]


def matrix_to_sym6(m: np.ndarray) -> np.ndarray:
    """Collapse a (..., 3, 3) symmetric matrix to (..., 6) storage."""
    m = np.asarray(m)
    return np.stack([m[..., j, k] for j, k in _PAIRS], axis=-1)


def _char_coeffs(r2, params: ModelParams):
    """Coefficients (s, p) with lambda^2 + s*lambda + p = 0."""
    s = (params.mu + params.epsilon) * r2 + params.beta
    p = r2 * (params.epsilon * (params.mu * r2 + params.beta)
              + 0.5 * params.alpha * params.kappa)
    return s, p


def discriminant(r, params: ModelParams):
    r2 = np.asarray(r, dtype=float) ** 2
    s, p = _char_coeffs(r2, params)
    return s * s - 4.0 * p


def _lambda_pm(r, params: ModelParams):
    """Both roots as complex arrays, cancellation-free for lambda_+.

    For a non-negative discriminant the small root is evaluated in the
    rationalized form lambda_+ = -2p / (s + sqrt(D)), which avoids the
    subtractive loss of (-s + sqrt(D))/2 at small r.
    """
    r2 = np.asarray(r, dtype=float) ** 2
    s, p = _char_coeffs(r2, params)
    d = s * s - 4.0 * p
    sqrt_d = np.sqrt(np.asarray(d, dtype=complex))
    denom = s + np.where(d >= 0.0, np.real(sqrt_d), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_plus_real = np.where(p == 0.0, 0.0, -2.0 * p / np.where(denom == 0.0, 1.0, denom))
    lam_plus = np.where(d >= 0.0, lam_plus_real + 0.0j, (-s + sqrt_d) / 2.0)
    lam_minus = np.where(d >= 0.0, -s - lam_plus_real + 0.0j, (-s - sqrt_d) / 2.0)
    return lam_plus, lam_minus, d


@dataclass(frozen=True)
class EigenPair:
    lambda_plus: complex
    lambda_minus: complex
    discriminant: float
    regime: str  # 'distinct-real' | 'near-degenerate' | 'oscillatory'


def eigenvalues(r: float, params: ModelParams) -> EigenPair:
    """Both characteristic roots at radius r with a regime tag."""
    lam_p, lam_m, d = _lambda_pm(float(r), params)
    d = float(d)
    s, p = _char_coeffs(float(r) ** 2, params)
    scale = s * s + 4.0 * abs(p)
    if d < 0.0:
        regime = "oscillatory"
    elif d <= 1e-12 * scale:
        regime = "near-degenerate"
    else:
        regime = "distinct-real"
    return EigenPair(complex(lam_p), complex(lam_m), d, regime)


@dataclass(frozen=True)
class GKernels:
    g1: float
    g2: float
    g3: float


def _kernels_complex(lam_p, lam_m, t):
    """Kernels from complex eigenvalue arrays; returns complex arrays.

    Uses the mean/gap variables lb = (l+ + l-)/2, x = (l+ - l-)*t/2:

        g1 = t e^{lb t} sinh(x)/x
        g2 = e^{lb t} (cosh(x) + lb t sinh(x)/x)
        g3 = e^{lb t} (cosh(x) - lb t sinh(x)/x)

    and a Taylor branch in sinh(x)/x, cosh(x) for |x| below the switch
    point, which removes the cancellation at the discriminant root.
    Exact exponentials keep every factor bounded (Re lambda <= 0), so
    large-gap evaluation is computed from e^{l+- t} directly.
    """
    t = np.asarray(t, dtype=float)
    lam_bar = 0.5 * (lam_p + lam_m)
    x = 0.5 * (lam_p - lam_m) * t
    small = np.abs(x) < _DEGENERATE_X

    # Direct branch: no overflow since Re(lambda_+-) <= 0.
    ep = np.exp(lam_p * t)
    em = np.exp(lam_m * t)
    delta = lam_p - lam_m
    safe_delta = np.where(delta == 0.0, 1.0, delta)
    g1_direct = (ep - em) / safe_delta
    g2_direct = (lam_p * ep - lam_m * em) / safe_delta
    g3_direct = (lam_p * em - lam_m * ep) / safe_delta

    # Degenerate branch: series in x around the double root.
    x2 = x * x
    sinhc = 1.0 + x2 / 6.0 + x2 * x2 / 120.0
    coshx = 1.0 + x2 / 2.0 + x2 * x2 / 24.0
    ebar = np.exp(lam_bar * t)
    g1_series = t * ebar * sinhc
    g2_series = ebar * (coshx + lam_bar * t * sinhc)
    g3_series = ebar * (coshx - lam_bar * t * sinhc)

    g1 = np.where(small, g1_series, g1_direct)
    g2 = np.where(small, g2_series, g2_direct)
    g3 = np.where(small, g3_series, g3_direct)
    return g1, g2, g3


def _require_real(z, scale, what: str):
    z = np.asarray(z)
    # Oscillatory g1 crosses zero, so the residue is measured against the
    # kernel's natural magnitude scale, not |z| alone.
    bad = np.abs(z.imag) > 1e-12 * (np.abs(z) + scale)
    if np.any(bad):
        raise FloatingPointError(f"{what}: imaginary residue beyond tolerance")
    return z.real


def g_kernels_arrays(r, t, params: ModelParams):
    """Kernels (g1, g2, g3) broadcast over arrays of r >= 0 and t >= 0.

    The kernels are symmetric functions of the eigenvalue pair, hence
    real; the imaginary residue of the complex evaluation is asserted
    rather than silently dropped.
    """
    lam_p, lam_m, _ = _lambda_pm(r, params)
    g1, g2, g3 = _kernels_complex(lam_p, lam_m, t)
    t_arr = np.asarray(t, dtype=float)
    envelope = np.exp(0.5 * np.real(lam_p + lam_m) * t_arr) * (1.0 + t_arr)
    return (
        _require_real(g1, envelope, "g1"),
        _require_real(g2, envelope, "g2"),
        _require_real(g3, envelope, "g3"),
    )


def g_kernels(r: float, t: float, params: ModelParams) -> GKernels:
    g1, g2, g3 = g_kernels_arrays(float(r), float(t), params)
    return GKernels(float(g1), float(g2), float(g3))


@dataclass(frozen=True)
class ModeState:
    """One Fourier mode: wave vector, velocity, and symmetric stress.

    tau_hat uses 6-component storage (xx, xy, xz, yy, yz, zz), so the
    tensor is symmetric by construction.
    """

    xi: np.ndarray          # (3,) real
    u_hat: np.ndarray       # (3,) complex
    tau_hat: np.ndarray     # (6,) complex

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))
        object.__setattr__(self, "u_hat", np.asarray(self.u_hat, dtype=complex))
        object.__setattr__(self, "tau_hat", np.asarray(self.tau_hat, dtype=complex))

    @property
    def r(self) -> float:
        return float(np.linalg.norm(self.xi))

    def tau_matrix(self) -> np.ndarray:
        return sym6_to_matrix(self.tau_hat)


def propagate_usigma(xi, t, u_hat0, sigma_hat0, params: ModelParams):
    """Apply the 2x2 scalar u-sigma block componentwise.

    [[g3 - eps r^2 g1,  kappa r g1   ],
     [-(alpha/2) r g1,  g2 + eps r^2 g1]]
    """
    xi = np.asarray(xi, dtype=float)
    r = np.linalg.norm(xi)
    r2 = r * r
    g1, g2, g3 = g_kernels_arrays(r, t, params)
    u0 = np.asarray(u_hat0, dtype=complex)
    s0 = np.asarray(sigma_hat0, dtype=complex)
    a11 = g3 - params.epsilon * r2 * g1
    a12 = params.kappa * r * g1
    a21 = -0.5 * params.alpha * r * g1
    a22 = g2 + params.epsilon * r2 * g1
    return a11 * u0 + a12 * s0, a21 * u0 + a22 * s0


def propagate_utau_arrays(xi, u0, tau0, t, params: ModelParams):
    """Vectorized u-tau propagator.

    xi: (..., 3) real, u0: (..., 3) complex, tau0: (..., 6) complex,
    t: scalar or broadcastable to (...). Requires r > 0 everywhere.
    Returns (u, tau) with the same shapes as (u0, tau0).
    """
    xi = np.asarray(xi, dtype=float)
    u0 = np.asarray(u0, dtype=complex)
    tau0 = np.asarray(tau0, dtype=complex)
    r2 = np.sum(xi * xi, axis=-1)
    if np.any(r2 == 0.0):
        raise ZeroFrequency("propagate_utau requires xi != 0")
    r = np.sqrt(r2)
    g1, g2, g3 = g_kernels_arrays(r, t, params)
    t_arr = np.asarray(t, dtype=float)
    decay = np.exp(-(params.beta + params.mu * r2) * t_arr)

    tau_m = sym6_to_matrix(tau0)                      # (..., 3, 3)
    w = np.einsum("...l,...lp->...p", xi, tau_m)      # xi . tau
    v = w - xi * (np.sum(xi * w, axis=-1) / r2)[..., None]  # Leray-projected

    a_uu = (g3 - params.epsilon * r2 * g1)[..., None]
    u = a_uu * u0 + 1j * params.kappa * g1[..., None] * v

    coef_fb = (decay - g2 - params.epsilon * r2 * g1) / r2
    comps = []
    for c, (j, k) in enumerate(_PAIRS):
        dyad = xi[..., k] * u0[..., j] + xi[..., j] * u0[..., k]
        feedback = xi[..., k] * v[..., j] + xi[..., j] * v[..., k]
        comps.append(
            decay * tau0[..., c]
            + 1j * 0.5 * params.alpha * g1 * dyad
            - coef_fb * feedback
        )
    tau = np.stack(comps, axis=-1)
    return u, tau


def propagate_utau(mode: ModeState, t: float, params: ModelParams) -> ModeState:
    """Exact linear flow of one mode over time t (xi != 0)."""
    u, tau = propagate_utau_arrays(mode.xi, mode.u_hat, mode.tau_hat, t, params)
    return ModeState(mode.xi, u, tau)


def propagate_zero_mode(u_hat0, tau_hat0, t: float, params: ModelParams):
    """Zero-frequency rule: mean velocity conserved, mean stress damped."""
    u0 = np.asarray(u_hat0, dtype=complex)
    tau0 = np.asarray(tau_hat0, dtype=complex)
    return u0.copy(), tau0 * np.exp(-params.beta * t)


def tau_to_sigma(mode: ModeState) -> np.ndarray:
    """sigma_hat^j = i (delta_jk - xi_j xi_k / r^2) (xi_l / r) tau_hat^{lk}."""
    r = mode.r
    if r == 0.0:
        raise ZeroFrequency("tau_to_sigma requires xi != 0")
    xi = mode.xi
    w = xi @ mode.tau_matrix() / r
    return 1j * (w - xi * (xi @ w) / (r * r))


def _mode_rhs(xi, u, tau_m, params: ModelParams):
    """Right side of the per-mode linear ODE in Fourier variables.

    du/dt  = -eps r^2 u + i kappa P(xi)(xi . tau)
    dtau/dt = -(mu r^2 + beta) tau + i (alpha/2)(xi x u + u x xi)
    """
    r2 = float(xi @ xi)
    w = xi @ tau_m
    if r2 > 0.0:
        w = w - xi * (xi @ w) / r2
    du = -params.epsilon * r2 * u + 1j * params.kappa * w
    dyad = xi[:, None] * u[None, :] + u[:, None] * xi[None, :]
    dtau = -(params.mu * r2 + params.beta) * tau_m + 1j * 0.5 * params.alpha * dyad
    return du, dtau


def ode_oracle(mode: ModeState, t: float, params: ModelParams,
               step_count: int = 4000) -> ModeState:
    """Classical RK4 integration of the per-mode linear system.

    Independent of the closed-form kernels; used only for verification.
    """
    u = mode.u_hat.copy()
    tau_m = mode.tau_matrix().copy()
    xi = mode.xi
    h = float(t) / step_count if step_count > 0 else 0.0
    for _ in range(step_count):
        k1u, k1t = _mode_rhs(xi, u, tau_m, params)
        k2u, k2t = _mode_rhs(xi, u + 0.5 * h * k1u, tau_m + 0.5 * h * k1t, params)
        k3u, k3t = _mode_rhs(xi, u + 0.5 * h * k2u, tau_m + 0.5 * h * k2t, params)
        k4u, k4t = _mode_rhs(xi, u + h * k3u, tau_m + h * k3t, params)
        u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        tau_m = tau_m + (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    return ModeState(xi, u, matrix_to_sym6(tau_m))


def _batch_rhs(xi, u, tau6, params: ModelParams):
    """Vectorized ODE right side for batched modes ((N,3), (N,3), (N,6))."""
    r2 = np.sum(xi * xi, axis=-1)
    tau_m = sym6_to_matrix(tau6)
    w = np.einsum("nl,nlp->np", xi, tau_m)
    proj = np.where(r2[:, None] > 0.0, xi * (np.sum(xi * w, axis=-1)
                    / np.where(r2 == 0.0, 1.0, r2))[:, None], 0.0)
    w = w - proj
    du = -params.epsilon * r2[:, None] * u + 1j * params.kappa * w
    dtau = np.empty_like(tau6)
    for c, (j, k) in enumerate(_PAIRS):
        dtau[:, c] = (
            -(params.mu * r2 + params.beta) * tau6[:, c]
            + 1j * 0.5 * params.alpha * (xi[:, k] * u[:, j] + xi[:, j] * u[:, k])
        )
    return du, dtau


def ode_oracle_batch(xi, u0, tau0, t, params: ModelParams,
                     step_count: int) -> tuple[np.ndarray, np.ndarray]:
    """RK4 over a batch of modes with per-row step h_n = t_n / step_count."""
    xi = np.asarray(xi, dtype=float)
    u = np.array(u0, dtype=complex)
    tau = np.array(tau0, dtype=complex)
    h = (np.asarray(t, dtype=float) / step_count)[:, None]
    for _ in range(step_count):
        k1u, k1t = _batch_rhs(xi, u, tau, params)
        k2u, k2t = _batch_rhs(xi, u + 0.5 * h * k1u, tau + 0.5 * h * k1t, params)
        k3u, k3t = _batch_rhs(xi, u + 0.5 * h * k2u, tau + 0.5 * h * k2t, params)
        k4u, k4t = _batch_rhs(xi, u + h * k3u, tau + h * k3t, params)
        u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        tau = tau + (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    return u, tau
