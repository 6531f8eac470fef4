"""Periodic pseudo-spectral solver driven by the exact mode propagator.

The linear part of each Fourier mode is advanced exactly with the
closed-form u-tau propagator (an exponential integrator: stiffness from
the stress damping and diffusion never limits the step). The quadratic
terms -- transport and the rotation/stretching bilinear form -- are formed
pointwise in physical space with 2/3-rule dealiasing and combined in an
exponential-Heun (predictor-corrector) update:

    U~      = G(dt) [U^n + dt N(U^n)]
    U^{n+1} = G(dt) U^n + (dt/2) [G(dt) N(U^n) + N(U~)]

Only the advective CFL constraint limits dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUp, CflViolation, ConfigError
from .model import ModelParams, validate
from .symbols import g_kernels_arrays

__all__ = [
    "SpectralGrid",
    "SpectralState",
    "RunConfig",
    "leray_project",
    "q_bilinear",
    "nonlinear_rhs",
    "LatticePropagator",
    "cfl_limit",
    "step",
    "run",
    "make_initial_state",
    "linear_flow",
    "dump_state",
    "load_state",
]

_PAIRS = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
_SYM_IDX = [[0, 1, 2], [1, 3, 4], [2, 4, 5]]


@dataclass(frozen=True)
class SpectralGrid:
    """Cubic periodic grid with period 2*pi*box_scale per axis."""

    n: int = 32
    box_scale: float = 1.0
    k: np.ndarray = field(init=False, repr=False)        # (3, n, n, nz)
    r2: np.ndarray = field(init=False, repr=False)       # |k|^2
    dealias_mask: np.ndarray = field(init=False, repr=False)
    plancherel_w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n, L = self.n, self.box_scale
        if n < 4 or (n & (n - 1)) != 0:
            raise ConfigError(f"n must be a power of two >= 4, got {n}")
        idx = np.fft.fftfreq(n, 1.0 / n)                 # integer indices
        idx_z = np.arange(n // 2 + 1, dtype=float)
        ix, iy, iz = np.meshgrid(idx, idx, idx_z, indexing="ij")
        k = np.stack([ix, iy, iz]) / L
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "r2", np.sum(k * k, axis=0))
        cutoff = n / 3.0
        mask = (np.abs(ix) <= cutoff) & (np.abs(iy) <= cutoff) & (np.abs(iz) <= cutoff)
        object.__setattr__(self, "dealias_mask", mask)
        # rfft storage: planes 0 < kz < n/2 represent two conjugate modes.
        w = np.full(n // 2 + 1, 2.0)
        w[0] = 1.0
        if n % 2 == 0:
            w[-1] = 1.0
        object.__setattr__(self, "plancherel_w",
                           np.broadcast_to(w, (n, n, n // 2 + 1)))

    @property
    def volume(self) -> float:
        return (2.0 * math.pi * self.box_scale) ** 3

    @property
    def dx(self) -> float:
        return 2.0 * math.pi * self.box_scale / self.n

    def to_phys(self, f_hat: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(f_hat, s=(self.n,) * 3, axes=(-3, -2, -1))

    def to_spec(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(f, axes=(-3, -2, -1))

    def norm2(self, f_hat: np.ndarray, k_order: int = 0) -> float:
        """Squared L^2(box) norm of all leading components combined."""
        mult = self.plancherel_w * self.r2 ** k_order
        total = np.sum(mult * np.abs(f_hat) ** 2)
        return float(total) * self.volume / self.n**6


@dataclass
class SpectralState:
    grid: SpectralGrid
    u_hat: np.ndarray     # (3, n, n, nz) complex
    tau_hat: np.ndarray   # (6, n, n, nz) complex, (xx,xy,xz,yy,yz,zz)
    time: float = 0.0

    def copy(self) -> "SpectralState":
        return SpectralState(self.grid, self.u_hat.copy(),
                             self.tau_hat.copy(), self.time)

    def tau_weights(self) -> np.ndarray:
        # Frobenius weights for 6-component symmetric storage.
        return np.array([1.0, 2.0, 2.0, 1.0, 2.0, 1.0])

    def max_divergence(self) -> float:
        """Worst |k.u_hat| relative to the largest gradient amplitude."""
        g = self.grid
        div = np.max(np.abs(np.sum(g.k * self.u_hat, axis=0)))
        scale = np.max(np.sqrt(g.r2)
                       * np.sqrt(np.sum(np.abs(self.u_hat) ** 2, axis=0)))
        return float(div / scale) if scale > 0.0 else 0.0


def leray_project(v_hat: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Per mode: v - k (k.v)/|k|^2; the zero mode passes through."""
    r2 = np.where(grid.r2 == 0.0, 1.0, grid.r2)
    kv = np.sum(grid.k * v_hat, axis=0)
    out = v_hat - grid.k * np.where(grid.r2 == 0.0, 0.0, kv / r2)
    return out


def q_bilinear(grad_u: np.ndarray, tau: np.ndarray, b: float) -> np.ndarray:
    """Pointwise Q = Omega tau - tau Omega + b (D tau + tau D).

    grad_u: (3, 3, ...) with grad_u[i, j] = d_j u_i; tau: (6, ...).
    Returns symmetric 6-component storage.
    """
    omega = 0.5 * (grad_u - np.swapaxes(grad_u, 0, 1))
    dsym = 0.5 * (grad_u + np.swapaxes(grad_u, 0, 1))
    tau_m = tau[_SYM_IDX]                                   # (3, 3, ...)
    comm = (np.einsum("ij...,jk...->ik...", omega, tau_m)
            - np.einsum("ij...,jk...->ik...", tau_m, omega))
    if b != 0.0:
        stretch = (np.einsum("ij...,jk...->ik...", dsym, tau_m)
                   + np.einsum("ij...,jk...->ik...", tau_m, dsym))
        comm = comm + b * stretch
    return np.stack([comm[j, k] for j, k in _PAIRS])


def _phys_fields(state: SpectralState):
    g = state.grid
    u = g.to_phys(state.u_hat)
    tau = g.to_phys(state.tau_hat)
    grad_u = g.to_phys(1j * g.k[None, :] * state.u_hat[:, None])
    grad_tau = g.to_phys(1j * g.k[None, :] * state.tau_hat[:, None])
    return u, tau, grad_u, grad_tau


def nonlinear_rhs(state: SpectralState, params: ModelParams):
    """Dealiased spectral nonlinear terms (M1_hat, M2_hat).

    M1 = -P(u.grad u), M2 = -u.grad tau + Q(grad u, tau).
    """
    g = state.grid
    u, tau, grad_u, grad_tau = _phys_fields(state)
    conv_u = np.einsum("j...,ij...->i...", u, grad_u)
    conv_tau = np.einsum("j...,cj...->c...", u, grad_tau)
    q = q_bilinear(grad_u, tau, params.b)
    m1 = leray_project(g.to_spec(-conv_u), g) * g.dealias_mask
    m2 = g.to_spec(q - conv_tau) * g.dealias_mask
    return m1, m2


class LatticePropagator:
    """Cached exact linear propagator G(t) on the full lattice."""

    def __init__(self, grid: SpectralGrid, params: ModelParams, t: float):
        self.grid = grid
        self.params = params
        self.t = float(t)
        r2 = grid.r2
        r = np.sqrt(r2)
        g1, g2, g3 = g_kernels_arrays(r, self.t, params)
        decay = np.exp(-(params.beta + params.mu * r2) * self.t)
        safe_r2 = np.where(r2 == 0.0, 1.0, r2)
        self._g1 = g1
        self._a_uu = g3 - params.epsilon * r2 * g1
        self._decay = decay
        self._coef_fb = np.where(
            r2 == 0.0, 0.0,
            (decay - g2 - params.epsilon * r2 * g1) / safe_r2)
        self._safe_r2 = safe_r2
        self._zero = grid.r2 == 0.0
        self._zero_tau = math.exp(-params.beta * self.t)

    def apply(self, u_hat: np.ndarray, tau_hat: np.ndarray):
        g = self.grid
        p = self.params
        k = g.k
        tau_m = tau_hat[_SYM_IDX]                          # (3, 3, ...)
        w = np.einsum("l...,lp...->p...", k, tau_m)
        kw = np.sum(k * w, axis=0)
        v = w - k * np.where(self._zero, 0.0, kw / self._safe_r2)
        u_new = self._a_uu * u_hat + 1j * p.kappa * self._g1 * v
        comps = []
        for c, (j, kk) in enumerate(_PAIRS):
            dyad = k[kk] * u_hat[j] + k[j] * u_hat[kk]
            feedback = k[kk] * v[j] + k[j] * v[kk]
            comps.append(self._decay * tau_hat[c]
                         + 1j * 0.5 * p.alpha * self._g1 * dyad
                         - self._coef_fb * feedback)
        tau_new = np.stack(comps)
        # Zero mode: mean velocity conserved, mean stress damped.
        u_new[:, self._zero] = u_hat[:, self._zero]
        tau_new[:, self._zero] = tau_hat[:, self._zero] * self._zero_tau
        return u_new, tau_new


def cfl_limit(state: SpectralState) -> float:
    u = state.grid.to_phys(state.u_hat)
    umax = float(np.max(np.sqrt(np.sum(u * u, axis=0))))
    if umax == 0.0:
        return math.inf
    return 0.5 * state.grid.dx / umax


def step(state: SpectralState, dt: float, params: ModelParams,
         propagator: LatticePropagator | None = None) -> SpectralState:
    """One exponential-Heun step; re-projects and keeps tau symmetric."""
    limit = cfl_limit(state)
    if dt > limit:
        raise CflViolation(f"dt={dt} exceeds advective limit {limit:.3g}")
    g = state.grid
    prop = propagator if propagator is not None and propagator.t == dt \
        else LatticePropagator(g, params, dt)
    m1, m2 = nonlinear_rhs(state, params)
    gu, gtau = prop.apply(state.u_hat, state.tau_hat)
    gm1, gm2 = prop.apply(m1, m2)
    # Predictor, then trapezoidal correction of the nonlinearity.
    pred = SpectralState(g, gu + dt * gm1, gtau + dt * gm2, state.time + dt)
    n1, n2 = nonlinear_rhs(pred, params)
    u_new = gu + 0.5 * dt * (gm1 + n1)
    tau_new = gtau + 0.5 * dt * (gm2 + n2)
    u_new = leray_project(u_new, g)
    return SpectralState(g, u_new, tau_new, state.time + dt)


def make_initial_state(grid: SpectralGrid, params: ModelParams, delta: float,
                       seed: int, k_max: int = 2) -> SpectralState:
    """Deterministic band-limited random data with combined H^3 norm delta.

    Low modes (|index| <= k_max) get seeded Gaussian coefficients; u is
    Leray-projected, tau is symmetric by 6-component construction; both
    inherit conjugate symmetry from a physical-space round trip.
    """
    rng = np.random.default_rng(seed)
    n = grid.n
    idx = np.fft.fftfreq(n, 1.0 / n)
    iz = np.arange(n // 2 + 1)
    ix, iy, izz = np.meshgrid(idx, idx, iz, indexing="ij")
    band = ((np.abs(ix) <= k_max) & (np.abs(iy) <= k_max)
            & (np.abs(izz) <= k_max) & (grid.r2 > 0.0))

    def band_limited(count: int) -> np.ndarray:
        raw = (rng.standard_normal((count, n, n, n // 2 + 1))
               + 1j * rng.standard_normal((count, n, n, n // 2 + 1)))
        raw = np.where(band, raw, 0.0)
        # Round trip enforces conjugate symmetry exactly.
        return grid.to_spec(grid.to_phys(raw))

    u_hat = leray_project(band_limited(3), grid)
    tau_hat = band_limited(6)
    h3 = 0.0
    tau_w = np.array([1.0, 2.0, 2.0, 1.0, 2.0, 1.0])
    for k_order in range(4):
        h3 += grid.norm2(u_hat, k_order)
        h3 += sum(tau_w[c] * grid.norm2(tau_hat[c], k_order) for c in range(6))
    scale = delta / math.sqrt(h3) if h3 > 0.0 else 0.0
    return SpectralState(grid, u_hat * scale, tau_hat * scale, 0.0)


def linear_flow(state0: SpectralState, t: float,
                params: ModelParams) -> SpectralState:
    """Exact linear evolution of a snapshot (no nonlinearity)."""
    prop = LatticePropagator(state0.grid, params, t)
    u, tau = prop.apply(state0.u_hat, state0.tau_hat)
    return SpectralState(state0.grid, u, tau, state0.time + t)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    n: int = 32
    box_scale: float = 1.0
    delta: float = 1e-2
    t_end: float = 50.0
    dt_max: float = 0.1
    sample_count: int = 40
    seed: int = 0

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        params = ModelParams.from_dict(doc)
        kwargs = {}
        for key in ("n", "sample_count", "seed"):
            if key in doc:
                kwargs[key] = int(doc[key])
        for key in ("box_scale", "delta", "t_end", "dt_max"):
            if key in doc:
                kwargs[key] = float(doc[key])
        return cls(params=validate(params), **kwargs)


def run(config: RunConfig, *, observer=None):
    """Integrate to t_end; returns (list of snapshot times, final state).

    observer(state) is invoked at t=0 and at each sample time with an
    immutable copy of the state; blow-up (norm above 1e6 x initial)
    raises BlowUp.
    """
    grid = SpectralGrid(config.n, config.box_scale)
    state = make_initial_state(grid, config.params, config.delta, config.seed)
    n_steps = max(1, math.ceil(config.t_end / config.dt_max))
    dt = config.t_end / n_steps
    sample_idx = np.unique(np.round(
        np.geomspace(1, n_steps, min(config.sample_count, n_steps))
    ).astype(int))
    prop = LatticePropagator(grid, config.params, dt)
    initial_norm = math.sqrt(grid.norm2(state.u_hat) +
                             grid.norm2(state.tau_hat)) or 1.0
    times = [0.0]
    if observer is not None:
        observer(state.copy())
    for i in range(1, n_steps + 1):
        state = step(state, dt, config.params, prop)
        if i in sample_idx:
            now = math.sqrt(grid.norm2(state.u_hat) + grid.norm2(state.tau_hat))
            if not math.isfinite(now) or now > 1e6 * initial_norm:
                raise BlowUp(f"norm {now:.3g} at t={state.time:.3g}")
            times.append(state.time)
            if observer is not None:
                observer(state.copy())
    return times, state


_MAGIC = b"OLDB"


def dump_state(state: SpectralState, path) -> None:
    """Flat binary record: header (n, L, component count), then payload of
    interleaved little-endian float64 complex pairs (u then tau)."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        np.array([state.grid.n], dtype="<i8").tofile(fh)
        np.array([state.grid.box_scale, state.time], dtype="<f8").tofile(fh)
        np.array([9], dtype="<i8").tofile(fh)
        payload = np.concatenate([state.u_hat.ravel(), state.tau_hat.ravel()])
        payload.astype("<c16").tofile(fh)


def load_state(path) -> SpectralState:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ConfigError(f"{path}: not a state dump")
        n = int(np.fromfile(fh, dtype="<i8", count=1)[0])
        box_scale, time = np.fromfile(fh, dtype="<f8", count=2)
        count = int(np.fromfile(fh, dtype="<i8", count=1)[0])
        if count != 9:
            raise ConfigError(f"{path}: unexpected component count {count}")
        payload = np.fromfile(fh, dtype="<c16")
    grid = SpectralGrid(n, float(box_scale))
    shape = (n, n, n // 2 + 1)
    per = n * n * (n // 2 + 1)
    u_hat = payload[: 3 * per].reshape((3,) + shape)
    tau_hat = payload[3 * per:].reshape((6,) + shape)
    return SpectralState(grid, u_hat.copy(), tau_hat.copy(), float(time))
