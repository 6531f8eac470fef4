"""Model parameters, validation, and derived low-frequency constants.

The PDE system couples an incompressible velocity field u with a symmetric
elastic stress tensor tau:

    du/dt + u.grad(u) + grad(p) - epsilon*Lap(u) = kappa*div(tau)
    dtau/dt + u.grad(tau) - mu*Lap(tau) + beta*tau = Q(grad(u), tau) + alpha*D(u)
    div(u) = 0

with Q(G, tau) = Omega*tau - tau*Omega + b*(D*tau + tau*D), where D and Omega
are the symmetric and skew parts of the velocity gradient and b in [-1, 1].

Two admissible parameter regimes:
    Case I:  mu > 0, epsilon >= 0   (diffusive, possibly inviscid)
    Case II: epsilon > 0, mu >= 0   (viscous, possibly non-diffusive)
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import NoDissipation, NonPositiveCoupling, OutOfRange

__all__ = [
    "ModelParams",
    "DerivedConstants",
    "validate",
    "derive_constants",
    "from_nondimensional",
]


@dataclass(frozen=True)
class ModelParams:
    """The five PDE parameters plus the bilinear coefficient b."""

    epsilon: float
    mu: float
    kappa: float
    beta: float
    alpha: float
    b: float = 0.0

    @property
    def case(self) -> str:
        """Which parameter regime applies: 'I', 'II', or 'both'."""
        case_i = self.mu > 0.0
        case_ii = self.epsilon > 0.0
        if case_i and case_ii:
            return "both"
        if case_i:
            return "I"
        if case_ii:
            return "II"
        raise NoDissipation("epsilon = mu = 0: no dissipation mechanism")

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelParams":
        kwargs = {k: float(doc[k]) for k in ("epsilon", "mu", "kappa", "beta", "alpha")}
        kwargs["b"] = float(doc.get("b", 0.0))
        return validate(cls(**kwargs))

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return asdict(self)


def validate(params: ModelParams) -> ModelParams:
    """Check the parameter invariants; return the params unchanged if valid.

    Raises NonPositiveCoupling, NoDissipation, or OutOfRange.
    """
    if not (params.kappa > 0.0 and params.beta > 0.0 and params.alpha > 0.0):
        raise NonPositiveCoupling(
            f"kappa, beta, alpha must be > 0, got "
            f"({params.kappa}, {params.beta}, {params.alpha})"
        )
    if params.epsilon < 0.0 or params.epsilon > 1.0:
        raise OutOfRange(f"epsilon must lie in [0, 1], got {params.epsilon}")
    if params.mu < 0.0 or params.mu > 1.0:
        raise OutOfRange(f"mu must lie in [0, 1], got {params.mu}")
    if params.b < -1.0 or params.b > 1.0:
        raise OutOfRange(f"b must lie in [-1, 1], got {params.b}")
    if params.epsilon == 0.0 and params.mu == 0.0:
        raise NoDissipation("at least one of epsilon, mu must be positive")
    return params


@dataclass(frozen=True)
class DerivedConstants:
    """Low-frequency constants controlling the symbol bounds.

    R        -- radius of the low-frequency ball
    theta    -- Gaussian decay rate of the scalar kernels on |xi| <= R
    K        -- amplitude of the upper bound K*exp(-theta*r^2*t)
    eta      -- Gaussian rate in the kernel lower bounds
    c1       -- amplitude of the kernel lower bounds
    c1_tilde -- amplitude of the refined two-term bound on the g2 kernel
    t1       -- onset time ln(2)/(2R^2+beta) for the lower bounds
    t1_safe  -- conservative onset max(t1, sqrt(2)ln(2)/beta); the gap
                |lambda_+ - lambda_-| >= sqrt(2)beta/2 only guarantees
                (lambda_+ - lambda_-)t >= ln 2 from t1_safe onward
    """

    R: float
    theta: float
    K: float
    eta: float
    c1: float
    c1_tilde: float
    t1: float
    t1_safe: float

    def to_dict(self) -> dict:
        return asdict(self)


def derive_constants(params: ModelParams) -> DerivedConstants:
    """Compute the low-frequency constants from validated parameters.

    Deterministic closed forms; no grid choices enter. The amplitude K is
    assembled from the eigenvalue inequalities: K1 bounds |g1| via the
    spectral gap, Lam bounds |lambda_+| on the ball, and K2 = K3 = 1 + Lam*K1
    bound |g2|, |g3|; the prefactor covers every entry of the u-sigma block.
    """
    validate(params)
    a, k, be = params.alpha, params.kappa, params.beta
    R = min(1.0, be / (2.0 * math.sqrt(2.0 + 2.0 * be + k * a)))
    R2 = R * R
    theta = a * k / (2.0 * R2 + 2.0 * be)
    eta = (2.0 / be) * (R2 + be + 0.5 * a * k)
    t1 = math.log(2.0) / (2.0 * R2 + be)
    t1_safe = max(t1, math.sqrt(2.0) * math.log(2.0) / be)
    c1 = min(1.0 / (2.0 * (2.0 * R2 + be)), 1.0)
    c1_tilde = max(
        2.0 * math.sqrt(2.0) * (2.0 * R2 + be + a * k) / be**2,
        math.sqrt(2.0) * (R2 + be) / be,
    )
    k1 = 2.0 * math.sqrt(2.0) / be
    lam_plus_max = 2.0 * R2 * (R2 + be + 0.5 * a * k) / be
    k23 = 1.0 + lam_plus_max * k1
    prefactor = 1.0 + params.epsilon * R2 + k * R + 0.5 * a * R
    K = prefactor * max(k1, k23)
    return DerivedConstants(
        R=R, theta=theta, K=K, eta=eta, c1=c1, c1_tilde=c1_tilde,
        t1=t1, t1_safe=t1_safe,
    )


def from_nondimensional(Re: float, We: float, omega: float) -> ModelParams:
    """Map (Reynolds, Weissenberg, coupling) to the dimensional parameters.

    Upper-convected case: epsilon = (1-omega)/Re, kappa = 1/Re,
    beta = 1/We, alpha = 2*omega/We, mu = 0, b = 1.
    """
    if Re <= 0.0 or We <= 0.0:
        raise OutOfRange(f"Re and We must be positive, got ({Re}, {We})")
    if not (0.0 < omega < 1.0):
        raise OutOfRange(f"omega must lie in (0, 1), got {omega}")
    return validate(
        ModelParams(
            epsilon=(1.0 - omega) / Re,
            mu=0.0,
            kappa=1.0 / Re,
            beta=1.0 / We,
            alpha=2.0 * omega / We,
            b=1.0,
        )
    )
