"""Grid verification of the low-frequency symbol bounds.

Upper suite: |g1|, |g2|, |g3| and every entry of the u-sigma block stay
below K*exp(-theta r^2 t) on the ball r <= R. Lower suite: |g1| and |g3|
stay above c1*exp(-eta r^2 t) from the onset time onward, and |g2| obeys
the refined two-term bound c1_tilde*(r^2 exp(-theta r^2 t) + exp(-beta t/2)).
All checks are pointwise kernel evaluations on log-spaced grids; no
interpolation enters.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import GridTooCoarse
from .model import DerivedConstants, ModelParams, derive_constants
from .symbols import discriminant, g_kernels_arrays

__all__ = [
    "BoundReport",
    "verify_upper_bounds",
    "verify_lower_bounds",
    "bound_ratio_grids",
    "verify_discriminant_window",
]

_MIN_GRID = 16
# Lower edge of the log-spaced radial grid, as a fraction of R.
_R_FLOOR = 1e-4


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    grid_spec: tuple           # (r_count, t_count, (r_lo, r_hi), (t_lo, t_hi))
    worst_ratio: float         # max |kernel|/bound (upper) or min (lower)
    worst_point: tuple         # (r, t) attaining worst_ratio
    pass_: bool
    observed_sup: float = float("nan")  # grid sup of |kernel| e^{+theta r^2 t} (upper checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("pass_")
        return d


def _check_grid(r_count: int, t_count: int) -> None:
    if r_count < _MIN_GRID or t_count < _MIN_GRID:
        raise GridTooCoarse(
            f"grid {r_count}x{t_count} below minimum {_MIN_GRID}x{_MIN_GRID}"
        )


def _r_grid(R: float, r_count: int) -> np.ndarray:
    # Log-linspace so that refining r_count -> 2*r_count - 1 nests the grid.
    return np.geomspace(_R_FLOOR * R, R, r_count)


def _report(name, ratios, rg, tg, upper: bool, observed_sup=float("nan")) -> BoundReport:
    idx = np.argmax(ratios) if upper else np.argmin(ratios)
    i, j = np.unravel_index(idx, ratios.shape)
    worst = float(ratios[i, j])
    return BoundReport(
        bound_name=name,
        grid_spec=(len(rg), len(tg), (float(rg[0]), float(rg[-1])),
                   (float(tg[0]), float(tg[-1]))),
        worst_ratio=worst,
        worst_point=(float(rg[i]), float(tg[j])),
        pass_=(worst <= 1.0) if upper else (worst >= 1.0),
        observed_sup=observed_sup,
    )


def _upper_ratio_grids(params: ModelParams, grid_spec, dc: DerivedConstants,
                       k_scale: float):
    """(rg, tg, [(name, ratio grid, observed sup)]) for the upper bounds."""
    r_count, t_count = grid_spec
    _check_grid(r_count, t_count)
    K = dc.K * k_scale
    t_max = 100.0 / dc.theta
    rg = _r_grid(dc.R, r_count)
    tg = np.concatenate([[0.0], np.geomspace(1e-3 / dc.theta, t_max, t_count - 1)])
    r = rg[:, None]
    t = tg[None, :]
    g1, g2, g3 = g_kernels_arrays(r, t, params)
    bound = K * np.exp(-dc.theta * r * r * t)
    envelope = np.exp(dc.theta * r * r * t)

    eps_r2_g1 = params.epsilon * r * r * g1
    entries = np.maximum.reduce([
        np.abs(g3 - eps_r2_g1),
        np.abs(params.kappa * r * g1),
        np.abs(0.5 * params.alpha * r * g1),
        np.abs(g2 + eps_r2_g1),
    ])

    fields = []
    for name, kern in [("upper_g1", np.abs(g1)), ("upper_g2", np.abs(g2)),
                       ("upper_g3", np.abs(g3)),
                       ("upper_usigma_entries", entries)]:
        fields.append((name, kern / bound, float(np.max(kern * envelope))))
    return rg, tg, fields


def verify_upper_bounds(params: ModelParams, grid_spec=(200, 200), *,
                        constants: DerivedConstants | None = None,
                        k_scale: float = 1.0) -> list[BoundReport]:
    """Check the Gaussian upper bound on r in (0, R], t in [0, 100/theta].

    k_scale deliberately rescales K for falsification runs.
    """
    dc = constants or derive_constants(params)
    rg, tg, fields = _upper_ratio_grids(params, grid_spec, dc, k_scale)
    return [_report(name, ratios, rg, tg, upper=True, observed_sup=sup)
            for name, ratios, sup in fields]


def _lower_ratio_grids(params: ModelParams, grid_spec, dc: DerivedConstants,
                       c1_scale: float, onset: float | None):
    """(rg, tg, [(name, ratio grid, upper flag)]) for the lower bounds."""
    r_count, t_count = grid_spec
    _check_grid(r_count, t_count)
    c1 = dc.c1 * c1_scale
    t_start = dc.t1_safe if onset is None else onset
    t_max = 100.0 / dc.theta
    rg = _r_grid(dc.R, r_count)
    tg = np.geomspace(t_start, max(t_max, 2.0 * t_start), t_count)
    tg[0] = t_start
    r = rg[:, None]
    t = tg[None, :]
    g1, g2, g3 = g_kernels_arrays(r, t, params)
    lower = c1 * np.exp(-dc.eta * r * r * t)
    refined = dc.c1_tilde * (r * r * np.exp(-dc.theta * r * r * t)
                             + np.exp(-0.5 * params.beta * t))
    fields = [("lower_g1", np.abs(g1) / lower, False),
              ("lower_g3", np.abs(g3) / lower, False),
              ("refined_g2", np.abs(g2) / refined, True)]
    return rg, tg, fields


def verify_lower_bounds(params: ModelParams, grid_spec=(200, 200), *,
                        constants: DerivedConstants | None = None,
                        c1_scale: float = 1.0,
                        onset: float | None = None) -> list[BoundReport]:
    """Check the kernel lower bounds for t >= t1_safe and the refined g2 bound.

    onset overrides the start time (e.g. the unsafe t1, for probing);
    c1_scale deliberately rescales c1 for falsification runs.
    """
    dc = constants or derive_constants(params)
    rg, tg, fields = _lower_ratio_grids(params, grid_spec, dc, c1_scale, onset)
    return [_report(name, ratios, rg, tg, upper=upper)
            for name, ratios, upper in fields]


def bound_ratio_grids(params: ModelParams, grid_spec=(200, 200), *,
                      constants: DerivedConstants | None = None) -> dict:
    """Dense kernel/bound ratio grids for plotting.

    Returns {bound_name: (r_grid, t_grid, ratio array of shape
    (len(r_grid), len(t_grid)))} for every bound checked by
    verify_upper_bounds and verify_lower_bounds.
    """
    dc = constants or derive_constants(params)
    out = {}
    rg, tg, fields = _upper_ratio_grids(params, grid_spec, dc, 1.0)
    out.update({name: (rg, tg, ratios) for name, ratios, _ in fields})
    rg, tg, fields = _lower_ratio_grids(params, grid_spec, dc, 1.0, None)
    out.update({name: (rg, tg, ratios) for name, ratios, _ in fields})
    return out


def verify_discriminant_window(params: ModelParams, r_count: int = 200, *,
                               constants: DerivedConstants | None = None) -> BoundReport:
    """Check beta^2/2 <= D(r) <= (2R^2+beta)^2 on r in (0, R]."""
    dc = constants or derive_constants(params)
    rg = _r_grid(dc.R, r_count)
    d = discriminant(rg, params)
    lo = 0.5 * params.beta**2
    hi = (2.0 * dc.R**2 + params.beta) ** 2
    # Ratio formulated so that pass <=> worst_ratio <= 1.
    ratios = np.maximum(lo / d, d / hi)[:, None]
    return _report("discriminant_window", ratios, rg, np.array([0.0]), upper=True)
