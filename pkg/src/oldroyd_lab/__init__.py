"""Numerical laboratory for the 3D diffusive Oldroyd-B system.

Exact Fourier-mode propagators, proof-grade symbol bound verification,
whole-space linear decay rates by quadrature, and a periodic
pseudo-spectral nonlinear solver with energy/entropy monitoring.
"""

from .errors import (
    BlowUp,
    CflViolation,
    ConfigError,
    GridTooCoarse,
    HypothesisViolated,
    NoDissipation,
    NonPositiveCoupling,
    NotSPD,
    OldroydError,
    OutOfRange,
    QuadratureNotConverged,
    WindowTooNarrow,
    ZeroFrequency,
)
from .model import (
    DerivedConstants,
    ModelParams,
    derive_constants,
    from_nondimensional,
    validate,
)
from .symbols import (
    EigenPair,
    GKernels,
    ModeState,
    discriminant,
    eigenvalues,
    g_kernels,
    g_kernels_arrays,
    ode_oracle,
    propagate_usigma,
    propagate_utau,
    propagate_zero_mode,
    tau_to_sigma,
)
from .bounds import (
    BoundReport,
    verify_discriminant_window,
    verify_lower_bounds,
    verify_upper_bounds,
)
from .lindecay import (
    DecaySeries,
    ExponentFit,
    InitialSpec,
    QuadSpec,
    decay_series,
    fit_exponent,
    linear_norm,
    lower_rate_check,
    target_exponent,
    write_series_csv,
)
from .solver import (
    LatticePropagator,
    RunConfig,
    SpectralGrid,
    SpectralState,
    cfl_limit,
    dump_state,
    leray_project,
    linear_flow,
    load_state,
    make_initial_state,
    nonlinear_rhs,
    q_bilinear,
    run,
    step,
)
from .monitor import (
    MonitorRecord,
    energy_functional,
    entropy,
    h3_total,
    inequality_checks,
    observe,
    sobolev_norms,
)

__version__ = "0.1.0"
