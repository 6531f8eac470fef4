import pytest

from oldroyd_lab import ModelParams

# Canonical dissipation settings: diffusive/inviscid, viscous/non-diffusive,
# and mixed, all at unit coupling.
PARAM_SETS = {
    "case-I": ModelParams(epsilon=0.0, mu=0.5, kappa=1.0, beta=1.0, alpha=1.0),
    "case-II": ModelParams(epsilon=0.5, mu=0.0, kappa=1.0, beta=1.0, alpha=1.0),
    "mixed": ModelParams(epsilon=0.3, mu=0.3, kappa=1.0, beta=1.0, alpha=1.0),
}


@pytest.fixture(params=list(PARAM_SETS), ids=list(PARAM_SETS))
def params(request):
    return PARAM_SETS[request.param]
