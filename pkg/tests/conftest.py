import numpy as np
import pytest

from hypolog import gradest

ACCEPT_SEED = 11
ACCEPT_M_MAX = 4
ACCEPT_POINTS = 2000
ACCEPT_ENSEMBLE = 64


@pytest.fixture(scope="session")
def estimation_context():
    """Shared point sets / projector for the acceptance-scale campaign."""
    return gradest.EstimationContext(ACCEPT_M_MAX, ACCEPT_POINTS, ACCEPT_SEED)


@pytest.fixture(scope="session")
def measured_curve(estimation_context):
    """C(t) on the default 40-point grid at acceptance-scale parameters."""
    grid = gradest.default_time_grid()
    rows = [gradest.estimate_constant(t, ACCEPT_ENSEMBLE, ACCEPT_POINTS,
                                      ACCEPT_M_MAX, ACCEPT_SEED,
                                      context=estimation_context)
            for t in grid]
    return gradest.GradientEstimateCurve(
        times=np.array([r["t"] for r in rows]),
        c_hat=np.array([r["c_hat"] for r in rows]),
        stderr=np.array([r["stderr"] for r in rows]),
        skipped=np.array([r["skipped"] for r in rows]),
        ensemble_size=ACCEPT_ENSEMBLE, points=ACCEPT_POINTS,
        m_max=ACCEPT_M_MAX, seed=ACCEPT_SEED)


@pytest.fixture(scope="session")
def certified_constant(estimation_context):
    """Certified C_hat at arbitrary t, backed by the shared context."""
    cache = {}

    def get(t: float) -> float:
        if t not in cache:
            cache[t] = gradest.estimate_constant(
                t, ACCEPT_ENSEMBLE, ACCEPT_POINTS, ACCEPT_M_MAX, ACCEPT_SEED,
                context=estimation_context)["c_hat"]
        return cache[t]

    return get
