import numpy as np
import pytest

from lambdapulse import reference_params

# step count used by tests where the asserted tolerance is far above the
# integrator error; keeps the suite fast without touching defaults
FAST_STEPS = 8_000


@pytest.fixture(scope="session")
def ref():
    """Published reference parameter set (raw coefficients)."""
    return reference_params()


@pytest.fixture(scope="session")
def ref_exact():
    """Reference set with a_1, a_2 recomputed for exact endpoint constraints."""
    return reference_params(exact_endpoints=True)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
