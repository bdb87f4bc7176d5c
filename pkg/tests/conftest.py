import numpy as np
import pytest

from psidyn import ActivationTrial, gen_battery


@pytest.fixture(scope="session")
def full_battery():
    """Default-size battery (5 conditions x 15 trials, 256x128)."""
    return gen_battery(trials_per_condition=15, seed=0)


@pytest.fixture(scope="session")
def small_battery():
    """Reduced battery for fast structural tests (5 x 6 trials, 256x64)."""
    return gen_battery(trials_per_condition=6, t=256, c=64, seed=11)


def make_trial(data, trial_id="t0", condition="custom", **kw) -> ActivationTrial:
    return ActivationTrial(
        trial_id=trial_id, condition=condition, data=np.asarray(data, float), **kw
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
