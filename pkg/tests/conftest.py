"""Shared fixtures.

The expensive pieces (sampled signals, reference spectra) are cached per
session so the unit files and the acceptance gate do not recompute them.
"""

import numpy as np
import pytest

import fastnft as fn
from fastnft.bench import _warmup


@pytest.fixture(scope="session")
def warm():
    """Compile every numba kernel once, outside any timed region."""
    _warmup()
    return True


@pytest.fixture(scope="session")
def signal_cache():
    """Memoized example signals: get(example_id, d) -> SampledSignal."""
    cache = {}

    def get(example, d):
        key = (str(example), int(d))
        if key not in cache:
            samplers = {
                "1": fn.sample_sech_focusing,
                "2": fn.sample_rational_onepole,
                "3": fn.sample_sech_defocusing,
            }
            cache[key] = samplers[str(example)](int(d))
        return cache[key]

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
