"""Shared fixtures: one small simulated panel and its sieve fit."""

import numpy as np
import pytest
from hypothesis import settings

from alphasign.basis import SplineConfig, build_design, fit_panel
from alphasign.dgp import AlphaSpec, ErrorScenario, simulate_panel
from alphasign.stat_tests import TestResult

# Result container, not a test case; stop pytest from trying to collect it.
TestResult.__test__ = False

# Property tests run on a single-core box; the default per-example deadline
# is too twitchy there, and a fixed derandomized profile keeps reruns
# byte-for-byte comparable.
settings.register_profile("suite", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def small_sim():
    """Null panel, single-factor design, N=25, T=140."""
    rng = np.random.default_rng(907)
    return simulate_panel(1, ErrorScenario("normal"), AlphaSpec(), 25, 140, rng)


@pytest.fixture(scope="session")
def small_design(small_sim):
    return build_design(small_sim.factors, SplineConfig(2, 3))


@pytest.fixture(scope="session")
def small_fit(small_sim, small_design):
    return fit_panel(small_sim.panel, small_design)
