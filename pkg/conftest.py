import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from epidemics import ControlTarget, SeirParams  # noqa: E402
from global_analysis import GlobalParams  # noqa: E402
from synthesis import GainIntervals, Plant  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: statistical batches over many simulated runs")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# -------------------------
# baseline SEIR setting: delta = eps = 0.2, lam = 1, I0 = 1e-3
# -------------------------
@pytest.fixture
def seir_baseline():
    return SeirParams(beta_lock=0.2, beta_free=0.8, delta=0.2, epsilon=0.2)


@pytest.fixture
def seir_weak_lock():
    return SeirParams(beta_lock=0.21, beta_free=0.8, delta=0.2, epsilon=0.2)


@pytest.fixture
def target_baseline():
    return ControlTarget.first_order(1e-3, 1.0)


@pytest.fixture
def seir_plant():
    return Plant(F=[[-0.2, 0.0], [0.2, -0.2]], g=[1.0, 0.0], H=[0.0, 1.0])


@pytest.fixture
def seir_gains():
    return GainIntervals(0.1, 0.15, 0.6, 0.8)


# -------------------------
# fast sliding line: lam = 10, delta = 0.05, eps = 0.2, gamma_F = 0.065, I0 = 2e-3
# -------------------------
@pytest.fixture
def fast_line_params():
    return GlobalParams(gamma_f=0.065, gamma_l=0.03, delta=0.05, epsilon=0.2, lam=10.0, i0=2e-3)


@pytest.fixture
def baseline_params():
    return GlobalParams(gamma_f=0.8, gamma_l=0.15, delta=0.2, epsilon=0.2, lam=1.0, i0=1e-3)
