import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gaussent.fock_oracle.checks import is_bona_fide_state
from gaussent.gaussian_core import ThermalTwoModeState

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def random_states(count, seed=0, n_range=(0.01, 3.0), physical=True):
    """Random (n1, n2, m_pair, m_coh) inside the Cauchy-Schwarz box."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n1, n2 = rng.uniform(*n_range, size=2)
        pair = rng.uniform(0, math.sqrt(n1 * n2 + min(n1, n2)))
        coh = rng.uniform(0, math.sqrt(n1 * n2))
        st = ThermalTwoModeState(n1, n2, pair, coh)
        if not physical or is_bona_fide_state(st):
            out.append(st)
    return out


@pytest.fixture
def tmsv1():
    return ThermalTwoModeState.tmsv(1.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
