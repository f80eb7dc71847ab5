import math

import pytest
from hypothesis import given, strategies as st

from gaussent.correlations import (
    BetaPair,
    criterion_from_counts,
    g2_from_state,
    g4_from_state,
    g4_from_theta,
    invert_beta,
    observables_from_state,
    theta_from_g,
)
from gaussent.errors import DegenerateError, DomainError, ThetaRangeError
from gaussent.gaussian_core import StateClass, ThermalTwoModeState, apply_loss

from conftest import random_states


def test_g2_examples():
    assert g2_from_state(ThermalTwoModeState.thermal(0.7)) == 1.0
    assert g2_from_state(ThermalTwoModeState.tmsv(1.0)) == pytest.approx(3.0, abs=1e-15)
    s = ThermalTwoModeState(0.5, 0.5, math.sqrt(0.5), math.sqrt(0.1))
    assert g2_from_state(s) == pytest.approx(3.4)
    with pytest.raises(DomainError):
        g2_from_state(ThermalTwoModeState(0.0, 1.0))


def test_g4_examples():
    assert g4_from_state(ThermalTwoModeState.thermal(0.4, 1.2)) == 4.0
    assert g4_from_state(ThermalTwoModeState.tmsv(1.0)) == pytest.approx(52.0, abs=1e-12)
    N, b = 0.6, 0.2
    s = ThermalTwoModeState(1.0, N, math.sqrt(b), math.sqrt(b))
    assert g4_from_state(s) == pytest.approx(4 * (1 + 6 * b * b / N**2 + 8 * b / N))


def test_theta_examples():
    assert theta_from_g(3.0, 52.0) == pytest.approx(0.0, abs=1e-15)
    s = ThermalTwoModeState(0.8, 0.5, 0.3, 0.3)
    assert theta_from_g(g2_from_state(s), g4_from_state(s)) == pytest.approx(1.0, abs=1e-12)
    assert theta_from_g(2.03, g4_from_theta(2.03, 0.5)) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(DegenerateError):
        theta_from_g(1.0, 4.0)


def test_invert_tmsv():
    b = invert_beta(1, 1, 3, 52)
    assert b.beta_plus ** 2 == pytest.approx(2.0, abs=1e-12)
    assert b.beta_minus == pytest.approx(0.0, abs=1e-7)


def test_invert_equal_roots():
    dg = 0.37
    b = invert_beta(0.4, 0.9, 1 + dg, g4_from_theta(1 + dg, 1.0))
    expect = math.sqrt(0.4 * 0.9 * dg / 2)
    assert b.beta_plus == pytest.approx(expect) and b.beta_minus == pytest.approx(expect)


def test_invert_errors():
    with pytest.raises(ThetaRangeError):
        invert_beta(1, 1, 2.0, g4_from_theta(2.0, 1.2))
    with pytest.raises(ThetaRangeError):
        invert_beta(1, 1, 2.0, g4_from_theta(2.0, -0.01))
    # inside tau: clamped
    b = invert_beta(1, 1, 2.0, g4_from_theta(2.0, -1e-10))
    assert b.beta_minus == 0.0
    with pytest.raises(DegenerateError):
        invert_beta(1, 1, 1.0, 4.0)
    assert invert_beta(1, 1, 0.9, 4.0, strict=False) == BetaPair(0.0, 0.0)


def test_beta_pair_order():
    with pytest.raises(DomainError):
        BetaPair(0.1, 0.2)


def test_round_trip_random():
    for s in random_states(300, seed=21):
        b = invert_beta(s.n1, s.n2, g2_from_state(s), g4_from_state(s))
        top = max(s.m_pair, s.m_coh)
        assert b.beta_plus == pytest.approx(top, rel=1e-9, abs=1e-9 * top)
        assert b.beta_minus == pytest.approx(min(s.m_pair, s.m_coh), abs=1e-9 * top)


def test_theta_in_unit_interval():
    for s in random_states(300, seed=22):
        th = theta_from_g(g2_from_state(s), g4_from_state(s))
        assert -1e-12 <= th <= 1 + 1e-12
    assert theta_from_g(*[f(ThermalTwoModeState(1, 2, 0.0, 0.7)) for f in
                          (g2_from_state, g4_from_state)]) == pytest.approx(0, abs=1e-14)


@given(st.floats(0.05, 1.0))
def test_eta_invariance(eta):
    s = ThermalTwoModeState(0.8, 1.3, 0.5, 0.2)
    lossy = apply_loss(s, eta)
    assert g2_from_state(lossy) == pytest.approx(g2_from_state(s), rel=1e-12)
    assert g4_from_state(lossy) == pytest.approx(g4_from_state(s), rel=1e-12)


def test_observables_from_state():
    obs = observables_from_state(ThermalTwoModeState.tmsv(1.0))
    assert obs.cs_ratio == pytest.approx(1.5)
    assert obs.g2_1 == obs.g2_2 == 2.0


def test_criterion_efficiency_example():
    g4 = g4_from_theta(2.03, 0.5)
    sep = criterion_from_counts(0.3, 0.3, 2.03, g4, eta=1.0)
    ent = criterion_from_counts(0.3, 0.3, 2.03, g4, eta=1 / 3)
    assert sep.state_class is StateClass.SEPARABLE
    assert ent.state_class is StateClass.ENTANGLED
    assert sep.identified_pair_moment is None
    assert ent.identified_pair_moment == ent.beta.beta_plus
    assert ent.identified_coherence == ent.beta.beta_minus


def test_criterion_tmsv():
    rep = criterion_from_counts(1, 1, 3, 52)
    assert rep.state_class is StateClass.ENTANGLED
    assert rep.log_negativity == pytest.approx(2.5431, abs=1e-4)


def test_criterion_eta_paths_agree():
    g4 = g4_from_theta(2.2, 0.3)
    a = criterion_from_counts(0.2, 0.3, 2.2, g4, eta=0.4)
    b = criterion_from_counts(0.2 / 0.4, 0.3 / 0.4, 2.2, g4, eta=1.0)
    assert a.state_class is b.state_class
    assert a.spectrum.lambda_minus == pytest.approx(b.spectrum.lambda_minus, rel=1e-12)


def test_criterion_lenient_uncorrelated():
    rep = criterion_from_counts(0.5, 0.5, 0.98, 3.9)
    assert rep.beta == BetaPair(0.0, 0.0)
    assert rep.state_class is StateClass.SEPARABLE
    assert rep.warnings
    with pytest.raises(DegenerateError):
        criterion_from_counts(0.5, 0.5, 0.98, 3.9, strict=True)


def test_criterion_unphysical_no_error():
    rep = criterion_from_counts(0.1, 0.1, 13.0, g4_from_theta(13.0, 0.0))
    assert rep.state_class is StateClass.UNPHYSICAL
    assert math.isnan(rep.log_negativity)


def test_criterion_bad_eta():
    with pytest.raises(DomainError):
        criterion_from_counts(1, 1, 3, 52, eta=0.0)
