"""Forward maps to number correlations and their inversion.

``g2_12`` only fixes the sum of the squared field moments and ``g4_12`` adds
their product, so the two moments are recovered up to a role ambiguity that the
bona fide condition resolves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import DegenerateError, DomainError, ThetaRangeError
from .gaussian_core import (
    StateClass,
    SymplecticSpectrum,
    ThermalTwoModeState,
    classify_spectrum,
    log_negativity,
    symplectic_spectrum,
)

G2_DEGENERACY = 1e-12
THETA_TOL = 1e-9


@dataclass(frozen=True)
class CorrelationObservables:
    n1: float
    n2: float
    g2_12: float
    g4_12: float
    g2_1: float = 2.0
    g2_2: float = 2.0
    theta: float = math.nan
    cs_ratio: float = math.nan


@dataclass(frozen=True)
class BetaPair:
    beta_plus: float
    beta_minus: float

    def __post_init__(self):
        if not (self.beta_plus >= self.beta_minus >= 0.0):
            raise DomainError(f"need beta_plus >= beta_minus >= 0, got {self}")


@dataclass(frozen=True)
class EntanglementReport:
    observables: CorrelationObservables
    beta: BetaPair
    spectrum: SymplecticSpectrum
    state_class: StateClass
    log_negativity: float
    eta_used: float
    identified_pair_moment: Optional[float] = None
    identified_coherence: Optional[float] = None
    corrected_state: Optional[ThermalTwoModeState] = None
    warnings: tuple = field(default=())


def _product(n1, n2):
    prod = n1 * n2
    if not prod > 0.0:
        raise DomainError(f"populations must both be positive, got n1={n1!r}, n2={n2!r}")
    return prod


def g2_from_state(state: ThermalTwoModeState) -> float:
    prod = _product(state.n1, state.n2)
    return 1.0 + (state.m_pair**2 + state.m_coh**2) / prod


def g4_from_state(state: ThermalTwoModeState) -> float:
    prod = _product(state.n1, state.n2)
    x = g2_from_state(state) - 1.0
    cross = state.m_coh**2 * state.m_pair**2 / prod**2
    return 4.0 * (1.0 + x * x + 4.0 * x + 2.0 * cross)


def g4_from_theta(g2: float, theta: float) -> float:
    """Inverse of :func:`theta_from_g` at fixed ``g2``."""
    x = g2 - 1.0
    return 2.0 * theta * x * x + 4.0 * (1.0 + 4.0 * x + x * x)


def theta_from_g(g2: float, g4: float) -> float:
    x = g2 - 1.0
    if not x > G2_DEGENERACY:
        raise DegenerateError(f"g2_12={g2!r} leaves no cross-correlation to invert")
    return (g4 - 4.0 * (1.0 + 4.0 * x + x * x)) / (2.0 * x * x)


def beta_from_theta(n1: float, n2: float, g2: float, theta: float) -> BetaPair:
    """Field-moment magnitudes for ``theta`` already clamped into [0, 1]."""
    total = _product(n1, n2) * (g2 - 1.0)
    plus_sq = 0.5 * total * (1.0 + math.sqrt(1.0 - theta))
    # beta_+^2 beta_-^2 = total^2 theta / 4, free of cancellation near theta = 0
    minus_sq = 0.25 * total * total * theta / plus_sq if plus_sq > 0 else 0.0
    bp, bm = math.sqrt(plus_sq), math.sqrt(minus_sq)
    return BetaPair(bp, min(bm, bp))


def invert_beta(n1: float, n2: float, g2: float, g4: float, tau: float = THETA_TOL,
                strict: bool = True) -> BetaPair:
    """Solve the two correlation equations for the two moment magnitudes.

    Parameters
    ----------
    tau : float
        Tolerance on theta leaving [0, 1]; values within it are clamped.
    strict : bool
        If False, ``g2 <= 1`` returns zero moments instead of raising.

    Raises
    ------
    ThetaRangeError
        theta outside ``[-tau, 1 + tau]``.
    DegenerateError
        ``g2 <= 1`` in strict mode.
    """
    _product(n1, n2)
    try:
        theta = theta_from_g(g2, g4)
    except DegenerateError:
        if strict:
            raise
        return BetaPair(0.0, 0.0)
    if theta < -tau or theta > 1.0 + tau:
        raise ThetaRangeError(theta, tau)
    return beta_from_theta(n1, n2, g2, min(max(theta, 0.0), 1.0))


def observables_from_state(state: ThermalTwoModeState) -> CorrelationObservables:
    g2 = g2_from_state(state)
    g4 = g4_from_state(state)
    theta = theta_from_g(g2, g4) if g2 - 1.0 > G2_DEGENERACY else math.nan
    return CorrelationObservables(state.n1, state.n2, g2, g4, 2.0, 2.0, theta, g2 / 2.0)


def criterion_from_counts(n1: float, n2: float, g2: float, g4: float, eta: float = 1.0,
                          tau: float = THETA_TOL, strict: bool = False,
                          g2_1: float = 2.0, g2_2: float = 2.0) -> EntanglementReport:
    """Full entanglement criterion from measured populations and correlations.

    Populations are divided by ``eta``; the normalised correlations are
    efficiency independent and used as given.
    """
    if not (0.0 < eta <= 1.0):
        raise DomainError(f"detection efficiency must lie in (0, 1], got {eta!r}")
    n1c, n2c = n1 / eta, n2 / eta
    _product(n1c, n2c)
    warnings = []
    try:
        theta = theta_from_g(g2, g4)
    except DegenerateError:
        if strict:
            raise
        theta = math.nan
        warnings.append("g2_12 <= 1: no cross-correlation, field moments set to zero")
    beta = invert_beta(n1c, n2c, g2, g4, tau=tau, strict=strict)

    # pairing = beta_+ is the assignment with the larger own nu_-; it is the
    # only physical one when the state is entangled
    state = ThermalTwoModeState(n1c, n2c, beta.beta_plus, beta.beta_minus)
    spectrum = symplectic_spectrum(state)
    state_class = classify_spectrum(spectrum)
    if state_class is StateClass.UNPHYSICAL or not spectrum.lambda_minus > 0:
        ln = math.nan
    else:
        ln = log_negativity(spectrum.lambda_minus)

    cs = g2 / math.sqrt(g2_1 * g2_2) if g2_1 > 0 and g2_2 > 0 else math.nan
    observables = CorrelationObservables(n1, n2, g2, g4, g2_1, g2_2, theta, cs)
    entangled = state_class is StateClass.ENTANGLED
    return EntanglementReport(
        observables=observables,
        beta=beta,
        spectrum=spectrum,
        state_class=state_class,
        log_negativity=ln,
        eta_used=eta,
        identified_pair_moment=beta.beta_plus if entangled else None,
        identified_coherence=beta.beta_minus if entangled else None,
        corrected_state=state,
        warnings=tuple(warnings),
    )
