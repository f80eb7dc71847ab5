"""Cross-check suites between the closed forms and the Fock-space oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..correlations import beta_from_theta, g2_from_state, g4_from_state
from ..errors import GaussEntError
from ..gaussian_core import StateClass, ThermalTwoModeState, classify, symplectic_spectrum
from .states import (
    field_moments,
    joint_distribution,
    number_moments,
    ppt_negativity,
    synthesize_state,
)


def is_bona_fide_state(state: ThermalTwoModeState, eps: float = 1e-9) -> bool:
    """The state as given, not merely one of its two moment assignments, is physical."""
    spec = symplectic_spectrum(state)
    return spec.positive_definite and spec.nu_minus >= 1.0 - eps


def random_physical_states(count: int, seed: int = 0, n_range=(0.05, 0.4)):
    """Uniform draws of ``(n1, n2, m_pair, m_coh)`` kept when bona fide."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n1, n2 = rng.uniform(*n_range, size=2)
        pair = rng.uniform(0, math.sqrt(n1 * n2 + min(n1, n2)))
        coh = rng.uniform(0, math.sqrt(n1 * n2))
        state = ThermalTwoModeState(n1, n2, pair, coh)
        if is_bona_fide_state(state):
            out.append(state)
    return out


@dataclass(frozen=True)
class WickResult:
    state: ThermalTwoModeState
    error: float
    tolerance: float
    tail_mass: float
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.error <= self.tolerance


def wick_check(state, cutoff=None, tolerance=1e-6, tail_bound=1e-12, phases=(0.0, 0.0)):
    """Oracle number moments against the Wick forms evaluated on oracle field moments.

    The error is the largest relative deviation among ``g2_12``, ``g4_12`` and
    the single-mode ``g2_i`` (which must equal 2); the allowed error is
    ``max(tolerance, 10 * tail_mass)``.
    """
    try:
        rho = synthesize_state(state, phases, cutoff=cutoff, tail_bound=tail_bound)
    except GaussEntError as exc:
        return WickResult(state, math.inf, tolerance, math.nan, f"{type(exc).__name__}: {exc}")
    fm = field_moments(rho)
    g2, g4, g2_1, g2_2 = number_moments(joint_distribution(rho))
    wick = ThermalTwoModeState(fm["n1"], fm["n2"], abs(fm["pair"]), abs(fm["coh"]))
    err = max(abs(g2 / g2_from_state(wick) - 1), abs(g4 / g4_from_state(wick) - 1),
              abs(g2_1 / 2 - 1), abs(g2_2 / 2 - 1), abs(fm["a1_sq"]), abs(fm["a2_sq"]))
    return WickResult(state, float(err), max(tolerance, 10 * rho.tail_mass), rho.tail_mass)


@dataclass(frozen=True)
class PPTCell:
    n: float
    g2: float
    theta: float
    lambda_minus: float
    min_eigenvalue: float
    message: str = ""

    @property
    def agrees(self) -> bool:
        if self.message:
            return False
        return (self.lambda_minus < 1.0) == (self.min_eigenvalue < 0.0)


def ppt_grid(n: float, resolution: int = 10, cutoff=None, tail_bound=1e-8, border=1e-6,
             g2_range=None, theta_range=(0.0, 1.0)):
    """Sign of ``1 - lambda_-`` against the oracle's partial-transpose spectrum.

    Cells are spread over ``g2 in (1, 2 + 1/n]`` and ``theta in [0, 1]``;
    unphysical cells and cells within ``border`` of ``lambda_- = 1`` are skipped.
    """
    lo, hi = g2_range or (1.0 + 0.5 / (resolution + 1), 2.0 + 1.0 / n)
    cells = []
    for g2 in np.linspace(lo, hi, resolution):
        for theta in np.linspace(*theta_range, resolution):
            b = beta_from_theta(n, n, g2, theta)
            state = ThermalTwoModeState(n, n, b.beta_plus, b.beta_minus)
            if classify(state) is StateClass.UNPHYSICAL:
                continue
            lam = symplectic_spectrum(state).lambda_minus
            if abs(lam - 1.0) < border:
                continue
            try:
                rho = synthesize_state(state, cutoff=cutoff, tail_bound=tail_bound)
                low = ppt_negativity(rho).min_eigenvalue
                cells.append(PPTCell(n, float(g2), float(theta), lam, low))
            except GaussEntError as exc:
                cells.append(PPTCell(n, float(g2), float(theta), lam, math.nan,
                                     f"{type(exc).__name__}: {exc}"))
    return cells
