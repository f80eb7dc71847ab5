"""Two-body witnesses, the P_- polynomial and region grids.

The witnesses need only the populations and ``g2_12``: above the entanglement
threshold every consistent ``g4_12`` gives an entangled state, below the
separability threshold every consistent ``g4_12`` gives a separable one.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .correlations import beta_from_theta
from .errors import ConfigError, DiscriminantError, DomainError
from .gaussian_core import (
    StateClass,
    ThermalTwoModeState,
    classify_spectrum,
    log_negativity,
    symplectic_spectrum,
)


class Verdict(str, enum.Enum):
    ENTANGLED = "Entangled"
    SEPARABLE = "Separable"
    INDETERMINATE = "Indeterminate"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class WitnessVerdict:
    verdict: Verdict
    g2_E: float
    g2_S: float
    measured_g2: float

    @property
    def thresholds(self):
        return self.g2_E, self.g2_S


def _positive_pair(n1, n2):
    if not (n1 > 0 and n2 > 0):
        raise DomainError(f"populations must be positive, got n1={n1!r}, n2={n2!r}")
    return n1 * n2


def delta(state: ThermalTwoModeState) -> float:
    prod = _positive_pair(state.n1, state.n2)
    return abs(state.m_pair**2 - state.m_coh**2) / prod


def p_minus(n1: float, n2: float, g2: float, delta: float) -> float:
    """``P_-`` written through ``g2_12`` and ``delta``; negative iff entangled."""
    nn = n1 * n2
    return 16.0 * nn * (
        (1 + n1) * (1 + n2) * (2 - g2)
        + (0.5 - nn) * (g2 - 1)
        + delta * (nn * delta - 0.5)
    )


def p_minus_from_determinants(state: ThermalTwoModeState) -> float:
    """Same polynomial from ``1 + det(sigma) - det A - det B - 2|det C|``."""
    spec = symplectic_spectrum(state)
    return 1.0 + spec.det_sigma - spec.Delta


def cauchy_schwarz_bounds(state: ThermalTwoModeState, rtol: float = 1e-12) -> bool:
    # rtol absorbs rounding on saturated bounds, e.g. sqrt(2)**2 for the n=1 TMSV
    nn = state.n1 * state.n2
    pair_max = nn + min(state.n1, state.n2)
    return (state.m_pair**2 <= pair_max * (1 + rtol)
            and state.m_coh**2 <= nn * (1 + rtol))


def g2_entanglement_threshold(n1: float, n2: float) -> float:
    nn = _positive_pair(n1, n2)
    if nn < 0.5:
        return 2.0 + (0.5 - nn) / (2 * nn + n1 + n2 + 0.5)
    return 2.0


def g2_separability_threshold(n1: float, n2: float) -> float:
    nn = _positive_pair(n1, n2)
    if nn <= 0.25:
        return 2.0
    return 2.0 - (1 - 4 * nn) ** 2 / (8 * nn * (1 + 2 * n1) * (1 + 2 * n2))


def witness_classify(n1: float, n2: float, g2: float) -> WitnessVerdict:
    """Two-body-only verdict.  ``g2 == g2_E`` is Indeterminate (strict test)."""
    g_e = g2_entanglement_threshold(n1, n2)
    g_s = g2_separability_threshold(n1, n2)
    if g2 > g_e:
        verdict = Verdict.ENTANGLED
    elif g2 <= g_s:
        verdict = Verdict.SEPARABLE
    else:
        verdict = Verdict.INDETERMINATE
    return WitnessVerdict(verdict, g_e, g_s, g2)


def cs_ratio(g2_12: float, g2_1: float, g2_2: float) -> float:
    if not (g2_1 > 0 and g2_2 > 0):
        raise DomainError("single-mode g2 must be positive")
    return g2_12 / math.sqrt(g2_1 * g2_2)


# -- region grids ----------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Axes of a region grid.

    ``fix="n"`` sweeps ``x = g2`` over ``x_range`` and ``y = theta`` over
    ``y_range`` at ``n1 = n2 = value``.  ``fix="theta"`` sweeps ``x = n`` and
    ``y = g2`` at fixed theta.  Ranges are inclusive, ``resolution = (nx, ny)``.
    """

    fix: str
    value: float
    x_range: tuple
    y_range: tuple
    resolution: tuple = (101, 101)

    def __post_init__(self):
        if self.fix not in ("n", "theta"):
            raise ConfigError(f"fix must be 'n' or 'theta', got {self.fix!r}")
        for name in ("x_range", "y_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigError(f"{name} must be an increasing finite pair, got {(lo, hi)}")
        nx, ny = self.resolution
        if nx < 1 or ny < 1:
            raise ConfigError(f"resolution must be positive, got {self.resolution}")
        if self.fix == "n" and not self.value > 0:
            raise ConfigError("fixed population must be positive")
        if self.fix == "n" and self.x_range[0] < 1.0:
            raise ConfigError("g2 axis must start at or above 1")
        if self.fix == "theta" and self.x_range[0] <= 0:
            raise ConfigError("population axis must be positive")

    def axes(self):
        nx, ny = self.resolution
        xs = np.linspace(*self.x_range, nx) if nx > 1 else np.array([self.x_range[0]])
        ys = np.linspace(*self.y_range, ny) if ny > 1 else np.array([self.y_range[0]])
        return xs, ys


@dataclass(frozen=True)
class RegionCell:
    index: tuple
    x: float
    y: float
    lambda_minus: float
    log_negativity: float
    state_class: StateClass


def evaluate_point(n: float, g2: float, theta: float, eps: float = 1e-9):
    """``(lambda_minus, log_negativity, class)`` at equal populations ``n``."""
    if not (-eps <= theta <= 1 + eps) or g2 < 1.0:
        return math.nan, math.nan, StateClass.UNPHYSICAL
    theta = min(max(theta, 0.0), 1.0)
    if g2 - 1.0 <= 1e-12:
        beta = (0.0, 0.0)
    else:
        b = beta_from_theta(n, n, g2, theta)
        beta = (b.beta_plus, b.beta_minus)
    try:
        spec = symplectic_spectrum(ThermalTwoModeState(n, n, *beta))
    except DiscriminantError:
        return math.nan, math.nan, StateClass.UNPHYSICAL
    cls = classify_spectrum(spec, eps)
    lam = spec.lambda_minus
    ln = log_negativity(lam) if cls is not StateClass.UNPHYSICAL and lam > 0 else math.nan
    return lam, ln, cls


def worker_count() -> int:
    """Thread cap from ``GE_THREADS`` (0 or unset means automatic)."""
    try:
        requested = int(os.environ.get("GE_THREADS", "0"))
    except ValueError:
        requested = 0
    return requested if requested > 0 else (os.cpu_count() or 1)


def region_grid(spec: GridSpec, workers: int | None = None) -> list:
    """Evaluate every cell of the grid; output is ordered by (ix, iy)."""
    xs, ys = spec.axes()
    jobs = [(ix, iy) for ix in range(len(xs)) for iy in range(len(ys))]

    def cell(job):
        ix, iy = job
        x, y = float(xs[ix]), float(ys[iy])
        if spec.fix == "n":
            lam, ln, cls = evaluate_point(spec.value, x, y)
        else:
            lam, ln, cls = evaluate_point(x, y, spec.value)
        return RegionCell((ix, iy), x, y, lam, ln, cls)

    workers = workers or worker_count()
    if workers <= 1:
        return [cell(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(cell, jobs))
