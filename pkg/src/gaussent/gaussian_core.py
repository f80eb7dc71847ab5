"""Covariance matrices, symplectic spectra and PPT classification.

The state family is parametrised by the two mean populations and the magnitudes
of the pairing moment <a1 a2> and of the coherence <a1 a2^dag>.  Every
spectral quantity used for classification depends on those four numbers only;
the phases enter :func:`build_covariance` and nothing else.

Covariance convention: basis ``r = (a1, a1^dag, a2, a2^dag)`` and
``sigma_ij = <r_i r_j^dag + r_j^dag r_i>`` so that the vacuum is the identity
and a physical state satisfies ``sigma + K >= 0`` with ``K = diag(1,-1,1,-1)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DiscriminantError, DomainError

EPS = 1e-9
HERMITIAN_TOL = 1e-12
DISCRIMINANT_TOL = 1e-9

#: commutator matrix [r_i, r_j^dag] in the (a1, a1^dag, a2, a2^dag) basis
K_FORM = np.diag([1.0, -1.0, 1.0, -1.0])
#: per-mode swap used by the partial transpose
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])

_L1 = np.array([[1.0, 1.0], [-1.0j, 1.0j]]) / math.sqrt(2.0)
#: maps (a1, a1^dag, a2, a2^dag) to the quadratures (x1, p1, x2, p2)
TO_QUADRATURE = np.kron(np.eye(2), _L1)
OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


class StateClass(str, enum.Enum):
    SEPARABLE = "Separable"
    ENTANGLED = "Entangled"
    UNPHYSICAL = "Unphysical"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ThermalTwoModeState:
    """Zero-mean two-mode Gaussian state with thermal single-mode statistics.

    Attributes
    ----------
    n1, n2 : float
        Mean populations of the two modes.
    m_pair : float
        ``|<a1 a2>|``.
    m_coh : float
        ``|<a1 a2^dag>|``.
    """

    n1: float
    n2: float
    m_pair: float = 0.0
    m_coh: float = 0.0

    def __post_init__(self):
        for name in ("n1", "n2", "m_pair", "m_coh"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise DomainError(f"{name} must be finite and non-negative, got {value!r}")
            object.__setattr__(self, name, value)

    @classmethod
    def tmsv(cls, n: float) -> "ThermalTwoModeState":
        """Two-mode squeezed vacuum with population ``n`` in each mode."""
        return cls(n, n, math.sqrt(n * (n + 1.0)), 0.0)

    @classmethod
    def thermal(cls, n1: float, n2: float | None = None) -> "ThermalTwoModeState":
        return cls(n1, n1 if n2 is None else n2, 0.0, 0.0)

    def swap_modes(self) -> "ThermalTwoModeState":
        return ThermalTwoModeState(self.n2, self.n1, self.m_pair, self.m_coh)

    def swap_roles(self) -> "ThermalTwoModeState":
        """Exchange pairing and coherence, i.e. the partial transpose."""
        return ThermalTwoModeState(self.n1, self.n2, self.m_coh, self.m_pair)


@dataclass(frozen=True)
class CovarianceMatrix:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.shape != (4, 4):
            raise DomainError(f"covariance must be 4x4, got shape {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def A(self):
        return self.entries[:2, :2]

    @property
    def B(self):
        return self.entries[2:, 2:]

    @property
    def C(self):
        return self.entries[:2, 2:]

    def is_hermitian(self, tol=HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T)) <= tol)

    def partial_transpose(self) -> "CovarianceMatrix":
        """Partial transpose on mode 2: swaps a2 and a2^dag."""
        perm = [0, 1, 3, 2]
        return CovarianceMatrix(self.entries[np.ix_(perm, perm)])

    def quadrature(self) -> np.ndarray:
        """Real covariance of (x1, p1, x2, p2), vacuum = identity."""
        V = TO_QUADRATURE @ self.entries @ TO_QUADRATURE.conj().T
        return V.real.copy()

    def __eq__(self, other):
        if not isinstance(other, CovarianceMatrix):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    __hash__ = None


def build_covariance(state: ThermalTwoModeState, phase_pair: float = 0.0,
                     phase_coh: float = 0.0) -> CovarianceMatrix:
    pair = state.m_pair * np.exp(1j * phase_pair)
    coh = state.m_coh * np.exp(1j * phase_coh)
    A = (2 * state.n1 + 1) * np.eye(2)
    B = (2 * state.n2 + 1) * np.eye(2)
    C = 2 * np.array([[coh, pair], [np.conj(pair), np.conj(coh)]])
    return CovarianceMatrix(np.block([[A, C], [C.conj().T, B]]))


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Closed-form symplectic data of a state and of its partial transpose.

    Eigenvalues whose square comes out negative, or whose discriminant is
    negative (``complex_branch``), are stored as NaN; they only arise for
    parameter sets that no physical state realises.  ``positive_definite``
    records whether sigma itself is positive: symplectic eigenvalues above one
    do not imply it, and an indefinite sigma is unphysical for both moment
    assignments.
    """

    nu_minus: float
    nu_plus: float
    nu_tilde_minus: float
    nu_tilde_plus: float
    lambda_minus: float
    lambda_prime_minus: float
    det_sigma: float
    Delta: float
    Delta_prime: float
    Gamma: float
    Gamma_tilde: float
    complex_branch: bool = False
    positive_definite: bool = True


def det_sigma(n1, n2, beta_plus, beta_minus):
    """Determinant of the covariance matrix; symmetric in the two moments."""
    s = (2 * n1 + 1) * (2 * n2 + 1)
    bp2, bm2 = beta_plus**2, beta_minus**2
    return 16 * (bp2 - bm2) ** 2 + s * s - 8 * (bp2 + bm2) * s


def _branch(X, det, strict):
    """Return (nu_minus, nu_plus) from ``2 nu^2 = X -+ sqrt(X^2 - 4 det)``."""
    disc = X * X - 4 * det
    if disc < 0:
        if disc < -DISCRIMINANT_TOL * max(1.0, X * X):
            if strict:
                raise DiscriminantError(
                    f"X^2 - 4 det(sigma) = {disc:.3e} < 0 (X={X:.6g}, det={det:.6g})"
                )
            return math.nan, math.nan, True
        disc = 0.0
    root = math.sqrt(disc)
    plus_sq = 0.5 * (X + root)
    if X > 0 and plus_sq > 0:
        # product form avoids cancellation when det << X^2
        minus_sq = det / plus_sq
    else:
        minus_sq = 0.5 * (X - root)
    nu_minus = math.sqrt(minus_sq) if minus_sq >= 0 else math.nan
    nu_plus = math.sqrt(plus_sq) if plus_sq >= 0 else math.nan
    return nu_minus, nu_plus, False


def symplectic_spectrum(state: ThermalTwoModeState) -> SymplecticSpectrum:
    """Symplectic eigenvalues of the state and of its partial transpose.

    Raises
    ------
    DiscriminantError
        If the branch defining ``lambda_minus`` has a negative discriminant
        beyond tolerance.  The other branch may legitimately turn complex for
        unphysical parameters; that is flagged with ``complex_branch``.
    """
    n1, n2 = state.n1, state.n2
    bp, bm = max(state.m_pair, state.m_coh), min(state.m_pair, state.m_coh)
    det_a = (2 * n1 + 1) ** 2
    det_b = (2 * n2 + 1) ** 2
    det_c = 4.0 * (state.m_coh**2 - state.m_pair**2)
    det = det_sigma(n1, n2, bp, bm)

    gamma = det_a + det_b + 2 * det_c
    gamma_t = det_a + det_b - 2 * det_c
    delta = det_a + det_b + 2 * abs(det_c)
    delta_p = det_a + det_b - 2 * abs(det_c)

    lam, lam_plus, _ = _branch(delta, det, strict=True)
    lam_p, lam_p_plus, flagged = _branch(delta_p, det, strict=False)
    # Gamma and Gamma_tilde are Delta and Delta' in some order, set by sign(det C)
    if det_c >= 0:
        nu_m, nu_p, nut_m, nut_p = lam, lam_plus, lam_p, lam_p_plus
    else:
        nu_m, nu_p, nut_m, nut_p = lam_p, lam_p_plus, lam, lam_plus
    if math.isnan(lam) or math.isnan(lam_p):
        lambda_minus, lambda_prime = lam, lam_p
    else:
        lambda_minus, lambda_prime = min(lam, lam_p), max(lam, lam_p)
    return SymplecticSpectrum(
        nu_minus=nu_m, nu_plus=nu_p,
        nu_tilde_minus=nut_m, nu_tilde_plus=nut_p,
        lambda_minus=lambda_minus, lambda_prime_minus=lambda_prime,
        det_sigma=det, Delta=delta, Delta_prime=delta_p,
        Gamma=gamma, Gamma_tilde=gamma_t, complex_branch=flagged,
        # C has singular values 2(|coh| +- |pair|); Schur complement of A
        positive_definite=4 * (bp + bm) ** 2 < (2 * n1 + 1) * (2 * n2 + 1),
    )


def log_negativity(lambda_minus: float) -> float:
    if not (lambda_minus > 0.0):
        raise DomainError(f"lambda_minus must be positive, got {lambda_minus!r}")
    return max(-math.log2(lambda_minus), 0.0)


def classify_spectrum(spectrum: SymplecticSpectrum, eps: float = EPS) -> StateClass:
    # NaN compares False, so a complex or imaginary branch reads as unphysical
    if not spectrum.positive_definite or not spectrum.lambda_prime_minus >= 1.0 - eps:
        return StateClass.UNPHYSICAL
    if spectrum.lambda_minus >= 1.0 - eps:
        return StateClass.SEPARABLE
    return StateClass.ENTANGLED


def classify(state: ThermalTwoModeState, eps: float = EPS) -> StateClass:
    """Separable, entangled, or unphysical under both moment assignments."""
    return classify_spectrum(symplectic_spectrum(state), eps)


def _check_eta(eta):
    if not (0.0 < eta <= 1.0):
        raise DomainError(f"detection efficiency must lie in (0, 1], got {eta!r}")


def apply_loss(state: ThermalTwoModeState, eta: float) -> ThermalTwoModeState:
    """Pure-loss channel of transmission ``eta`` on both modes."""
    _check_eta(eta)
    return ThermalTwoModeState(eta * state.n1, eta * state.n2,
                               eta * state.m_pair, eta * state.m_coh)


def inverse_loss(state: ThermalTwoModeState, eta: float) -> ThermalTwoModeState:
    """Undo detector loss on measured parameters (divide everything by ``eta``)."""
    _check_eta(eta)
    return ThermalTwoModeState(state.n1 / eta, state.n2 / eta,
                               state.m_pair / eta, state.m_coh / eta)


# -- explicit-matrix routes, used for validation ---------------------------

def numeric_symplectic_eigenvalues(cov: CovarianceMatrix) -> np.ndarray:
    """Sorted symplectic eigenvalues from the eigenvalues of ``i Omega V``."""
    V = cov.quadrature()
    ev = np.linalg.eigvals(1j * OMEGA @ V)
    return np.sort(np.abs(ev))[::2]


def is_bona_fide(cov: CovarianceMatrix, tol: float = 1e-10) -> bool:
    """Uncertainty principle ``sigma + K >= 0`` checked by eigenvalues."""
    H = cov.entries + K_FORM
    H = 0.5 * (H + H.conj().T)
    return bool(np.linalg.eigvalsh(H).min() >= -tol)
