"""Truncated Fock-space states built from a covariance matrix, and their statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from ..errors import CutoffTooSmall, DomainError, NumericalError
from ..gaussian_core import TO_QUADRATURE, ThermalTwoModeState, build_covariance, symplectic_spectrum
from .decompositions import GaussianCircuit, circuit_for
from .gates import apply_beamsplitter, apply_phases, apply_squeezer

DEFAULT_TAIL_BOUND = 1e-10
MIXED_CUTOFF_CAP = 30
PURE_CUTOFF_CAP = 200
DENSE_LIMIT = 1600
PT_ZERO = 1e-10
#: round-off in the trace of a synthesised state; tail masses below it are noise
TRACE_NOISE = 1e-12
PURE_TOL = 1e-12


@dataclass(frozen=True)
class FockDensityMatrix:
    """Two-mode state truncated to ``m1, m2 <= cutoff``.

    ``components[r]`` are unnormalised vectors with ``rho = sum_r |K_r><K_r|``.
    ``tail_mass = 1 - tr(rho)``; ``box_leak`` is the norm lost while the
    synthesis circuit ran in its working box.
    """

    components: np.ndarray
    cutoff: int
    tail_mass: float
    box_leak: float = 0.0
    circuit: GaussianCircuit | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self):
        return self.cutoff + 1

    @property
    def is_pure(self) -> bool:
        return self.components.shape[0] == 1

    @property
    def trace(self) -> float:
        return float(np.sum(np.abs(self.components) ** 2))

    @property
    def matrix(self) -> np.ndarray:
        """Dense ``rho`` indexed by ``m1 * dim + m2``."""
        d2 = self.dim**2
        if d2 > 4 * DENSE_LIMIT:
            raise DomainError(f"dense matrix of size {d2} requested; use components")
        flat = self.components.reshape(self.components.shape[0], d2)
        return flat.T @ flat.conj()


@dataclass(frozen=True)
class JointNumberDistribution:
    probs: np.ndarray
    cutoff: int
    deficit: float

    def normalized(self) -> np.ndarray:
        return self.probs / self.probs.sum()


# -- cutoff selection --------------------------------------------------------

def _geometric_tail_cutoff(n, bound):
    """Smallest N with ``(n/(n+1))^(N+1) < bound`` (thermal marginal tail)."""
    if n <= 0:
        return 0
    x = n / (n + 1.0)
    return max(int(math.ceil(math.log(bound) / math.log(x))) - 1, 0)


def choose_cutoff(state: ThermalTwoModeState, tail_bound=DEFAULT_TAIL_BOUND,
                  pure: bool | None = None) -> int:
    """Cutoff whose predicted tail mass (sum of the marginal tails) is below the bound.

    Raises
    ------
    CutoffTooSmall
        The required cutoff exceeds the cap (30 for mixed states, 200 for pure).
    """
    if pure is None:
        pure = is_pure_state(state)
    need = max(_geometric_tail_cutoff(state.n1, 0.5 * tail_bound),
               _geometric_tail_cutoff(state.n2, 0.5 * tail_bound))
    cap = PURE_CUTOFF_CAP if pure else MIXED_CUTOFF_CAP
    if need > cap:
        raise CutoffTooSmall(
            f"tail bound {tail_bound:g} needs cutoff {need}, above the cap of {cap}")
    return need


def is_pure_state(state: ThermalTwoModeState, tol=1e-9) -> bool:
    """Pure iff both symplectic eigenvalues are one, i.e. det(sigma) = 1."""
    spec = symplectic_spectrum(state)
    return abs(spec.det_sigma - 1.0) <= tol * max(1.0, spec.Delta)


def _stage_decay(circuit: GaussianCircuit):
    """Largest per-photon geometric decay rate over the stages of the circuit."""
    nu1, nu2 = circuit.nus
    sigma = np.diag([nu1, nu1, nu2, nu2]).astype(complex)
    stages = [np.eye(4), circuit.passive_in.heisenberg(), circuit.squeeze_heisenberg(),
              circuit.passive_out.heisenberg()]
    worst = 0.0
    for T in stages:
        sigma = T @ sigma @ T.conj().T
        V = (TO_QUADRATURE @ sigma @ TO_QUADRATURE.conj().T).real
        for j in (0, 2):
            lam = np.linalg.eigvalsh(V[j:j + 2, j:j + 2]).max()
            worst = max(worst, (lam - 1.0) / (lam + 1.0))
    return worst


def box_leak_target(tail_bound: float) -> float:
    """Norm allowed to leave the working box: well below the requested tail."""
    return min(max(tail_bound * 1e-6, 1e-20), 1e-14)


def working_box(circuit: GaussianCircuit, cutoff: int, leak: float = 1e-16) -> int:
    q = _stage_decay(circuit)
    if q <= 1e-12:
        return cutoff
    need = int(math.ceil(math.log(leak) / math.log(q))) + 10
    return max(cutoff, need)


def _thermal_columns(nbar1, nbar2, dim, floor):
    def weights(n):
        if n <= PURE_TOL:
            return np.array([1.0])
        x = n / (n + 1.0)
        kmax = min(dim - 1, int(math.ceil(math.log(floor) / math.log(x))))
        return (1 - x) * x ** np.arange(kmax + 1)

    p, q = weights(nbar1), weights(nbar2)
    w = np.outer(p, q)
    keep = np.argwhere(w >= floor)
    K = np.zeros((len(keep), dim, dim), dtype=complex)
    K[np.arange(len(keep)), keep[:, 0], keep[:, 1]] = np.sqrt(w[keep[:, 0], keep[:, 1]])
    return K


def _apply_passive(K, stage):
    K = apply_phases(K, *stage.phase_in)
    K = apply_beamsplitter(K, stage.theta)
    return apply_phases(K, *stage.phase_out)


def synthesize_state(target: ThermalTwoModeState, phases=(0.0, 0.0), cutoff: int | None = None,
                     tail_bound: float = DEFAULT_TAIL_BOUND) -> FockDensityMatrix:
    """Fock-space density matrix of the Gaussian state with the given parameters.

    The covariance is decomposed into thermal inputs, a passive stage, two
    single-mode squeezers and a second passive stage, and each gate is applied
    exactly in a working box larger than the requested cutoff.

    Parameters
    ----------
    phases : (float, float)
        Phases of the pairing moment and of the coherence.
    cutoff : int, optional
        Photon-number cutoff per mode; chosen from ``tail_bound`` when omitted.

    Raises
    ------
    NotBonaFide
        The parameters do not describe a physical state.
    CutoffTooSmall
        The achieved tail mass exceeds ``tail_bound``.
    """
    cov = build_covariance(target, *phases)
    circuit = circuit_for(cov)
    pure = max(circuit.thermal) <= PURE_TOL
    if cutoff is None:
        cutoff = choose_cutoff(target, tail_bound, pure=pure)
    if cutoff < 0:
        raise DomainError("cutoff must be non-negative")
    leak = box_leak_target(tail_bound)
    dim = working_box(circuit, cutoff, leak) + 1

    K = _thermal_columns(*circuit.thermal, dim, leak)
    start = float(np.sum(np.abs(K) ** 2))
    K = _apply_passive(K, circuit.passive_in)
    for mode, r in enumerate(circuit.squeezing):
        K = apply_squeezer(K, r, mode)
    K = _apply_passive(K, circuit.passive_out)
    lost = max(start - float(np.sum(np.abs(K) ** 2)), 0.0)

    K = np.ascontiguousarray(K[:, :cutoff + 1, :cutoff + 1])
    trace = float(np.sum(np.abs(K) ** 2))
    if trace > 1.0 + 1e-9:
        raise NumericalError(f"trace {trace} exceeds one")
    tail = max(1.0 - trace, 0.0)
    if tail > tail_bound + TRACE_NOISE:
        raise CutoffTooSmall(f"tail mass {tail:.3e} at cutoff {cutoff} exceeds {tail_bound:g}")
    return FockDensityMatrix(K, cutoff, tail, lost, circuit)


# -- statistics ----------------------------------------------------------------

def joint_distribution(rho: FockDensityMatrix) -> JointNumberDistribution:
    probs = np.sum(np.abs(rho.components) ** 2, axis=0)
    return JointNumberDistribution(probs, rho.cutoff, max(1.0 - float(probs.sum()), 0.0))


def field_moments(rho: FockDensityMatrix) -> dict:
    """``n1, n2, <a1 a2>, <a1 a2^dag>, <a1^2>, <a2^2>`` of the renormalised truncated state."""
    K = rho.components
    tr = rho.trace
    m = np.arange(rho.dim, dtype=float)
    s = np.sqrt(m[1:])
    P = np.sum(np.abs(K) ** 2, axis=0)

    def expect(shifted, left):
        return complex(np.sum(left.conj() * shifted)) / tr

    # (a1 a2 K)[m1, m2] = sqrt(m1+1) sqrt(m2+1) K[m1+1, m2+1]
    pair = expect(K[:, 1:, 1:] * s[None, :, None] * s[None, None, :], K[:, :-1, :-1])
    # (a1 a2^dag K)[m1, m2] = sqrt(m1+1) sqrt(m2) K[m1+1, m2-1]
    coh = expect(K[:, 1:, :-1] * s[None, :, None] * s[None, None, :], K[:, :-1, 1:])
    s2 = np.sqrt(m[1:-1] * m[2:]) if rho.dim > 2 else np.zeros(0)
    sq1 = expect(K[:, 2:, :] * s2[None, :, None], K[:, :-2, :])
    sq2 = expect(K[:, :, 2:] * s2[None, None, :], K[:, :, :-2])
    return {
        "n1": float(P.sum(axis=1) @ m) / tr,
        "n2": float(P.sum(axis=0) @ m) / tr,
        "pair": pair,
        "coh": coh,
        "a1_sq": sq1,
        "a2_sq": sq2,
    }


def number_moments(dist: JointNumberDistribution):
    """``(g2_12, g4_12, g2_1, g2_2)`` of the renormalised distribution.

    Normal ordering enters through factorial moments, e.g.
    ``g4_12 = <n1 (n1 - 1) n2 (n2 - 1)> / (<n1>^2 <n2>^2)``.
    """
    P = dist.normalized()
    m = np.arange(P.shape[0], dtype=float)
    p1, p2 = P.sum(axis=1), P.sum(axis=0)
    n1, n2 = p1 @ m, p2 @ m
    if not (n1 > 0 and n2 > 0):
        raise DomainError("both mean counts must be positive")
    n12 = m @ P @ m
    fact = m * (m - 1)
    n1n2_sq = fact @ P @ fact
    return (n12 / (n1 * n2), n1n2_sq / (n1 * n2) ** 2,
            (p1 @ (m * (m - 1))) / n1**2, (p2 @ (m * (m - 1))) / n2**2)


@dataclass(frozen=True)
class PPTResult:
    min_eigenvalue: float
    negativity_sum: float
    log_negativity: float
    method: str


def ppt_negativity(rho: FockDensityMatrix, method: str = "auto") -> PPTResult:
    """Eigenvalues of the partial transpose of the renormalised truncated state.

    ``method="dense"`` diagonalises ``rho^T2`` explicitly; ``"schmidt"`` (pure
    states only) uses the Schmidt coefficients, whose pairwise products
    ``+-s_i s_j`` are exactly the partial-transpose spectrum.  ``"auto"``
    picks dense when the matrix is small enough.
    """
    if method == "auto":
        method = "dense" if rho.dim**2 <= DENSE_LIMIT or not rho.is_pure else "schmidt"
    tr = rho.trace
    if method == "schmidt":
        if not rho.is_pure:
            raise DomainError("Schmidt route needs a pure state")
        s = np.linalg.svd(rho.components[0] / math.sqrt(tr), compute_uv=False)
        s = s[s > 0]
        neg = 0.5 * (s.sum() ** 2 - (s**2).sum())
        lowest = -s[0] * s[1] if len(s) > 1 else s[0] ** 2
    elif method == "dense":
        d = rho.dim
        R = rho.matrix.reshape(d, d, d, d) / tr
        RT = R.transpose(0, 3, 2, 1).reshape(d * d, d * d)
        ev = np.linalg.eigvalsh(0.5 * (RT + RT.conj().T))
        ev = np.where((ev < 0) & (ev >= -PT_ZERO), 0.0, ev)
        neg = float(-ev[ev < 0].sum())
        lowest = float(ev.min())
    else:
        raise DomainError(f"unknown method {method!r}")
    neg = max(float(neg), 0.0)
    if lowest >= -PT_ZERO:
        lowest = max(float(lowest), 0.0)
    return PPTResult(float(lowest), neg, math.log2(2 * neg + 1), method)


def thin_distribution(dist: JointNumberDistribution, eta1: float, eta2: float | None = None
                      ) -> JointNumberDistribution:
    """Binomial thinning of each mode: detection efficiency ``eta``."""
    eta2 = eta1 if eta2 is None else eta2
    for eta in (eta1, eta2):
        if not (0.0 < eta <= 1.0):
            raise DomainError(f"efficiency must lie in (0, 1], got {eta!r}")
    m = np.arange(dist.probs.shape[0])
    B1 = binom.pmf(m[:, None], m[None, :], eta1)
    B2 = binom.pmf(m[:, None], m[None, :], eta2)
    probs = B1 @ dist.probs @ B2.T
    return JointNumberDistribution(probs, dist.cutoff, dist.deficit)
