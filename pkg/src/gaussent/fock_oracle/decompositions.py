"""Williamson and Bloch-Messiah decompositions in the ladder-operator basis.

A Gaussian unitary acts in the Heisenberg picture as ``r -> T r`` on
``r = (a1, a1^dag, a2, a2^dag)``; ``T`` preserves ``K = diag(1,-1,1,-1)``
(``T K T^dag = K``) and transports covariances as ``sigma -> T sigma T^dag``.
Rows for a_j carry the Bogoliubov blocks ``a_j -> sum_k U_jk a_k + V_jk a_k^dag``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NotBonaFide, NumericalError
from ..gaussian_core import K_FORM, CovarianceMatrix

SYMPLECTIC_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-8
BONA_FIDE_TOL = 1e-6


def _partner(t):
    """Column of a^dag paired with the a column ``t``."""
    return np.conj(t[[1, 0, 3, 2]])


def bogoliubov(U, V):
    """4x4 Heisenberg matrix from the 2x2 blocks ``a -> U a + V a^dag``."""
    T = np.zeros((4, 4), dtype=complex)
    for j in range(2):
        for k in range(2):
            T[2 * j, 2 * k] = U[j, k]
            T[2 * j, 2 * k + 1] = V[j, k]
            T[2 * j + 1, 2 * k] = np.conj(V[j, k])
            T[2 * j + 1, 2 * k + 1] = np.conj(U[j, k])
    return T


def blocks(T):
    """Inverse of :func:`bogoliubov`."""
    T = np.asarray(T)
    return T[0::2, 0::2].copy(), T[0::2, 1::2].copy()


def symplectic_residual(T) -> float:
    return float(np.max(np.abs(T @ K_FORM @ T.conj().T - K_FORM)))


def williamson(cov: CovarianceMatrix):
    """Symplectic diagonalisation ``sigma = T diag(nu1, nu1, nu2, nu2) T^dag``.

    The eigenvectors of ``sigma K`` are obtained from the Hermitian matrix
    ``sigma^1/2 K sigma^1/2``, which keeps degenerate eigenspaces orthonormal.

    Returns
    -------
    nu1, nu2 : float
        Symplectic eigenvalues, ``nu1 <= nu2``.
    T : ndarray
        Heisenberg matrix of the Gaussian unitary mapping the thermal product
        onto the state.
    """
    sigma = cov.entries
    if not cov.is_hermitian(1e-10):
        raise NotBonaFide("covariance matrix is not Hermitian")
    evals, evecs = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    if evals.min() <= 0:
        raise NotBonaFide(f"covariance matrix is not positive definite (min eig {evals.min():.3e})")
    root = (evecs * np.sqrt(evals)) @ evecs.conj().T
    mu, w = np.linalg.eigh(root @ K_FORM @ root)
    # ascending: two negative (-nu) then two positive (+nu) eigenvalues
    nus = mu[2:]
    if nus.min() < 1.0 - BONA_FIDE_TOL:
        raise NotBonaFide(f"symplectic eigenvalue {nus.min():.9f} < 1")
    cols = []
    for nu, vec in zip(nus, w[:, 2:].T):
        t = root @ vec / math.sqrt(nu)
        cols += [t, _partner(t)]
    T = np.column_stack(cols)
    D = np.diag([nus[0], nus[0], nus[1], nus[1]])
    if symplectic_residual(T) > SYMPLECTIC_TOL:
        raise NumericalError(f"Williamson matrix not symplectic: {symplectic_residual(T):.2e}")
    err = np.max(np.abs(T @ D @ T.conj().T - sigma))
    if err > RECONSTRUCTION_TOL * max(1.0, np.max(np.abs(sigma))):
        raise NumericalError(f"Williamson reconstruction error {err:.2e}")
    return float(nus[0]), float(nus[1]), T


def takagi(A, tol=1e-13):
    """Autonne-Takagi factorisation ``A = Q diag(d) Q^T`` of a complex symmetric matrix.

    Uses the real symmetric embedding ``[[Re A, Im A], [Im A, -Re A]]`` whose
    eigenvectors ``(x, y)`` for ``d >= 0`` give the columns ``x + i y``.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    big = np.block([[A.real, A.imag], [A.imag, -A.real]])
    vals, vecs = np.linalg.eigh(big)
    vals, vecs = vals[::-1][:n], vecs[:, ::-1][:, :n]
    Q = vecs[:n] + 1j * vecs[n:]
    keep = vals > tol * max(1.0, vals.max(initial=0.0))
    Q = Q[:, keep]
    d = vals[keep]
    if Q.shape[1] < n:
        # zero Takagi values: complete with any orthonormal basis of the complement
        proj = np.eye(n, dtype=complex) - Q @ Q.conj().T
        u, _, _ = np.linalg.svd(proj)
        extra = u[:, : n - Q.shape[1]]
        Q = np.column_stack([Q, extra])
        d = np.concatenate([d, np.zeros(n - len(d))])
    return np.clip(d, 0.0, None), Q


@dataclass(frozen=True)
class PassiveStage:
    """Two-mode passive unitary ``a -> W a`` written as phases and a beamsplitter.

    ``W = diag(e^{i phase_out}) B(theta) diag(e^{i phase_in})`` with the real
    rotation ``B(theta) = [[cos, -sin], [sin, cos]]``.
    """

    unitary: np.ndarray
    theta: float
    phase_in: tuple
    phase_out: tuple

    @classmethod
    def from_unitary(cls, W, tol=1e-12):
        W = np.asarray(W, dtype=complex)
        c, s = abs(W[0, 0]), abs(W[0, 1])
        theta = math.atan2(s, c)
        if s > tol:
            phi1 = np.angle(-W[0, 1])
            psi1 = np.angle(W[0, 0]) - phi1 if c > tol else 0.0
        else:
            phi1, psi1 = np.angle(W[0, 0]), 0.0
        phi2 = np.angle(W[1, 1]) if c > tol else np.angle(W[1, 0]) - psi1
        stage = cls(W, theta, (float(psi1), 0.0), (float(phi1), float(phi2)))
        err = np.max(np.abs(stage.compose() - W))
        if err > 1e-9:
            raise NumericalError(f"passive decomposition residual {err:.2e}")
        return stage

    def compose(self):
        c, s = math.cos(self.theta), math.sin(self.theta)
        B = np.array([[c, -s], [s, c]])
        return np.diag(np.exp(1j * np.array(self.phase_out))) @ B @ np.diag(
            np.exp(1j * np.array(self.phase_in)))

    def heisenberg(self):
        return bogoliubov(self.unitary, np.zeros((2, 2)))


@dataclass(frozen=True)
class GaussianCircuit:
    """Thermal inputs -> passive -> single-mode squeezers -> passive."""

    thermal: tuple
    passive_in: PassiveStage
    squeezing: tuple
    passive_out: PassiveStage

    @property
    def nus(self):
        return tuple(2 * n + 1 for n in self.thermal)

    def squeeze_heisenberg(self):
        ch = np.diag(np.cosh(self.squeezing))
        sh = np.diag(np.sinh(self.squeezing))
        return bogoliubov(ch, -sh)

    def heisenberg(self):
        return self.passive_out.heisenberg() @ self.squeeze_heisenberg() @ self.passive_in.heisenberg()

    def covariance(self) -> np.ndarray:
        nu1, nu2 = self.nus
        T = self.heisenberg()
        return T @ np.diag([nu1, nu1, nu2, nu2]) @ T.conj().T


def bloch_messiah(T, tol=RECONSTRUCTION_TOL):
    """Passive-squeeze-passive factorisation of a Heisenberg matrix.

    With ``U = W1 cosh(R) W2^dag`` and ``V = -W1 sinh(R) W2^T`` the matrix
    ``-U^-1 V = W2 tanh(R) W2^T`` is complex symmetric, so a Takagi
    factorisation yields ``W2`` and the squeezing; ``W1`` follows from ``U``.

    Returns
    -------
    (PassiveStage, squeezing, PassiveStage)
        Stages in order of application: ``W2^dag`` first, ``W1`` last.
    """
    T = np.asarray(T, dtype=complex)
    if symplectic_residual(T) > tol:
        raise NumericalError(f"input is not symplectic: residual {symplectic_residual(T):.2e}")
    U, V = blocks(T)
    Y = -np.linalg.solve(U, V)
    Y = 0.5 * (Y + Y.T)
    t, W2 = takagi(Y)
    if t.max(initial=0.0) >= 1.0:
        raise NumericalError("squeezing parameter diverges")
    r = np.arctanh(t)
    W1 = U @ W2 @ np.diag(1.0 / np.cosh(r))
    first = PassiveStage.from_unitary(W2.conj().T)
    last = PassiveStage.from_unitary(W1)
    circuit = GaussianCircuit((0.0, 0.0), first, tuple(float(x) for x in r), last)
    err = np.max(np.abs(circuit.heisenberg() - T))
    if err > tol * max(1.0, np.max(np.abs(T))):
        raise NumericalError(f"Bloch-Messiah residual {err:.2e}")
    return first, tuple(float(x) for x in r), last


def circuit_for(cov: CovarianceMatrix) -> GaussianCircuit:
    """Full synthesis recipe for a covariance matrix."""
    nu1, nu2, T = williamson(cov)
    first, r, last = bloch_messiah(T)
    thermal = (max((nu1 - 1) / 2, 0.0), max((nu2 - 1) / 2, 0.0))
    circuit = GaussianCircuit(thermal, first, r, last)
    err = np.max(np.abs(circuit.covariance() - cov.entries))
    if err > RECONSTRUCTION_TOL * max(1.0, np.max(np.abs(cov.entries))):
        raise NumericalError(f"circuit reproduces covariance only to {err:.2e}")
    return circuit
