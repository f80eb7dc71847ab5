"""Fock-space action of phase shifters, beamsplitters and single-mode squeezers.

States are carried as a stack of unnormalised column vectors ``K[r, m1, m2]``
with ``rho = sum_r |K_r><K_r|``; a pure state has a single column.  Gates act
on every column.  Amplitude pushed beyond the box is dropped, and the caller
reads the loss off the squared norm.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

_CACHE_LIMIT = 160


def _antisymmetric_exp_factors(offdiag):
    """``exp(J) = E diag(exp(-i lam)) E^dag`` for real antisymmetric tridiagonal ``J``.

    ``offdiag[k-1] = J[k-1, k] = -J[k, k-1]``.  The Hermitian ``i J`` becomes real
    symmetric (off-diagonal ``-offdiag``) after conjugation with ``diag(i^k)``.
    """
    n = len(offdiag) + 1
    if n == 1:
        return np.zeros(1), np.ones((1, 1), dtype=complex)
    lam, W = eigh_tridiagonal(np.zeros(n), -np.asarray(offdiag, dtype=float),
                              lapack_driver="stemr")
    E = (1j ** (np.arange(n) % 4))[:, None] * W
    return lam, E


@lru_cache(maxsize=_CACHE_LIMIT + 1)
def _beamsplitter_block(total):
    k = np.arange(1, total + 1)
    return _antisymmetric_exp_factors(np.sqrt(k * (total - k + 1.0)))


def _bs_factors(total):
    if total <= _CACHE_LIMIT:
        return _beamsplitter_block(total)
    k = np.arange(1, total + 1)
    return _antisymmetric_exp_factors(np.sqrt(k * (total - k + 1.0)))


def apply_phases(K, phi1, phi2):
    """``exp(i phi1 n1 + i phi2 n2)``, i.e. ``a_j -> e^{i phi_j} a_j``."""
    if phi1 == 0.0 and phi2 == 0.0:
        return K
    m = np.arange(K.shape[1])
    return K * np.exp(1j * phi1 * m)[None, :, None] * np.exp(1j * phi2 * m)[None, None, :]


def apply_beamsplitter(K, theta):
    """``exp(theta (a1 a2^dag - a1^dag a2))``: ``a1 -> c a1 - s a2``, ``a2 -> s a1 + c a2``.

    The generator conserves the total photon number, so each anti-diagonal
    ``m1 + m2 = T`` is rotated independently with an exactly unitary block.
    """
    if theta == 0.0:
        return K
    dim = K.shape[1]
    out = np.zeros_like(K)
    for total in range(2 * dim - 1):
        ks = np.arange(max(0, total - dim + 1), min(total, dim - 1) + 1)
        x = K[:, ks, total - ks]
        if not np.any(x):
            continue
        lam, E = _bs_factors(total)
        rows = E[ks]
        z = (x @ rows.conj()) * np.exp(-1j * theta * lam)
        out[:, ks, total - ks] = z @ rows.T
    return out


def squeezer_matrix(r, dim, pad=None):
    """Top-left ``dim x dim`` block of ``exp((r/2)(a^2 - a^dag^2))``.

    The generator is exponentiated in a padded space so that reflections from
    the artificial edge do not reach the returned block; ``a -> cosh r a - sinh r a^dag``.
    """
    if r == 0.0:
        return np.eye(dim, dtype=complex)
    if pad is None:
        q = math.tanh(abs(r))
        pad = int(math.ceil(80.0 / max(-math.log(q), 1e-3))) + 20
    size = dim + pad
    S = np.zeros((dim, dim), dtype=complex)
    for parity in (0, 1):
        levels = np.arange(parity, size, 2)
        upper = levels[1:]
        off = 0.5 * r * np.sqrt(upper * (upper - 1.0))
        lam, E = _antisymmetric_exp_factors(off)
        inside = levels < dim
        rows = E[inside]
        block = (rows * np.exp(-1j * lam)) @ rows.conj().T
        idx = levels[inside]
        S[np.ix_(idx, idx)] = block
    return S


def apply_squeezer(K, r, mode):
    if r == 0.0:
        return K
    S = squeezer_matrix(r, K.shape[1])
    if mode == 0:
        return np.matmul(S, K)
    return np.matmul(K, S.T)
