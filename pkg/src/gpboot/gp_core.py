"""Spectral decomposition of covariance matrices and truncated
Karhunen-Loeve sampling of the Gaussian proxy process.

A covariance function restricted to a finite index net is carried around
as a plain symmetric ``(dim, dim)`` ndarray; :func:`check_cov_matrix`
enforces the symmetry / PSD tolerances.  The integral operator on the
net uses counting measure, so its eigenproblem is the matrix
eigenproblem.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import EmptyNet, NotPSD, NotSymmetric, RankExceeded

SYM_TOL = 1e-12
PSD_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-12


def _as_square(C):
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("covariance matrix has non-finite entries")
    return C


def symmetry_violation(C):
    """Largest relative asymmetry ``|C_ij - C_ji| / (1 + |C_ij|)``."""
    return float(np.max(np.abs(C - C.T) / (1.0 + np.abs(C))))


def check_cov_matrix(C):
    """Validate symmetry and PSD-ness; returns the symmetrized float array."""
    C = _as_square(C)
    if symmetry_violation(C) > SYM_TOL:
        raise NotSymmetric(f"asymmetry {symmetry_violation(C):.3g} exceeds {SYM_TOL}")
    C = 0.5 * (C + C.T)
    ev = linalg.eigvalsh(C)
    if ev[0] < -PSD_TOL * (1.0 + max(ev[-1], 0.0)):
        raise NotPSD(f"smallest eigenvalue {ev[0]:.3g}")
    return C


@dataclass(frozen=True)
class KLBasis:
    """Eigenpairs of a covariance matrix, eigenvalues nonincreasing.

    ``eigenvectors`` has shape ``(dim, r)``; column ``k`` pairs with
    ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    dim: int

    @property
    def rank(self):
        return len(self.eigenvalues)

    def reconstruct(self, m=None):
        m = self.rank if m is None else m
        V = self.eigenvectors[:, :m]
        return (V * self.eigenvalues[:m]) @ V.T


@dataclass(frozen=True)
class GaussianDraw:
    """One realisation of the truncated KL process on the net."""

    values: np.ndarray
    coefficients: np.ndarray


def eigendecompose_psd(C, rank_tol=DEFAULT_RANK_TOL):
    """Eigenpairs of ``C`` with eigenvalue above ``rank_tol * lambda_1``.

    Eigenvalues that are negative within the PSD tolerance are clamped to
    zero (and hence dropped).  The zero matrix yields an empty basis.
    Eigenvector signs are normalized, so rescaling ``C`` leaves them fixed.
    """
    C = check_cov_matrix(C)
    dim = C.shape[0]
    w, V = linalg.eigh(C)
    w = w[::-1]
    V = V[:, ::-1]
    w = np.clip(w, 0.0, None)
    top = w[0]
    if top <= 0.0:
        return KLBasis(np.zeros(0), np.zeros((dim, 0)), dim)
    keep = w > rank_tol * top
    V = V[:, keep]
    # fix the sign so that each eigenvector's largest-magnitude entry is positive
    lead = np.argmax(np.abs(V), axis=0)
    V = V * np.where(V[lead, np.arange(V.shape[1])] < 0, -1.0, 1.0)
    return KLBasis(w[keep].copy(), np.ascontiguousarray(V), dim)


def _check_m(basis, m):
    if m < 1 and basis.rank > 0:
        raise RankExceeded(f"truncation level must be >= 1, got {m}")
    if m > basis.rank:
        raise RankExceeded(f"m={m} exceeds the {basis.rank} available eigenpairs")


def truncated_cov(basis, m):
    """Best rank-``m`` approximation ``sum_{k<=m} lambda_k v_k v_k^T``."""
    _check_m(basis, m)
    return basis.reconstruct(m)


def truncation_error(basis, m):
    """Operator norm of full minus rank-``m`` reconstruction, i.e. ``lambda_{m+1}``."""
    _check_m(basis, m)
    if m >= basis.rank:
        return 0.0
    return float(basis.eigenvalues[m])


def kl_sample(basis, m, rng):
    """One draw of ``sum_{k<=m} xi_k sqrt(lambda_k) phi_k`` with ``xi ~ N(0, I_m)``.

    ``rng`` is anything with a ``standard_normal(size)`` method
    (:class:`gpboot.rng.CounterStream`, ``numpy.random.Generator``).
    """
    if basis.rank == 0:
        return GaussianDraw(np.zeros(basis.dim), np.zeros(0))
    _check_m(basis, m)
    xi = np.asarray(rng.standard_normal(m), dtype=float).reshape(m)
    values = basis.eigenvectors[:, :m] @ (xi * np.sqrt(basis.eigenvalues[:m]))
    return GaussianDraw(values, xi)


def kl_values(basis, m, xi):
    """Process values for a batch of coefficient rows ``xi`` of shape ``(B, m)``."""
    if basis.rank == 0:
        return np.zeros((xi.shape[0], basis.dim))
    _check_m(basis, m)
    loadings = basis.eigenvectors[:, :m] * np.sqrt(basis.eigenvalues[:m])
    return xi @ loadings.T


def sup_abs(draw):
    """``max_f |Z(f)|`` of a draw (accepts a :class:`GaussianDraw` or an array)."""
    values = draw.values if isinstance(draw, GaussianDraw) else np.asarray(draw)
    if values.size == 0:
        raise EmptyNet("cannot take a supremum over an empty net")
    return float(np.max(np.abs(values)))
